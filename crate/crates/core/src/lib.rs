//! Confidence distributions for the coefficient of a first-order
//! autoregressive process, with the unit root `phi = 1` inside the
//! parameter space.
//!
//! The crate covers four routes to a confidence distribution `C(phi)`:
//!
//! * exact finite-sample distributions by Monte Carlo ([`mc`]),
//! * residual-bootstrap distributions for observed data ([`bootstrap`]),
//! * closed-form normal approximations and probit smoothing ([`analysis`]),
//! * likelihood-based (flat and spike prior) distributions and the implied
//!   prior diagnostics ([`bayes`]).
//!
//! Everything is deterministic in the user-supplied seed; parallel execution
//! never changes a result.

pub mod analysis;
pub mod ar1;
pub mod bayes;
pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod grid;
pub mod io;
pub mod mc;
pub mod normal;
pub mod stats;

mod exec;

pub use analysis::{
    asymptotic_cd_c1, asymptotic_cd_c2, asymptotic_density_c1, asymptotic_density_c2, cd_median,
    confidence_curve, extract_interval, fit_smoothed_density, log_asymptotic_density_c1,
    log_asymptotic_density_c2, log_density_distances, ConfidenceCurve, ConfidenceInterval,
    SmoothedDensityFit,
};
pub use ar1::{
    log_likelihood, mle_phi, mle_sigma2, quantity_a, residuals, simulate_ar1, Ar1Params, FitResult,
    LagStats, TimeSeries,
};
pub use bayes::{
    delta_method_sd, flat_prior_cd, g_func, h_func, implied_log_prior, integrated_likelihood,
    proposition1_check, quantity_b, spike_prior_cd, DensityModel, IntegratedLikelihood,
    LikelihoodProfile, Prop1Config, Prop1Density, Prop1Report, Sigma2Mode, SpikePriorCd,
};
pub use bootstrap::{bootstrap_cd, bootstrap_curve, make_plan, BootstrapPlan};
pub use error::{Error, Result};
pub use grid::PhiGrid;
pub use mc::{
    c_at_one, df_cdf, estimate_cd, simulate_df_distribution, simulate_near_unit_limit, CdSource,
    EmpiricalCd, LimitKind, LimitSample, McConfig,
};
