//! Bridge between confidence densities and Bayesian posteriors.
//!
//! The implied prior of a confidence density `c` is `c / L`. For the
//! stationary AR(1) its per-observation log tends to the constant
//! `(log(2 pi sigma2) + 1) / 2`, which makes a flat prior reproduce the
//! confidence density; allowing `phi = 1` requires an extra point mass at
//! the unit root. This module evaluates those ratios, runs the Monte Carlo
//! check of the limit, and builds flat-prior and spike-prior distributions
//! from the integrated likelihood.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analysis::{fit_smoothed_density, log_asymptotic_density_c2, SmoothedDensityFit};
use crate::ar1::{LagStats, TimeSeries};
use crate::error::{Error, Result};
use crate::exec::{default_parallelism, map_blocks};
use crate::grid::PhiGrid;
use crate::mc::{
    count_exceedances, derive_seed, fill_normals, replicate_rng, CdSource, EmpiricalCd,
};

/// How the innovation variance enters the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sigma2Mode {
    Known(f64),
    /// Profile likelihood: the MLE of `sigma2` is inserted.
    Estimated,
}

impl Sigma2Mode {
    pub fn resolve(&self, stats: &LagStats) -> Result<f64> {
        let s2 = match *self {
            Sigma2Mode::Known(v) => v,
            Sigma2Mode::Estimated => stats.sigma2_hat()?,
        };
        if s2 > 0.0 && s2.is_finite() {
            Ok(s2)
        } else {
            Err(Error::domain(format!("sigma2 must be positive, got {s2}")))
        }
    }
}

/// Confidence density used in an implied-prior ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityModel {
    /// `N(phi_obs, (1 - phi_obs^2) / n)`.
    ClosedFormC2,
    /// Probit-smoothed empirical density.
    Smoothed(SmoothedDensityFit),
}

impl DensityModel {
    pub fn log_density(&self, phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
        match self {
            DensityModel::ClosedFormC2 => log_asymptotic_density_c2(phi, phi_obs, n),
            DensityModel::Smoothed(fit) => Ok(fit.log_density(phi)),
        }
    }
}

fn stationary_phi_hat(stats: &LagStats) -> Result<f64> {
    let phi_hat = stats.phi_hat()?;
    if phi_hat.abs() >= 1.0 {
        return Err(Error::domain(format!("needs |phi_hat| < 1, got {phi_hat}")));
    }
    Ok(phi_hat)
}

/// `B = n sigma2 (phi - phi_obs)^2 / (1 - phi_obs^2) - y_n^2
///      - sum y_{t-1}^2 (1 - 2 phi_obs phi + phi^2)`.
pub fn quantity_b(series: &TimeSeries, phi: f64, sigma2: f64) -> Result<f64> {
    let stats = series.stats();
    let phi_hat = stationary_phi_hat(&stats)?;
    let n = stats.n as f64;
    Ok(
        n * sigma2 * (phi - phi_hat).powi(2) / (1.0 - phi_hat * phi_hat)
            - stats.last * stats.last
            - stats.sum_sq_lag * (1.0 - 2.0 * phi_hat * phi + phi * phi),
    )
}

/// `log(c_2 / L)` through `B`:
/// `log sqrt(n / (1 - phi_obs^2)) + ((n-1)/2) log(2 pi) + (n/2) log sigma2 - B / (2 sigma2)`.
pub fn log_c2_ratio_via_b(series: &TimeSeries, phi: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "sigma2 must be positive, got {sigma2}"
        )));
    }
    let stats = series.stats();
    let phi_hat = stationary_phi_hat(&stats)?;
    let n = stats.n as f64;
    let b = quantity_b(series, phi, sigma2)?;
    Ok(0.5 * (n / (1.0 - phi_hat * phi_hat)).ln()
        + 0.5 * (n - 1.0) * (2.0 * PI).ln()
        + 0.5 * n * sigma2.ln()
        - b / (2.0 * sigma2))
}

/// `log c(phi) - log L(phi, sigma2)`; divide by `n` for the per-observation
/// implied log prior.
pub fn implied_log_prior(
    series: &TimeSeries,
    phi: f64,
    sigma2: Sigma2Mode,
    density: &DensityModel,
) -> Result<f64> {
    let stats = series.stats();
    let s2 = sigma2.resolve(&stats)?;
    let phi_hat = stats.phi_hat()?;
    let log_c = density.log_density(phi, phi_hat, stats.n)?;
    Ok(log_c - stats.log_likelihood(phi, s2)?)
}

fn check_phi0(phi0: f64) -> Result<()> {
    if phi0.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("needs |phi0| < 1, got {phi0}")))
    }
}

fn fluctuation_numerator(phi: f64, phi0: f64) -> f64 {
    1.0 - phi0 - phi0 * phi0 + phi * (1.0 + phi0 * phi0) - phi * phi * phi0
}

/// Scale of the `n^{-1/2}` fluctuation of the implied log prior:
/// `(1 - phi0 - phi0^2 + phi (1 + phi0^2) - phi^2 phi0) / (1 - phi0^2)^{3/2}`.
pub fn h_func(phi: f64, phi0: f64) -> Result<f64> {
    check_phi0(phi0)?;
    Ok(fluctuation_numerator(phi, phi0) / (1.0 - phi0 * phi0).powf(1.5))
}

/// Large-sample standard deviation of `n^-1 log(c_2 / L)` at `phi` under
/// known variance, by the delta method. Both the coefficient estimate and
/// `n^-1 sum y_{t-1}^2` fluctuate at rate `n^{-1/2}`, with asymptotic
/// correlation `2 phi0 / sqrt(2 (1 + phi0^2))`.
pub fn delta_method_sd(phi: f64, phi0: f64, n: usize) -> Result<f64> {
    check_phi0(phi0)?;
    let q = 1.0 - phi0 * phi0;
    let d2 = (phi - phi0).powi(2);
    // Coefficients on the estimate error and on the relative error of the
    // lagged sum of squares.
    let a = -phi0 / q - d2 * phi0 / (q * q);
    let b = (d2 + q) / (2.0 * q);
    let var = a * a * q + b * b * 2.0 * (1.0 + phi0 * phi0) / q + 4.0 * a * b * phi0;
    Ok((var / n as f64).sqrt())
}

/// Same numerator as [`h_func`] over `(1 - phi0^2)^2`.
pub fn g_func(phi: f64, phi0: f64) -> Result<f64> {
    check_phi0(phi0)?;
    Ok(fluctuation_numerator(phi, phi0) / (1.0 - phi0 * phi0).powi(2))
}

/// Log-likelihood over a grid, with its maximum kept for rescaling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodProfile {
    pub grid: PhiGrid,
    pub log_lik: Vec<f64>,
    pub normalizer: f64,
}

impl LikelihoodProfile {
    pub fn new(series: &TimeSeries, grid: &PhiGrid, sigma2: f64) -> Result<Self> {
        let stats = series.stats();
        let log_lik = grid
            .points()
            .iter()
            .map(|&phi| stats.log_likelihood(phi, sigma2))
            .collect::<Result<Vec<_>>>()?;
        let normalizer = log_lik.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            grid: grid.clone(),
            log_lik,
            normalizer,
        })
    }

    /// `exp(log_lik - normalizer)`, maximum exactly 1.
    pub fn relative(&self) -> Vec<f64> {
        self.log_lik
            .iter()
            .map(|l| (l - self.normalizer).exp())
            .collect()
    }
}

/// Cumulative trapezoid integral of the rescaled likelihood, starting at 0
/// at the first grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratedLikelihood {
    pub profile: LikelihoodProfile,
    pub cumulative: Vec<f64>,
}

impl IntegratedLikelihood {
    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }
}

pub fn integrated_likelihood(
    series: &TimeSeries,
    grid: &PhiGrid,
    sigma2: f64,
) -> Result<IntegratedLikelihood> {
    let profile = LikelihoodProfile::new(series, grid, sigma2)?;
    let rel = profile.relative();
    let points = grid.points();
    let mut cumulative = Vec::with_capacity(rel.len());
    let mut acc = 0.0;
    cumulative.push(acc);
    for k in 1..rel.len() {
        acc += 0.5 * (points[k] - points[k - 1]) * (rel[k - 1] + rel[k]);
        cumulative.push(acc);
    }
    Ok(IntegratedLikelihood {
        profile,
        cumulative,
    })
}

/// Lower grid end used for likelihood integrals over `(-1, 1]`.
pub const FLAT_PRIOR_LOWER: f64 = -1.0 + 1e-6;

/// `C(phi) = L_1(phi) / L_1(phi_max)` with the profile likelihood (MLE of
/// `sigma2` inserted), i.e. the posterior distribution under a flat prior
/// on the grid range.
pub fn flat_prior_cd(series: &TimeSeries, grid: &PhiGrid) -> Result<EmpiricalCd> {
    let stats = series.stats();
    let phi_hat = stats.phi_hat()?;
    let sigma2 = Sigma2Mode::Estimated.resolve(&stats)?;
    let il = integrated_likelihood(series, grid, sigma2)?;
    let total = il.total();
    if !(total > 0.0) {
        return Err(Error::domain("integrated likelihood vanishes on the grid"));
    }
    let mut values: Vec<f64> = il.cumulative.iter().map(|c| (c / total).min(1.0)).collect();
    let last = values.len() - 1;
    values[last] = 1.0;
    EmpiricalCd::new(grid.clone(), values, phi_hat, CdSource::FlatPrior)
}

/// Flat prior on `(-1, 1)` plus a point mass `b` at `phi = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikePriorCd {
    pub cd: EmpiricalCd,
    pub b: f64,
}

/// `C(phi) = (1 - b) L_1(phi) / L_1(1)`; the value at the last grid point
/// is exactly `1 - b`, and the remaining mass `b` sits at the unit root.
pub fn spike_prior_cd(series: &TimeSeries, grid: &PhiGrid, b: f64) -> Result<SpikePriorCd> {
    if !(0.0..1.0).contains(&b) {
        return Err(Error::domain(format!(
            "spike height must be in [0, 1), got {b}"
        )));
    }
    let mut cd = flat_prior_cd(series, grid)?;
    for v in &mut cd.values {
        *v *= 1.0 - b;
    }
    let last = cd.values.len() - 1;
    cd.values[last] = 1.0 - b;
    cd.source = CdSource::SpikePrior;
    Ok(SpikePriorCd { cd, b })
}

/// Spike that makes the Bayesian distribution agree with a frequentist one
/// at the unit root: `b = 1 - C(1)`.
pub fn spike_from_cd(c_at_one: f64) -> f64 {
    (1.0 - c_at_one).clamp(0.0, 1.0)
}

/// Spike read off a confidence curve instead: `b = 1 - cc(1)`.
pub fn spike_from_curve(cc_at_one: f64) -> f64 {
    (1.0 - cc_at_one).clamp(0.0, 1.0)
}

/// Confidence density entering the implied-prior Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prop1Density {
    ClosedFormC2,
    /// Probit-smoothed simulated density: `inner_reps` replicates on a grid
    /// of `inner_intervals` steps spanning `phi_obs +- 5` standard errors.
    Smoothed {
        inner_reps: usize,
        inner_intervals: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Config {
    pub phi0: f64,
    pub sigma2: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub estimate_sigma2: bool,
    pub density: Prop1Density,
    /// Points where the implied log prior is evaluated.
    pub grid: PhiGrid,
    #[serde(skip)]
    pub max_parallel: usize,
}

impl Prop1Config {
    /// Defaults: closed-form density, known variance, grid
    /// `[phi0 - 0.2, min(phi0 + 0.2, 0.95)]` with 40 steps.
    pub fn new(phi0: f64, sigma2: f64, n: usize, reps: usize, seed: u64) -> Result<Self> {
        check_phi0(phi0)?;
        let lo = (phi0 - 0.2).max(-0.95);
        let hi = (phi0 + 0.2).min(0.95);
        Ok(Self {
            phi0,
            sigma2,
            n,
            reps,
            seed,
            estimate_sigma2: false,
            density: Prop1Density::ClosedFormC2,
            grid: PhiGrid::new(lo, hi, 40)?,
            max_parallel: default_parallelism(),
        })
    }
}

/// Replicate summary of `n^-1 log(c / L)` across the evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub grid: PhiGrid,
    pub mean_curve: Vec<f64>,
    pub sd_curve: Vec<f64>,
    /// Predicted fluctuation scale `n^{-1/2} |h(phi, phi0)|`.
    pub predicted_sd: Vec<f64>,
    /// [`delta_method_sd`] on the grid; `None` when the variance is
    /// estimated.
    pub delta_sd: Option<Vec<f64>>,
    /// `(log(2 pi sigma2) + 1) / 2 + log(n) / (2 n)`.
    pub expected_level: f64,
    /// Average of `mean_curve` over the grid.
    pub mean_level: f64,
    pub level_deviation: f64,
    /// `max - min` of `mean_curve`.
    pub spread: f64,
    pub used: usize,
    /// Replicates with `|phi_hat| >= 1` or a failed density fit.
    pub skipped: usize,
}

const INNER_SALT: u64 = 0x5EED_1A7E_0000_0001;

fn prop1_replicate(cfg: &Prop1Config, r: usize) -> Option<Vec<f64>> {
    let n = cfg.n;
    let mut rng = replicate_rng(cfg.seed, r as u64);
    let mut eps = vec![0.0; n];
    fill_normals(&mut rng, &mut eps);
    let sigma = cfg.sigma2.sqrt();
    let mut y = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &e in &eps {
        prev = cfg.phi0 * prev + sigma * e;
        y.push(prev);
    }
    let stats = LagStats::from_values(&y);
    let phi_hat = stats.phi_hat().ok()?;
    if phi_hat.abs() >= 1.0 {
        return None;
    }
    let s2 = if cfg.estimate_sigma2 {
        Sigma2Mode::Estimated
    } else {
        Sigma2Mode::Known(cfg.sigma2)
    }
    .resolve(&stats)
    .ok()?;
    let density = match cfg.density {
        Prop1Density::ClosedFormC2 => DensityModel::ClosedFormC2,
        Prop1Density::Smoothed {
            inner_reps,
            inner_intervals,
        } => {
            let se = ((1.0 - phi_hat * phi_hat).max(1.0 / n as f64) / n as f64).sqrt();
            let lo = (phi_hat - 5.0 * se).max(-0.999);
            let hi = (phi_hat + 5.0 * se).min(1.0);
            let grid = PhiGrid::new(lo, hi, inner_intervals.max(2)).ok()?;
            let inner_seed = derive_seed(cfg.seed ^ INNER_SALT, r as u64);
            let (hits, _) = count_exceedances(grid.points(), phi_hat, n, inner_seed, 0..inner_reps);
            let values = hits.iter().map(|&h| h as f64 / inner_reps as f64).collect();
            let cd = EmpiricalCd::new(grid, values, phi_hat, CdSource::Simulated).ok()?;
            let fit = fit_smoothed_density(&cd).ok()?;
            if fit.nonpositive_slope {
                return None;
            }
            DensityModel::Smoothed(fit)
        }
    };
    cfg.grid
        .points()
        .iter()
        .map(|&phi| {
            let log_c = density.log_density(phi, phi_hat, n).ok()?;
            let log_l = stats.log_likelihood(phi, s2).ok()?;
            Some((log_c - log_l) / n as f64)
        })
        .collect()
}

/// Monte Carlo check of the implied-prior limit: simulates `reps` series at
/// `phi0`, evaluates `n^-1 log(c / L)` on the grid for each, and summarizes
/// the replicate mean and standard deviation.
pub fn proposition1_check(cfg: &Prop1Config) -> Result<Prop1Report> {
    check_phi0(cfg.phi0)?;
    if !(cfg.sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "sigma2 must be positive, got {}",
            cfg.sigma2
        )));
    }
    if cfg.n < 2 || cfg.reps == 0 {
        return Err(Error::invalid("prop1 needs n >= 2 and reps >= 1"));
    }
    let blocks = map_blocks(cfg.reps, 8, cfg.max_parallel, |range| {
        range.map(|r| prop1_replicate(cfg, r)).collect::<Vec<_>>()
    });
    let curves: Vec<Vec<f64>> = blocks.into_iter().flatten().flatten().collect();
    let used = curves.len();
    let skipped = cfg.reps - used;
    if used < 2 {
        return Err(Error::domain("fewer than two usable replicates"));
    }
    let g = cfg.grid.len();
    let mut mean_curve = vec![0.0; g];
    for c in &curves {
        mean_curve.iter_mut().zip(c).for_each(|(m, v)| *m += v);
    }
    mean_curve.iter_mut().for_each(|m| *m /= used as f64);
    let mut sd_curve = vec![0.0; g];
    for c in &curves {
        sd_curve
            .iter_mut()
            .zip(c)
            .zip(&mean_curve)
            .for_each(|((s, v), m)| *s += (v - m).powi(2));
    }
    sd_curve
        .iter_mut()
        .for_each(|s| *s = (*s / (used - 1) as f64).sqrt());
    let nf = cfg.n as f64;
    let predicted_sd = cfg
        .grid
        .points()
        .iter()
        .map(|&phi| h_func(phi, cfg.phi0).map(|h| h.abs() / nf.sqrt()))
        .collect::<Result<Vec<_>>>()?;
    let delta_sd = if cfg.estimate_sigma2 {
        None
    } else {
        Some(
            cfg.grid
                .points()
                .iter()
                .map(|&phi| delta_method_sd(phi, cfg.phi0, cfg.n))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let expected_level = ((2.0 * PI * cfg.sigma2).ln() + 1.0) / 2.0 + nf.ln() / (2.0 * nf);
    let mean_level = mean_curve.iter().sum::<f64>() / g as f64;
    let max = mean_curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = mean_curve.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Prop1Report {
        grid: cfg.grid.clone(),
        mean_curve,
        sd_curve,
        predicted_sd,
        delta_sd,
        expected_level,
        mean_level,
        level_deviation: mean_level - expected_level,
        spread: max - min,
        used,
        skipped,
    })
}
