//! Monte Carlo engine: simulated confidence distributions on a grid and
//! samples from the unit-root and near-unit-root limit laws.
//!
//! Replicate `r` draws its innovations from ChaCha8 stream `r` of the
//! configured seed. The mapping is fixed, so a result depends only on
//! `(reps, n, seed)` and every grid point sees the same noise (common
//! random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{default_parallelism, map_blocks};
use crate::grid::PhiGrid;

const BLOCK: usize = 256;

/// Replicate count, per-replicate sample size, seed and a thread-count hint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    /// Upper bound on worker threads. Never affects results.
    #[serde(skip)]
    pub max_parallel: usize,
}

impl McConfig {
    pub fn new(reps: usize, n: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            reps,
            n,
            seed,
            max_parallel: default_parallelism(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_parallel(mut self, max_parallel: usize) -> Self {
        self.max_parallel = max_parallel.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Where a confidence distribution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdSource {
    Simulated,
    Bootstrap,
    AsymptoticC1,
    AsymptoticC2,
    FlatPrior,
    SpikePrior,
}

/// Confidence distribution values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCd {
    pub grid: PhiGrid,
    pub values: Vec<f64>,
    pub phi_obs: f64,
    pub source: CdSource,
    /// Replicates dropped because their estimator was undefined.
    pub discarded: u64,
}

impl EmpiricalCd {
    pub fn new(grid: PhiGrid, values: Vec<f64>, phi_obs: f64, source: CdSource) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("probability {v} outside [0, 1]")));
        }
        Ok(Self {
            grid,
            values,
            phi_obs,
            source,
            discarded: 0,
        })
    }

    /// Value at the last grid point (the unit root for the usual grids).
    pub fn at_upper_end(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Which limit law a [`LimitSample`] approximates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitKind {
    DickeyFuller,
    OrnsteinUhlenbeck { c: f64 },
}

/// Sorted draws of `n (phi_hat - phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSample {
    draws: Vec<f64>,
    pub kind: LimitKind,
    pub inner_n: usize,
}

impl LimitSample {
    /// Sorts `draws`; rejects an empty or non-finite sample.
    pub fn new(mut draws: Vec<f64>, kind: LimitKind, inner_n: usize) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::invalid("empty limit sample"));
        }
        if let Some(pos) = draws.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        draws.sort_by(f64::total_cmp);
        Ok(Self {
            draws,
            kind,
            inner_n,
        })
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Empirical `p`-quantile (lower order statistic).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let k = ((p * self.draws.len() as f64).ceil() as usize).clamp(1, self.draws.len());
        self.draws[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }
}

/// ChaCha8 stream `replicate` under `seed`.
pub(crate) fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// SplitMix64 finalizer, used to derive independent seeds for nested
/// simulations.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn fill_normals(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for e in out {
        *e = StandardNormal.sample(rng);
    }
}

/// Runs one AR(1) recursion per grid coefficient on shared innovations and
/// accumulates the MLE sums. The inner loop runs across the grid, so the
/// recursions advance in lockstep and vectorize.
#[derive(Debug, Clone)]
pub(crate) struct Lockstep {
    y: Vec<f64>,
    sum_sq_lag: Vec<f64>,
    sum_cross: Vec<f64>,
}

impl Lockstep {
    pub(crate) fn new(width: usize) -> Self {
        Self {
            y: vec![0.0; width],
            sum_sq_lag: vec![0.0; width],
            sum_cross: vec![0.0; width],
        }
    }

    /// Simulates `y_1 = eps_1`, `y_t = phi y_{t-1} + eps_t` for each `phi`.
    pub(crate) fn run(&mut self, phis: &[f64], eps: &[f64]) {
        self.y.iter_mut().for_each(|y| *y = eps[0]);
        self.sum_sq_lag.iter_mut().for_each(|s| *s = 0.0);
        self.sum_cross.iter_mut().for_each(|s| *s = 0.0);
        for &e in &eps[1..] {
            for (((y, sxx), sxy), &phi) in self
                .y
                .iter_mut()
                .zip(self.sum_sq_lag.iter_mut())
                .zip(self.sum_cross.iter_mut())
                .zip(phis)
            {
                let prev = *y;
                let next = phi * prev + e;
                *sxx += prev * prev;
                *sxy += prev * next;
                *y = next;
            }
        }
    }

    /// Same recursion with innovations `e_t(phi) = a_t - phi b_t`, the form
    /// taken by resampled bootstrap residuals.
    pub(crate) fn run_residual(&mut self, phis: &[f64], a: &[f64], b: &[f64]) {
        for ((y, &phi), s) in self.y.iter_mut().zip(phis).zip(self.sum_sq_lag.iter_mut()) {
            *y = a[0] - phi * b[0];
            *s = 0.0;
        }
        self.sum_cross.iter_mut().for_each(|s| *s = 0.0);
        for (&at, &bt) in a[1..].iter().zip(&b[1..]) {
            for (((y, sxx), sxy), &phi) in self
                .y
                .iter_mut()
                .zip(self.sum_sq_lag.iter_mut())
                .zip(self.sum_cross.iter_mut())
                .zip(phis)
            {
                let prev = *y;
                let next = phi * prev + (at - phi * bt);
                *sxx += prev * prev;
                *sxy += prev * next;
                *y = next;
            }
        }
    }

    /// Per-grid-point outcome: `None` for a degenerate path, otherwise
    /// whether `phi_hat >= phi_obs`.
    pub(crate) fn exceeds(&self, phi_obs: f64) -> impl Iterator<Item = Option<bool>> + '_ {
        self.sum_sq_lag
            .iter()
            .zip(&self.sum_cross)
            .map(move |(&sxx, &sxy)| (sxx > 0.0).then(|| sxy / sxx >= phi_obs))
    }
}

/// Exceedance and degenerate counts per grid point for a replicate range.
pub(crate) fn count_exceedances(
    phis: &[f64],
    phi_obs: f64,
    n: usize,
    seed: u64,
    replicates: std::ops::Range<usize>,
) -> (Vec<u64>, Vec<u64>) {
    let mut hits = vec![0u64; phis.len()];
    let mut degenerate = vec![0u64; phis.len()];
    let mut eps = vec![0.0; n];
    let mut paths = Lockstep::new(phis.len());
    for r in replicates {
        let mut rng = replicate_rng(seed, r as u64);
        fill_normals(&mut rng, &mut eps);
        paths.run(phis, &eps);
        for ((h, d), outcome) in hits
            .iter_mut()
            .zip(&mut degenerate)
            .zip(paths.exceeds(phi_obs))
        {
            match outcome {
                Some(true) => *h += 1,
                Some(false) => {}
                None => *d += 1,
            }
        }
    }
    (hits, degenerate)
}

/// Simulated `C(phi) = P_phi(phi_hat >= phi_obs)` at every grid point.
///
/// Each replicate simulates a path of length `config.n` with unit noise
/// variance at every grid coefficient; degenerate replicates are dropped
/// from both numerator and denominator and counted in `discarded`.
pub fn estimate_cd(phi_obs: f64, grid: &PhiGrid, config: &McConfig) -> Result<EmpiricalCd> {
    config.validate()?;
    let phis = grid.points();
    let parts = map_blocks(config.reps, BLOCK, config.max_parallel, |range| {
        count_exceedances(phis, phi_obs, config.n, config.seed, range)
    });
    let mut hits = vec![0u64; phis.len()];
    let mut degenerate = vec![0u64; phis.len()];
    for (h, d) in parts {
        hits.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        degenerate.iter_mut().zip(d).for_each(|(a, b)| *a += b);
    }
    let discarded = degenerate.iter().copied().max().unwrap_or(0);
    if discarded > 0 {
        log::warn!("discarded up to {discarded} degenerate replicates per grid point");
    }
    let values = hits
        .iter()
        .zip(&degenerate)
        .map(|(&h, &d)| {
            let used = config.reps as u64 - d;
            if used == 0 {
                0.0
            } else {
                h as f64 / used as f64
            }
        })
        .collect();
    let mut cd = EmpiricalCd::new(grid.clone(), values, phi_obs, CdSource::Simulated)?;
    cd.discarded = discarded;
    Ok(cd)
}

/// Draws of `n (phi_hat - phi)` from paths simulated at `phi`.
fn simulate_scaled_errors(phi: f64, config: &McConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.n;
    let blocks = map_blocks(config.reps, BLOCK, config.max_parallel, |range| {
        let mut out = Vec::with_capacity(range.len());
        for r in range {
            let mut rng = replicate_rng(config.seed, r as u64);
            let mut y: f64 = StandardNormal.sample(&mut rng);
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for _ in 1..n {
                let e: f64 = StandardNormal.sample(&mut rng);
                let next = phi * y + e;
                sxx += y * y;
                sxy += y * next;
                y = next;
            }
            if sxx > 0.0 {
                out.push(n as f64 * (sxy / sxx - phi));
            }
        }
        out
    });
    let draws: Vec<f64> = blocks.into_iter().flatten().collect();
    let dropped = config.reps - draws.len();
    if dropped > 0 {
        log::warn!("discarded {dropped} degenerate replicates");
    }
    Ok(draws)
}

/// Finite-`n` approximation of the Dickey-Fuller law: `n (phi_hat - 1)`
/// for random walks of length `config.n`.
pub fn simulate_df_distribution(config: &McConfig) -> Result<LimitSample> {
    let draws = simulate_scaled_errors(1.0, config)?;
    LimitSample::new(draws, LimitKind::DickeyFuller, config.n)
}

/// Right-continuous empirical CDF: fraction of draws `<= z`.
pub fn df_cdf(sample: &LimitSample, z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    sample.draws.partition_point(|&d| d <= z) as f64 / sample.draws.len() as f64
}

/// Large-sample confidence at the unit root, `1 - F(n (phi_obs - 1))`.
pub fn c_at_one(phi_obs: f64, n: usize, sample: &LimitSample) -> f64 {
    1.0 - df_cdf(sample, n as f64 * (phi_obs - 1.0))
}

/// Draws of `n (phi_hat - phi)` with `phi = exp(c / n)`; the local-to-unity
/// counterpart of [`simulate_df_distribution`].
pub fn simulate_near_unit_limit(c: f64, config: &McConfig) -> Result<LimitSample> {
    if !c.is_finite() {
        return Err(Error::invalid(format!("c must be finite, got {c}")));
    }
    let phi = (c / config.n as f64).exp();
    let draws = simulate_scaled_errors(phi, config)?;
    LimitSample::new(draws, LimitKind::OrnsteinUhlenbeck { c }, config.n)
}
