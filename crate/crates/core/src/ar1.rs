//! AR(1) process mathematics: simulation, estimators, residuals and the
//! Gaussian likelihood.
//!
//! Every series starts from `y_0 = 0`, so the first observation is pure
//! noise (`y_1 = sigma * eps_1`). Sums written over `t = 1..n` with a lagged
//! term therefore pick up a zero at `t = 1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// An observed or simulated real-valued series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    demeaned: bool,
}

impl TimeSeries {
    /// Wraps `values`, rejecting series shorter than 2 or with non-finite
    /// entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort(values.len()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self {
            values,
            demeaned: false,
        })
    }

    /// Subtracts the sample mean and records that it was done.
    pub fn demean(mut self) -> Self {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        for v in &mut self.values {
            *v -= mean;
        }
        self.demeaned = true;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_demeaned(&self) -> bool {
        self.demeaned
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn stats(&self) -> LagStats {
        LagStats::from_values(&self.values)
    }
}

/// Coefficient and innovation variance of an AR(1) model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ar1Params {
    pub phi: f64,
    pub sigma2: f64,
}

impl Ar1Params {
    pub fn new(phi: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain(format!(
                "sigma2 must be positive, got {sigma2}"
            )));
        }
        Ok(Self { phi, sigma2 })
    }
}

/// Maximum-likelihood fit of an observed series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub phi_hat: f64,
    pub sigma2_hat: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    pub fn new(series: &TimeSeries) -> Result<Self> {
        let phi_hat = mle_phi(series)?;
        let sigma2_hat = mle_sigma2(series)?;
        Ok(Self {
            phi_hat,
            sigma2_hat,
            residuals: residuals(series, phi_hat),
        })
    }
}

/// Sufficient statistics of a series under the `y_0 = 0` convention.
///
/// With these the likelihood, the MLE and `A(phi)` are O(1) per
/// evaluation, which is what grid sweeps over `phi` rely on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagStats {
    pub n: usize,
    /// `sum_{t=1}^n y_t^2`
    pub sum_sq: f64,
    /// `sum_{t=1}^n y_{t-1}^2`
    pub sum_sq_lag: f64,
    /// `sum_{t=1}^n y_{t-1} y_t`
    pub sum_cross: f64,
    pub first: f64,
    pub last: f64,
}

impl LagStats {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sum_sq_lag = 0.0;
        let mut sum_cross = 0.0;
        let mut prev = values[0];
        for &y in &values[1..] {
            sum_sq_lag += prev * prev;
            sum_cross += prev * y;
            prev = y;
        }
        let last = *values.last().unwrap_or(&0.0);
        Self {
            n: values.len(),
            sum_sq: sum_sq_lag + last * last,
            sum_sq_lag,
            sum_cross,
            first: values[0],
            last,
        }
    }

    pub fn phi_hat(&self) -> Result<f64> {
        if self.sum_sq_lag == 0.0 {
            return Err(Error::DegenerateSeries(
                "sum of squared lagged values is zero",
            ));
        }
        Ok(self.sum_cross / self.sum_sq_lag)
    }

    pub fn sigma2_hat(&self) -> Result<f64> {
        // Sums from t = 2; the lagged sums coincide with the t = 1 versions
        // because y_0 = 0, only sum y_t^2 loses its first term.
        if self.sum_sq_lag == 0.0 {
            return Err(Error::DegenerateSeries(
                "sum of squared lagged values is zero",
            ));
        }
        let tail_sq = self.sum_sq - self.first * self.first;
        let ssr = tail_sq - self.sum_cross * self.sum_cross / self.sum_sq_lag;
        Ok((ssr / self.n as f64).max(0.0))
    }

    /// `A(phi) = y_1^2 + sum_{t=2}^n (y_t - phi y_{t-1})^2`, expanded.
    pub fn quantity_a(&self, phi: f64) -> f64 {
        self.sum_sq - 2.0 * phi * self.sum_cross + phi * phi * self.sum_sq_lag
    }

    pub fn log_likelihood(&self, phi: f64, sigma2: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        let n = self.n as f64;
        Ok(-0.5 * n * (2.0 * PI * sigma2).ln() - self.quantity_a(phi) / (2.0 * sigma2))
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "sigma2 must be positive, got {sigma2}"
        )))
    }
}

/// Simulates `y_1 = sigma eps_1`, `y_t = phi y_{t-1} + sigma eps_t`,
/// consuming exactly `n` deviates from `noise`.
pub fn simulate_ar1<I>(phi: f64, sigma: f64, n: usize, noise: I) -> Result<TimeSeries>
where
    I: IntoIterator<Item = f64>,
{
    if !(sigma > 0.0) {
        return Err(Error::domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let mut values = Vec::with_capacity(n);
    let mut noise = noise.into_iter();
    let mut prev = 0.0;
    for _ in 0..n {
        let eps = noise
            .next()
            .ok_or_else(|| Error::invalid(format!("noise stream ended before {n} deviates")))?;
        prev = phi * prev + sigma * eps;
        values.push(prev);
    }
    TimeSeries::new(values)
}

/// `sum y_{t-1} y_t / sum y_{t-1}^2` over `t = 1..n`.
pub fn mle_phi(series: &TimeSeries) -> Result<f64> {
    series.stats().phi_hat()
}

/// `n^-1 (sum_{t=2}^n y_t^2 - (sum_{t=2}^n y_{t-1} y_t)^2 / sum_{t=2}^n y_{t-1}^2)`.
///
/// The first observation does not enter the sum of squares, unlike in
/// `A(phi)`.
pub fn mle_sigma2(series: &TimeSeries) -> Result<f64> {
    series.stats().sigma2_hat()
}

/// `e_1 = y_1`, `e_t = y_t - phi y_{t-1}`.
pub fn residuals(series: &TimeSeries, phi: f64) -> Vec<f64> {
    let y = series.values();
    std::iter::once(y[0])
        .chain(y.windows(2).map(|w| w[1] - phi * w[0]))
        .collect()
}

/// Sum of squared innovations implied by `phi`, including `y_1^2`.
///
/// Evaluated through the sufficient statistics, so it is defined even when
/// the MLE is not (an all-zero lagged series).
pub fn quantity_a(series: &TimeSeries, phi: f64) -> f64 {
    series.stats().quantity_a(phi)
}

/// Gaussian log-likelihood `-(n/2) log(2 pi sigma2) - A(phi) / (2 sigma2)`.
pub fn log_likelihood(series: &TimeSeries, phi: f64, sigma2: f64) -> Result<f64> {
    series.stats().log_likelihood(phi, sigma2)
}
