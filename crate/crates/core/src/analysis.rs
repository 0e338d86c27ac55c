//! Quantities read off a confidence distribution: confidence curves,
//! equal-tailed intervals and medians, the two normal approximations and
//! their densities, and probit smoothing of an empirical distribution into
//! a density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::PhiGrid;
use crate::mc::{CdSource, EmpiricalCd};
use crate::normal::{normal_cdf, normal_log_pdf, normal_pdf, normal_quantile};

/// Probit selection band, exclusive on both sides.
pub const SMOOTHING_BAND: (f64, f64) = (0.01, 0.99);

/// `cc(phi) = |1 - 2 C(phi)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceCurve {
    pub grid: PhiGrid,
    pub values: Vec<f64>,
}

impl ConfidenceCurve {
    /// Grid point with the smallest curve value (first one on ties).
    pub fn argmin(&self) -> f64 {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (k, &v)| if v < best.1 { (k, v) } else { best },
            );
        self.grid.points()[k]
    }

    pub fn at_upper_end(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Equal-tailed interval; `hi_clipped` marks an upper end pinned to the
/// grid's upper bound because `C` never reached `1 - alpha/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub hi_clipped: bool,
}

pub fn confidence_curve(cd: &EmpiricalCd) -> ConfidenceCurve {
    ConfidenceCurve {
        grid: cd.grid.clone(),
        values: cd.values.iter().map(|c| (1.0 - 2.0 * c).abs()).collect(),
    }
}

/// Pool-adjacent-violators projection onto non-decreasing sequences
/// (unweighted least squares).
pub fn isotonic_non_decreasing(values: &[f64]) -> Vec<f64> {
    // (block mean, block size)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

/// Copy of `cd` with monotonized values.
pub fn monotonized(cd: &EmpiricalCd) -> EmpiricalCd {
    let mut out = cd.clone();
    out.values = isotonic_non_decreasing(&cd.values)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    out
}

/// First crossing of `target` in a non-decreasing sequence, linearly
/// interpolated. `None` if the sequence starts above or never reaches it.
fn first_crossing(points: &[f64], values: &[f64], target: f64) -> Option<f64> {
    let k = values.iter().position(|&v| v >= target)?;
    if k == 0 {
        return (values[0] == target).then_some(points[0]);
    }
    let (c0, c1) = (values[k - 1], values[k]);
    let w = (target - c0) / (c1 - c0);
    Some(points[k - 1] + w * (points[k] - points[k - 1]))
}

/// Equal-tailed `level` interval from the monotonized distribution.
pub fn extract_interval(cd: &EmpiricalCd, level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!(
            "level must be in (0, 1), got {level}"
        )));
    }
    let alpha = 1.0 - level;
    let values = isotonic_non_decreasing(&cd.values);
    let points = cd.grid.points();
    let lower_target = alpha / 2.0;
    if values[0] > lower_target {
        return Err(Error::LevelUnreachable {
            level,
            reason: "C exceeds alpha/2 at the lowest grid point; extend the grid downwards",
        });
    }
    let lo = first_crossing(points, &values, lower_target).ok_or(Error::LevelUnreachable {
        level,
        reason: "C never reaches alpha/2 on the grid",
    })?;
    let (hi, hi_clipped) = match first_crossing(points, &values, 1.0 - alpha / 2.0) {
        Some(hi) => (hi, false),
        None => (cd.grid.last(), true),
    };
    Ok(ConfidenceInterval {
        lo,
        hi,
        level,
        hi_clipped,
    })
}

/// Solution of `C(phi) = 1/2` on the monotonized distribution.
pub fn cd_median(cd: &EmpiricalCd) -> Result<f64> {
    let values = isotonic_non_decreasing(&cd.values);
    if values[0] > 0.5 {
        return Err(Error::NoCrossing(0.5));
    }
    first_crossing(cd.grid.points(), &values, 0.5).ok_or(Error::NoCrossing(0.5))
}

fn check_open_unit(x: f64, name: &str) -> Result<()> {
    if x.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must satisfy |{name}| < 1, got {x}"
        )))
    }
}

/// `C_1(phi) = Phi(sqrt(n) (phi - phi_obs) / sqrt(1 - phi^2))`.
pub fn asymptotic_cd_c1(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi, "phi")?;
    let z = (n as f64).sqrt() * (phi - phi_obs) / (1.0 - phi * phi).sqrt();
    Ok(normal_cdf(z))
}

/// `C_2(phi) = Phi(sqrt(n) (phi - phi_obs) / sqrt(1 - phi_obs^2))`.
pub fn asymptotic_cd_c2(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi_obs, "phi_obs")?;
    let z = (n as f64).sqrt() * (phi - phi_obs) / (1.0 - phi_obs * phi_obs).sqrt();
    Ok(normal_cdf(z))
}

/// Log of [`asymptotic_density_c1`].
pub fn log_asymptotic_density_c1(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi, "phi")?;
    let nf = n as f64;
    let one_minus = 1.0 - phi * phi;
    let z = nf.sqrt() * (phi - phi_obs) / one_minus.sqrt();
    Ok(0.5 * nf.ln() + (1.0 - phi_obs * phi).ln() - 1.5 * one_minus.ln() + normal_log_pdf(z))
}

/// Derivative of `C_1`:
/// `sqrt(n) (1 - phi_obs phi) / (1 - phi^2)^{3/2} * pdf(sqrt(n) (phi - phi_obs) / sqrt(1 - phi^2))`.
pub fn asymptotic_density_c1(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi, "phi")?;
    let nf = n as f64;
    let one_minus = 1.0 - phi * phi;
    let z = nf.sqrt() * (phi - phi_obs) / one_minus.sqrt();
    Ok(nf.sqrt() * (1.0 - phi_obs * phi) / one_minus.powf(1.5) * normal_pdf(z))
}

/// Log of [`asymptotic_density_c2`].
pub fn log_asymptotic_density_c2(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi_obs, "phi_obs")?;
    let nf = n as f64;
    let var = (1.0 - phi_obs * phi_obs) / nf;
    Ok(normal_log_pdf((phi - phi_obs) / var.sqrt()) - 0.5 * var.ln())
}

/// `N(phi_obs, (1 - phi_obs^2) / n)` density at `phi`.
pub fn asymptotic_density_c2(phi: f64, phi_obs: f64, n: usize) -> Result<f64> {
    check_open_unit(phi_obs, "phi_obs")?;
    let sd = ((1.0 - phi_obs * phi_obs) / n as f64).sqrt();
    Ok(normal_pdf((phi - phi_obs) / sd) / sd)
}

/// Evaluates `C_1` or `C_2` over a grid. `C_1` takes its limit value at
/// `|phi| >= 1`: 1 above `phi_obs`, 0 below.
pub fn asymptotic_cd(
    grid: &PhiGrid,
    phi_obs: f64,
    n: usize,
    source: CdSource,
) -> Result<EmpiricalCd> {
    let values = grid
        .points()
        .iter()
        .map(|&phi| match source {
            CdSource::AsymptoticC1 if phi.abs() >= 1.0 => Ok(if phi > phi_obs { 1.0 } else { 0.0 }),
            CdSource::AsymptoticC1 => asymptotic_cd_c1(phi, phi_obs, n),
            CdSource::AsymptoticC2 => asymptotic_cd_c2(phi, phi_obs, n),
            other => Err(Error::invalid(format!(
                "{other:?} is not an asymptotic source"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalCd::new(grid.clone(), values, phi_obs, source)
}

/// Probit fit `Phi^{-1}(C(phi)) ~ a + b phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothedDensityFit {
    pub a: f64,
    pub b: f64,
    /// Smallest and largest selected grid point.
    pub selected_range: (f64, f64),
    pub selected_points: usize,
    /// Set when the fitted slope is not positive, so the smoothed
    /// distribution is not increasing.
    pub nonpositive_slope: bool,
}

impl SmoothedDensityFit {
    /// `C_s(phi) = Phi(a + b phi)`.
    pub fn cdf(&self, phi: f64) -> f64 {
        normal_cdf(self.a + self.b * phi)
    }

    /// `c_emp(phi) = b pdf(a + b phi)`.
    pub fn density(&self, phi: f64) -> f64 {
        self.b * normal_pdf(self.a + self.b * phi)
    }

    pub fn log_density(&self, phi: f64) -> f64 {
        self.b.ln() + normal_log_pdf(self.a + self.b * phi)
    }

    pub fn contains(&self, phi: f64) -> bool {
        phi >= self.selected_range.0 && phi <= self.selected_range.1
    }
}

/// Unweighted least squares of `Phi^{-1}(C)` on `phi` over the grid points
/// with `0.01 < C < 0.99`.
pub fn fit_smoothed_density(cd: &EmpiricalCd) -> Result<SmoothedDensityFit> {
    let (lo, hi) = SMOOTHING_BAND;
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for (&phi, &c) in cd.grid.points().iter().zip(&cd.values) {
        if c > lo && c < hi {
            xs.push(phi);
            zs.push(normal_quantile(c)?);
        }
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientPoints(xs.len()));
    }
    let m = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / m;
    let z_mean = zs.iter().sum::<f64>() / m;
    let (sxx, sxz) = xs.iter().zip(&zs).fold((0.0, 0.0), |(sxx, sxz), (&x, &z)| {
        let dx = x - x_mean;
        (sxx + dx * dx, sxz + dx * (z - z_mean))
    });
    let b = sxz / sxx;
    let a = z_mean - b * x_mean;
    if b <= 0.0 {
        log::warn!("probit smoothing produced a non-positive slope ({b})");
    }
    Ok(SmoothedDensityFit {
        a,
        b,
        selected_range: (xs[0], xs[xs.len() - 1]),
        selected_points: xs.len(),
        nonpositive_slope: b <= 0.0,
    })
}

/// Sup-norm distances `(max |log c_emp - log c_1|, max |log c_emp - log c_2|)`
/// over the probit-selected grid points strictly inside `(-1, 1)`.
pub fn log_density_distances(
    cd: &EmpiricalCd,
    fit: &SmoothedDensityFit,
    n: usize,
) -> Result<(f64, f64)> {
    if fit.nonpositive_slope {
        return Err(Error::domain("smoothed density has a non-positive slope"));
    }
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    let mut used = 0;
    for &phi in cd
        .grid
        .points()
        .iter()
        .filter(|&&p| fit.contains(p) && p.abs() < 1.0)
    {
        let le = fit.log_density(phi);
        d1 = d1.max((le - log_asymptotic_density_c1(phi, cd.phi_obs, n)?).abs());
        d2 = d2.max((le - log_asymptotic_density_c2(phi, cd.phi_obs, n)?).abs());
        used += 1;
    }
    if used == 0 {
        return Err(Error::InsufficientPoints(0));
    }
    Ok((d1, d2))
}
