//! Residual bootstrap confidence distributions.
//!
//! One index matrix is drawn per analysis and reused at every grid
//! coefficient, so the randomness is fixed by the plan and never by the
//! grid.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::Serialize;

use crate::analysis::{confidence_curve, ConfidenceCurve};
use crate::ar1::TimeSeries;
use crate::error::{Error, Result};
use crate::exec::map_blocks;
use crate::grid::PhiGrid;
use crate::mc::{derive_seed, replicate_rng, CdSource, EmpiricalCd, Lockstep};

const PLAN_SALT: u64 = 0xB007_57A9_0000_0001;
const BLOCK: usize = 256;

/// `n x N` matrix of 1-based resampling indices, stored column by column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapPlan {
    n: usize,
    reps: usize,
    seed: Option<u64>,
    #[serde(skip)]
    indices: Vec<u32>,
}

impl BootstrapPlan {
    /// Plan from explicit columns of 1-based indices.
    pub fn from_columns(n: usize, columns: &[Vec<u32>]) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("bootstrap needs n >= 2, got {n}")));
        }
        if columns.is_empty() {
            return Err(Error::invalid("bootstrap plan needs at least one column"));
        }
        let mut indices = Vec::with_capacity(n * columns.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::invalid(format!(
                    "column {c} has {} entries, expected {n}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|&&i| i == 0 || i as usize > n) {
                return Err(Error::invalid(format!("index {bad} outside 1..={n}")));
            }
            indices.extend_from_slice(col);
        }
        Ok(Self {
            n,
            reps: columns.len(),
            seed: None,
            indices,
        })
    }

    /// Every one of the `n^n` possible columns, in lexicographic order.
    pub fn exhaustive(n: usize) -> Result<Self> {
        let total = (n as u64)
            .checked_pow(n as u32)
            .filter(|&t| t <= 10_000_000)
            .ok_or_else(|| Error::invalid(format!("n^n too large for n = {n}")))?;
        let columns: Vec<Vec<u32>> = (0..total)
            .map(|mut k| {
                let mut col = vec![0u32; n];
                for slot in col.iter_mut().rev() {
                    *slot = (k % n as u64) as u32 + 1;
                    k /= n as u64;
                }
                col
            })
            .collect();
        Self::from_columns(n, &columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn column(&self, c: usize) -> &[u32] {
        &self.indices[c * self.n..(c + 1) * self.n]
    }

    /// CSV with `n` rows and `N` columns, entries 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(out);
        for t in 0..self.n {
            w.write_record((0..self.reps).map(|c| self.indices[c * self.n + t].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(input);
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<u32>().map_err(|e| Error::Parse {
                        line: line + 1,
                        message: format!("bad index {f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        let reps = rows.first().map_or(0, Vec::len);
        let columns: Vec<Vec<u32>> = (0..reps)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect();
        Self::from_columns(n, &columns)
    }
}

/// Draws an `n x reps` plan of i.i.d. uniform indices on `1..=n`. Column
/// `c` comes from its own stream, so the plan is a pure function of
/// `(n, reps, seed)`.
pub fn make_plan(n: usize, reps: usize, seed: u64) -> Result<BootstrapPlan> {
    if n < 2 {
        return Err(Error::invalid(format!("bootstrap needs n >= 2, got {n}")));
    }
    if reps == 0 {
        return Err(Error::invalid("bootstrap needs at least one replicate"));
    }
    if n > u32::MAX as usize {
        return Err(Error::invalid("series too long for a bootstrap plan"));
    }
    let plan_seed = derive_seed(seed, PLAN_SALT);
    let mut indices = vec![0u32; n * reps];
    for (c, col) in indices.chunks_mut(n).enumerate() {
        let mut rng = replicate_rng(plan_seed, c as u64);
        for slot in col {
            *slot = rng.random_range(1..=n as u32);
        }
    }
    Ok(BootstrapPlan {
        n,
        reps,
        seed: Some(seed),
        indices,
    })
}

/// Bootstrap `C(phi)`: for each plan column, resample the residuals
/// `e_t = y_t - phi y_{t-1}` (with `e_1 = y_1`), rebuild
/// `y*_1 = e*_1`, `y*_t = phi y*_{t-1} + e*_t` and count how often the
/// re-estimated coefficient is `>= phi_obs`. Degenerate resamples count as
/// non-exceeding and are reported in `discarded`.
pub fn bootstrap_cd(
    series: &TimeSeries,
    grid: &PhiGrid,
    plan: &BootstrapPlan,
    max_parallel: usize,
) -> Result<EmpiricalCd> {
    if plan.n != series.len() {
        return Err(Error::invalid(format!(
            "plan has {} rows but the series has {} observations",
            plan.n,
            series.len()
        )));
    }
    let phi_obs = series.stats().phi_hat()?;
    let y = series.values();
    let y_lag: Vec<f64> = std::iter::once(0.0)
        .chain(y[..y.len() - 1].iter().copied())
        .collect();
    let phis = grid.points();
    let n = plan.n;

    let parts = map_blocks(plan.reps, BLOCK, max_parallel, |range| {
        let mut hits = vec![0u64; phis.len()];
        let mut degenerate = 0u64;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut paths = Lockstep::new(phis.len());
        for c in range {
            for ((at, bt), &i) in a.iter_mut().zip(b.iter_mut()).zip(plan.column(c)) {
                *at = y[i as usize - 1];
                *bt = y_lag[i as usize - 1];
            }
            paths.run_residual(phis, &a, &b);
            for (h, outcome) in hits.iter_mut().zip(paths.exceeds(phi_obs)) {
                match outcome {
                    Some(true) => *h += 1,
                    Some(false) => {}
                    None => degenerate += 1,
                }
            }
        }
        (hits, degenerate)
    });

    let mut hits = vec![0u64; phis.len()];
    let mut degenerate = 0u64;
    for (h, d) in parts {
        hits.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        degenerate += d;
    }
    if degenerate > 0 {
        log::warn!("{degenerate} degenerate bootstrap resamples counted as non-exceeding");
    }
    let values = hits.iter().map(|&h| h as f64 / plan.reps as f64).collect();
    let mut cd = EmpiricalCd::new(grid.clone(), values, phi_obs, CdSource::Bootstrap)?;
    cd.discarded = degenerate;
    Ok(cd)
}

pub fn bootstrap_curve(
    series: &TimeSeries,
    grid: &PhiGrid,
    plan: &BootstrapPlan,
    max_parallel: usize,
) -> Result<ConfidenceCurve> {
    Ok(confidence_curve(&bootstrap_cd(
        series,
        grid,
        plan,
        max_parallel,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_bounds_and_determinism() {
        let p = make_plan(7, 300, 42).unwrap();
        assert_eq!(p.n(), 7);
        assert_eq!(p.reps(), 300);
        assert!((0..300).all(|c| p.column(c).iter().all(|&i| (1..=7).contains(&i))));
        assert_eq!(p, make_plan(7, 300, 42).unwrap());
        assert_ne!(p, make_plan(7, 300, 43).unwrap());
        assert!(make_plan(1, 10, 1).is_err());
        assert!(make_plan(5, 0, 1).is_err());
    }

    #[test]
    fn exhaustive_plan_lists_every_column() {
        let p = BootstrapPlan::exhaustive(3).unwrap();
        assert_eq!(p.reps(), 27);
        assert_eq!(p.column(0), &[1, 1, 1]);
        assert_eq!(p.column(5), &[1, 2, 3]);
        assert_eq!(p.column(26), &[3, 3, 3]);
        assert!(BootstrapPlan::exhaustive(12).is_err());
    }

    #[test]
    fn plan_csv_round_trip() {
        let p = make_plan(4, 6, 9).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = BootstrapPlan::read_csv(&buf[..]).unwrap();
        assert_eq!(p.indices, q.indices);
        assert_eq!(q.n(), 4);
        assert_eq!(q.reps(), 6);
    }

    #[test]
    fn plan_rejects_bad_columns() {
        assert!(BootstrapPlan::from_columns(3, &[vec![1, 2]]).is_err());
        assert!(BootstrapPlan::from_columns(3, &[vec![1, 2, 4]]).is_err());
        assert!(BootstrapPlan::from_columns(3, &[vec![0, 2, 3]]).is_err());
    }

    #[test]
    fn plan_size_must_match_series() {
        let s = TimeSeries::new(vec![1.0, 0.5, 0.2]).unwrap();
        let plan = make_plan(4, 10, 1).unwrap();
        let grid = PhiGrid::new(0.0, 1.0, 4).unwrap();
        assert!(bootstrap_cd(&s, &grid, &plan, 1).is_err());
    }

    #[test]
    fn degenerate_resamples_are_non_exceeding() {
        // Series (0, 0, 1): drawing index 1 everywhere gives y* = 0.
        let s = TimeSeries::new(vec![1.0, 0.0, 0.0]).unwrap();
        let plan = BootstrapPlan::from_columns(3, &[vec![2, 2, 2], vec![1, 1, 1]]).unwrap();
        let grid = PhiGrid::single(0.0);
        let cd = bootstrap_cd(&s, &grid, &plan, 1).unwrap();
        // phi_obs = 0; column 2 is (1,1,1) at phi = 0 -> phi_hat = 1 >= 0.
        assert_eq!(cd.values, vec![0.5]);
        assert_eq!(cd.discarded, 1);
    }
}
