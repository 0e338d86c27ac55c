use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Equally spaced evaluation grid for `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiGrid {
    points: Vec<f64>,
    step: f64,
}

/// Serialized as `{lo, hi, intervals}`.
impl Serialize for PhiGrid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("PhiGrid", 3)?;
        st.serialize_field("lo", &self.first())?;
        st.serialize_field("hi", &self.last())?;
        st.serialize_field("intervals", &(self.points.len() - 1))?;
        st.end()
    }
}

const SPACING_TOL: f64 = 1e-12;

impl PhiGrid {
    /// `lo, lo + h, ..., hi` with `h = (hi - lo) / intervals`; the last point
    /// is exactly `hi`.
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "grid needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if intervals == 0 {
            return Err(Error::invalid("grid needs at least one interval"));
        }
        let step = (hi - lo) / intervals as f64;
        let mut points: Vec<f64> = (0..intervals).map(|k| lo + k as f64 * step).collect();
        points.push(hi);
        Ok(Self { points, step })
    }

    /// Grid ending at the unit root.
    pub fn to_unit_root(lo: f64, intervals: usize) -> Result<Self> {
        Self::new(lo, 1.0, intervals)
    }

    /// `[max(-0.999, phi_obs - 0.5), 1]` with `intervals` steps.
    pub fn around(phi_obs: f64, intervals: usize) -> Result<Self> {
        let lo = (phi_obs - 0.5).max(-0.999);
        if lo >= 1.0 {
            return Err(Error::invalid(format!(
                "phi_obs = {phi_obs} leaves no grid below 1"
            )));
        }
        Self::to_unit_root(lo, intervals)
    }

    /// A single-point grid; `step` is set to 1 and never used.
    pub fn single(phi: f64) -> Self {
        Self {
            points: vec![phi],
            step: 1.0,
        }
    }

    /// Validates an explicit point list.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        match points.len() {
            0 => Err(Error::invalid("empty grid")),
            1 => Ok(Self::single(points[0])),
            len => {
                let step = (points[len - 1] - points[0]) / (len - 1) as f64;
                if !(step > 0.0) {
                    return Err(Error::invalid("grid points must be strictly increasing"));
                }
                for w in points.windows(2) {
                    if ((w[1] - w[0]) - step).abs() > SPACING_TOL.max(step * 1e-9) {
                        return Err(Error::invalid(format!(
                            "grid spacing {} deviates from step {step}",
                            w[1] - w[0]
                        )));
                    }
                }
                Ok(Self { points, step })
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Contiguous slice of the grid.
    pub fn sub_grid(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.is_empty() || range.end > self.len() {
            return Err(Error::invalid("sub-grid range out of bounds"));
        }
        Ok(Self {
            points: self.points[range].to_vec(),
            step: self.step,
        })
    }
}
