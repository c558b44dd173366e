use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` equally spaced points from `lo` to `hi`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!(
                "grid needs n >= 2 and lo < hi, got n={n} on [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn extent(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Output domain of a solution operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Space-time grid; values are stored one time slice after another.
    SpaceTime { x: UniformGrid, t: UniformGrid },
    /// A single time axis.
    Time { t: UniformGrid },
}

impl Domain {
    /// Number of slices along which discontinuities are located independently.
    pub fn n_slices(&self) -> usize {
        match self {
            Domain::SpaceTime { t, .. } => t.n,
            Domain::Time { .. } => 1,
        }
    }

    /// The axis discontinuities live on: `x` for space-time, `t` for time-only domains.
    pub fn front_axis(&self) -> UniformGrid {
        match self {
            Domain::SpaceTime { x, .. } => *x,
            Domain::Time { t } => *t,
        }
    }

    pub fn slice_len(&self) -> usize {
        self.front_axis().n
    }

    pub fn len(&self) -> usize {
        self.n_slices() * self.slice_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinate dimension of a query point.
    pub fn coord_dims(&self) -> usize {
        match self {
            Domain::SpaceTime { .. } => 2,
            Domain::Time { .. } => 1,
        }
    }

    /// Time of slice `j` for space-time domains.
    pub fn slice_time(&self, j: usize) -> Option<f64> {
        match self {
            Domain::SpaceTime { t, .. } => Some(t.point(j)),
            Domain::Time { .. } => None,
        }
    }

    /// Query coordinates of the point at position `i` of slice `j`: `(x, t)` or `(t)`.
    pub fn coords(&self, j: usize, i: usize) -> Vec<f64> {
        match self {
            Domain::SpaceTime { x, t } => vec![x.point(i), t.point(j)],
            Domain::Time { t } => vec![t.point(i)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Godunov,
    OdeRk4,
}

/// A sampled input function and the solution it produces on a grid.
///
/// `values[j * slice_len + i]` holds the solution at point `i` of slice `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub domain: Domain,
    pub sensors: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl SolutionField {
    pub fn new(
        domain: Domain,
        sensors: Vec<f64>,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self {
            domain,
            sensors,
            values,
            provenance,
        })
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let n = self.domain.slice_len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.domain.slice_len())
    }

    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.domain.slice_len() + i]
    }
}

/// Samples `m` equally spaced sensor values of `f` on `grid`'s interval.
pub(crate) fn point_sensors(lo: f64, hi: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let g = UniformGrid::new(lo, hi, m)?;
    Ok(g.points().into_iter().map(f).collect())
}
