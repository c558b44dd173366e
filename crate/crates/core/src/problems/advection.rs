//! Linear advection of a rectangular pulse, solved exactly by translation.

use serde::{Deserialize, Serialize};

use super::field::{point_sensors, Domain, Provenance, SolutionField, UniformGrid};
use crate::error::{Error, Result};

pub const X_RANGE: (f64, f64) = (0.0, 1.0);
pub const T_END: f64 = 0.25;
pub const HEIGHT_RANGE: (f64, f64) = (0.2, 0.8);
pub const WIDTH_RANGE: (f64, f64) = (0.2, 0.45);
pub const MIDPOINT_RANGE: (f64, f64) = (0.1, 0.2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvectionIC {
    pub height: f64,
    pub width: f64,
    pub midpoint: f64,
    pub speed: f64,
}

fn in_range(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

impl AdvectionIC {
    pub fn new(height: f64, width: f64, midpoint: f64) -> Result<Self> {
        let ic = Self {
            height,
            width,
            midpoint,
            speed: 1.0,
        };
        ic.validate()?;
        Ok(ic)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = in_range(self.height, HEIGHT_RANGE)
            && in_range(self.width, WIDTH_RANGE)
            && in_range(self.midpoint, MIDPOINT_RANGE)
            && self.width > 0.0
            && self.speed.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("advection parameters out of range: {self:?}")))
        }
    }

    /// Initial profile; the pulse covers `[s - w/2, s + w/2)`.
    pub fn initial(&self, x: f64) -> f64 {
        let d = x - self.midpoint;
        if d >= -0.5 * self.width && d < 0.5 * self.width {
            self.height
        } else {
            0.0
        }
    }

    pub fn solution(&self, x: f64, t: f64) -> f64 {
        self.initial(x - self.speed * t)
    }

    /// Left and right pulse edges at time `t`.
    pub fn fronts(&self, t: f64) -> [f64; 2] {
        let c = self.midpoint + self.speed * t;
        [c - 0.5 * self.width, c + 0.5 * self.width]
    }
}

/// Exact solution `u(x, t) = u0(x - c t)` on `x in [0, 1]`, `t in [0, 0.25]`.
pub fn advection_exact(ic: &AdvectionIC, nx: usize, nt: usize, sensors: usize) -> Result<SolutionField> {
    ic.validate()?;
    let x = UniformGrid::new(X_RANGE.0, X_RANGE.1, nx)?;
    let t = UniformGrid::new(0.0, T_END, nt)?;
    let xs = x.points();
    let mut values = Vec::with_capacity(nx * nt);
    for tj in t.points() {
        values.extend(xs.iter().map(|&xi| ic.solution(xi, tj)));
    }
    let sensors = point_sensors(X_RANGE.0, X_RANGE.1, sensors, |xi| ic.initial(xi))?;
    SolutionField::new(Domain::SpaceTime { x, t }, sensors, values, Provenance::Exact)
}
