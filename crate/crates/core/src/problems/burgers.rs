//! Inviscid Burgers equation with Riemann shock data: exact entropy solution,
//! shock formation from characteristics, and a first-order Godunov solver.

use serde::{Deserialize, Serialize};

use super::field::{point_sensors, Domain, Provenance, SolutionField, UniformGrid};
use crate::error::{Error, Result};

pub const X_RANGE: (f64, f64) = (-1.0, 1.0);
pub const T_END: f64 = 0.5;
pub const U_LEFT_RANGE: (f64, f64) = (1.0, 2.0);
pub const X_D_RANGE: (f64, f64) = (-0.9, -0.1);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannIC {
    pub u_left: f64,
    pub u_right: f64,
    pub x_d: f64,
}

/// Straight shock trajectory `x_s(t) = x_d + speed * t`, valid from `formation_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockPath {
    pub formation_time: f64,
    pub x_d: f64,
    pub speed: f64,
}

impl ShockPath {
    pub fn position(&self, t: f64) -> f64 {
        self.x_d + self.speed * t
    }
}

#[inline]
fn flux(u: f64) -> f64 {
    0.5 * u * u
}

/// Exact Riemann-problem flux for the convex flux `u^2 / 2`.
#[inline]
pub fn godunov_flux(a: f64, b: f64) -> f64 {
    flux(a.max(0.0)).max(flux(b.min(0.0)))
}

impl RiemannIC {
    /// Shock data with `u_right = 0`, the configuration of the benchmark.
    pub fn new(u_left: f64, x_d: f64) -> Self {
        Self {
            u_left,
            u_right: 0.0,
            x_d,
        }
    }

    /// Checks the benchmark parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = self.u_left >= U_LEFT_RANGE.0
            && self.u_left <= U_LEFT_RANGE.1
            && self.x_d >= X_D_RANGE.0
            && self.x_d <= X_D_RANGE.1
            && self.u_right == 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("Riemann data out of range: {self:?}")))
        }
    }

    pub fn initial(&self, x: f64) -> f64 {
        if x < self.x_d {
            self.u_left
        } else {
            self.u_right
        }
    }

    /// Rankine-Hugoniot shock path.
    pub fn shock(&self) -> ShockPath {
        ShockPath {
            formation_time: 0.0,
            x_d: self.x_d,
            speed: (flux(self.u_left) - flux(self.u_right)) / (self.u_left - self.u_right),
        }
    }
}

/// Exact entropy solution on `x in [-1, 1]`, `t in [0, 0.5]`. Points on the
/// shock take the right state.
pub fn burgers_exact(
    ic: &RiemannIC,
    nx: usize,
    nt: usize,
    sensors: usize,
) -> Result<(SolutionField, ShockPath)> {
    if !(ic.u_left > ic.u_right) {
        return Err(Error::Unsupported(format!(
            "u_left = {} <= u_right = {} gives a rarefaction",
            ic.u_left, ic.u_right
        )));
    }
    let shock = ic.shock();
    let x = UniformGrid::new(X_RANGE.0, X_RANGE.1, nx)?;
    let t = UniformGrid::new(0.0, T_END, nt)?;
    let xs = x.points();
    let mut values = Vec::with_capacity(nx * nt);
    for tj in t.points() {
        let xs_t = shock.position(tj);
        values.extend(
            xs.iter()
                .map(|&xi| if xi < xs_t { ic.u_left } else { ic.u_right }),
        );
    }
    let sensors = point_sensors(X_RANGE.0, X_RANGE.1, sensors, |xi| ic.initial(xi))?;
    let field = SolutionField::new(Domain::SpaceTime { x, t }, sensors, values, Provenance::Exact)?;
    Ok((field, shock))
}

/// First shock time and location from the characteristics of sampled initial data.
///
/// The derivative is taken with central differences (one-sided at the ends).
/// Returns `(f64::INFINITY, f64::NAN)` when no characteristics cross.
pub fn characteristics_shock_time(u0: &[f64], grid: &UniformGrid) -> Result<(f64, f64)> {
    let n = u0.len();
    if n < 3 {
        return Err(Error::Usage(format!(
            "need at least 3 samples of u0, got {n}"
        )));
    }
    if n != grid.n {
        return Err(Error::Shape(format!("{n} samples on a grid of {}", grid.n)));
    }
    let dx = grid.step();
    let derivative = |i: usize| match i {
        0 => (u0[1] - u0[0]) / dx,
        i if i == n - 1 => (u0[n - 1] - u0[n - 2]) / dx,
        i => (u0[i + 1] - u0[i - 1]) / (2.0 * dx),
    };
    let (mut best, mut arg) = (f64::INFINITY, 0);
    for i in 0..n {
        let d = derivative(i);
        if d < best {
            best = d;
            arg = i;
        }
    }
    if best >= 0.0 {
        return Ok((f64::INFINITY, f64::NAN));
    }
    let t_s = -1.0 / best;
    Ok((t_s, grid.point(arg) + u0[arg] * t_s))
}

/// Discrete total variation `sum |u[i+1] - u[i]|`.
pub fn total_variation(u: &[f64]) -> f64 {
    u.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Marches cell averages `u` from `t` to `t_target` with the Godunov scheme and
/// copy (outflow) boundaries. Steps are shortened to land on `t_target` exactly.
fn march(u: &mut Vec<f64>, scratch: &mut Vec<f64>, dx: f64, cfl: f64, t: &mut f64, t_target: f64) {
    let n = u.len();
    while *t < t_target - 1e-14 {
        let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dt = if umax > 0.0 {
            cfl * dx / umax
        } else {
            t_target - *t
        };
        if *t + dt > t_target {
            dt = t_target - *t;
        }
        let ratio = dt / dx;
        scratch.clear();
        // interface k sits between cells k-1 and k; ghosts copy the edge cells
        scratch.push(godunov_flux(u[0], u[0]));
        for k in 1..n {
            scratch.push(godunov_flux(u[k - 1], u[k]));
        }
        scratch.push(godunov_flux(u[n - 1], u[n - 1]));
        for i in 0..n {
            u[i] -= ratio * (scratch[i + 1] - scratch[i]);
        }
        *t += dt;
    }
    *t = t_target;
}

fn validate_godunov(nx: usize, cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Stability(format!("CFL number {cfl} outside (0, 1]")));
    }
    if nx < 10 {
        return Err(Error::Config(format!("Godunov solver needs nx >= 10, got {nx}")));
    }
    Ok(())
}

/// Initial cell averages over cells of width `dx` centred on the grid points.
fn initial_averages(ic: &RiemannIC, x: &UniformGrid) -> Vec<f64> {
    let dx = x.step();
    (0..x.n)
        .map(|i| {
            let cell_lo = x.point(i) - 0.5 * dx;
            let left_frac = ((ic.x_d - cell_lo) / dx).clamp(0.0, 1.0);
            left_frac * ic.u_left + (1.0 - left_frac) * ic.u_right
        })
        .collect()
}

/// First-order finite-volume solution of `u_t + (u^2/2)_x = 0` on
/// `x in [-1, 1]`, stored at `nt` equally spaced times in `[0, 0.5]`.
pub fn burgers_godunov(
    ic: &RiemannIC,
    nx: usize,
    nt: usize,
    cfl: f64,
    sensors: usize,
) -> Result<SolutionField> {
    validate_godunov(nx, cfl)?;
    let x = UniformGrid::new(X_RANGE.0, X_RANGE.1, nx)?;
    let t = UniformGrid::new(0.0, T_END, nt)?;
    let dx = x.step();
    let mut u = initial_averages(ic, &x);
    let mut scratch = Vec::with_capacity(nx + 1);
    let mut values = Vec::with_capacity(nx * nt);
    let mut now = 0.0;
    for tj in t.points() {
        march(&mut u, &mut scratch, dx, cfl, &mut now, tj);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Stability(format!("non-finite solution at t = {tj}")));
        }
        values.extend_from_slice(&u);
    }
    let sensors = point_sensors(X_RANGE.0, X_RANGE.1, sensors, |xi| ic.initial(xi))?;
    SolutionField::new(Domain::SpaceTime { x, t }, sensors, values, Provenance::Godunov)
}
