//! Parsimonious ventricular action-potential model: three ODEs for the
//! membrane potential and the Na+ gating variables, integrated with RK4.

use serde::{Deserialize, Serialize};

use super::field::{Domain, Provenance, SolutionField, UniformGrid};
use crate::error::{Error, Result};

pub const DEFAULT_HORIZON: f64 = 400.0;
pub const DEFAULT_DT: f64 = 0.005;
pub const ONSET_RANGE: (f64, f64) = (5.0, 100.0);
pub const DURATION_RANGE: (f64, f64) = (0.5, 5.0);
pub const AMPLITUDE_RANGE: (f64, f64) = (20.0, 80.0);

/// Model constants (mV, ms, mS/cm^2, uF/cm^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsimoniousConstants {
    pub c_m: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub v_na: f64,
    pub v_k: f64,
    pub b: f64,
    pub e_m: f64,
    pub k_m: f64,
    pub e_h: f64,
    pub k_h: f64,
    pub tau_m: f64,
    pub tau_h0: f64,
    pub delta_h: f64,
    pub v0: f64,
    pub m0: f64,
    pub h0: f64,
}

impl Default for ParsimoniousConstants {
    fn default() -> Self {
        Self {
            c_m: 1.0,
            g_na: 11.0,
            g_k: 0.3,
            v_na: 65.0,
            v_k: -83.0,
            b: 0.047,
            e_m: -41.0,
            k_m: -4.0,
            e_h: -74.9,
            k_h: 4.4,
            tau_m: 0.12,
            tau_h0: 6.8,
            delta_h: 0.8,
            v0: -83.0,
            m0: 0.0,
            h0: 0.9,
        }
    }
}

/// Rectangular depolarizing stimulus: `amplitude` uA/cm^2 on `[onset, onset + duration]` ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusParams {
    pub amplitude: f64,
    pub onset: f64,
    pub duration: f64,
}

impl StimulusParams {
    pub fn validate(&self, horizon: f64) -> Result<()> {
        let ok = self.amplitude >= 0.0
            && self.onset > 0.0
            && self.duration > 0.0
            && self.onset + self.duration < horizon;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "stimulus {self:?} must be positive and end before {horizon} ms"
            )))
        }
    }

    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }

    pub fn current(&self, t: f64) -> f64 {
        if t >= self.onset && t <= self.end() {
            self.amplitude
        } else {
            0.0
        }
    }

    /// Mean current over `[a, b]`.
    pub fn mean_current(&self, a: f64, b: f64) -> f64 {
        let overlap = (b.min(self.end()) - a.max(self.onset)).max(0.0);
        self.amplitude * overlap / (b - a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct State {
    v: f64,
    m: f64,
    h: f64,
}

impl State {
    fn axpy(self, k: State, s: f64) -> State {
        State {
            v: self.v + s * k.v,
            m: self.m + s * k.m,
            h: self.h + s * k.h,
        }
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.m.is_finite() && self.h.is_finite()
    }
}

impl ParsimoniousConstants {
    pub fn m_inf(&self, v: f64) -> f64 {
        1.0 / (1.0 + ((v - self.e_m) / self.k_m).exp())
    }

    pub fn h_inf(&self, v: f64) -> f64 {
        1.0 / (1.0 + ((v - self.e_h) / self.k_h).exp())
    }

    pub fn tau_h(&self, v: f64) -> f64 {
        let z = (v - self.e_h) / self.k_h;
        2.0 * self.tau_h0 * self.delta_h * (self.delta_h * z).exp() / (1.0 + z.exp())
    }

    pub fn i_na(&self, v: f64, m: f64, h: f64) -> f64 {
        self.g_na * m * m * m * h * (v - self.v_na)
    }

    pub fn i_k(&self, v: f64) -> f64 {
        self.g_k * (-self.b * (v - self.v_k)).exp() * (v - self.v_k)
    }

    /// Right-hand side with `applied` the depolarizing stimulus current.
    fn rhs(&self, s: State, applied: f64) -> State {
        State {
            v: (applied - self.i_na(s.v, s.m, s.h) - self.i_k(s.v)) / self.c_m,
            m: (self.m_inf(s.v) - s.m) / self.tau_m,
            h: (self.h_inf(s.v) - s.h) / self.tau_h(s.v),
        }
    }

    fn rk4(&self, s: State, dt: f64, applied: f64) -> State {
        let k1 = self.rhs(s, applied);
        let k2 = self.rhs(s.axpy(k1, 0.5 * dt), applied);
        let k3 = self.rhs(s.axpy(k2, 0.5 * dt), applied);
        let k4 = self.rhs(s.axpy(k3, dt), applied);
        State {
            v: s.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            m: s.m + dt / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
            h: s.h + dt / 6.0 * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h),
        }
    }
}

/// Number of integration steps for a horizon and step size.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(Error::Config(format!("horizon {horizon} and dt {dt} must be positive")));
    }
    let n = (horizon / dt).round();
    if (n * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Config(format!("dt {dt} does not divide horizon {horizon}")));
    }
    Ok(n as usize)
}

/// Integrates the model from rest and returns the membrane potential trace on
/// `t = 0, dt, ..., horizon`. Steps straddling a stimulus edge are split there
/// so every RK4 stage sees a constant current.
///
/// The input function is the stimulus averaged over `sensors` equal bins of `[0, horizon]`.
pub fn parsimonious_simulate(
    stim: &StimulusParams,
    horizon: f64,
    dt: f64,
    sensors: usize,
) -> Result<SolutionField> {
    parsimonious_simulate_with(&ParsimoniousConstants::default(), stim, horizon, dt, sensors)
}

pub fn parsimonious_simulate_with(
    consts: &ParsimoniousConstants,
    stim: &StimulusParams,
    horizon: f64,
    dt: f64,
    sensors: usize,
) -> Result<SolutionField> {
    stim.validate(horizon)?;
    if sensors < 2 {
        return Err(Error::Config("need at least 2 stimulus sensors".into()));
    }
    let steps = step_count(horizon, dt)?;
    let t = UniformGrid::new(0.0, horizon, steps + 1)?;
    let mut state = State {
        v: consts.v0,
        m: consts.m0,
        h: consts.h0,
    };
    let mut values = Vec::with_capacity(steps + 1);
    values.push(state.v);
    let edges = [stim.onset, stim.end()];
    for k in 0..steps {
        let (a, b) = (t.point(k), t.point(k + 1));
        let mut cuts = vec![a];
        cuts.extend(edges.iter().copied().filter(|&e| e > a && e < b));
        cuts.push(b);
        for w in cuts.windows(2) {
            let applied = stim.current(0.5 * (w[0] + w[1]));
            state = consts.rk4(state, w[1] - w[0], applied);
        }
        if !state.is_finite() {
            return Err(Error::NonFiniteState { time: b });
        }
        values.push(state.v);
    }
    let bin = horizon / sensors as f64;
    let sensor_values = (0..sensors)
        .map(|i| stim.mean_current(i as f64 * bin, (i + 1) as f64 * bin))
        .collect();
    SolutionField::new(Domain::Time { t }, sensor_values, values, Provenance::OdeRk4)
}

/// A full action potential overshoots 0 mV and repolarizes below -70 mV by the end.
pub fn is_full_action_potential(trace: &[f64]) -> bool {
    let peak = trace.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    peak > 0.0 && trace.last().is_some_and(|&v| v < -70.0)
}
