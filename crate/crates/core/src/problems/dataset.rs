use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::advection::{self, advection_exact, AdvectionIC};
use super::burgers::{self, burgers_exact, burgers_godunov, RiemannIC};
use super::field::SolutionField;
use super::parsimonious::{self, is_full_action_potential, parsimonious_simulate, StimulusParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Advection,
    BurgersExact,
    BurgersGodunov,
    Parsimonious,
}

impl Problem {
    pub const ALL: [Problem; 4] = [
        Problem::Advection,
        Problem::BurgersExact,
        Problem::BurgersGodunov,
        Problem::Parsimonious,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Advection => "advection",
            Problem::BurgersExact => "burgers_exact",
            Problem::BurgersGodunov => "burgers_godunov",
            Problem::Parsimonious => "parsimonious",
        }
    }

    /// Fixed number of discontinuities (or transition boundaries) per slice.
    pub fn dis_n(self) -> usize {
        match self {
            Problem::Advection | Problem::Parsimonious => 2,
            Problem::BurgersExact | Problem::BurgersGodunov => 1,
        }
    }

    pub fn region_count(self) -> usize {
        self.dis_n() + 1
    }

    /// `(validation, test)` fractions; the rest trains.
    fn split_fractions(self) -> (f64, f64) {
        match self {
            Problem::Advection => (0.0, 0.1),
            Problem::BurgersExact | Problem::BurgersGodunov => (0.1, 0.1),
            Problem::Parsimonious => (1.0 / 6.0, 1.0 / 6.0),
        }
    }

    pub fn is_time_series(self) -> bool {
        self == Problem::Parsimonious
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "advection" => Ok(Problem::Advection),
            "burgers_exact" => Ok(Problem::BurgersExact),
            // the benchmark trains on solver output
            "burgers" | "burgers_godunov" => Ok(Problem::BurgersGodunov),
            "parsimonious" => Ok(Problem::Parsimonious),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Grid and sensor settings for data generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub nx: usize,
    pub nt: usize,
    /// ODE step (ms); only used by the parsimonious model.
    pub dt: f64,
    pub horizon: f64,
    pub sensors: usize,
    pub cfl: f64,
}

impl Resolution {
    /// Resolution of the reference datasets.
    pub fn full(problem: Problem) -> Self {
        let base = Self {
            nx: 500,
            nt: 15,
            dt: parsimonious::DEFAULT_DT,
            horizon: parsimonious::DEFAULT_HORIZON,
            sensors: 100,
            cfl: 0.5,
        };
        match problem {
            Problem::Advection => base,
            Problem::BurgersExact | Problem::BurgersGodunov => Self {
                nx: 1000,
                nt: 1000,
                ..base
            },
            Problem::Parsimonious => base,
        }
    }

    /// Reduced grids that keep a whole benchmark within minutes on one core.
    pub fn desk(problem: Problem) -> Self {
        match problem {
            Problem::Advection => Self::full(problem),
            Problem::BurgersExact | Problem::BurgersGodunov => Self {
                nx: 500,
                nt: 200,
                ..Self::full(problem)
            },
            Problem::Parsimonious => Self {
                dt: 0.01,
                ..Self::full(problem)
            },
        }
    }
}

/// Parameters that generated one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleParams {
    Advection(AdvectionIC),
    Riemann(RiemannIC),
    Stimulus(StimulusParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub params: SampleParams,
    pub field: SolutionField,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    /// Contiguous split: `floor(n * f_val)` validation and `floor(n * f_test)`
    /// test samples at the end, the rest train.
    pub fn contiguous(n: usize, val_frac: f64, test_frac: f64) -> Self {
        let n_val = (n as f64 * val_frac + 1e-9).floor() as usize;
        let n_test = (n as f64 * test_frac + 1e-9).floor() as usize;
        let n_train = n - n_val - n_test;
        Self {
            train: (0..n_train).collect(),
            val: (n_train..n_train + n_val).collect(),
            test: (n_train + n_val..n).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub problem: Problem,
    pub resolution: Resolution,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub splits: Splits,
}

impl Dataset {
    pub fn train(&self) -> impl Iterator<Item = &Sample> {
        self.splits.train.iter().map(|&i| &self.samples[i])
    }

    pub fn val(&self) -> impl Iterator<Item = &Sample> {
        self.splits.val.iter().map(|&i| &self.samples[i])
    }

    pub fn test(&self) -> impl Iterator<Item = &Sample> {
        self.splits.test.iter().map(|&i| &self.samples[i])
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    rng.gen_range(lo..=hi)
}

const MAX_STIMULUS_DRAWS: usize = 10_000;

/// Generates one sample from its own random stream.
pub fn generate_sample(problem: Problem, res: &Resolution, seed: u64, index: usize) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    match problem {
        Problem::Advection => {
            let ic = AdvectionIC::new(
                uniform(&mut rng, advection::HEIGHT_RANGE),
                uniform(&mut rng, advection::WIDTH_RANGE),
                uniform(&mut rng, advection::MIDPOINT_RANGE),
            )?;
            let field = advection_exact(&ic, res.nx, res.nt, res.sensors)?;
            Ok(Sample {
                params: SampleParams::Advection(ic),
                field,
            })
        }
        Problem::BurgersExact | Problem::BurgersGodunov => {
            let ic = RiemannIC::new(
                uniform(&mut rng, burgers::U_LEFT_RANGE),
                uniform(&mut rng, burgers::X_D_RANGE),
            );
            let field = if problem == Problem::BurgersExact {
                burgers_exact(&ic, res.nx, res.nt, res.sensors)?.0
            } else {
                burgers_godunov(&ic, res.nx, res.nt, res.cfl, res.sensors)?
            };
            Ok(Sample {
                params: SampleParams::Riemann(ic),
                field,
            })
        }
        Problem::Parsimonious => {
            for _ in 0..MAX_STIMULUS_DRAWS {
                let stim = StimulusParams {
                    onset: uniform(&mut rng, parsimonious::ONSET_RANGE),
                    duration: uniform(&mut rng, parsimonious::DURATION_RANGE),
                    amplitude: uniform(&mut rng, parsimonious::AMPLITUDE_RANGE),
                };
                // oversized charges can drive the state to overflow; reject those too
                match parsimonious_simulate(&stim, res.horizon, res.dt, res.sensors) {
                    Ok(field) if is_full_action_potential(&field.values) => {
                        return Ok(Sample {
                            params: SampleParams::Stimulus(stim),
                            field,
                        });
                    }
                    Ok(_) | Err(Error::NonFiniteState { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Config(format!(
                "no stimulus in {MAX_STIMULUS_DRAWS} draws produced a full action potential"
            )))
        }
    }
}

/// Runs `f` on a pool capped by `CUTOP_THREADS` (all cores when unset).
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var("CUTOP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Samples parameters uniformly from the problem's ranges and solves each case.
/// Sample `i` depends only on `(seed, i)`, so the result is independent of
/// thread count.
pub fn generate_dataset(
    problem: Problem,
    n_samples: usize,
    seed: u64,
    res: &Resolution,
) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be positive".into()));
    }
    let samples = with_thread_cap(|| {
        (0..n_samples)
            .into_par_iter()
            .map(|i| generate_sample(problem, res, seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let (fv, ft) = problem.split_fractions();
    Ok(Dataset {
        problem,
        resolution: *res,
        seed,
        samples,
        splits: Splits::contiguous(n_samples, fv, ft),
    })
}
