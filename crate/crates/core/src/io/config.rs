use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Loss;
use crate::operators::DeepONetArch;
use crate::problems::{Problem, Resolution};
use crate::training::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleProfile {
    /// Reduced sample counts, grids and widths for a single CPU core.
    Desk,
    /// Reference sample counts, grids and widths.
    Full,
}

impl std::str::FromStr for ScaleProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Self::Desk),
            "full" => Ok(Self::Full),
            other => Err(Error::Config(format!("unknown profile '{other}' (desk or full)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub cutnet_hidden: Vec<usize>,
    pub operator: DeepONetArch,
    pub baseline: DeepONetArch,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Paths {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Everything a pipeline run depends on. Written next to every output so a
/// run can be repeated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub profile: ScaleProfile,
    pub n_samples: usize,
    pub resolution: Resolution,
    /// Spatial points of the exact solutions used for testing.
    pub test_nx: usize,
    pub dis_n: usize,
    /// Cells masked on each side of an extracted jump.
    pub band_cells: usize,
    /// Fraction of the domain covered by the Dis windows.
    pub window_frac: f64,
    pub arch: Architecture,
    pub cutnet_train: TrainConfig,
    pub operator_train: TrainConfig,
    pub baseline_train: TrainConfig,
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
}

fn widths(cut: usize, op: usize, latent: usize, base: usize, base_latent: usize) -> Architecture {
    Architecture {
        cutnet_hidden: vec![cut; 3],
        operator: DeepONetArch::uniform(op, 3, latent),
        baseline: DeepONetArch::uniform(base, 3, base_latent),
    }
}

impl ExperimentConfig {
    pub fn for_profile(problem: Problem, profile: ScaleProfile) -> Self {
        match profile {
            ScaleProfile::Desk => Self::desk(problem),
            ScaleProfile::Full => Self::full(problem),
        }
    }

    /// Reduced setting: operator and baseline widths a quarter of the
    /// reference ones, cutting nets at full width.
    pub fn desk(problem: Problem) -> Self {
        let full = Self::full(problem);
        let quarter = |a: &DeepONetArch| DeepONetArch {
            branch_hidden: a.branch_hidden.iter().map(|w| w / 4).collect(),
            trunk_hidden: a.trunk_hidden.iter().map(|w| w / 4).collect(),
            latent: a.latent / 4,
            activation: a.activation,
        };
        let arch = Architecture {
            cutnet_hidden: full.arch.cutnet_hidden.clone(),
            operator: quarter(&full.arch.operator),
            baseline: quarter(&full.arch.baseline),
        };
        let (n_samples, cut_epochs, op_epochs, op_budget) = match problem {
            // 200 train + 22 test
            Problem::Advection => (222, 100, 200, 128),
            // 100 train + 12 validation + 12 test
            Problem::BurgersExact | Problem::BurgersGodunov => (124, 100, 200, 256),
            // 60 / 15 / 15
            Problem::Parsimonious => (90, 1000, 100, 200),
        };
        let train = |epochs: usize, budget: Option<usize>| TrainConfig {
            epochs,
            budget,
            ..TrainConfig::default()
        };
        Self {
            profile: ScaleProfile::Desk,
            n_samples,
            resolution: Resolution::desk(problem),
            arch,
            cutnet_train: TrainConfig {
                epochs: cut_epochs,
                batch_size: 256,
                ..full.cutnet_train.clone()
            },
            operator_train: train(op_epochs, Some(op_budget)),
            baseline_train: train(op_epochs, Some(op_budget)),
            ..full
        }
    }

    pub fn full(problem: Problem) -> Self {
        let (n_samples, arch, budget, test_nx) = match problem {
            Problem::Advection => (500, widths(64, 256, 128, 512, 128), None, 1000),
            Problem::BurgersExact | Problem::BurgersGodunov => {
                (250, widths(40, 256, 256, 350, 128), Some(4096), 1000)
            }
            Problem::Parsimonious => (300, widths(40, 256, 128, 450, 128), Some(2000), 0),
        };
        let train = TrainConfig {
            epochs: 10_000,
            budget,
            ..TrainConfig::default()
        };
        Self {
            problem,
            profile: ScaleProfile::Full,
            n_samples,
            resolution: Resolution::full(problem),
            test_nx,
            dis_n: problem.dis_n(),
            band_cells: if problem == Problem::BurgersGodunov { 3 } else { 1 },
            window_frac: 0.1,
            arch,
            cutnet_train: TrainConfig {
                budget: None,
                loss: Loss::L1,
                ..train.clone()
            },
            operator_train: train.clone(),
            baseline_train: train,
            seed: 0,
            paths: Paths::default(),
        }
    }

    /// Same seed for every training stage, taken from the experiment seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.cutnet_train.seed = seed;
        self.operator_train.seed = seed;
        self.baseline_train.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dis_n != self.problem.dis_n() {
            return Err(Error::Config(format!(
                "dis_n {} does not match {} (expects {})",
                self.dis_n,
                self.problem,
                self.problem.dis_n()
            )));
        }
        if self.n_samples == 0 || self.resolution.sensors == 0 {
            return Err(Error::Config("sample and sensor counts must be positive".into()));
        }
        if !(self.window_frac > 0.0 && self.window_frac < 1.0) {
            return Err(Error::Config(format!("window fraction {} outside (0, 1)", self.window_frac)));
        }
        if !self.problem.is_time_series() && self.test_nx < 2 {
            return Err(Error::Config("test grid needs at least 2 points".into()));
        }
        for t in [&self.cutnet_train, &self.operator_train, &self.baseline_train] {
            t.validate()?;
        }
        Ok(())
    }

    /// Test-grid resolution: the training grid with `test_nx` points in space.
    pub fn test_resolution(&self) -> Resolution {
        if self.problem.is_time_series() {
            self.resolution
        } else {
            Resolution {
                nx: self.test_nx,
                ..self.resolution
            }
        }
    }
}
