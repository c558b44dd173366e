pub mod error;
pub mod evaluation;
pub mod extract;
pub mod io;
pub mod lifting;
pub mod numerics;
pub mod operators;
pub mod problems;
pub mod training;

pub use error::{Error, Result};
pub use evaluation::{MetricReport, ModelKind};
pub use io::{ExperimentConfig, ScaleProfile};
pub use operators::{CuttingNet, DeepONetModel, PiecewiseSolution};
pub use problems::{Dataset, Problem, SolutionField};
pub use training::{TrainConfig, TrainReport};
