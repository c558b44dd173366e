//! Ground-truth data for the three benchmark problems.

pub mod advection;
pub mod burgers;
mod dataset;
mod field;
pub mod parsimonious;

pub use advection::{advection_exact, AdvectionIC};
pub use burgers::{burgers_exact, burgers_godunov, characteristics_shock_time, RiemannIC, ShockPath};
pub use dataset::{
    generate_dataset, generate_sample, with_thread_cap, Dataset, Problem, Resolution, Sample,
    SampleParams, Splits,
};
pub use field::{Domain, Provenance, SolutionField, UniformGrid};
pub use parsimonious::{parsimonious_simulate, ParsimoniousConstants, StimulusParams};
