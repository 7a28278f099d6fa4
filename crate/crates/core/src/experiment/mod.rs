//! Seed-batched experiments on synthetic sine regression and the synthetic
//! directional-bias checks.

mod batch;
mod config;
mod theorems;

pub use batch::{
    compare_schemes, run_experiment, Aggregate, BatchSummary, Comparison, Metric, ProjectionCurves, SchemeSummary, SeedFinal,
};
pub use config::{parse_seeds, DataConfig, ExperimentConfig, SchemeConfig};
pub use theorems::{
    gd_steps_for_alignment, theorem_instance, theorem_suite, TheoremEntry, TheoremReport, TheoremSuiteConfig,
};
