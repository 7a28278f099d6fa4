//! Closed-form solution, SGD/GD updates, step-size planning and schedule execution.

mod plan;
mod run;
mod solve;

pub use plan::{
    feasibility_from_constants, plan_step_sizes, step_diagnostics, Feasibility, Method, Stage, StepDiagnostics, StepPlan,
    TheoryConstants,
};
pub use run::{run_schedule, run_schedule_every, StepRecord, Trajectory, DIVERGENCE_FACTOR};
pub use solve::{closed_form_solution, gd_step, sgd_step, Problem};
