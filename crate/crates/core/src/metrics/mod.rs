//! Directional-bias and generalization metrics, the quadratic level-set bound
//! and the Wilcoxon signed-rank test.

mod bias;
mod wilcoxon;

pub use bias::{
    bias_measurement, bias_measurement_with, delta_star, estimation_error, prediction_error, prediction_error_from_cross,
    quad_levelset_bound, BiasMeasurement, BiasMode, GeneralizationRecord, LevelSetBound,
};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, Alternative, PValueMethod, WilcoxonResult, EXACT_LIMIT};
