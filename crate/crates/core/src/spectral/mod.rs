//! Symmetric eigen-decomposition, Gershgorin and interlacing utilities, the
//! lead-column projection pair and the Gram-matrix inequality suite.

mod eigen;
mod gershgorin;
mod projection;
mod suite;

pub use eigen::{eig_sym, EigenDecomposition};
pub use gershgorin::{
    check_eigen_intervals, eigen_interval_from_dominance, eigenvalues_within_discs, gershgorin_discs, gershgorin_excess,
    GershgorinDisc, IntervalCheck,
};
pub use projection::{lead_index, projection_pair, ProjectionPair};
pub use suite::{verify_spectral_suite, HPrecondition, Relation, SpectralReport, SuiteEntry};
