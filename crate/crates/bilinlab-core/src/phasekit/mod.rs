//! Phase functions, metrics, the eikonal solver, and the non-degeneracy and
//! transversality checks.

pub mod eikonal;
pub mod metric;
pub mod phase;
pub mod transversality;

pub use eikonal::{choose_alpha, solve_eikonal, EikonalGrid, EikonalOptions, EikonalPhase, RaySlice, RayState};
pub use metric::{Metric, TrigTerm};
pub use phase::{mixed_hessian, Interval, PhaseFunction, PhaseKind, ValidityBox};
pub use transversality::{
    normal_vector, normal_vector_with_floor, transversality_margin, Lattice, SamplePoint, TransversalityReport, RANK_FLOOR,
};
