//! Planar distance-geometry toolkit for weighted graphs.
//!
//! Decides realizability of weighted graphs in the Euclidean plane, computes
//! the admissible value sets when a realizable weighted graph is extended one
//! edge at a time (worked out completely for the complete bipartite graph on
//! 3+3 vertices), and counts connected components of pinned configuration
//! spaces, both by an exact branch sweep and by a sampling method that doubles
//! as an independent cross-check.
//!
//! All values are immutable after construction and every operation is a pure
//! function of its inputs (and an explicit seed where randomness is involved),
//! so everything here is safe to use concurrently.

pub mod arc;
pub mod geom;
pub mod graph;
pub mod interval;
pub mod k33;
pub mod moduli;
pub mod realize;
pub mod svg;

pub use arc::{arc_distance_set, circle_annulus_arcs, ArcClass, ArcPart, CircleArcSet, StageBounds};
pub use geom::{Point, Sign};
pub use graph::{Edge, PinnedFrame, Realization, WeightedGraph};
pub use interval::{Interval, IntervalSet};
pub use k33::{
    alpha_interval, beta_set, f_interval, gamma_set, gamma_set_oracle, staged_report, sweep,
    K33Lengths, SignTuple, Stage, StageReport,
};
pub use moduli::{
    component_parity_check, generic_component_count, k33_component_count, ComponentReport,
    ConfigPoint, CountMethod, DimensionFlag, SamplingParams,
};
pub use realize::{
    attempt_realize, attempt_realize_pinned, cayley_menger_det, cycle_closure_interval,
    cycle_realizable, extend_to_realizable, k4_realizable, K4Lengths, RealizeReport, Verdict,
};
