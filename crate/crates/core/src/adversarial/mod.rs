//! Lower-bound instance families and indistinguishability experiments.

mod double_cover;
mod sinkless_family;

use thiserror::Error;

use crate::algorithms::AlgorithmError;
use crate::engine::EngineError;
use crate::graph::GraphError;

pub use double_cover::{
    base_graph_catalog, build_double_cover, mis_gap_witness, parity_bijection, random_cut_lift,
    verify_cover_isomorphisms, view_distribution_equality, Cut, DoubleCoverFamily, GapReport, Lift,
    MAX_ENUMERATED_BASE,
};
pub use sinkless_family::{
    build_sinkless_family, orientation_verdicts, probe_agreement, probe_views_agree, sinkless_indistinguishability,
    HigherIdProbe, LowerIdProbe, MinIdOrientation, SinklessFamily,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversarialError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance of size {size} exceeds the enumeration cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
}
