//! Distributed algorithms and their sequential references.

mod color_reduction;
mod lcl;
mod mis;
mod passive;
mod sinkless;
mod slocal;

use thiserror::Error;

use crate::decompose::DecomposeError;
use crate::engine::EngineError;
use crate::graph::GraphError;
use crate::verify::VerifyError;

pub use color_reduction::{id_color_reduction_rounds, ids_as_memory, IdColorReduction, LocalIds};
pub use lcl::{
    derive_n0, lcl_collapse_params, lcl_collapse_preprocess, lcl_collapse_solve, BaseAlgorithm, LclCollapseParams,
    LclOutcome,
};
pub use mis::{
    brute_force_alpha, brute_force_mis, brute_force_mis_with_cap, cluster_mis_preprocess, cluster_optimal_mis,
    is_independent, random_priority_mis, ClusterMemory, ClusterOptimalMis, RandomPriorityMis, DEFAULT_MIS_CAP,
    DEFAULT_PRIORITY_DEPTH,
};
pub use passive::{passive_local_simulation, virtual_support};
pub use sinkless::{global_sinkless_orientation, SinklessResult, SinklessVariant};
pub use slocal::{
    decomposition_memory, distance_coloring_memory, simulate_slocal_passive, simulate_slocal_supported,
    slocal_run_sequential, ColorMemory, DecompMemory, GreedyColoring, GreedyMis, SimulationOutcome, SlocalAlgorithm,
    SlocalView,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance of size {size} exceeds the exact-solver cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("checker rejected the output: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}
