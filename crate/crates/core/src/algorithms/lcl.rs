//! Constant-time LCL solving with a precomputed distance coloring: the base
//! algorithm runs for `T(n₀)` rounds with the colors as identifiers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::color_reduction::{id_color_reduction_rounds, IdColorReduction, LocalIds};
use super::AlgorithmError;
use crate::decompose::greedy_distance_coloring;
use crate::engine::{self, Memory, NodeProgram, RunConfig, RunEnv};
use crate::graph::{Graph, NodeId, SupportedInstance};
use crate::verify::{check_labeling_with_bound, CheckReport, Label, Labeling, LclProblem, OutputLabel};

/// A deterministic LOCAL algorithm with a known running time, reading
/// identifiers from [`LocalIds`].
pub trait BaseAlgorithm {
    type Program: NodeProgram<Memory = LocalIds, Input = ()>;

    fn name(&self) -> &str;

    /// Rounds used on graphs with identifiers at most `n` and degree at most `delta`.
    fn running_time(&self, n: u128, delta: usize) -> usize;

    fn instantiate(&self, n: u128, delta: usize) -> Self::Program;

    fn to_label(&self, output: &<Self::Program as NodeProgram>::Output) -> OutputLabel;
}

impl BaseAlgorithm for IdColorReduction {
    type Program = IdColorReduction;

    fn name(&self) -> &str {
        "id_color_reduction"
    }

    fn running_time(&self, n: u128, delta: usize) -> usize {
        id_color_reduction_rounds(n, delta)
    }

    fn instantiate(&self, n: u128, delta: usize) -> IdColorReduction {
        IdColorReduction::new(n, delta)
    }

    fn to_label(&self, output: &u32) -> OutputLabel {
        OutputLabel::Color(*output)
    }
}

/// Smallest `n` with `Δ^{2T(n)+2} + 1 ≤ n`, or `None` on overflow.
pub fn derive_n0(delta: usize, running_time: impl Fn(u128) -> usize) -> Option<u128> {
    let mut n: u128 = 1;
    loop {
        let exp = u32::try_from(2 * running_time(n) + 2).ok()?;
        let need = (delta as u128).checked_pow(exp)?.checked_add(1)?;
        if need <= n {
            return Some(n);
        }
        n = need;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LclCollapseParams {
    pub delta: usize,
    pub n0: u128,
    /// `T(n₀)`.
    pub base_rounds: usize,
    /// `2T(n₀) + 2`.
    pub distance: usize,
}

pub fn lcl_collapse_params<B: BaseAlgorithm>(delta: usize, base: &B) -> Result<LclCollapseParams, AlgorithmError> {
    let n0 = derive_n0(delta, |n| base.running_time(n, delta))
        .ok_or_else(|| AlgorithmError::Precondition(format!("n0 overflows for degree {delta}")))?;
    let base_rounds = base.running_time(n0, delta);
    Ok(LclCollapseParams { delta, n0, base_rounds, distance: 2 * base_rounds + 2 })
}

/// Distance-`(2T(n₀)+2)` coloring of `h`, handed out as identifiers.
pub fn lcl_collapse_preprocess(h: &Graph, params: &LclCollapseParams) -> Result<Memory<LocalIds>, AlgorithmError> {
    if h.max_degree() > params.delta {
        return Err(AlgorithmError::Precondition(format!(
            "support degree {} exceeds the bound {}",
            h.max_degree(),
            params.delta
        )));
    }
    let phi = greedy_distance_coloring(h, params.distance)?;
    if phi.palette as u128 > params.n0 {
        return Err(AlgorithmError::Precondition(format!("palette {} exceeds n0 = {}", phi.palette, params.n0)));
    }
    let memory = engine::preprocess(h, |h, v| {
        let neighbors = h.neighbor_ids(v)?.into_iter().map(|w| (w, phi.colors[&w] as u128)).collect();
        Ok::<_, crate::graph::GraphError>(LocalIds { own: phi.colors[&v] as u128, neighbors })
    })?;
    Ok(memory)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LclOutcome {
    pub params: LclCollapseParams,
    pub labels: Labeling,
    pub rounds: usize,
    pub messages: u64,
    pub report: CheckReport,
}

/// Runs `base` for `T(n₀)` rounds on the input graph and checks the result
/// against `problem`.
pub fn lcl_collapse_solve<B: BaseAlgorithm>(
    inst: &SupportedInstance,
    base: &B,
    params: &LclCollapseParams,
    memory: &Memory<LocalIds>,
    problem: &dyn LclProblem,
) -> Result<LclOutcome, AlgorithmError> {
    let program = base.instantiate(params.n0, params.delta);
    let config = RunConfig { max_rounds: params.base_rounds, seed: 0 };
    let trace = engine::run(inst, &program, &RunEnv::with_memory(memory), config)?;
    if !trace.halted {
        return Err(AlgorithmError::Contract(format!(
            "{} did not halt within T(n0) = {} rounds",
            base.name(),
            params.base_rounds
        )));
    }
    let labels: BTreeMap<NodeId, Label> =
        trace.outputs.iter().map(|(&v, o)| (v, Label::new(base.to_label(o)))).collect();
    let report = check_labeling_with_bound(&inst.subgraph(), problem, &labels, params.delta)?;
    if !report.accepted {
        let (v, why) = &report.violations[0];
        return Err(AlgorithmError::CheckFailed(format!("{}: node {v}: {why}", problem.name())));
    }
    Ok(LclOutcome { params: *params, labels, rounds: trace.rounds, messages: trace.messages, report })
}
