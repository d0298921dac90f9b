//! SLOCAL algorithms, the sequential reference executor, and their
//! simulations in the SUPPORTED and passive SUPPORTED models.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use super::AlgorithmError;
use crate::decompose::{greedy_distance_coloring, network_decomposition_power};
use crate::engine::{self, ExecutionTrace, Memory, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use crate::graph::{Graph, Mode, NodeId, SupportedInstance};

/// The radius-`t` ball of the input graph around `center`, with the outputs
/// already written inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SlocalView<O> {
    pub center: NodeId,
    pub graph: Graph,
    pub outputs: BTreeMap<NodeId, O>,
}

impl<O> SlocalView<O> {
    /// Outputs already written at neighbors of the center.
    pub fn neighbor_outputs(&self) -> impl Iterator<Item = &O> + '_ {
        self.graph
            .neighbor_ids(self.center)
            .expect("center is in its view")
            .into_iter()
            .filter_map(move |w| self.outputs.get(&w))
    }
}

pub trait SlocalAlgorithm: Sync {
    type Output: Clone + Send + Sync + PartialEq + Debug;

    fn locality(&self) -> usize;

    fn process(&self, view: &SlocalView<Self::Output>) -> Self::Output;
}

/// Joins iff no neighbor has joined. Locality 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMis;

impl SlocalAlgorithm for GreedyMis {
    type Output = bool;

    fn locality(&self) -> usize {
        1
    }

    fn process(&self, view: &SlocalView<bool>) -> bool {
        !view.neighbor_outputs().any(|&x| x)
    }
}

/// Takes the least color not used by a colored neighbor. Locality 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyColoring;

impl SlocalAlgorithm for GreedyColoring {
    type Output = u32;

    fn locality(&self) -> usize {
        1
    }

    fn process(&self, view: &SlocalView<u32>) -> u32 {
        let used: BTreeSet<u32> = view.neighbor_outputs().copied().collect();
        (1..).find(|c| !used.contains(c)).unwrap()
    }
}

/// Builds the view of `center` from whatever adjacency is known. Fails if
/// the adjacency of some ball node is missing.
fn build_view<'a, O: Clone>(
    center: NodeId,
    t: usize,
    adjacency: impl Fn(NodeId) -> Option<&'a [NodeId]>,
    outputs: &BTreeMap<NodeId, O>,
) -> Result<SlocalView<O>, String> {
    let mut depth: BTreeMap<NodeId, usize> = BTreeMap::from([(center, 0)]);
    let mut queue = VecDeque::from([center]);
    while let Some(x) = queue.pop_front() {
        if depth[&x] == t {
            continue;
        }
        let nbrs = adjacency(x).ok_or_else(|| format!("adjacency of {x} unknown"))?;
        for &y in nbrs {
            if !depth.contains_key(&y) {
                depth.insert(y, depth[&x] + 1);
                queue.push_back(y);
            }
        }
    }
    let mut edges = Vec::new();
    for &x in depth.keys() {
        let nbrs = adjacency(x).ok_or_else(|| format!("adjacency of {x} unknown"))?;
        edges.extend(nbrs.iter().filter(|&&y| x < y && depth.contains_key(&y)).map(|&y| (x, y)));
    }
    let graph = Graph::from_edges(depth.keys().copied(), edges).map_err(|e| e.to_string())?;
    let outputs = depth.keys().filter_map(|v| outputs.get(v).map(|o| (*v, o.clone()))).collect();
    Ok(SlocalView { center, graph, outputs })
}

fn adjacency_lists(g: &Graph) -> BTreeMap<NodeId, Vec<NodeId>> {
    g.ids().iter().map(|&v| (v, g.neighbor_ids(v).expect("own node"))).collect()
}

/// Processes the nodes of `g` in `order`, each seeing the outputs already
/// written within its radius-`t` ball.
pub fn slocal_run_sequential<A: SlocalAlgorithm>(
    g: &Graph,
    alg: &A,
    order: &[NodeId],
) -> Result<BTreeMap<NodeId, A::Output>, AlgorithmError> {
    let distinct: BTreeSet<NodeId> = order.iter().copied().collect();
    if order.len() != g.n() || distinct.len() != g.n() || distinct.iter().any(|&v| !g.contains(v)) {
        return Err(AlgorithmError::Precondition("order is not a permutation of the nodes".into()));
    }
    let adj = adjacency_lists(g);
    let mut outputs = BTreeMap::new();
    for &v in order {
        let view = build_view(v, alg.locality(), |x| adj.get(&x).map(Vec::as_slice), &outputs)
            .map_err(AlgorithmError::Contract)?;
        outputs.insert(v, alg.process(&view));
    }
    Ok(outputs)
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome<O> {
    pub outputs: BTreeMap<NodeId, O>,
    pub trace: ExecutionTrace<O>,
    /// The sequential order the simulation realized.
    pub order: Vec<NodeId>,
}

#[derive(Debug, Clone)]
enum Record<O> {
    Topology(NodeId, Vec<NodeId>),
    Output(NodeId, O),
}

/// Everything a node has heard so far, flooded on as it arrives.
struct Knowledge<O> {
    topo: BTreeMap<NodeId, Vec<NodeId>>,
    outputs: BTreeMap<NodeId, O>,
    fresh: Vec<Record<O>>,
}

impl<O: Clone> Knowledge<O> {
    fn start<M, I>(ctx: &NodeContext<'_, M, I>) -> Self {
        let own: Vec<NodeId> = ctx.input_neighbors().collect();
        Knowledge {
            topo: BTreeMap::from([(ctx.id, own.clone())]),
            outputs: BTreeMap::new(),
            fresh: vec![Record::Topology(ctx.id, own)],
        }
    }

    fn absorb(&mut self, inbox: &[(NodeId, Vec<Record<O>>)]) {
        for record in inbox.iter().flat_map(|(_, rs)| rs) {
            let new = match record {
                Record::Topology(v, nbrs) => self.topo.insert(*v, nbrs.clone()).is_none(),
                Record::Output(v, o) => self.outputs.insert(*v, o.clone()).is_none(),
            };
            if new {
                self.fresh.push(record.clone());
            }
        }
    }

    fn write<A: SlocalAlgorithm<Output = O>>(&mut self, alg: &A, v: NodeId) -> Result<(), ProgramError> {
        let view = build_view(v, alg.locality(), |x| self.topo.get(&x).map(Vec::as_slice), &self.outputs)
            .map_err(|e| ProgramError::new(format!("view of {v} incomplete: {e}")))?;
        let out = alg.process(&view);
        self.outputs.insert(v, out.clone());
        self.fresh.push(Record::Output(v, out));
        Ok(())
    }

    fn finish<M, I>(
        mut self,
        ctx: &NodeContext<'_, M, I>,
        halt_at: usize,
        round: usize,
    ) -> Result<Step<Self, O, Vec<Record<O>>>, ProgramError> {
        if round >= halt_at {
            let own = self.outputs.get(&ctx.id).cloned();
            return own.map(Step::halt).ok_or_else(|| ProgramError::new("own output never arrived"));
        }
        let outbox = if self.fresh.is_empty() { Vec::new() } else { ctx.broadcast(std::mem::take(&mut self.fresh)) };
        Ok(Step::Continue { state: self, outbox })
    }
}

/// Preprocessed memory for the SUPPORTED simulation: the node's place in a
/// network decomposition of `H^t` and the global phase lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompMemory {
    pub t: usize,
    pub color: usize,
    pub leader: NodeId,
    /// Cluster members; only stored at the leader.
    pub members: Vec<NodeId>,
    /// Largest weak diameter in `H` per color.
    pub diameters: Vec<usize>,
}

impl DecompMemory {
    /// Round in which leaders of each color compute, and the final round.
    /// Color `j` leaders compute `d_j + t` rounds after the previous phase
    /// has spread its outputs `d_{j-1}` hops.
    fn schedule(&self) -> (Vec<usize>, usize) {
        let mut start = 0;
        let mut compute = Vec::with_capacity(self.diameters.len());
        for &d in &self.diameters {
            compute.push(start + d + self.t);
            start += 2 * d + self.t;
        }
        (compute, start)
    }
}

pub fn decomposition_memory(h: &Graph, t: usize) -> Result<Memory<DecompMemory>, AlgorithmError> {
    let nd = network_decomposition_power(h, t.max(1));
    let diameters = nd.diameter_per_color();
    let memory = engine::preprocess_global(h, |_| {
        let mut mem = Memory::new();
        for cl in &nd.clusters {
            for &v in &cl.members {
                let members = if v == cl.leader { cl.members.clone() } else { Vec::new() };
                mem.insert(v, DecompMemory { t, color: cl.color, leader: cl.leader, members, diameters: diameters.clone() });
            }
        }
        Ok::<_, String>(mem)
    })?;
    Ok(memory)
}

struct SupportedSim<'a, A> {
    alg: &'a A,
}

impl<A: SlocalAlgorithm> NodeProgram for SupportedSim<'_, A> {
    type Memory = DecompMemory;
    type Input = ();
    type State = Knowledge<A::Output>;
    type Message = Vec<Record<A::Output>>;
    type Output = A::Output;

    fn init(&self, ctx: &mut NodeContext<'_, DecompMemory, ()>) -> Result<StepOf<Self>, ProgramError> {
        let know = Knowledge::start(ctx);
        self.advance(ctx, know, 0)
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, DecompMemory, ()>,
        mut know: Self::State,
        round: usize,
        inbox: &[(NodeId, Self::Message)],
    ) -> Result<StepOf<Self>, ProgramError> {
        know.absorb(inbox);
        self.advance(ctx, know, round)
    }
}

impl<A: SlocalAlgorithm> SupportedSim<'_, A> {
    fn advance(
        &self,
        ctx: &NodeContext<'_, DecompMemory, ()>,
        mut know: Knowledge<A::Output>,
        round: usize,
    ) -> Result<StepOf<Self>, ProgramError> {
        let mem = ctx.require_memory()?;
        let (compute, total) = mem.schedule();
        if ctx.id == mem.leader && round == compute[mem.color - 1] {
            for &v in &mem.members {
                know.write(self.alg, v)?;
            }
        }
        know.finish(ctx, total, round)
    }
}

fn check_memory<M>(inst: &SupportedInstance, memory: &Memory<M>, t: impl Fn(&M) -> usize, want: usize) -> Result<(), AlgorithmError> {
    for &v in inst.support().ids() {
        let m = memory
            .get(&v)
            .ok_or_else(|| AlgorithmError::Precondition(format!("no preprocessed memory at node {v}")))?;
        if t(m) != want {
            return Err(AlgorithmError::Precondition(format!(
                "memory prepared for locality {}, algorithm has locality {want}",
                t(m)
            )));
        }
    }
    Ok(())
}

/// Simulates `alg` on the input graph, one decomposition color at a time:
/// each cluster leader gathers the relevant part of `G` over `H`, processes
/// its members in ascending id order and floods the results.
pub fn simulate_slocal_supported<A: SlocalAlgorithm>(
    inst: &SupportedInstance,
    alg: &A,
    memory: &Memory<DecompMemory>,
    max_rounds: usize,
) -> Result<SimulationOutcome<A::Output>, AlgorithmError> {
    if inst.mode() == Mode::Passive {
        return Err(AlgorithmError::Precondition("the SUPPORTED simulation needs SUPPORTED or LOCAL mode".into()));
    }
    check_memory(inst, memory, |m| m.t, alg.locality())?;
    let trace = engine::run(inst, &SupportedSim { alg }, &RunEnv::with_memory(memory), RunConfig { max_rounds, seed: 0 })?;
    if !trace.halted {
        return Err(AlgorithmError::Contract(format!("simulation did not finish within {max_rounds} rounds")));
    }
    let mut order: Vec<NodeId> = memory.keys().copied().collect();
    order.sort_by_key(|v| (memory[v].color, memory[v].leader, *v));
    Ok(SimulationOutcome { outputs: trace.outputs.clone(), trace, order })
}

/// Preprocessed memory for the passive simulation: a color of a
/// distance-`(2t+1)` coloring of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColorMemory {
    pub t: usize,
    pub color: u32,
    pub palette: u32,
}

pub fn distance_coloring_memory(h: &Graph, t: usize) -> Result<Memory<ColorMemory>, AlgorithmError> {
    let dc = greedy_distance_coloring(h, 2 * t + 1)?;
    let memory = engine::preprocess(h, |_, v| Ok::<_, String>(ColorMemory { t, color: dc.colors[&v], palette: dc.palette }))?;
    Ok(memory)
}

struct PassiveSim<'a, A> {
    alg: &'a A,
}

impl<A: SlocalAlgorithm> NodeProgram for PassiveSim<'_, A> {
    type Memory = ColorMemory;
    type Input = ();
    type State = Knowledge<A::Output>;
    type Message = Vec<Record<A::Output>>;
    type Output = A::Output;

    fn init(&self, ctx: &mut NodeContext<'_, ColorMemory, ()>) -> Result<StepOf<Self>, ProgramError> {
        let know = Knowledge::start(ctx);
        self.advance(ctx, know, 0)
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, ColorMemory, ()>,
        mut know: Self::State,
        round: usize,
        inbox: &[(NodeId, Self::Message)],
    ) -> Result<StepOf<Self>, ProgramError> {
        know.absorb(inbox);
        self.advance(ctx, know, round)
    }
}

impl<A: SlocalAlgorithm> PassiveSim<'_, A> {
    /// Color `k` computes in round `k * t`, by which time the topology of
    /// its ball and every earlier output in it has arrived.
    fn advance(
        &self,
        ctx: &NodeContext<'_, ColorMemory, ()>,
        mut know: Knowledge<A::Output>,
        round: usize,
    ) -> Result<StepOf<Self>, ProgramError> {
        let mem = *ctx.require_memory()?;
        if round == mem.color as usize * mem.t {
            know.write(self.alg, ctx.id)?;
        }
        know.finish(ctx, mem.palette as usize * mem.t, round)
    }
}

/// Simulates `alg` communicating over input edges only. Nodes of the same
/// color are more than `2t` apart and compute simultaneously.
pub fn simulate_slocal_passive<A: SlocalAlgorithm>(
    inst: &SupportedInstance,
    alg: &A,
    memory: &Memory<ColorMemory>,
    max_rounds: usize,
) -> Result<SimulationOutcome<A::Output>, AlgorithmError> {
    if inst.mode() != Mode::Passive {
        return Err(AlgorithmError::Precondition("the passive simulation needs PASSIVE mode".into()));
    }
    check_memory(inst, memory, |m| m.t, alg.locality())?;
    let trace = engine::run(inst, &PassiveSim { alg }, &RunEnv::with_memory(memory), RunConfig { max_rounds, seed: 0 })?;
    if !trace.halted {
        return Err(AlgorithmError::Contract(format!("simulation did not finish within {max_rounds} rounds")));
    }
    let mut order: Vec<NodeId> = memory.keys().copied().collect();
    order.sort_by_key(|v| (memory[v].color, *v));
    Ok(SimulationOutcome { outputs: trace.outputs.clone(), trace, order })
}
