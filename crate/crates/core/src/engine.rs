//! Synchronous lockstep execution of node programs.
//!
//! Round 0 is [`NodeProgram::init`]; messages sent in round `r` are in the
//! inbox of round `r + 1`, sorted by sender. A run ends when every node has
//! halted or after `max_rounds` rounds. Nodes are stepped in ascending id
//! order (possibly in parallel; the result is identical).
//!
//! Each node owns a ChaCha8 stream seeded with the experiment seed and
//! positioned on stream number = node id, so randomness does not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::fmt::Display;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, Mode, NodeId, SupportedInstance};

/// Per-node preprocessed memory.
pub type Memory<M> = BTreeMap<NodeId, M>;
pub type Outbox<M> = Vec<(NodeId, M)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ProgramError(pub String);

impl ProgramError {
    pub fn new(msg: impl Into<String>) -> Self {
        ProgramError(msg.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("round {round}: node {from} sent to {to}, which is not a communication neighbor")]
    ProtocolViolation { round: usize, from: NodeId, to: NodeId },
    #[error("node {node} failed in round {round}: {source}")]
    Program { node: NodeId, round: usize, source: ProgramError },
    #[error("preprocessing failed at node {node}: {msg}")]
    Preprocess { node: NodeId, msg: String },
    #[error("no preprocessed memory for node {0}")]
    MissingMemory(NodeId),
    #[error("no input label for node {0}")]
    MissingInput(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub enum Step<S, O, M> {
    Continue { state: S, outbox: Outbox<M> },
    Halt { output: O, outbox: Outbox<M> },
}

impl<S, O, M> Step<S, O, M> {
    pub fn halt(output: O) -> Self {
        Step::Halt { output, outbox: Vec::new() }
    }

    pub fn wait(state: S) -> Self {
        Step::Continue { state, outbox: Vec::new() }
    }
}

pub type StepOf<P> =
    Step<<P as NodeProgram>::State, <P as NodeProgram>::Output, <P as NodeProgram>::Message>;

/// What a node sees of the world besides its messages.
pub struct NodeContext<'a, M, I> {
    pub id: NodeId,
    /// Communication neighbors, ascending: `N_H` in SUPPORTED and LOCAL
    /// mode, `N_G` in PASSIVE mode.
    pub neighbors: Vec<NodeId>,
    /// Aligned with `neighbors`: whether the edge belongs to the input graph.
    pub in_input: Vec<bool>,
    pub memory: Option<&'a M>,
    pub input: Option<&'a I>,
    pub rng: ChaCha8Rng,
}

impl<M, I> NodeContext<'_, M, I> {
    /// Communication neighbors joined by an input edge.
    pub fn input_neighbors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors.iter().zip(&self.in_input).filter_map(|(&v, &f)| f.then_some(v))
    }

    pub fn require_memory(&self) -> Result<&M, ProgramError> {
        self.memory.ok_or_else(|| ProgramError::new("preprocessed memory missing"))
    }

    pub fn require_input(&self) -> Result<&I, ProgramError> {
        self.input.ok_or_else(|| ProgramError::new("input label missing"))
    }

    /// The same message to every communication neighbor.
    pub fn broadcast<T: Clone>(&self, msg: T) -> Outbox<T> {
        self.neighbors.iter().map(|&v| (v, msg.clone())).collect()
    }

    /// The same message to every input-graph neighbor.
    pub fn broadcast_input<T: Clone>(&self, msg: T) -> Outbox<T> {
        self.input_neighbors().map(|v| (v, msg.clone())).collect()
    }
}

/// A per-node state machine. One value of the implementing type is shared
/// by all nodes; per-node data lives in `State`.
pub trait NodeProgram: Sync {
    type Memory: Sync;
    type Input: Sync;
    type State: Send;
    type Message: Clone + Send + Sync;
    type Output: Clone + Send;

    fn init(&self, ctx: &mut NodeContext<'_, Self::Memory, Self::Input>) -> Result<StepOf<Self>, ProgramError>;

    fn step(
        &self,
        ctx: &mut NodeContext<'_, Self::Memory, Self::Input>,
        state: Self::State,
        round: usize,
        inbox: &[(NodeId, Self::Message)],
    ) -> Result<StepOf<Self>, ProgramError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace<O> {
    pub rounds: usize,
    pub halted: bool,
    pub outputs: BTreeMap<NodeId, O>,
    pub messages: u64,
}

impl<O: Serialize> ExecutionTrace<O> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_rounds: 10_000, seed: 0 }
    }
}

pub struct RunEnv<'a, M, I> {
    pub memory: Option<&'a Memory<M>>,
    pub inputs: Option<&'a BTreeMap<NodeId, I>>,
}

impl<M, I> Default for RunEnv<'_, M, I> {
    fn default() -> Self {
        RunEnv { memory: None, inputs: None }
    }
}

impl<'a, M, I> RunEnv<'a, M, I> {
    pub fn with_memory(memory: &'a Memory<M>) -> Self {
        RunEnv { memory: Some(memory), inputs: None }
    }
}

/// Runs `f(H, v)` at every node of `h`. The input graph is not an argument,
/// so preprocessing cannot depend on it.
pub fn preprocess<M, E, F>(h: &Graph, f: F) -> Result<Memory<M>, EngineError>
where
    F: Fn(&Graph, NodeId) -> Result<M, E>,
    E: Display,
{
    warn_if_disconnected(h);
    h.ids()
        .iter()
        .map(|&v| f(h, v).map(|m| (v, m)).map_err(|e| EngineError::Preprocess { node: v, msg: e.to_string() }))
        .collect()
}

/// Preprocessing by a single central computation over `h`, which must
/// produce a value for every node.
pub fn preprocess_global<M, E, F>(h: &Graph, f: F) -> Result<Memory<M>, EngineError>
where
    F: FnOnce(&Graph) -> Result<Memory<M>, E>,
    E: Display,
{
    warn_if_disconnected(h);
    let first = h.ids().first().copied().unwrap_or(0);
    let memory = f(h).map_err(|e| EngineError::Preprocess { node: first, msg: e.to_string() })?;
    match h.ids().iter().find(|v| !memory.contains_key(v)) {
        Some(&v) => Err(EngineError::MissingMemory(v)),
        None => Ok(memory),
    }
}

fn warn_if_disconnected(h: &Graph) {
    if !h.is_connected() {
        log::warn!("support graph is disconnected ({} components)", h.components().len());
    }
}

/// Seeds the random stream of node `id`.
pub fn node_rng(seed: u64, id: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

enum Slot<S, O> {
    Running(S),
    Halted(O),
    Taken,
}

const PARALLEL_THRESHOLD: usize = 512;

pub fn run<P: NodeProgram>(
    inst: &SupportedInstance,
    program: &P,
    env: &RunEnv<'_, P::Memory, P::Input>,
    config: RunConfig,
) -> Result<ExecutionTrace<P::Output>, EngineError> {
    let h = inst.support();
    let n = h.n();
    let mut contexts = Vec::with_capacity(n);
    for i in 0..n {
        let id = h.id(i);
        let (neighbors, in_input): (Vec<NodeId>, Vec<bool>) = match inst.mode() {
            Mode::Passive => inst.input_neighbors(i).map(|j| (h.id(j), true)).unzip(),
            Mode::Local | Mode::Supported => {
                h.neighbors(i).iter().zip(inst.input_flags(i)).map(|(&j, &f)| (h.id(j), f)).unzip()
            }
        };
        let memory = match env.memory {
            Some(map) => Some(map.get(&id).ok_or(EngineError::MissingMemory(id))?),
            None => None,
        };
        let input = match env.inputs {
            Some(map) => Some(map.get(&id).ok_or(EngineError::MissingInput(id))?),
            None => None,
        };
        contexts.push(NodeContext { id, neighbors, in_input, memory, input, rng: node_rng(config.seed, id) });
    }

    let results: Vec<Result<StepOf<P>, ProgramError>> = map_nodes(&mut contexts, |ctx| program.init(ctx));
    let mut slots: Vec<Slot<P::State, P::Output>> = Vec::with_capacity(n);
    let mut messages = 0u64;
    let mut inboxes: Vec<Vec<(NodeId, P::Message)>> = vec![Vec::new(); n];
    let outboxes = collect_steps(h, results, &mut slots)?;
    deliver(h, &contexts, outboxes, 0, &slots, &mut inboxes, &mut messages)?;

    let mut round = 0;
    while round < config.max_rounds && slots.iter().any(|s| matches!(s, Slot::Running(_))) {
        round += 1;
        let taken: Vec<Slot<P::State, P::Output>> = std::mem::take(&mut slots);
        let delivered = std::mem::replace(&mut inboxes, vec![Vec::new(); n]);
        let step_one = |((ctx, slot), inbox): ((&mut NodeContext<'_, P::Memory, P::Input>, Slot<P::State, P::Output>), Vec<(NodeId, P::Message)>)| match slot {
            Slot::Running(state) => (Slot::Taken, Some(program.step(ctx, state, round, &inbox))),
            other => (other, None),
        };
        let stepped: Vec<_> = if n >= PARALLEL_THRESHOLD {
            contexts.par_iter_mut().zip(taken).zip(delivered).map(step_one).collect()
        } else {
            contexts.iter_mut().zip(taken).zip(delivered).map(step_one).collect()
        };
        let mut results = Vec::with_capacity(n);
        for (slot, r) in stepped {
            slots.push(slot);
            results.push(r);
        }
        let mut outboxes = vec![Vec::new(); n];
        for (i, r) in results.into_iter().enumerate() {
            if let Some(r) = r {
                let step = r.map_err(|source| EngineError::Program { node: h.id(i), round, source })?;
                outboxes[i] = match step {
                    Step::Continue { state, outbox } => {
                        slots[i] = Slot::Running(state);
                        outbox
                    }
                    Step::Halt { output, outbox } => {
                        slots[i] = Slot::Halted(output);
                        outbox
                    }
                };
            }
        }
        deliver(h, &contexts, outboxes, round, &slots, &mut inboxes, &mut messages)?;
    }

    let halted = slots.iter().all(|s| matches!(s, Slot::Halted(_)));
    let outputs = slots
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Slot::Halted(o) => Some((h.id(i), o)),
            _ => None,
        })
        .collect();
    Ok(ExecutionTrace { rounds: round, halted, outputs, messages })
}

fn map_nodes<C: Send, R: Send>(contexts: &mut [C], f: impl Fn(&mut C) -> R + Sync + Send) -> Vec<R> {
    if contexts.len() >= PARALLEL_THRESHOLD {
        contexts.par_iter_mut().map(f).collect()
    } else {
        contexts.iter_mut().map(f).collect()
    }
}

fn collect_steps<S, O, M>(
    h: &Graph,
    results: Vec<Result<Step<S, O, M>, ProgramError>>,
    slots: &mut Vec<Slot<S, O>>,
) -> Result<Vec<Outbox<M>>, EngineError> {
    let mut outboxes = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r.map_err(|source| EngineError::Program { node: h.id(i), round: 0, source })? {
            Step::Continue { state, outbox } => {
                slots.push(Slot::Running(state));
                outboxes.push(outbox);
            }
            Step::Halt { output, outbox } => {
                slots.push(Slot::Halted(output));
                outboxes.push(outbox);
            }
        }
    }
    Ok(outboxes)
}

fn deliver<S, O, M, Mem, I>(
    h: &Graph,
    contexts: &[NodeContext<'_, Mem, I>],
    outboxes: Vec<Outbox<M>>,
    round: usize,
    slots: &[Slot<S, O>],
    inboxes: &mut [Vec<(NodeId, M)>],
    messages: &mut u64,
) -> Result<(), EngineError> {
    for (i, outbox) in outboxes.into_iter().enumerate() {
        let ctx = &contexts[i];
        for (to, msg) in outbox {
            if ctx.neighbors.binary_search(&to).is_err() {
                return Err(EngineError::ProtocolViolation { round, from: ctx.id, to });
            }
            *messages += 1;
            let j = h.index_of(to)?;
            if matches!(slots[j], Slot::Running(_)) {
                inboxes[j].push((ctx.id, msg));
            }
        }
    }
    Ok(())
}
