//! Deterministic (Δ+1)-coloring from identifiers in `O(log* N)` rounds.
//!
//! The input graph is split into Δ rooted forests (the parent of `v` in
//! forest `i` is its `i`-th neighbor of larger identifier). Each forest is
//! 6-colored by Cole–Vishkin bit reduction, brought down to 3 colors, the
//! per-forest colors are combined into a proper `3^Δ`-coloring, and the top
//! color class is recolored one round at a time until Δ+1 colors remain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{self, EngineError, Memory, NodeContext, NodeProgram, ProgramError, Step, StepOf};
use crate::graph::{Graph, NodeId};

/// Identifiers as seen from one node: its own and those of its support
/// neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalIds {
    pub own: u128,
    pub neighbors: BTreeMap<NodeId, u128>,
}

/// Uses the node identifiers of `h` themselves.
pub fn ids_as_memory(h: &Graph) -> Result<Memory<LocalIds>, EngineError> {
    engine::preprocess(h, |h, v| {
        let neighbors = h.neighbor_ids(v)?.into_iter().map(|w| (w, w as u128)).collect();
        Ok::<_, crate::graph::GraphError>(LocalIds { own: v as u128, neighbors })
    })
}

fn bits(x: u128) -> u32 {
    u128::BITS - x.leading_zeros()
}

/// Palette sizes of the Cole–Vishkin phase, starting from ids in `0..=N`.
fn cv_palettes(n_bound: u128) -> Vec<u128> {
    let mut m = n_bound.saturating_add(1);
    let mut out = vec![m];
    while m > 6 {
        m = 2 * bits(m - 1) as u128;
        out.push(m);
    }
    out
}

fn reduction_rounds(delta: usize) -> usize {
    let top = 3usize.checked_pow(delta as u32).expect("3^delta fits in usize");
    top - delta - 1
}

/// Number of rounds [`IdColorReduction`] takes with ids at most `n_bound`
/// and degree at most `delta`.
pub fn id_color_reduction_rounds(n_bound: u128, delta: usize) -> usize {
    if delta == 0 {
        return 0;
    }
    cv_palettes(n_bound).len() - 1 + 6 + reduction_rounds(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IdColorReduction {
    pub n_bound: u128,
    pub delta: usize,
}

#[derive(Debug, Clone)]
pub enum CrMessage {
    Forests(Vec<u128>),
    Color(u64),
}

pub struct CrState {
    /// Parent in each forest.
    parents: Vec<Option<NodeId>>,
    colors: Vec<u128>,
    before_shift: Vec<u128>,
    color: u64,
}

impl IdColorReduction {
    pub fn new(n_bound: u128, delta: usize) -> Self {
        IdColorReduction { n_bound, delta }
    }

    fn cv_rounds(&self) -> usize {
        cv_palettes(self.n_bound).len() - 1
    }

    pub fn rounds(&self) -> usize {
        id_color_reduction_rounds(self.n_bound, self.delta)
    }
}

fn forest_colors<'a>(inbox: &'a [(NodeId, CrMessage)]) -> impl Fn(NodeId) -> Result<&'a [u128], ProgramError> {
    move |p| {
        inbox
            .iter()
            .find_map(|(from, m)| match m {
                CrMessage::Forests(c) if *from == p => Some(c.as_slice()),
                _ => None,
            })
            .ok_or_else(|| ProgramError::new(format!("no colors from parent {p}")))
    }
}

fn smallest_other(avoid: &[u128]) -> u128 {
    (0..3).find(|c| !avoid.contains(c)).expect("at most two colors avoided")
}

impl NodeProgram for IdColorReduction {
    type Memory = LocalIds;
    type Input = ();
    type State = CrState;
    type Message = CrMessage;
    type Output = u32;

    fn init(&self, ctx: &mut NodeContext<'_, LocalIds, ()>) -> Result<StepOf<Self>, ProgramError> {
        if self.delta == 0 {
            return Ok(Step::halt(1));
        }
        let ids = ctx.require_memory()?;
        let nbrs: Vec<NodeId> = ctx.input_neighbors().collect();
        if nbrs.len() > self.delta {
            return Err(ProgramError::new(format!("degree {} exceeds the bound {}", nbrs.len(), self.delta)));
        }
        if ids.own > self.n_bound {
            return Err(ProgramError::new(format!("identifier {} exceeds the bound {}", ids.own, self.n_bound)));
        }
        let mut higher = Vec::with_capacity(nbrs.len());
        for &w in &nbrs {
            let id = *ids.neighbors.get(&w).ok_or_else(|| ProgramError::new(format!("identifier of {w} unknown")))?;
            if id == ids.own || higher.iter().any(|&(x, _)| x == id) {
                return Err(ProgramError::new(format!("identifier {id} repeated within distance 2")));
            }
            higher.push((id, w));
        }
        higher.retain(|&(id, _)| id > ids.own);
        higher.sort();
        let parents = (0..self.delta).map(|i| higher.get(i).map(|&(_, w)| w)).collect();
        let colors = vec![ids.own; self.delta];
        let outbox = ctx.broadcast_input(CrMessage::Forests(colors.clone()));
        Ok(Step::Continue { state: CrState { parents, colors, before_shift: Vec::new(), color: 0 }, outbox })
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, LocalIds, ()>,
        mut s: CrState,
        round: usize,
        inbox: &[(NodeId, CrMessage)],
    ) -> Result<StepOf<Self>, ProgramError> {
        let cv = self.cv_rounds();
        let parent_colors = forest_colors(inbox);
        if round <= cv {
            for i in 0..self.delta {
                let own = s.colors[i];
                s.colors[i] = match s.parents[i] {
                    None => own & 1,
                    Some(p) => {
                        let k = (own ^ parent_colors(p)?[i]).trailing_zeros() as u128;
                        2 * k + ((own >> k) & 1)
                    }
                };
            }
        } else if round <= cv + 6 {
            let phase = round - cv - 1;
            let removed = 5 - (phase / 2) as u128;
            if phase.is_multiple_of(2) {
                s.before_shift = s.colors.clone();
            }
            for i in 0..self.delta {
                if phase.is_multiple_of(2) {
                    s.colors[i] = match s.parents[i] {
                        None => smallest_other(&[s.colors[i]]),
                        Some(p) => parent_colors(p)?[i],
                    };
                } else if s.colors[i] == removed {
                    let mut avoid = vec![s.before_shift[i]];
                    if let Some(p) = s.parents[i] {
                        avoid.push(parent_colors(p)?[i]);
                    }
                    s.colors[i] = smallest_other(&avoid);
                }
            }
            if round == cv + 6 {
                s.color = s.colors.iter().rev().fold(0u64, |acc, &c| acc * 3 + c as u64);
            }
        } else {
            let eliminated = 3u64.pow(self.delta as u32) - (round - cv - 6) as u64;
            if s.color == eliminated {
                let taken: Vec<u64> = inbox
                    .iter()
                    .filter_map(|(_, m)| match m {
                        CrMessage::Color(c) => Some(*c),
                        _ => None,
                    })
                    .collect();
                s.color = (0..=self.delta as u64).find(|c| !taken.contains(c)).expect("Δ+1 colors suffice");
            }
        }
        if round >= self.rounds() {
            return Ok(Step::halt(s.color as u32 + 1));
        }
        let msg = if round >= cv + 6 { CrMessage::Color(s.color) } else { CrMessage::Forests(s.colors.clone()) };
        let outbox = ctx.broadcast_input(msg);
        Ok(Step::Continue { state: s, outbox })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::is_proper_coloring;
    use crate::engine::{run, RunConfig, RunEnv};
    use crate::graph::{generate, Family, SupportedInstance};

    fn color(g: &Graph) -> (BTreeMap<NodeId, u32>, usize) {
        let mem = ids_as_memory(g).unwrap();
        let prog = IdColorReduction::new(g.ids().iter().copied().max().unwrap_or(0) as u128, g.max_degree());
        let trace = run(&SupportedInstance::local(g.clone()), &prog, &RunEnv::with_memory(&mem), RunConfig::default()).unwrap();
        assert!(trace.halted);
        assert_eq!(trace.rounds, prog.rounds());
        let colors = trace.outputs.iter().map(|(&v, &c)| (v, c)).collect();
        (colors, trace.rounds)
    }

    #[test]
    fn palettes() {
        assert_eq!(cv_palettes(5), vec![6]);
        assert_eq!(cv_palettes(8), vec![9, 8, 6]);
        assert_eq!(cv_palettes((1 << 34) + 1), vec![(1 << 34) + 2, 70, 14, 8, 6]);
        assert_eq!(id_color_reduction_rounds(1000, 0), 0);
        assert_eq!(id_color_reduction_rounds(5, 2), 12);
    }

    #[test]
    fn cycle_and_single_node() {
        let c8 = generate(&Family::Cycle { n: 8 }, 0).unwrap();
        let (colors, _) = color(&c8);
        assert!(is_proper_coloring(&c8, &colors));
        assert!(colors.values().all(|&c| (1..=3).contains(&c)));
        let single = Graph::empty(1);
        let (colors, rounds) = color(&single);
        assert_eq!((colors[&1], rounds), (1, 0));
    }

    #[test]
    fn log_star_growth() {
        let p64 = generate(&Family::Path { n: 64 }, 0).unwrap();
        let (colors, r64) = color(&p64);
        assert!(is_proper_coloring(&p64, &colors) && colors.values().all(|&c| c <= 3));
        let big = generate(&Family::Path { n: 1 << 16 }, 0).unwrap();
        let (colors, rbig) = color(&big);
        assert!(is_proper_coloring(&big, &colors));
        assert!(r64 <= rbig);
    }

    #[test]
    fn various_graphs() {
        for (seed, f) in [
            Family::RandomRegular { n: 40, d: 3 },
            Family::RandomRegular { n: 20, d: 4 },
            Family::Grid { rows: 4, cols: 5 },
            Family::Petersen,
            Family::Star { leaves: 4 },
        ]
        .into_iter()
        .enumerate()
        {
            let g = generate(&f, seed as u64).unwrap();
            let (colors, _) = color(&g);
            assert!(is_proper_coloring(&g, &colors), "{f:?}");
            assert!(colors.values().all(|&c| c as usize <= g.max_degree() + 1), "{f:?}");
        }
    }

    #[test]
    fn duplicate_identifiers_rejected() {
        let p3 = generate(&Family::Path { n: 3 }, 0).unwrap();
        let mut mem = ids_as_memory(&p3).unwrap();
        mem.get_mut(&2).unwrap().neighbors.insert(3, 1);
        let prog = IdColorReduction::new(3, 2);
        let res = run(&SupportedInstance::local(p3), &prog, &RunEnv::with_memory(&mem), RunConfig::default());
        assert!(matches!(res, Err(EngineError::Program { node: 2, .. })));
    }
}
