//! Six paths joined into a support graph on which two inputs, one made of
//! two cycles and one of a single long cycle, look alike for `⌈n/2⌉ - 1`
//! rounds from the middle of `P₂` and `P₄`.

use super::AdversarialError;
use crate::engine::{self, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use crate::graph::{extract_view, views_isomorphic, Graph, Mode, NodeId, Respect, SupportedInstance, ViewGraph};
use crate::verify::{check_labeling, orientation_labels, BuiltinProblem, CheckReport};

#[derive(Debug, Clone)]
pub struct SinklessFamily {
    pub n: usize,
    pub h: Graph,
    /// Two cycles `(v₁,₁, P₂, v₆,₁, P₃)` and `(v₁,ₙ, P₄, v₆,ₙ, P₅)`.
    pub g: SupportedInstance,
    /// One cycle `(P₂, P₁, P₄, P₆)`.
    pub g_prime: SupportedInstance,
}

impl SinklessFamily {
    /// Identifier of `v_{i,j}`, both indices starting at 1.
    pub fn node(&self, i: usize, j: usize) -> NodeId {
        node(self.n, i, j)
    }

    /// `v₂,⌈n/2⌉` and `v₄,⌈n/2⌉`.
    pub fn probes(&self) -> [NodeId; 2] {
        let c = self.n.div_ceil(2);
        [self.node(2, c), self.node(4, c)]
    }

    pub fn threshold(&self) -> usize {
        self.n.div_ceil(2)
    }
}

fn node(n: usize, i: usize, j: usize) -> NodeId {
    ((i - 1) * n + j) as NodeId
}

fn path(n: usize, i: usize) -> impl Iterator<Item = (NodeId, NodeId)> {
    (1..n).map(move |j| (node(n, i, j), node(n, i, j + 1)))
}

pub fn build_sinkless_family(n: usize) -> Result<SinklessFamily, AdversarialError> {
    if n < 2 {
        return Err(AdversarialError::Precondition(format!("path length must be at least 2, got {n}")));
    }
    let v = |i, j| node(n, i, j);
    let bridges = [
        (v(1, 1), v(2, 1)),
        (v(1, 1), v(3, 1)),
        (v(1, n), v(4, 1)),
        (v(1, n), v(5, 1)),
        (v(6, 1), v(2, n)),
        (v(6, 1), v(3, n)),
        (v(6, n), v(4, n)),
        (v(6, n), v(5, n)),
    ];
    let mut support: Vec<_> = (1..=6).flat_map(|i| path(n, i)).collect();
    support.extend(bridges);
    let h = Graph::from_edges((1..=6 * n).map(|x| x as NodeId), support)?;

    let mut g: Vec<_> = [2, 3, 4, 5].into_iter().flat_map(|i| path(n, i)).collect();
    g.extend(bridges);
    let mut g_prime: Vec<_> = [1, 2, 4, 6].into_iter().flat_map(|i| path(n, i)).collect();
    g_prime.extend([bridges[0], bridges[2], bridges[6], bridges[4]]);

    Ok(SinklessFamily {
        n,
        g: SupportedInstance::new(h.clone(), g, Mode::Supported)?,
        g_prime: SupportedInstance::new(h.clone(), g_prime, Mode::Supported)?,
        h,
    })
}

/// Whether each probe node's radius-`t` support view, with identifiers and
/// input flags, is the same under both inputs.
pub fn probe_views_agree(fam: &SinklessFamily, t: usize) -> Result<Vec<(NodeId, bool)>, AdversarialError> {
    fam.probes()
        .into_iter()
        .map(|v| {
            let a = extract_view(&fam.g, v, t, ViewGraph::Support)?;
            let b = extract_view(&fam.g_prime, v, t, ViewGraph::Support)?;
            Ok((v, views_isomorphic(&a, &b, Respect::ALL).is_some()))
        })
        .collect()
}

/// Runs `program` for at most `t` rounds under both inputs and compares the
/// outputs at the probe nodes.
pub fn probe_agreement<P>(fam: &SinklessFamily, program: &P, t: usize) -> Result<Vec<(NodeId, bool)>, AdversarialError>
where
    P: NodeProgram<Memory = (), Input = ()>,
    P::Output: PartialEq,
{
    let config = RunConfig { max_rounds: t, seed: 0 };
    let a = engine::run(&fam.g, program, &RunEnv::default(), config)?;
    let b = engine::run(&fam.g_prime, program, &RunEnv::default(), config)?;
    if !a.halted || !b.halted {
        return Err(AdversarialError::Precondition(format!("probe program did not halt within {t} rounds")));
    }
    Ok(fam.probes().into_iter().map(|v| (v, a.outputs.get(&v) == b.outputs.get(&v))).collect())
}

/// Checks that the probe nodes cannot tell the inputs apart in `t` rounds:
/// their views agree and the built-in probe programs give equal outputs.
pub fn sinkless_indistinguishability(fam: &SinklessFamily, t: usize) -> Result<CheckReport, AdversarialError> {
    if t >= fam.threshold() {
        return Err(AdversarialError::Precondition(format!(
            "views differ from radius {} on; got t = {t}",
            fam.threshold()
        )));
    }
    let mut violations = Vec::new();
    let mut note = |results: Vec<(NodeId, bool)>, what: &str| {
        violations.extend(results.into_iter().filter(|(_, ok)| !ok).map(|(v, _)| (v, format!("{what} differs"))));
    };
    note(probe_views_agree(fam, t)?, "view");
    note(probe_agreement(fam, &HigherIdProbe, t)?, "higher-id orientation");
    note(probe_agreement(fam, &LowerIdProbe, t)?, "lower-id orientation");
    note(probe_agreement(fam, &MinIdOrientation { rounds: t }, t)?, "minimum-id orientation");
    Ok(CheckReport::from_violations(violations, None))
}

/// Orients every input edge toward its higher-id endpoint; 0 rounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct HigherIdProbe;

/// Orients every input edge toward its lower-id endpoint; 0 rounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowerIdProbe;

macro_rules! orientation_probe {
    ($ty:ty, $keep:expr) => {
        impl NodeProgram for $ty {
            type Memory = ();
            type Input = ();
            type State = ();
            type Message = ();
            type Output = Vec<NodeId>;

            fn init(&self, ctx: &mut NodeContext<'_, (), ()>) -> Result<StepOf<Self>, ProgramError> {
                let keep: fn(NodeId, NodeId) -> bool = $keep;
                Ok(Step::halt(ctx.input_neighbors().filter(|&w| keep(ctx.id, w)).collect()))
            }

            fn step(
                &self,
                _: &mut NodeContext<'_, (), ()>,
                _: (),
                _: usize,
                _: &[(NodeId, ())],
            ) -> Result<StepOf<Self>, ProgramError> {
                Err(ProgramError::new("halts in round 0"))
            }
        }
    };
}

orientation_probe!(HigherIdProbe, |v, w| w > v);
orientation_probe!(LowerIdProbe, |v, w| w < v);

/// Orients each input edge toward the endpoint with the larger pair
/// (smallest id within `rounds - 1` hops, id). Takes `rounds` rounds.
#[derive(Debug, Clone, Copy)]
pub struct MinIdOrientation {
    pub rounds: usize,
}

impl NodeProgram for MinIdOrientation {
    type Memory = ();
    type Input = ();
    type State = NodeId;
    type Message = NodeId;
    type Output = Vec<NodeId>;

    fn init(&self, ctx: &mut NodeContext<'_, (), ()>) -> Result<StepOf<Self>, ProgramError> {
        if self.rounds == 0 {
            return Ok(Step::halt(ctx.input_neighbors().filter(|&w| w > ctx.id).collect()));
        }
        Ok(Step::Continue { state: ctx.id, outbox: ctx.broadcast_input(ctx.id) })
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, (), ()>,
        best: NodeId,
        round: usize,
        inbox: &[(NodeId, NodeId)],
    ) -> Result<StepOf<Self>, ProgramError> {
        if round >= self.rounds {
            let out = inbox.iter().filter(|&&(w, m)| (m, w) > (best, ctx.id)).map(|&(w, _)| w).collect();
            return Ok(Step::halt(out));
        }
        let best = inbox.iter().map(|&(_, m)| m).fold(best, NodeId::min);
        Ok(Step::Continue { state: best, outbox: ctx.broadcast_input(best) })
    }
}

/// Runs an orientation program for `t` rounds under both inputs and reports
/// whether the sinkless-orientation checker accepts each result.
pub fn orientation_verdicts<P>(fam: &SinklessFamily, program: &P, t: usize) -> Result<[bool; 2], AdversarialError>
where
    P: NodeProgram<Memory = (), Input = (), Output = Vec<NodeId>>,
{
    let mut verdicts = [false; 2];
    for (slot, inst) in verdicts.iter_mut().zip([&fam.g, &fam.g_prime]) {
        let trace = engine::run(inst, program, &RunEnv::default(), RunConfig { max_rounds: t, seed: 0 })?;
        let g = inst.subgraph();
        let labels = orientation_labels(&g, &trace.outputs).map_err(|e| AdversarialError::Precondition(e.to_string()))?;
        *slot = check_labeling(&g, &BuiltinProblem::SinklessOrientation, &labels)
            .map_err(|e| AdversarialError::Precondition(e.to_string()))?
            .accepted;
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn degrees(g: &Graph) -> BTreeMap<NodeId, usize> {
        (0..g.n()).map(|i| (g.id(i), g.degree(i))).collect()
    }

    #[test]
    fn construction_counts() {
        let fam = build_sinkless_family(2).unwrap();
        assert_eq!(fam.h.n(), 12);
        assert_eq!(fam.h.m(), 6 + 8);
        let fam = build_sinkless_family(5).unwrap();
        let g = fam.g.subgraph();
        let comps = g.components();
        assert_eq!(comps.iter().filter(|c| c.len() > 1).count(), 2);
        let c1 = comps.iter().find(|c| c.contains(&g.index_of(fam.node(2, 1)).unwrap())).unwrap();
        assert_eq!(c1.len(), 12);
        assert_eq!(fam.h.degree(fam.h.index_of(fam.node(1, 1)).unwrap()), 3);
        assert!(build_sinkless_family(1).is_err());
    }

    #[test]
    fn inputs_are_cycles() {
        for n in [2, 3, 6, 11] {
            let fam = build_sinkless_family(n).unwrap();
            let g = fam.g.subgraph();
            let in_g: Vec<_> = degrees(&g).into_iter().filter(|&(_, d)| d > 0).collect();
            assert!(in_g.iter().all(|&(_, d)| d == 2));
            assert_eq!(in_g.len(), 4 * n + 4);
            let gp = fam.g_prime.subgraph();
            let in_gp: Vec<_> = degrees(&gp).into_iter().filter(|&(_, d)| d > 0).collect();
            assert!(in_gp.iter().all(|&(_, d)| d == 2));
            assert_eq!(in_gp.len(), 4 * n);
            assert_eq!(gp.components().iter().filter(|c| c.len() > 1).count(), 1);
            let hd = degrees(&fam.h);
            assert!(hd.values().all(|&d| (1..=3).contains(&d)));
            let cubic: Vec<NodeId> = hd.iter().filter(|(_, &d)| d == 3).map(|(&v, _)| v).collect();
            assert_eq!(cubic, vec![fam.node(1, 1), fam.node(1, n), fam.node(6, 1), fam.node(6, n)]);
        }
    }

    #[test]
    fn threshold_behavior() {
        let fam = build_sinkless_family(10).unwrap();
        let report = sinkless_indistinguishability(&fam, 4).unwrap();
        assert!(report.accepted, "{report:?}");
        assert!(matches!(sinkless_indistinguishability(&fam, 5), Err(AdversarialError::Precondition(_))));
        assert!(probe_views_agree(&fam, 5).unwrap().iter().any(|(_, ok)| !ok));
        assert!(probe_agreement(&fam, &HigherIdProbe, 0).unwrap().iter().all(|(_, ok)| *ok));
        for t in 0..5 {
            let v = orientation_verdicts(&fam, &MinIdOrientation { rounds: t }, t).unwrap();
            assert!(!v[0] || !v[1]);
        }
        assert_eq!(orientation_verdicts(&fam, &LowerIdProbe, 0).unwrap(), [false, false]);
    }
}
