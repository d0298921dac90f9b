//! Double covers of a regular base graph `Q`. The support contains both
//! the two-copy lift and the bipartite lift; random cuts turn either one
//! into inputs whose local views have the same distribution.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AdversarialError;
use crate::algorithms::{brute_force_alpha, AlgorithmError};
use crate::engine::node_rng;
use crate::graph::iso::same_multiset;
use crate::graph::{
    extract_view, generate, graphs_isomorphic, Family, Graph, Mode, NodeId, Respect, SupportedInstance, ViewGraph,
    DEFAULT_ISO_CAP,
};
use crate::verify::CheckReport;

/// Largest base graph whose cuts are enumerated exhaustively.
pub const MAX_ENUMERATED_BASE: usize = 20;

/// One bit per base node, indexed by `id - 1`.
pub type Cut = Vec<bool>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lift {
    /// Built from the two-copy lift: `G(X)` for the cut edges `X`.
    G1,
    /// Built from the bipartite lift: `G(E_Q \ X)`.
    G2,
}

#[derive(Debug, Clone)]
pub struct DoubleCoverFamily {
    pub q: Graph,
    pub k: usize,
    pub n_q: usize,
    pub girth: Option<usize>,
    /// `E(∅) ∪ E(E_Q)`.
    pub h: Graph,
}

impl DoubleCoverFamily {
    /// Identifier of the copy `v_x`.
    pub fn copy(&self, v: NodeId, x: bool) -> NodeId {
        v + if x { self.n_q as NodeId } else { 0 }
    }

    /// Base node and copy bit of a cover node.
    pub fn base_of(&self, id: NodeId) -> (NodeId, bool) {
        let n = self.n_q as NodeId;
        if id > n {
            (id - n, true)
        } else {
            (id, false)
        }
    }

    /// `E(F)`: base edges in `F` cross between the copies, the others stay
    /// inside them.
    pub fn lift_edges(&self, f: &BTreeSet<(NodeId, NodeId)>) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(2 * self.q.m());
        for (u, v) in self.q.edge_ids() {
            let cross = f.contains(&(u, v)) || f.contains(&(v, u));
            for x in [false, true] {
                out.push((self.copy(u, x), self.copy(v, x ^ cross)));
            }
        }
        out
    }

    pub fn lift(&self, f: &BTreeSet<(NodeId, NodeId)>) -> Graph {
        Graph::from_edges(self.h.ids().iter().copied(), self.lift_edges(f)).expect("lift of a simple graph is simple")
    }

    /// Base edges whose endpoints are on different sides of `cut`.
    pub fn cut_edges(&self, cut: &Cut) -> BTreeSet<(NodeId, NodeId)> {
        self.q.edge_ids().into_iter().filter(|&(u, v)| cut[u as usize - 1] != cut[v as usize - 1]).collect()
    }

    pub fn selector(&self, cut: &Cut, which: Lift) -> BTreeSet<(NodeId, NodeId)> {
        let x = self.cut_edges(cut);
        match which {
            Lift::G1 => x,
            Lift::G2 => self.q.edge_ids().into_iter().filter(|e| !x.contains(e)).collect(),
        }
    }

    pub fn instance(&self, cut: &Cut, which: Lift) -> SupportedInstance {
        let edges = self.lift_edges(&self.selector(cut, which));
        SupportedInstance::new(self.h.clone(), edges, Mode::Supported).expect("lifts are inside the support")
    }

    fn check_cut(&self, cut: &Cut) -> Result<(), AdversarialError> {
        if cut.len() != self.n_q {
            return Err(AdversarialError::Precondition(format!("cut has {} bits, base has {} nodes", cut.len(), self.n_q)));
        }
        Ok(())
    }

    fn check_girth(&self, t: usize) -> Result<(), AdversarialError> {
        match self.girth {
            Some(g) if g <= 2 * t + 1 => Err(AdversarialError::Precondition(format!(
                "girth {g} of the base graph must exceed 2t+1 = {}",
                2 * t + 1
            ))),
            _ => Ok(()),
        }
    }
}

pub fn build_double_cover(q: &Graph) -> Result<DoubleCoverFamily, AdversarialError> {
    let n_q = q.n();
    if q.ids().iter().copied().ne(1..=n_q as NodeId) {
        return Err(AdversarialError::Precondition("base identifiers must be exactly 1..=n".into()));
    }
    let k = q.max_degree();
    if (0..n_q).any(|i| q.degree(i) != k) {
        return Err(AdversarialError::Precondition("base graph is not regular".into()));
    }
    let mut fam = DoubleCoverFamily { q: q.clone(), k, n_q, girth: q.girth(), h: Graph::empty(0) };
    let mut edges = fam.lift_edges(&BTreeSet::new());
    edges.extend(fam.lift_edges(&q.edge_ids().into_iter().collect()));
    fam.h = Graph::from_edges((1..=2 * n_q).map(|v| v as NodeId), edges)?;
    Ok(fam)
}

/// A `k`-regular base graph with girth above `girth_above`: a cycle for
/// `k = 2`, Petersen or Heawood for `k = 3`, otherwise a seeded search over
/// random regular graphs on at most 20 nodes.
pub fn base_graph_catalog(k: usize, girth_above: usize, seed: u64) -> Result<Graph, AdversarialError> {
    if k == 2 {
        return Ok(generate(&Family::Cycle { n: (girth_above + 1).max(3) }, 0)?);
    }
    if k == 3 {
        for f in [Family::Petersen, Family::Heawood] {
            let g = generate(&f, 0)?;
            if g.girth().is_some_and(|x| x > girth_above) {
                return Ok(g);
            }
        }
    }
    for n in (k + 1..=MAX_ENUMERATED_BASE).filter(|n| (n * k).is_multiple_of(2)) {
        for attempt in 0..200 {
            let Ok(g) = generate(&Family::RandomRegular { n, d: k }, seed.wrapping_add(attempt)) else {
                continue;
            };
            if g.girth().is_none_or(|x| x > girth_above) {
                return Ok(g);
            }
        }
    }
    Err(AdversarialError::Precondition(format!(
        "no {k}-regular graph with girth above {girth_above} found within {MAX_ENUMERATED_BASE} nodes"
    )))
}

/// A uniformly random cut and the lifted input graph it selects.
pub fn random_cut_lift(fam: &DoubleCoverFamily, which: Lift, seed: u64) -> (Cut, Graph) {
    let mut rng = node_rng(seed, 0);
    let cut: Cut = (0..fam.n_q).map(|_| rng.gen_bool(0.5)).collect();
    let g = fam.lift(&fam.selector(&cut, which));
    (cut, g)
}

/// Checks that swapping the copies of every node on side 1 of `cut` maps
/// the lift selected by `cut` onto `G(∅)` (for `G1`) or `G(E_Q)` (for
/// `G2`). Returns the report and the map as `(v_x, φ(v_x))` pairs.
pub fn verify_cover_isomorphisms(
    fam: &DoubleCoverFamily,
    cut: &Cut,
    which: Lift,
) -> Result<(CheckReport, Vec<(NodeId, NodeId)>), AdversarialError> {
    fam.check_cut(cut)?;
    if fam.h.n() > DEFAULT_ISO_CAP {
        return Err(AdversarialError::Capacity { size: fam.h.n(), cap: DEFAULT_ISO_CAP });
    }
    let source = fam.lift(&fam.selector(cut, which));
    let target = match which {
        Lift::G1 => fam.lift(&BTreeSet::new()),
        Lift::G2 => fam.lift(&fam.q.edge_ids().into_iter().collect()),
    };
    let phi = |id: NodeId| {
        let (v, x) = fam.base_of(id);
        fam.copy(v, x ^ cut[v as usize - 1])
    };
    let witness: Vec<(NodeId, NodeId)> = source.ids().iter().map(|&id| (id, phi(id))).collect();
    let mut violations: Vec<(NodeId, String)> = source
        .edge_ids()
        .into_iter()
        .filter(|&(a, b)| !target.has_edge_ids(phi(a), phi(b)))
        .map(|(a, b)| (a, format!("edge {a}-{b} is not mapped to an edge")))
        .collect();
    if source.m() != target.m() {
        violations.push((0, format!("edge counts differ: {} vs {}", source.m(), target.m())));
    }
    if graphs_isomorphic(&source, &target)?.is_none() {
        violations.push((0, "no isomorphism exists".into()));
    }
    Ok((CheckReport::from_violations(violations, None), witness))
}

/// Adds the parity of the distance from `u` to the cut inside `B_t(u)`.
pub fn parity_bijection(fam: &DoubleCoverFamily, u: NodeId, t: usize, c1: &Cut) -> Result<Cut, AdversarialError> {
    fam.check_cut(c1)?;
    fam.check_girth(t)?;
    let dist = fam.q.bfs(fam.q.index_of(u)?, Some(t));
    Ok((0..fam.n_q).map(|i| c1[i] ^ dist[i].is_some_and(|d| d % 2 == 1)).collect())
}

/// Compares, over all cuts, the multiset of radius-`t` support views of
/// `u0` with input flags (identifiers ignored) between the two
/// constructions.
pub fn view_distribution_equality(fam: &DoubleCoverFamily, u0: NodeId, t: usize) -> Result<CheckReport, AdversarialError> {
    if fam.n_q > MAX_ENUMERATED_BASE {
        return Err(AdversarialError::Capacity { size: fam.n_q, cap: MAX_ENUMERATED_BASE });
    }
    fam.check_girth(t)?;
    fam.h.index_of(u0)?;
    let respect = Respect { ids: false, labels: false, flags: true };
    let views = |which: Lift| -> Result<Vec<_>, AdversarialError> {
        (0u32..1 << fam.n_q)
            .into_par_iter()
            .map(|mask| {
                let cut: Cut = (0..fam.n_q).map(|i| mask >> i & 1 == 1).collect();
                let view = extract_view(&fam.instance(&cut, which), u0, t, ViewGraph::Support)?;
                Ok(view.to_colored(respect))
            })
            .collect()
    };
    let (a, b) = (views(Lift::G1)?, views(Lift::G2)?);
    let violations = if same_multiset(&a, &b) {
        Vec::new()
    } else {
        vec![(u0, format!("view multisets differ over {} cuts", a.len()))]
    };
    Ok(CheckReport::from_violations(violations, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub trials: usize,
    pub mean_g1: f64,
    pub mean_g2: f64,
    /// Standard error of the difference of the means.
    pub std_err: f64,
    pub within_3_sigma: bool,
    /// Maximum independent set of `G(∅)` and `G(E_Q)`, when small enough.
    pub alpha_g1: Option<usize>,
    pub alpha_g2: Option<usize>,
}

fn mean_var(xs: &[usize]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Runs `run` (returning the size of the set it finds) on `trials` random
/// lifts of each kind and compares the mean sizes.
pub fn mis_gap_witness<F>(fam: &DoubleCoverFamily, trials: usize, seed: u64, run: F) -> Result<GapReport, AdversarialError>
where
    F: Fn(&SupportedInstance, u64) -> Result<usize, AlgorithmError> + Sync,
{
    if trials == 0 {
        return Err(AdversarialError::Precondition("at least one trial is needed".into()));
    }
    let side = |which: Lift, stream: u64| -> Result<Vec<usize>, AlgorithmError> {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = node_rng(seed, 2 * i + stream);
                let cut: Cut = (0..fam.n_q).map(|_| rng.gen_bool(0.5)).collect();
                run(&fam.instance(&cut, which), rng.gen())
            })
            .collect()
    };
    let (m1, v1) = mean_var(&side(Lift::G1, 0)?);
    let (m2, v2) = mean_var(&side(Lift::G2, 1)?);
    let std_err = ((v1 + v2) / trials as f64).sqrt();
    let alpha = |f: BTreeSet<(NodeId, NodeId)>| brute_force_alpha(&fam.lift(&f)).ok();
    Ok(GapReport {
        trials,
        mean_g1: m1,
        mean_g2: m2,
        std_err,
        within_3_sigma: (m1 - m2).abs() <= 3.0 * std_err,
        alpha_g1: alpha(BTreeSet::new()),
        alpha_g2: alpha(fam.q.edge_ids().into_iter().collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{brute_force_mis, random_priority_mis};
    use crate::engine::{run, RunConfig, RunEnv};
    use crate::engine::{NodeContext, NodeProgram, ProgramError, Step, StepOf};

    fn c7() -> DoubleCoverFamily {
        build_double_cover(&generate(&Family::Cycle { n: 7 }, 0).unwrap()).unwrap()
    }

    fn petersen() -> DoubleCoverFamily {
        build_double_cover(&generate(&Family::Petersen, 0).unwrap()).unwrap()
    }

    #[test]
    fn cover_shape() {
        let fam = c7();
        assert_eq!(fam.h.n(), 14);
        assert!((0..14).all(|i| fam.h.degree(i) == 4));
        let g1 = fam.lift(&BTreeSet::new());
        assert_eq!(g1.components().len(), 2);
        let g2 = fam.lift(&fam.q.edge_ids().into_iter().collect());
        let zeros: BTreeSet<NodeId> = (1..=7).collect();
        assert!(crate::algorithms::is_independent(&g2, &zeros));
        assert!(g2.is_connected());
        for f in [BTreeSet::new(), fam.cut_edges(&vec![true, false, true, true, false, false, true])] {
            let g = fam.lift(&f);
            assert!((0..g.n()).all(|i| g.degree(i) == 2));
        }
        let star = generate(&Family::Star { leaves: 3 }, 0).unwrap();
        assert!(build_double_cover(&star).is_err());
    }

    #[test]
    fn cuts_and_witnesses() {
        let fam = c7();
        let zero = vec![false; 7];
        assert_eq!(fam.lift(&fam.selector(&zero, Lift::G1)).edge_ids(), fam.lift(&BTreeSet::new()).edge_ids());
        assert_eq!(fam.selector(&zero, Lift::G2).len(), 7);
        let (report, phi) = verify_cover_isomorphisms(&fam, &zero, Lift::G1).unwrap();
        assert!(report.accepted);
        assert!(phi.iter().all(|(a, b)| a == b));
        for seed in 0..10 {
            let (cut, g) = random_cut_lift(&fam, Lift::G1, seed);
            assert_eq!(random_cut_lift(&fam, Lift::G1, seed).0, cut);
            assert!(graphs_isomorphic(&g, &fam.lift(&BTreeSet::new())).unwrap().is_some());
            assert!(verify_cover_isomorphisms(&fam, &cut, Lift::G1).unwrap().0.accepted);
        }
        let pet = petersen();
        for seed in 0..5 {
            let (cut, _) = random_cut_lift(&pet, Lift::G2, seed);
            assert!(verify_cover_isomorphisms(&pet, &cut, Lift::G2).unwrap().0.accepted);
        }
    }

    #[test]
    fn parity() {
        let fam = c7();
        let c1 = vec![false, true, true, false, false, true, false];
        assert_eq!(parity_bijection(&fam, 3, 0, &c1).unwrap(), c1);
        let c2 = parity_bijection(&fam, 1, 1, &vec![false; 7]).unwrap();
        assert_eq!(c2, vec![false, true, false, false, false, false, true]);
        let back = parity_bijection(&fam, 4, 2, &parity_bijection(&fam, 4, 2, &c1).unwrap()).unwrap();
        assert_eq!(back, c1);
        assert!(parity_bijection(&fam, 1, 3, &c1).is_err());
    }

    #[test]
    fn view_distributions() {
        assert!(view_distribution_equality(&c7(), 1, 1).unwrap().accepted);
        assert!(matches!(view_distribution_equality(&c7(), 1, 3), Err(AdversarialError::Precondition(_))));
        assert!(view_distribution_equality(&petersen(), 1, 1).unwrap().accepted);
    }

    #[test]
    fn catalog() {
        assert_eq!(base_graph_catalog(2, 7, 0).unwrap().n(), 8);
        assert_eq!(base_graph_catalog(3, 4, 0).unwrap().n(), 10);
        assert_eq!(base_graph_catalog(3, 5, 0).unwrap().n(), 14);
        let g = base_graph_catalog(4, 3, 1).unwrap();
        assert!((0..g.n()).all(|i| g.degree(i) == 4) && g.girth().unwrap() > 3);
        assert!(base_graph_catalog(3, 7, 0).is_err());
    }

    /// Joins with probability `1/d`, without communicating.
    struct Coin(f64);

    impl NodeProgram for Coin {
        type Memory = ();
        type Input = ();
        type State = ();
        type Message = ();
        type Output = bool;

        fn init(&self, ctx: &mut NodeContext<'_, (), ()>) -> Result<StepOf<Self>, ProgramError> {
            Ok(Step::halt(ctx.rng.gen_bool(self.0)))
        }

        fn step(&self, _: &mut NodeContext<'_, (), ()>, _: (), _: usize, _: &[(NodeId, ())]) -> Result<StepOf<Self>, ProgramError> {
            unreachable!()
        }
    }

    #[test]
    fn gap_witness() {
        let fam = c7();
        let coin = mis_gap_witness(&fam, 400, 3, |inst, seed| {
            let trace = run(inst, &Coin(0.25), &RunEnv::default(), RunConfig { max_rounds: 0, seed })?;
            Ok(trace.outputs.values().filter(|&&x| x).count())
        })
        .unwrap();
        assert!(coin.within_3_sigma, "{coin:?}");
        let rp = mis_gap_witness(&fam, 2000, 5, |inst, seed| Ok(random_priority_mis(inst, 1, seed)?.0.len())).unwrap();
        assert!(rp.within_3_sigma, "{rp:?}");
        assert_eq!((rp.alpha_g1, rp.alpha_g2), (Some(6), Some(7)));
        assert_eq!(brute_force_mis(&fam.lift(&BTreeSet::new())).unwrap().len(), 6);
    }
}
