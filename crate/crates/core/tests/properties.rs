use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supsim::adversarial::build_double_cover;
use supsim::algorithms::{
    cluster_mis_preprocess, decomposition_memory, distance_coloring_memory, ids_as_memory, simulate_slocal_passive,
    simulate_slocal_supported, slocal_run_sequential, GreedyColoring, GreedyMis, SlocalAlgorithm,
};
use supsim::decompose::{
    ball_growing, greedy_distance_coloring, is_distance_coloring, network_decomposition_power, random_proper_coloring,
};
use supsim::engine::{self, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use supsim::graph::{extract_view, generate, views_isomorphic, Family, Graph, Mode, NodeId, Respect, SupportedInstance, ViewGraph};
use supsim::verify::{check_labeling, check_labeling_with_bound, coloring_labels, set_labels, BuiltinProblem, Label, OutputLabel};

fn support(n: usize, p: f64, seed: u64) -> Graph {
    generate(&Family::Gnp { n, p }, seed).unwrap()
}

fn masked(h: &Graph, keep: f64, mode: Mode, seed: u64) -> SupportedInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = h.edge_ids().into_iter().filter(|_| rng.gen_bool(keep)).collect();
    SupportedInstance::new(h.clone(), edges, mode).unwrap()
}

/// Minimum id seen within `rounds` hops of flooding.
struct MinFlood {
    rounds: usize,
}

impl NodeProgram for MinFlood {
    type Memory = ();
    type Input = ();
    type State = NodeId;
    type Message = NodeId;
    type Output = NodeId;

    fn init(&self, ctx: &mut NodeContext<'_, (), ()>) -> Result<StepOf<Self>, ProgramError> {
        if self.rounds == 0 {
            return Ok(Step::halt(ctx.id));
        }
        Ok(Step::Continue { state: ctx.id, outbox: ctx.broadcast(ctx.id) })
    }

    fn step(&self, ctx: &mut NodeContext<'_, (), ()>, best: NodeId, round: usize, inbox: &[(NodeId, NodeId)]) -> Result<StepOf<Self>, ProgramError> {
        let best = inbox.iter().map(|&(_, m)| m).fold(best, NodeId::min);
        if round >= self.rounds {
            return Ok(Step::halt(best));
        }
        Ok(Step::Continue { state: best, outbox: ctx.broadcast(best) })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn views_survive_relabeling(n in 3usize..24, p in 0.05f64..0.5, seed: u64, t in 0usize..3) {
        let h = support(n, p, seed);
        let inst = masked(&h, 0.6, Mode::Supported, seed ^ 1);
        let mut perm: Vec<NodeId> = (1..=n as NodeId).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 2));
        let pi = |v: NodeId| perm[v as usize - 1] + 100;
        let h2 = Graph::from_edges(h.ids().iter().map(|&v| pi(v)), h.edge_ids().into_iter().map(|(a, b)| (pi(a), pi(b)))).unwrap();
        let inst2 = SupportedInstance::new(h2, inst.input_edge_ids().into_iter().map(|(a, b)| (pi(a), pi(b))), Mode::Supported).unwrap();
        let relabeled = Respect { ids: false, labels: true, flags: true };
        for &v in h.ids() {
            let a = extract_view(&inst, v, t, ViewGraph::Support).unwrap();
            let b = extract_view(&inst2, pi(v), t, ViewGraph::Support).unwrap();
            prop_assert!(views_isomorphic(&a, &a, Respect::ALL).is_some());
            prop_assert!(views_isomorphic(&a, &b, relabeled).is_some());
            prop_assert!(views_isomorphic(&b, &a, relabeled).is_some());
            prop_assert!(views_isomorphic(&a, &b, Respect::ALL).is_none() || a == b);
        }
    }

    #[test]
    fn ball_size_bound(n in 2usize..60, p in 0.02f64..0.4, seed: u64, t in 0usize..4) {
        let g = support(n, p, seed);
        let d = g.max_degree();
        let bound: usize = 1 + (1..=t).map(|i| d * d.saturating_sub(1).pow(i as u32 - 1)).sum::<usize>();
        for &v in g.ids() {
            let ball = g.ball(v, t).unwrap();
            prop_assert!(ball.len() <= bound);
            prop_assert!(ball.iter().all(|&w| g.distance(v, w).unwrap().is_some_and(|x| x <= t)));
        }
    }

    #[test]
    fn subgraph_degrees(n in 2usize..60, p in 0.02f64..0.6, seed: u64, keep in 0.0f64..1.0) {
        let h = support(n, p, seed);
        let inst = masked(&h, keep, Mode::Supported, seed);
        let g = inst.subgraph();
        prop_assert_eq!(g.ids(), h.ids());
        for i in 0..h.n() {
            prop_assert!(g.degree(i) <= h.degree(i));
        }
        prop_assert!(g.edge_ids().iter().all(|&(a, b)| h.has_edge_ids(a, b)));
    }

    #[test]
    fn outputs_depend_only_on_the_ball(n in 4usize..40, p in 0.05f64..0.4, seed: u64, t in 0usize..4) {
        let h = support(n, p, seed);
        let v = h.id(seed as usize % n);
        let dist = h.bfs(h.index_of(v).unwrap(), None);
        let far = |a: NodeId, b: NodeId| {
            let d = |x: NodeId| dist[h.index_of(x).unwrap()].unwrap_or(usize::MAX);
            d(a) > t && d(b) > t
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kept: Vec<_> = h.edge_ids().into_iter().filter(|&(a, b)| !far(a, b) || rng.gen_bool(0.5)).collect();
        let h2 = Graph::from_edges(h.ids().iter().copied(), kept).unwrap();
        let cfg = RunConfig { max_rounds: t + 1, seed };
        let a = engine::run(&SupportedInstance::full(h, Mode::Supported), &MinFlood { rounds: t }, &RunEnv::default(), cfg).unwrap();
        let b = engine::run(&SupportedInstance::full(h2, Mode::Supported), &MinFlood { rounds: t }, &RunEnv::default(), cfg).unwrap();
        prop_assert_eq!(a.outputs[&v], b.outputs[&v]);
    }

    #[test]
    fn preprocessing_ignores_the_input_graph(n in 3usize..40, p in 0.05f64..0.4, seed: u64) {
        let h = support(n, p, seed);
        let a = masked(&h, 0.3, Mode::Supported, seed ^ 5);
        let b = masked(&h, 0.9, Mode::Passive, seed ^ 6);
        prop_assert_eq!(decomposition_memory(a.support(), 2).unwrap(), decomposition_memory(b.support(), 2).unwrap());
        prop_assert_eq!(distance_coloring_memory(a.support(), 1).unwrap(), distance_coloring_memory(b.support(), 1).unwrap());
        prop_assert_eq!(ids_as_memory(a.support()).unwrap(), ids_as_memory(b.support()).unwrap());
        prop_assert_eq!(
            cluster_mis_preprocess(a.support(), 1.0, Mode::Supported, 64).ok(),
            cluster_mis_preprocess(b.support(), 1.0, Mode::Supported, 64).ok()
        );
    }

    #[test]
    fn checker_is_local(n in 4usize..40, p in 0.05f64..0.4, seed: u64) {
        let g = support(n, p, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flags = |rng: &mut ChaCha8Rng| -> BTreeMap<NodeId, Label> {
            g.ids().iter().map(|&v| (v, Label::new(OutputLabel::Flag(rng.gen_bool(0.4))))).collect()
        };
        let base = flags(&mut rng);
        let noise = flags(&mut rng);
        let v = g.id(seed as usize % n);
        let near: BTreeSet<NodeId> = g.ball(v, 1).unwrap().into_iter().collect();
        let scrambled: BTreeMap<NodeId, Label> =
            base.iter().map(|(&w, l)| (w, if near.contains(&w) { l.clone() } else { noise[&w].clone() })).collect();
        let rejects = |labels| {
            let r = check_labeling(&g, &BuiltinProblem::Mis, labels).unwrap();
            r.violations.iter().any(|(w, _)| *w == v)
        };
        prop_assert_eq!(rejects(&base), rejects(&scrambled));
    }

    #[test]
    fn colorings_survive_edge_deletion(n in 2usize..50, p in 0.05f64..0.5, seed: u64, keep in 0.0f64..1.0) {
        let h = support(n, p, seed);
        let colors = random_proper_coloring(&h, h.max_degree() as u32 + 1, seed).unwrap();
        let labels = coloring_labels(&colors);
        prop_assert!(check_labeling(&h, &BuiltinProblem::Coloring, &labels).unwrap().accepted);
        let g = masked(&h, keep, Mode::Supported, seed).subgraph();
        prop_assert!(check_labeling_with_bound(&g, &BuiltinProblem::Coloring, &labels, h.max_degree()).unwrap().accepted);
    }

    #[test]
    fn decompositions_are_valid(n in 2usize..60, p in 0.02f64..0.3, seed: u64, t in 1usize..4, eps in 0.1f64..2.0) {
        let g = support(n, p, seed);
        let nd = network_decomposition_power(&g, t);
        prop_assert!(nd.validate(&g, t).is_ok());
        let dc = greedy_distance_coloring(&g, 2 * t + 1).unwrap();
        prop_assert!(is_distance_coloring(&g, 2 * t + 1, &dc.colors));
        let bg = ball_growing(&g, eps).unwrap();
        let assigned = bg.assignment();
        prop_assert_eq!(assigned.len(), g.n());
        for cl in &bg.clusters {
            prop_assert!(cl.boundary.len() as f64 <= eps / (1.0 + eps) * cl.members.len() as f64 + 1e-9);
        }
    }

    #[test]
    fn simulations_replay_sequentially(n in 2usize..40, p in 0.05f64..0.4, seed: u64, keep in 0.3f64..1.0) {
        let h = support(n, p, seed);
        let inst = masked(&h, keep, Mode::Supported, seed);
        let g = inst.subgraph();
        fn check<A: SlocalAlgorithm>(inst: &SupportedInstance, g: &Graph, alg: &A) -> bool {
            let mem = decomposition_memory(inst.support(), alg.locality()).unwrap();
            let sim = simulate_slocal_supported(inst, alg, &mem, 1 << 20).unwrap();
            let passive = inst.with_mode(Mode::Passive).unwrap();
            let cmem = distance_coloring_memory(inst.support(), alg.locality()).unwrap();
            let psim = simulate_slocal_passive(&passive, alg, &cmem, 1 << 20).unwrap();
            slocal_run_sequential(g, alg, &sim.order).unwrap() == sim.outputs
                && slocal_run_sequential(g, alg, &psim.order).unwrap() == psim.outputs
        }
        prop_assert!(check(&inst, &g, &GreedyMis));
        prop_assert!(check(&inst, &g, &GreedyColoring));
        let mis: BTreeSet<NodeId> = slocal_run_sequential(&g, &GreedyMis, g.ids()).unwrap()
            .into_iter().filter(|&(_, x)| x).map(|(v, _)| v).collect();
        prop_assert!(check_labeling(&g, &BuiltinProblem::Mis, &set_labels(&g, &mis)).unwrap().accepted);
    }

    #[test]
    fn double_cover_lifts_are_regular(which in 0usize..3, seed: u64) {
        let q = match which {
            0 => generate(&Family::Cycle { n: 7 }, 0).unwrap(),
            1 => generate(&Family::Petersen, 0).unwrap(),
            _ => generate(&Family::Heawood, 0).unwrap(),
        };
        let fam = build_double_cover(&q).unwrap();
        prop_assert!((0..fam.h.n()).all(|i| fam.h.degree(i) == 2 * fam.k));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: BTreeSet<(NodeId, NodeId)> = q.edge_ids().into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let lift = fam.lift(&f);
        prop_assert_eq!(lift.n(), 2 * fam.n_q);
        prop_assert!((0..lift.n()).all(|i| lift.degree(i) == fam.k));
        prop_assert!(lift.edge_ids().iter().all(|&(a, b)| fam.h.has_edge_ids(a, b)));
    }
}
