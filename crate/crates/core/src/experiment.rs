//! Reproducible experiments: build an instance, preprocess the support, run
//! an algorithm, verify the output and record one row per repetition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{
    self, cluster_mis_preprocess, cluster_optimal_mis, decomposition_memory, distance_coloring_memory, ids_as_memory,
    lcl_collapse_params, lcl_collapse_preprocess, lcl_collapse_solve, random_priority_mis, simulate_slocal_passive,
    simulate_slocal_supported, GreedyColoring, GreedyMis, IdColorReduction, LocalIds, SlocalAlgorithm, DEFAULT_MIS_CAP,
    DEFAULT_PRIORITY_DEPTH,
};
use crate::engine::{self, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use crate::graph::io::{parse_edge_list, parse_mask};
use crate::graph::{generate, Family, Graph, Mode, NodeId, SupportedInstance};
use crate::verify::{check_labeling, check_labeling_with_bound, coloring_labels, set_labels, BuiltinProblem};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File { path: PathBuf },
    Generated(Family),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskSource {
    File { path: PathBuf },
    /// Deletes `round(fraction * m)` uniformly chosen support edges.
    Delete { delete_fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub key: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ComponentSpec {
    pub fn new(key: &str) -> Self {
        ComponentSpec { key: key.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

fn default_id() -> String {
    "experiment".into()
}

fn default_mode() -> Mode {
    Mode::Supported
}

fn default_repetitions() -> usize {
    1
}

fn default_max_rounds() -> usize {
    RunConfig::default().max_rounds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub experiment_id: String,
    pub graph: GraphSource,
    #[serde(default)]
    pub mask: Option<MaskSource>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Defaults to what the algorithm needs in the chosen mode.
    #[serde(default)]
    pub preprocessor: Option<ComponentSpec>,
    pub algorithm: ComponentSpec,
    /// Defaults to the natural checker of the algorithm's output.
    #[serde(default)]
    pub verifier: Option<String>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

impl ExperimentConfig {
    pub fn new(experiment_id: &str, graph: GraphSource, algorithm: ComponentSpec) -> Self {
        ExperimentConfig {
            experiment_id: experiment_id.into(),
            graph,
            mask: None,
            mode: Mode::Supported,
            preprocessor: None,
            algorithm,
            verifier: None,
            repetitions: 1,
            seed: None,
            max_rounds: default_max_rounds(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Output {
    Set,
    Colors,
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algorithm {
    GreedyMis,
    GreedyColoring,
    LclColoring,
    ClusterMis,
    RandomPriorityMis,
    IdColoring,
    SupportPing,
}

impl Algorithm {
    const KEYS: [(&'static str, Algorithm); 7] = [
        ("slocal.greedy_mis", Algorithm::GreedyMis),
        ("slocal.greedy_coloring", Algorithm::GreedyColoring),
        ("lcl.id_color_reduction", Algorithm::LclColoring),
        ("mis.cluster_optimal", Algorithm::ClusterMis),
        ("mis.random_priority", Algorithm::RandomPriorityMis),
        ("color_reduction.id", Algorithm::IdColoring),
        ("probe.support_ping", Algorithm::SupportPing),
    ];

    fn output(self) -> Output {
        match self {
            Algorithm::GreedyMis | Algorithm::ClusterMis | Algorithm::RandomPriorityMis => Output::Set,
            Algorithm::GreedyColoring | Algorithm::LclColoring | Algorithm::IdColoring => Output::Colors,
            Algorithm::SupportPing => Output::Nothing,
        }
    }

    fn preprocessor(self, mode: Mode) -> &'static str {
        match (self, mode) {
            (Algorithm::GreedyMis | Algorithm::GreedyColoring, Mode::Passive) => "distance_coloring",
            (Algorithm::GreedyMis | Algorithm::GreedyColoring, _) => "network_decomposition",
            (Algorithm::LclColoring, _) => "lcl_distance_coloring",
            (Algorithm::ClusterMis, _) => "ball_growing",
            (Algorithm::RandomPriorityMis, _) => "none",
            (Algorithm::IdColoring | Algorithm::SupportPing, _) => "ids",
        }
    }

    fn verifier(self) -> &'static str {
        match self {
            Algorithm::GreedyMis => "mis",
            Algorithm::ClusterMis | Algorithm::RandomPriorityMis => "independent_set",
            Algorithm::GreedyColoring | Algorithm::LclColoring | Algorithm::IdColoring => "coloring",
            Algorithm::SupportPing => "none",
        }
    }

    fn randomized(self) -> bool {
        self == Algorithm::RandomPriorityMis
    }
}

const VERIFIERS: [(&str, Output); 5] = [
    ("mis", Output::Set),
    ("dominating_set", Output::Set),
    ("independent_set", Output::Set),
    ("coloring", Output::Colors),
    ("none", Output::Nothing),
];

/// A configuration with every key resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    config: ExperimentConfig,
    algorithm: Algorithm,
    verifier: String,
    seed: u64,
    base_graph: Option<Graph>,
    mask_edges: Option<Vec<(NodeId, NodeId)>>,
}

fn read(path: &PathBuf) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.clone(), source })
}

fn random_family(f: &Family) -> bool {
    matches!(
        f,
        Family::RandomRegular { .. } | Family::TriangleFreeRegular { .. } | Family::Gnp { .. } | Family::RandomConnected { .. }
    )
}

/// Resolves keys, loads files and checks the configuration for consistency.
pub fn plan(config: &ExperimentConfig) -> Result<Plan, ExperimentError> {
    let cfg = |msg: String| ExperimentError::Config(msg);
    let algorithm = Algorithm::KEYS
        .iter()
        .find(|(k, _)| *k == config.algorithm.key)
        .map(|&(_, a)| a)
        .ok_or_else(|| cfg(format!("unknown algorithm `{}`", config.algorithm.key)))?;
    let expected = algorithm.preprocessor(config.mode);
    if let Some(p) = &config.preprocessor {
        if p.key != expected {
            return Err(cfg(format!(
                "{} in {} mode needs preprocessor `{expected}`, not `{}`",
                config.algorithm.key, config.mode, p.key
            )));
        }
    }
    let verifier = config.verifier.clone().unwrap_or_else(|| algorithm.verifier().into());
    let kind = VERIFIERS
        .iter()
        .find(|(k, _)| *k == verifier)
        .map(|&(_, o)| o)
        .ok_or_else(|| cfg(format!("unknown verifier `{verifier}`")))?;
    if kind != algorithm.output() && kind != Output::Nothing {
        return Err(cfg(format!("verifier `{verifier}` does not apply to the output of {}", config.algorithm.key)));
    }
    if config.repetitions == 0 {
        return Err(cfg("repetitions must be at least 1".into()));
    }
    let randomized = algorithm.randomized()
        || matches!(config.mask, Some(MaskSource::Delete { .. }))
        || matches!(&config.graph, GraphSource::Generated(f) if random_family(f));
    if randomized && config.seed.is_none() {
        return Err(cfg("a seed is required when a randomized component is selected".into()));
    }
    if let Some(MaskSource::Delete { delete_fraction }) = config.mask {
        if !(0.0..=1.0).contains(&delete_fraction) {
            return Err(cfg(format!("delete_fraction must lie in [0, 1], got {delete_fraction}")));
        }
    }
    let base_graph = match &config.graph {
        GraphSource::File { path } => Some(parse_edge_list(&read(path)?)?),
        GraphSource::Generated(_) => None,
    };
    let mask_edges = match &config.mask {
        Some(MaskSource::File { path }) => Some(parse_mask(&read(path)?)?),
        _ => None,
    };
    Ok(Plan {
        config: config.clone(),
        algorithm,
        verifier,
        seed: config.seed.unwrap_or(0),
        base_graph,
        mask_edges,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub experiment_id: String,
    pub n: usize,
    pub mode: Mode,
    pub algorithm: String,
    pub rounds: usize,
    pub quality: Option<f64>,
    pub accepted: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment_id: String,
    pub repetitions: usize,
    pub accepted: usize,
    pub rounds_mean: f64,
    pub rounds_min: usize,
    pub rounds_max: usize,
    /// `(repetition, message)` for runs that failed outright.
    pub errors: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub summary: ExperimentSummary,
}

impl ExperimentResult {
    pub fn all_accepted(&self) -> bool {
        self.rows.iter().all(|r| r.accepted)
    }

    pub fn csv(&self) -> Result<String, ExperimentError> {
        rows_to_csv(&self.rows)
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

pub const CSV_HEADER: [&str; 8] = ["experiment_id", "n", "mode", "algorithm", "rounds", "quality", "accepted", "seed"];

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let quality = r.quality.map_or(String::new(), |q| format!("{q:.6}"));
        w.write_record([
            r.experiment_id.as_str(),
            &r.n.to_string(),
            &r.mode.to_string(),
            &r.algorithm,
            &r.rounds.to_string(),
            &quality,
            &r.accepted.to_string(),
            &r.seed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

struct Outcome {
    rounds: usize,
    quality: Option<f64>,
    accepted: bool,
}

impl Plan {
    fn instance(&self, seed: u64) -> Result<SupportedInstance, String> {
        let h = match (&self.base_graph, &self.config.graph) {
            (Some(g), _) => g.clone(),
            (None, GraphSource::Generated(f)) => generate(f, seed).map_err(|e| e.to_string())?,
            (None, GraphSource::File { .. }) => unreachable!("file graphs are loaded while planning"),
        };
        let mode = self.config.mode;
        let inst = match (&self.config.mask, &self.mask_edges) {
            (_, Some(edges)) => SupportedInstance::new(h, edges.iter().copied(), mode),
            (Some(MaskSource::Delete { delete_fraction }), None) => {
                let mut edges = h.edge_ids();
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d61_736b);
                edges.shuffle(&mut rng);
                let keep = edges.len() - (delete_fraction * edges.len() as f64).round() as usize;
                edges.truncate(keep);
                SupportedInstance::new(h, edges, mode)
            }
            _ => Ok(SupportedInstance::full(h, mode)),
        };
        inst.map_err(|e| e.to_string())
    }

    fn slocal<A: SlocalAlgorithm>(&self, inst: &SupportedInstance, alg: &A) -> Result<(usize, BTreeMap<NodeId, A::Output>), String> {
        let h = inst.support();
        let max = self.config.max_rounds;
        let sim = if inst.mode() == Mode::Passive {
            let mem = distance_coloring_memory(h, alg.locality()).map_err(|e| e.to_string())?;
            simulate_slocal_passive(inst, alg, &mem, max)
        } else {
            let mem = decomposition_memory(h, alg.locality()).map_err(|e| e.to_string())?;
            simulate_slocal_supported(inst, alg, &mem, max)
        };
        let sim = sim.map_err(|e| e.to_string())?;
        Ok((sim.trace.rounds, sim.outputs))
    }

    fn execute(&self, inst: &SupportedInstance, seed: u64) -> Result<Outcome, String> {
        let component = &self.config.algorithm;
        let g = inst.subgraph();
        let h = inst.support();
        let err = |e: algorithms::AlgorithmError| e.to_string();
        let (rounds, out) = match self.algorithm {
            Algorithm::GreedyMis => {
                let (r, o) = self.slocal(inst, &GreedyMis)?;
                (r, Produced::Set(o.into_iter().filter(|&(_, x)| x).map(|(v, _)| v).collect()))
            }
            Algorithm::GreedyColoring => {
                let (r, o) = self.slocal(inst, &GreedyColoring)?;
                (r, Produced::Colors(o))
            }
            Algorithm::LclColoring => {
                let base = IdColorReduction::default();
                let params = lcl_collapse_params(h.max_degree(), &base).map_err(err)?;
                let mem = lcl_collapse_preprocess(h, &params).map_err(err)?;
                let res = lcl_collapse_solve(inst, &base, &params, &mem, &BuiltinProblem::Coloring).map_err(err)?;
                let colors = res
                    .labels
                    .iter()
                    .filter_map(|(&v, l)| match l.output {
                        crate::verify::OutputLabel::Color(c) => Some((v, c)),
                        _ => None,
                    })
                    .collect();
                (res.rounds, Produced::Colors(colors))
            }
            Algorithm::ClusterMis => {
                let eps = component.param("eps", 0.5);
                let cap = component.param("cap", DEFAULT_MIS_CAP as f64) as usize;
                let mem = cluster_mis_preprocess(h, eps, inst.mode(), cap).map_err(err)?;
                let (set, trace) = cluster_optimal_mis(inst, &mem, cap).map_err(err)?;
                (trace.rounds, Produced::Set(set))
            }
            Algorithm::RandomPriorityMis => {
                let depth = component.param("depth", DEFAULT_PRIORITY_DEPTH as f64) as usize;
                let (set, trace) = random_priority_mis(inst, depth, seed).map_err(err)?;
                (trace.rounds, Produced::Set(set))
            }
            Algorithm::IdColoring => {
                let mem = ids_as_memory(h).map_err(|e| e.to_string())?;
                let bound = h.ids().iter().copied().max().unwrap_or(0) as u128;
                let prog = IdColorReduction::new(bound, h.max_degree());
                let config = RunConfig { max_rounds: self.config.max_rounds, seed };
                let trace = engine::run(inst, &prog, &RunEnv::with_memory(&mem), config).map_err(|e| e.to_string())?;
                if !trace.halted {
                    return Err(format!("no halt within {} rounds", self.config.max_rounds));
                }
                (trace.rounds, Produced::Colors(trace.outputs))
            }
            Algorithm::SupportPing => {
                let mem = ids_as_memory(h).map_err(|e| e.to_string())?;
                let config = RunConfig { max_rounds: self.config.max_rounds, seed };
                let trace = engine::run(inst, &SupportPing, &RunEnv::with_memory(&mem), config).map_err(|e| e.to_string())?;
                (trace.rounds, Produced::Nothing)
            }
        };
        let (quality, accepted) = self.judge(&g, h.max_degree(), &out)?;
        Ok(Outcome { rounds, quality, accepted })
    }

    fn judge(&self, g: &Graph, delta: usize, out: &Produced) -> Result<(Option<f64>, bool), String> {
        let n = g.n().max(1) as f64;
        Ok(match out {
            Produced::Set(set) => {
                let quality = Some(set.len() as f64 / n);
                let accepted = match self.verifier.as_str() {
                    "independent_set" => algorithms::is_independent(g, set),
                    "none" => true,
                    key => {
                        let problem = BuiltinProblem::from_str(key).map_err(|e| e.to_string())?;
                        check_labeling(g, &problem, &set_labels(g, set)).map_err(|e| e.to_string())?.accepted
                    }
                };
                (quality, accepted)
            }
            Produced::Colors(colors) => {
                let used: BTreeSet<u32> = colors.values().copied().collect();
                let accepted = match self.verifier.as_str() {
                    "none" => true,
                    _ => check_labeling_with_bound(g, &BuiltinProblem::Coloring, &coloring_labels(colors), delta)
                        .map_err(|e| e.to_string())?
                        .accepted,
                };
                (Some(used.len() as f64), accepted)
            }
            Produced::Nothing => (None, true),
        })
    }
}

enum Produced {
    Set(BTreeSet<NodeId>),
    Colors(BTreeMap<NodeId, u32>),
    Nothing,
}

/// Sends one message to every support neighbor known from preprocessing,
/// then halts. Illegal in passive mode whenever an edge is missing.
struct SupportPing;

impl NodeProgram for SupportPing {
    type Memory = LocalIds;
    type Input = ();
    type State = ();
    type Message = ();
    type Output = ();

    fn init(&self, ctx: &mut NodeContext<'_, LocalIds, ()>) -> Result<StepOf<Self>, ProgramError> {
        let outbox = ctx.require_memory()?.neighbors.keys().map(|&w| (w, ())).collect();
        Ok(Step::Continue { state: (), outbox })
    }

    fn step(&self, _: &mut NodeContext<'_, LocalIds, ()>, _: (), _: usize, _: &[(NodeId, ())]) -> Result<StepOf<Self>, ProgramError> {
        Ok(Step::halt(()))
    }
}

/// Runs every repetition. Repetition `i` uses seed `seed + i`. Failed runs
/// become rejected rows and are listed in the summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let plan = plan(config)?;
    let results: Vec<(ExperimentRow, Option<String>)> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let seed = plan.seed.wrapping_add(rep as u64);
            let (n, outcome) = match plan.instance(seed) {
                Ok(inst) => (inst.n(), plan.execute(&inst, seed)),
                Err(e) => (0, Err(e)),
            };
            let (rounds, quality, accepted, error) = match outcome {
                Ok(o) => (o.rounds, o.quality, o.accepted, None),
                Err(e) => (0, None, false, Some(e)),
            };
            let row = ExperimentRow {
                experiment_id: config.experiment_id.clone(),
                n,
                mode: config.mode,
                algorithm: config.algorithm.key.clone(),
                rounds,
                quality,
                accepted,
                seed,
            };
            (row, error)
        })
        .collect();
    let errors = results.iter().enumerate().filter_map(|(i, (_, e))| e.clone().map(|e| (i, e))).collect();
    let rows: Vec<ExperimentRow> = results.into_iter().map(|(r, _)| r).collect();
    let rounds: Vec<usize> = rows.iter().map(|r| r.rounds).collect();
    let summary = ExperimentSummary {
        experiment_id: config.experiment_id.clone(),
        repetitions: rows.len(),
        accepted: rows.iter().filter(|r| r.accepted).count(),
        rounds_mean: rounds.iter().sum::<usize>() as f64 / rows.len() as f64,
        rounds_min: rounds.iter().copied().min().unwrap_or(0),
        rounds_max: rounds.iter().copied().max().unwrap_or(0),
        errors,
    };
    Ok(ExperimentResult { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub bench: String,
    pub family: String,
    pub mode: Mode,
    pub n: usize,
    pub rounds: usize,
    /// The bound the round count is compared against, when there is one.
    pub bound: Option<f64>,
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("bench,family,mode,n,rounds,bound\n");
    for r in rows {
        let bound = r.bound.map_or(String::new(), |b| format!("{b:.3}"));
        writeln!(out, "{},{},{},{},{},{}", r.bench, r.family, r.mode, r.n, r.rounds, bound).unwrap();
    }
    out
}

/// Rounds of the constant-time coloring over a geometric ladder of sizes,
/// on cycles and random 3-regular graphs.
pub fn bench_lcl_constancy(sizes: &[usize], seed: u64) -> Result<Vec<BenchRow>, ExperimentError> {
    let mut rows = Vec::new();
    for (name, family) in [("cycle", 0), ("random_regular_3", 1)] {
        for mode in [Mode::Supported, Mode::Passive] {
            for &n in sizes {
                let f = if family == 0 { Family::Cycle { n } } else { Family::RandomRegular { n, d: 3 } };
                let mut cfg = ExperimentConfig::new("bench", GraphSource::Generated(f), ComponentSpec::new("lcl.id_color_reduction"));
                cfg.mode = mode;
                cfg.seed = Some(seed);
                let res = run_experiment(&cfg)?;
                if let Some((_, e)) = res.summary.errors.first() {
                    return Err(ExperimentError::Config(e.clone()));
                }
                rows.push(BenchRow { bench: "lcl_constancy".into(), family: name.into(), mode, n, rounds: res.rows[0].rounds, bound: None });
            }
        }
    }
    Ok(rows)
}

/// Rounds of the cluster MIS scheme against `2(log_{1+ε} n + 1)`.
pub fn bench_cluster_mis(sizes: &[usize], eps: f64, seed: u64) -> Result<Vec<BenchRow>, ExperimentError> {
    let mut rows = Vec::new();
    for &n in sizes {
        let f = Family::Cycle { n };
        let mut cfg = ExperimentConfig::new(
            "bench",
            GraphSource::Generated(f),
            ComponentSpec::new("mis.cluster_optimal").with("eps", eps).with("cap", 64.0),
        );
        cfg.seed = Some(seed);
        let res = run_experiment(&cfg)?;
        if let Some((_, e)) = res.summary.errors.first() {
            return Err(ExperimentError::Config(e.clone()));
        }
        let bound = 2.0 * ((n as f64).ln() / (1.0 + eps).ln() + 1.0);
        rows.push(BenchRow { bench: "cluster_mis".into(), family: "cycle".into(), mode: Mode::Supported, n, rounds: res.rows[0].rounds, bound: Some(bound) });
    }
    Ok(rows)
}
