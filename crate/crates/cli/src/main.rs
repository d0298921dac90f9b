use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use supsim::adversarial::{
    build_double_cover, build_sinkless_family, mis_gap_witness, orientation_verdicts, random_cut_lift,
    sinkless_indistinguishability, verify_cover_isomorphisms, view_distribution_equality, HigherIdProbe, Lift,
    LowerIdProbe, MinIdOrientation,
};
use supsim::algorithms::{brute_force_alpha, random_priority_mis};
use supsim::decompose::{ball_growing, greedy_distance_coloring, network_decomposition_power};
use supsim::experiment::{bench_cluster_mis, bench_lcl_constancy, bench_to_csv, run_experiment, ExperimentConfig};
use supsim::graph::io::{parse_edge_list, parse_mask, write_edge_list, write_mask};
use supsim::graph::{generate, Family, Mode, SupportedInstance};
use supsim::verify::{check_labeling, BuiltinProblem, Labeling};

#[derive(Parser)]
#[command(name = "supsim", version, about = "Simulator for distributed algorithms with a known support graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run(RunArgs),
    /// Compute support-only preprocessing and write it as JSON.
    Preprocess(PreprocessArgs),
    /// Check a labeling file against a built-in problem.
    Verify(VerifyArgs),
    /// Build and check the lower-bound families.
    Lowerbound(LowerboundArgs),
    /// Round-count scaling tables.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Local,
    Supported,
    Passive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Local => Mode::Local,
            ModeArg::Supported => Mode::Supported,
            ModeArg::Passive => Mode::Passive,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for `<id>.csv` and `<id>.summary.json`; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with a failure code unless every repetition is accepted.
    #[arg(long)]
    strict: bool,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    max_rounds: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PreprocessKind {
    DistanceColoring,
    NetworkDecomposition,
    BallGrowing,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Support graph in edge-list format.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    kind: PreprocessKind,
    /// Locality for colorings and decompositions.
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Input-edge mask; the labeling is checked on the masked graph.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// JSON object mapping node ids to labels.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    problem: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Sinkless,
    DoubleCover,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Cycle7,
    Petersen,
}

#[derive(Args)]
struct LowerboundArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Path length of the sinkless family.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, value_enum, default_value = "cycle7")]
    base: Base,
    #[arg(long, default_value_t = 50)]
    cuts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving the edge-list and mask files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchKind {
    Lcl,
    ClusterMis,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    kind: BenchKind,
    #[arg(long, value_delimiter = ',', default_values_t = vec![32, 64, 128, 256])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{contents}");
            if !contents.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let mut config = ExperimentConfig::from_json(&read(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(mode) = args.mode {
        config.mode = mode.into();
    }
    if let Some(r) = args.max_rounds {
        config.max_rounds = r;
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    rebase_paths(&mut config, base);
    let result = run_experiment(&config)?;
    let id = &config.experiment_id;
    emit(args.out.as_deref(), &format!("{id}.csv"), &result.csv()?)?;
    match &args.out {
        Some(_) => emit(args.out.as_deref(), &format!("{id}.summary.json"), &result.summary_json())?,
        None => eprintln!("{}", result.summary_json()),
    }
    for (rep, err) in &result.summary.errors {
        log::warn!("repetition {rep}: {err}");
    }
    Ok(!args.strict || result.all_accepted())
}

/// Relative file paths in a config are resolved against the config's directory.
fn rebase_paths(config: &mut ExperimentConfig, base: &Path) {
    use supsim::experiment::{GraphSource, MaskSource};
    if let GraphSource::File { path } = &mut config.graph {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    if let Some(MaskSource::File { path }) = &mut config.mask {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn preprocess(args: PreprocessArgs) -> Result<bool> {
    let h = parse_edge_list(&read(&args.graph)?)?;
    let (name, json) = match args.kind {
        PreprocessKind::DistanceColoring => {
            let c = greedy_distance_coloring(&h, 2 * args.t + 1)?;
            ("distance_coloring.json", serde_json::to_string_pretty(&c)?)
        }
        PreprocessKind::NetworkDecomposition => {
            let d = network_decomposition_power(&h, args.t.max(1));
            ("network_decomposition.json", serde_json::to_string_pretty(&d)?)
        }
        PreprocessKind::BallGrowing => ("ball_growing.json", ball_growing(&h, args.eps)?.to_json()),
    };
    emit(args.out.as_deref(), name, &json)?;
    Ok(true)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let h = parse_edge_list(&read(&args.graph)?)?;
    let g = match &args.mask {
        Some(mask) => SupportedInstance::new(h, parse_mask(&read(mask)?)?, Mode::Supported)?.subgraph(),
        None => h,
    };
    let labels: Labeling = serde_json::from_str(&read(&args.labels)?).context("parsing labels")?;
    let problem: BuiltinProblem = args.problem.parse()?;
    let report = check_labeling(&g, &problem, &labels)?;
    println!("{}", report.to_json());
    Ok(report.accepted)
}

fn lowerbound(args: LowerboundArgs) -> Result<bool> {
    let out = args.out.as_deref();
    let mut ok = true;
    let mut report = serde_json::Map::new();
    match args.suite {
        Suite::Sinkless => {
            let fam = build_sinkless_family(args.n)?;
            if let Some(dir) = out {
                emit(Some(dir), "sinkless_support.txt", &write_edge_list(&fam.h))?;
                emit(Some(dir), "sinkless_g.mask", &write_mask(&fam.g))?;
                emit(Some(dir), "sinkless_g_prime.mask", &write_mask(&fam.g_prime))?;
            }
            let mut rows = Vec::new();
            for t in 0..fam.threshold() {
                let views = sinkless_indistinguishability(&fam, t)?;
                let verdicts = [
                    orientation_verdicts(&fam, &HigherIdProbe, t)?,
                    orientation_verdicts(&fam, &LowerIdProbe, t)?,
                    orientation_verdicts(&fam, &MinIdOrientation { rounds: t }, t)?,
                ];
                let rejects = verdicts.iter().all(|v| !(v[0] && v[1]));
                ok &= views.accepted && rejects;
                rows.push(serde_json::json!({
                    "t": t,
                    "views_agree": views.accepted,
                    "verdicts": verdicts,
                    "some_run_rejected": rejects,
                }));
            }
            report.insert("n".into(), fam.n.into());
            report.insert("threshold".into(), fam.threshold().into());
            report.insert("rounds".into(), rows.into());
        }
        Suite::DoubleCover => {
            let q = match args.base {
                Base::Cycle7 => generate(&Family::Cycle { n: 7 }, 0)?,
                Base::Petersen => generate(&Family::Petersen, 0)?,
            };
            let fam = build_double_cover(&q)?;
            if let Some(dir) = out {
                emit(Some(dir), "double_cover_support.txt", &write_edge_list(&fam.h))?;
            }
            let mut iso_ok = 0;
            for i in 0..args.cuts {
                let which = if i % 2 == 0 { Lift::G1 } else { Lift::G2 };
                let (cut, _) = random_cut_lift(&fam, which, args.seed.wrapping_add(i as u64));
                if verify_cover_isomorphisms(&fam, &cut, which)?.0.accepted {
                    iso_ok += 1;
                }
                if i == 0 {
                    if let Some(dir) = out {
                        emit(Some(dir), "double_cover_g1.mask", &write_mask(&fam.instance(&cut, Lift::G1)))?;
                        emit(Some(dir), "double_cover_g2.mask", &write_mask(&fam.instance(&cut, Lift::G2)))?;
                    }
                }
            }
            let views = view_distribution_equality(&fam, 1, 1)?;
            let (cut, _) = random_cut_lift(&fam, Lift::G1, args.seed);
            let alpha1 = brute_force_alpha(&fam.lift(&fam.selector(&cut, Lift::G1)))?;
            let alpha2 = brute_force_alpha(&fam.lift(&fam.selector(&cut, Lift::G2)))?;
            let gap = mis_gap_witness(&fam, 200, args.seed, |inst, s| Ok(random_priority_mis(inst, 1, s)?.0.len()))?;
            ok &= iso_ok == args.cuts && views.accepted;
            report.insert("cuts".into(), args.cuts.into());
            report.insert("isomorphisms_verified".into(), iso_ok.into());
            report.insert("views_equal".into(), views.accepted.into());
            report.insert("alpha_g1".into(), alpha1.into());
            report.insert("alpha_g2".into(), alpha2.into());
            report.insert("random_priority_gap".into(), serde_json::to_value(&gap)?);
        }
    }
    report.insert("passed".into(), ok.into());
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(report))?;
    let name = match args.suite {
        Suite::Sinkless => "sinkless_report.json",
        Suite::DoubleCover => "double_cover_report.json",
    };
    emit(out, name, &text)?;
    Ok(!args.strict || ok)
}

fn bench(args: BenchArgs) -> Result<bool> {
    if args.sizes.is_empty() {
        bail!("at least one size is required");
    }
    let (name, rows) = match args.kind {
        BenchKind::Lcl => ("bench_lcl.csv", bench_lcl_constancy(&args.sizes, args.seed)?),
        BenchKind::ClusterMis => ("bench_cluster_mis.csv", bench_cluster_mis(&args.sizes, args.eps, args.seed)?),
    };
    emit(args.out.as_deref(), name, &bench_to_csv(&rows))?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Preprocess(a) => preprocess(a),
        Command::Verify(a) => verify(a),
        Command::Lowerbound(a) => lowerbound(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
