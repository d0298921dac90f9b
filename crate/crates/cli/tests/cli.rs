use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn supsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supsim")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const LCL_CONFIG: &str = r#"{
  "experiment_id": "lcl64",
  "graph": {"family": "cycle", "n": 64},
  "mode": "supported",
  "preprocessor": {"key": "lcl_distance_coloring"},
  "algorithm": {"key": "lcl.id_color_reduction"},
  "verifier": "coloring",
  "repetitions": 4,
  "seed": 9
}"#;

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", LCL_CONFIG);
    let out = dir.path().join("out");
    let o = supsim(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("lcl64.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "experiment_id,n,mode,algorithm,rounds,quality,accepted,seed");
    assert_eq!(lines.len(), 5);
    let rounds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert!(rounds.iter().all(|r| *r == rounds[0]));
    let seeds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(7).unwrap()).collect();
    assert_eq!(seeds, ["9", "10", "11", "12"]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("lcl64.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["accepted"], 4);

    let again = dir.path().join("again");
    supsim(&["run", "--config", &cfg, "--out", again.to_str().unwrap()]);
    assert_eq!(csv, fs::read_to_string(again.join("lcl64.csv")).unwrap());
}

#[test]
fn strict_exit_code_follows_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ping.json",
        r#"{"graph":{"family":"cycle","n":12},"mask":{"delete_fraction":0.5},"algorithm":{"key":"probe.support_ping"},"seed":1}"#,
    );
    let ok = supsim(&["run", "--config", &cfg, "--strict"]);
    assert!(ok.status.success());
    let passive = supsim(&["run", "--config", &cfg, "--mode", "passive", "--strict"]);
    assert_eq!(passive.status.code(), Some(1));
    let stdout = String::from_utf8(passive.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().contains(",passive,probe.support_ping,0,,false,1"));
    let lenient = supsim(&["run", "--config", &cfg, "--mode", "passive"]);
    assert!(lenient.status.success());
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"graph":{"family":"cycle","n":5},"algorithm":{"key":"missing"}}"#);
    let o = supsim(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown algorithm"));
}

#[test]
fn file_sources_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.txt", "4 4\n1 2\n2 3\n3 4\n1 4\n");
    write(dir.path(), "g.mask", "1 2\n3 4\n");
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"graph":{"path":"g.txt"},"mask":{"path":"g.mask"},"algorithm":{"key":"slocal.greedy_mis"},"max_rounds":500}"#,
    );
    let o = supsim(&["run", "--config", &cfg, "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("experiment,4,supported,slocal.greedy_mis,"));
}

#[test]
fn verify_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "p3.txt", "3 2\n1 2\n2 3\n");
    let good = write(dir.path(), "good.json", r#"{"1":{"output":{"flag":true}},"2":{"output":{"flag":false}},"3":{"output":{"flag":true}}}"#);
    let bad = write(dir.path(), "bad.json", r#"{"1":{"output":{"flag":true}},"2":{"output":{"flag":true}},"3":{"output":{"flag":false}}}"#);
    let o = supsim(&["verify", "--graph", &g, "--labels", &good, "--problem", "mis"]);
    assert!(o.status.success());
    let o = supsim(&["verify", "--graph", &g, "--labels", &bad, "--problem", "mis"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["accepted"], false);
    let mask = write(dir.path(), "m", "2 3\n");
    let o = supsim(&["verify", "--graph", &g, "--mask", &mask, "--labels", &bad, "--problem", "mis"]);
    assert!(o.status.success());
}

#[test]
fn preprocess_outputs_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c6.txt", "6 6\n1 2\n2 3\n3 4\n4 5\n5 6\n1 6\n");
    let out = dir.path().join("pre");
    for kind in ["distance-coloring", "network-decomposition", "ball-growing"] {
        let o = supsim(&["preprocess", "--graph", &g, "--kind", kind, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["distance_coloring.json", "network_decomposition.json", "ball_growing.json"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap();
    }
}

#[test]
fn lowerbound_suites_export_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = supsim(&["lowerbound", "sinkless", "--n", "6", "--out", out, "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sinkless_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["rounds"].as_array().unwrap().len(), 3);
    let support = fs::read_to_string(dir.path().join("sinkless_support.txt")).unwrap();
    assert!(support.starts_with("36 38\n"));
    assert!(dir.path().join("sinkless_g_prime.mask").exists());

    let o = supsim(&["lowerbound", "double-cover", "--cuts", "10", "--seed", "3", "--out", out, "--strict"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("double_cover_report.json")).unwrap()).unwrap();
    assert_eq!(report["isomorphisms_verified"], 10);
    assert_eq!(report["alpha_g1"], 6);
    assert_eq!(report["alpha_g2"], 7);
    assert!(dir.path().join("double_cover_g1.mask").exists());
}

#[test]
fn bench_tables() {
    let o = supsim(&["bench", "lcl", "--sizes", "32,64"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "bench,family,mode,n,rounds,bound");
    assert_eq!(text.lines().count(), 9);
    let o = supsim(&["bench", "cluster-mis", "--sizes", "64,128", "--eps", "0.5"]);
    assert!(o.status.success());
}
