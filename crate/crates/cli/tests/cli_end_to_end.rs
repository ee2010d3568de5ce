use std::path::Path;
use std::process::{Command, Output};

use mvabo_cli::plot;
use mvabo_cli::summary::Summary;
use mvabo_cli::trace::TraceFile;

fn mvabo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvabo"))
        .args(args)
        .env_remove("MVABO_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_BIRD: &str = "benchmark = bird\nmethod = mt-mva-bo\ngrid_points = 12\nbudget = 15\n";

#[test]
fn three_seeds_write_three_traces_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", SMALL_BIRD);
    let out = tmp.path().join("out");
    let res = mvabo(&["run", "--config", &cfg, "--seeds", "0..3", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for seed in 0..3 {
        let t = TraceFile::load(&out.join(format!("trace_seed{seed}.csv"))).unwrap();
        assert_eq!(t.rows.len(), 15);
        assert_eq!(t.header_value("seed"), Some(seed.to_string().as_str()));
        assert!(out.join(format!("timing_seed{seed}.csv")).exists());
    }
    let summary = Summary::load(&out.join("summary.txt")).unwrap();
    assert_eq!(summary.header_value("traces"), Some("3"));
    assert_eq!(summary.steps.len(), 15);
    assert!(summary.steps.iter().all(|s| s.n == 3));
}

#[test]
fn budget_zero_gives_empty_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "z.cfg", "benchmark = bird\nmethod = rs\ngrid_points = 5\nbudget = 0\nseeds = 1,2\n");
    let out = tmp.path().join("out");
    assert!(mvabo(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    assert!(TraceFile::load(&out.join("trace_seed1.csv")).unwrap().rows.is_empty());
    assert!(Summary::load(&out.join("summary.txt")).unwrap().steps.is_empty());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", SMALL_BIRD);
    let dirs = ["x", "y"].map(|d| tmp.path().join(d));
    for (dir, workers) in dirs.iter().zip(["1", "2"]) {
        let res = mvabo(&["run", "--config", &cfg, "--seeds", "4,5", "--workers", workers, "--out", dir.to_str().unwrap()]);
        assert!(res.status.success());
    }
    for name in ["trace_seed4.csv", "trace_seed5.csv", "summary.txt"] {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        if name == "summary.txt" {
            // The header records the output directory; the table must match.
            let table = |v: &[u8]| String::from_utf8_lossy(v).lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
            assert_eq!(table(&a), table(&b));
        } else {
            assert_eq!(a, b, "{name}");
        }
    }
}

#[test]
fn invalid_configs_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_method = write_config(tmp.path(), "m.cfg", "benchmark = bird\nmethod = nope\n");
    let res = mvabo(&["run", "--config", &bad_method, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("nope"));
    let unknown_key = write_config(tmp.path(), "k.cfg", "benchmark = bird\nmethod = rs\ncolour = blue\n");
    assert!(!mvabo(&["run", "--config", &unknown_key]).status.success());
    assert!(!mvabo(&["run", "--config", tmp.path().join("missing.cfg").to_str().unwrap()]).status.success());
}

#[test]
fn aggregate_and_plot_data_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let mut summaries = Vec::new();
    for method in ["mt-mva-bo", "rs"] {
        let cfg = write_config(
            tmp.path(),
            &format!("{method}.cfg"),
            &format!("benchmark = bird\nmethod = {method}\ngrid_points = 10\nbudget = 8\nseeds = 0,1\n"),
        );
        let out = tmp.path().join(method);
        assert!(mvabo(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
        let again = tmp.path().join(format!("{method}.txt"));
        let res = mvabo(&["aggregate", "--in", out.to_str().unwrap(), "--out", again.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        assert_eq!(Summary::load(&again).unwrap(), Summary::load(&out.join("summary.txt")).unwrap());
        summaries.push(again);
    }
    let csv = tmp.path().join("plot.csv");
    let mut args = vec!["emit-plot-data".to_string()];
    for s in &summaries {
        args.extend(["--in".to_string(), s.to_str().unwrap().to_string()]);
    }
    args.extend(["--out".to_string(), csv.to_str().unwrap().to_string()]);
    assert!(mvabo(&args.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    let rows = plot::load(&csv).unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!((rows[0].method.as_str(), rows[15].method.as_str()), ("mt-mva-bo", "rs"));
}

#[test]
fn output_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "benchmark = bird\nmethod = us\ngrid_points = 6\nbudget = 2\n");
    let res = Command::new(env!("CARGO_BIN_EXE_mvabo"))
        .args(["run", "--config", &cfg])
        .env("MVABO_OUTPUT_ROOT", tmp.path().join("root"))
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(tmp.path().join("root/bird-us/trace_seed0.csv").exists());
}

#[test]
fn version_reports_build_profile() {
    let res = mvabo(&["--version"]);
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.starts_with("mvabo "));
    assert!(text.contains("profile: ") && text.contains("target: "));
}

#[test]
fn preset_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = mvabo_cli::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        n += 1;
    }
    assert!(n > 0);
}
