use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dme-dc")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path_str(&path)]);
    let out = dme(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(str::to_owned).collect()).collect()
}

const TRACE_HEADER: &str = "k,objective,infeasibility,xi_norm,gap_norm,inner_iters,time_ms";

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["l12ls", "--m", "18", "--n", "64", "--s", "2", "--rho", "0.1", "--seed", "7"];
    let a = gen(&dir, "a.json", &args);
    let b = gen(&dir, "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn gen_rejects_bad_dims() {
    let dir = TempDir::new().unwrap();
    let out = dme(&["gen", "l12ls", "--m", "5", "--n", "3", "--s", "9", "-o", path_str(&dir.path().join("x.json"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimensions"));
    let out = dme(&["gen", "qp", "--m", "4", "-o", path_str(&dir.path().join("y.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn toy_gd_reaches_small_residual() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "toy.json", &["toy"]);
    let trace = dir.path().join("t.csv");
    let summary = dir.path().join("s.json");
    let out = dme(&[
        "solve",
        "--instance",
        path_str(&inst),
        "--solver",
        "gd",
        "--start",
        "0.5",
        "-o",
        path_str(&trace),
        "--summary",
        path_str(&summary),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with(&format!("{TRACE_HEADER}\n")));
    assert!(!text.contains('\r'));
    let rows = read_csv(&trace);
    let last = rows.last().unwrap();
    assert!(last[3].parse::<f64>().unwrap() <= 1e-6);
    assert_eq!(last[1].parse::<f64>().unwrap(), -0.5);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["status"], "converged");
    for key in ["iters", "final_objective", "final_residuals", "wall_ms"] {
        assert!(s.get(key).is_some(), "summary lacks {key}");
    }
    let stdout: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout["iters"], s["iters"]);
}

#[test]
fn mismatched_solver_exits_two() {
    let dir = TempDir::new().unwrap();
    let toy = gen(&dir, "toy.json", &["toy"]);
    assert_eq!(code(&dme(&["solve", "--instance", path_str(&toy), "--solver", "lcdc_alm"])), 2);
    let dcls = gen(&dir, "d.json", &["dcls", "--m", "5", "--n", "20", "--s", "3", "--seed", "1"]);
    assert_eq!(code(&dme(&["solve", "--instance", path_str(&dcls), "--solver", "proximal_alm"])), 2);
    assert_eq!(code(&dme(&["solve", "--instance", path_str(&toy)])), 2);
    assert_eq!(code(&dme(&["solve", "--instance", path_str(&toy), "--solver", "gd", "--mu", "-1"])), 2);
}

#[test]
fn tampered_instance_exits_two() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "l.json", &["l12ls", "--m", "4", "--n", "8", "--s", "2"]);
    let text = std::fs::read_to_string(&inst).unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    std::fs::write(&inst, text).unwrap();
    assert_eq!(code(&dme(&["solve", "--instance", path_str(&inst), "--solver", "igd"])), 2);
}

#[test]
fn zero_iterations_give_one_row() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "l.json", &["l12ls", "--m", "6", "--n", "12", "--s", "2", "--rho", "0.5"]);
    for solver in ["gd", "igd", "pdcae"] {
        let trace = dir.path().join(format!("{solver}.csv"));
        let out = dme(&[
            "solve",
            "--instance",
            path_str(&inst),
            "--solver",
            solver,
            "--max-iter",
            "0",
            "-o",
            path_str(&trace),
        ]);
        assert_eq!(code(&out), 0);
        let rows = read_csv(&trace);
        assert_eq!(rows.len(), 2, "{solver}");
        assert_eq!(rows[1][0], "0");
    }
}

#[test]
fn fixed_seed_runs_match_except_time() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "d.json", &["dcls", "--m", "5", "--n", "20", "--s", "3", "--rho", "1", "--seed", "3"]);
    let run = |name: &str| {
        let trace = dir.path().join(name);
        let out = dme(&[
            "solve",
            "--instance",
            path_str(&inst),
            "--solver",
            "composite_alm",
            "--seed",
            "11",
            "--max-iter",
            "40",
            "-o",
            path_str(&trace),
        ]);
        assert_eq!(code(&out), 0);
        read_csv(&trace)
            .into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert!(a.len() > 2);
    assert_eq!(a, b);
}

#[test]
fn solver_error_flushes_partial_trace() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "d.json", &["dcls", "--m", "5", "--n", "20", "--s", "3", "--rho", "1", "--seed", "1"]);
    let trace = dir.path().join("c.csv");
    let out = dme(&[
        "solve",
        "--instance",
        path_str(&inst),
        "--solver",
        "composite_alm",
        "--eps",
        "1e-30",
        "--max-iter",
        "300",
        "-o",
        path_str(&trace),
    ]);
    assert_eq!(code(&out), 3);
    let rows = read_csv(&trace);
    assert_eq!(rows[0].join(","), TRACE_HEADER);
    assert!(rows.len() >= 2);
    let ks: Vec<usize> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[0] < w[1]));
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["status"], "error");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let inst = gen(&dir, "l.json", &["l12ls", "--m", "6", "--n", "12", "--s", "2", "--rho", "0.5"]);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"solver": "igd", "max_iter": 3, "tol": 1e-12}"#).unwrap();
    let trace = dir.path().join("t.csv");
    let base = ["solve", "--instance", path_str(&inst), "--config", path_str(&cfg), "-o", path_str(&trace)];
    assert_eq!(code(&dme(&base)), 0);
    assert_eq!(read_csv(&trace).len(), 5);
    let mut with_flag = base.to_vec();
    with_flag.extend_from_slice(&["--max-iter", "1"]);
    let out = dme(&with_flag);
    assert_eq!(code(&out), 0);
    assert_eq!(read_csv(&trace).len(), 3);
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["solver"], "igd");

    std::fs::write(&cfg, r#"{"solver": "igd", "bogus": 1}"#).unwrap();
    assert_eq!(code(&dme(&base)), 2);
}

#[test]
fn bench_single_cell_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(
        &suite,
        r#"{"seeds": [4], "instances": [{"kind": "l12ls", "m": 6, "n": 12, "s": 2, "rho": 0.5}],
            "solvers": [{"solver": "igd"}]}"#,
    )
    .unwrap();
    let out_csv = dir.path().join("agg.csv");
    let traces = dir.path().join("traces");
    let out = dme(&["bench", "--config", path_str(&suite), "-o", path_str(&out_csv), "--trace-dir", path_str(&traces)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&out_csv);
    assert_eq!(rows[0].join(","), "instance,solver,runs,failures,avg_iters,avg_wall_ms,avg_final_objective,converged");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "l12ls_m6_n12_s2_rho0.5");
    assert_eq!((rows[1][2].as_str(), rows[1][3].as_str()), ("1", "0"));
    assert_eq!(std::fs::read_dir(&traces).unwrap().count(), 1);
}

#[test]
fn bench_records_failures_and_continues() {
    let dir = TempDir::new().unwrap();
    let suite = dir.path().join("suite.json");
    std::fs::write(
        &suite,
        r#"{"seeds": [0, 1],
            "instances": [{"label": "toy", "kind": "toy"}],
            "solvers": [{"solver": "gd", "start": 0.5}, {"label": "bad", "solver": "lcdc_alm"}]}"#,
    )
    .unwrap();
    let out_csv = dir.path().join("agg.csv");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_dme-dc"))
        .args(["bench", "--config", path_str(&suite), "-o", path_str(&out_csv)])
        .env("DME_DC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let rows = read_csv(&out_csv);
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[1][1..4], ["gd", "2", "0"]);
    assert_eq!(rows[1][7], "2");
    assert_eq!(&rows[2][1..4], ["bad", "2", "2"]);
    assert_eq!(rows[2][4], "NaN");
}

fn write_trace(dir: &TempDir, name: &str) -> PathBuf {
    let inst = gen(dir, &format!("{name}.json"), &["toy"]);
    let trace = dir.path().join(format!("{name}.csv"));
    let out =
        dme(&["solve", "--instance", path_str(&inst), "--solver", "gd", "--start", "0.5", "-o", path_str(&trace)]);
    assert_eq!(code(&out), 0);
    trace
}

#[test]
fn report_merges_filters_and_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let a = write_trace(&dir, "alpha");
    let b = write_trace(&dir, "beta");
    let n_rows = read_csv(&a).len() - 1;

    let long = dir.path().join("long.csv");
    assert_eq!(code(&dme(&["report", path_str(&a), path_str(&b), "-o", path_str(&long)])), 0);
    let rows = read_csv(&long);
    assert_eq!(rows[0].join(","), "run_id,k,metric,value");
    assert_eq!(rows.len() - 1, 2 * 6 * n_rows);
    let ids: std::collections::BTreeSet<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids.into_iter().collect::<Vec<_>>(), ["alpha", "beta"]);

    let filtered = dir.path().join("obj.csv");
    assert_eq!(code(&dme(&["report", path_str(&a), "--metrics", "objective,xi_norm", "-o", path_str(&filtered)])), 0);
    let rows = read_csv(&filtered);
    assert_eq!(rows.len() - 1, 2 * n_rows);
    assert!(rows[1..].iter().all(|r| r[2] == "objective" || r[2] == "xi_norm"));

    let again = dir.path().join("again.csv");
    assert_eq!(code(&dme(&["report", path_str(&long), "-o", path_str(&again)])), 0);
    assert_eq!(std::fs::read(&long).unwrap(), std::fs::read(&again).unwrap());

    let same_stem = dir.path().join("sub");
    std::fs::create_dir(&same_stem).unwrap();
    std::fs::copy(&a, same_stem.join("alpha.csv")).unwrap();
    let out = dme(&["report", path_str(&a), path_str(&same_stem.join("alpha.csv"))]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("alpha#2,"));
}

#[test]
fn report_rejects_malformed_traces() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "k,objective\n0,1.0\n").unwrap();
    let out = dme(&["report", path_str(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema mismatch"));
    std::fs::write(&bad, format!("{TRACE_HEADER}\n0,1.0,0,0,0,0,x\n")).unwrap();
    assert_eq!(code(&dme(&["report", path_str(&bad)])), 2);
    let good = write_trace(&dir, "good");
    assert_eq!(code(&dme(&["report", path_str(&good), "--metrics", "speed"])), 2);
}
