use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn netdesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdesign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_edgeless(dir: &Path, n: usize) -> String {
    let p = dir.join(format!("edgeless{n}.txt"));
    fs::write(&p, format!("{n}\n")).unwrap();
    path_str(&p).to_string()
}

#[test]
fn gen_network_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let out = netdesign(&[
        "gen-network",
        "--family",
        "er",
        "--n",
        "10",
        "--p",
        "0",
        "--seed",
        "1",
        "-o",
        path_str(&g),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&g).unwrap(), "10\n");
    assert!(String::from_utf8_lossy(&out.stdout).contains("edges=0"));

    let bad = netdesign(&[
        "gen-network",
        "--family",
        "er",
        "--n",
        "10",
        "--p",
        "1.5",
        "-o",
        path_str(&g),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn gen_network_is_deterministic_for_every_family() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["er", "sw", "pl", "sbm"] {
        let a = dir.path().join(format!("{family}-a.txt"));
        let b = dir.path().join(format!("{family}-b.txt"));
        for p in [&a, &b] {
            let out = netdesign(&[
                "gen-network",
                "--family",
                family,
                "--n",
                "40",
                "--seed",
                "9",
                "-o",
                path_str(p),
            ]);
            assert!(out.status.success(), "{family}");
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }
}

#[test]
fn design_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let g4 = write_edgeless(dir.path(), 4);
    let v = json_stdout(&netdesign(&[
        "design",
        "--network",
        &g4,
        "--strategy",
        "balanced",
        "--seed",
        "3",
    ]));
    let ones = v["z"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b.as_u64() == Some(1))
        .count();
    assert_eq!(ones, 2);
    assert_eq!(v["strategy"], "balanced");
    assert_eq!(v["seed"], 3);

    // edgeless, n = 10, default prior: E[sigma2] + E[gamma2] = 1.5 times 1/5 + 1/5
    let g10 = write_edgeless(dir.path(), 10);
    let v = json_stdout(&netdesign(&["design", "--network", &g10, "--strategy", "optimal"]));
    assert!((v["imse_closed_form"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(v["n_treated"], 5);
    let v = json_stdout(&netdesign(&[
        "design",
        "--network",
        &g10,
        "--strategy",
        "optimal",
        "--objective",
        "closed-form",
    ]));
    assert!((v["objective"].as_f64().unwrap() - 0.6).abs() < 1e-12);

    let v = json_stdout(&netdesign(&[
        "design",
        "--network",
        &g10,
        "--strategy",
        "stratified",
        "--k-clusters",
        "2",
    ]));
    assert_eq!(v["n_treated"], 5);

    let bad = netdesign(&["design", "--network", &g10, "--r-sigma", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("integrable"));
}

#[test]
fn point_prior_design_reports_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "6\n0 1\n1 2\n3 4\n").unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"params": [{"mu": 0.0, "sigma2": 1.0, "gamma2": 0.5}, {"mu": 2.0, "sigma2": 1.0, "gamma2": 0.0}], "weights": [1, 3]}"#,
    )
    .unwrap();
    let v = json_stdout(&netdesign(&[
        "design",
        "--network",
        path_str(&g),
        "--strategy",
        "point-prior",
        "--grid",
        path_str(&grid),
    ]));
    let report = &v["point_prior"];
    assert_eq!(report["candidates"].as_array().unwrap().len(), 2);
    let winner = report["winner"].as_u64().unwrap() as usize;
    assert_eq!(report["losses"][winner], v["objective"]);

    let missing = netdesign(&["design", "--network", path_str(&g), "--strategy", "point-prior"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn evaluate_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.json");
    fs::write(&cov, "[[1, 0.9, 0], [0.9, 1, 0], [0, 0, 1]]").unwrap();
    let far = json_stdout(&netdesign(&[
        "evaluate",
        "--explicit-cov",
        path_str(&cov),
        "--weights",
        "[1, 0, -1]",
    ]));
    let near = json_stdout(&netdesign(&[
        "evaluate",
        "--explicit-cov",
        path_str(&cov),
        "--weights",
        "[1, -1, 0]",
    ]));
    assert!((far["variance_of_contrast"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((near["variance_of_contrast"].as_f64().unwrap() - 0.2).abs() < 1e-12);

    let g = dir.path().join("path.txt");
    fs::write(&g, "3\n0 1\n1 2\n").unwrap();
    let v = json_stdout(&netdesign(&[
        "evaluate",
        "--network",
        path_str(&g),
        "--assignment",
        "[1, 0, 1]",
        "--model",
        "normal",
        "--decompose",
    ]));
    assert!((v["mse"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    let d = &v["decomposition"];
    let f = |k: &str| d[k].as_f64().unwrap();
    let summed = f("bias_sq") + f("group_size_var") + f("net_var_treated") + f("net_var_control") - f("net_var_cross");
    assert!((summed - f("total")).abs() < 1e-12);

    let v = json_stdout(&netdesign(&[
        "evaluate",
        "--network",
        path_str(&g),
        "--assignment",
        "[1, 0, 1]",
        "--mc-draws",
        "20000",
    ]));
    let exact = v["imse_closed_form"].as_f64().unwrap();
    let mc = &v["imse_mc"];
    assert!((mc["value"].as_f64().unwrap() - exact).abs() < 4.0 * mc["std_error"].as_f64().unwrap());

    let v = json_stdout(&netdesign(&[
        "evaluate",
        "--network",
        path_str(&g),
        "--assignment",
        "[1, 0, 1]",
        "--model",
        "poisson-gamma",
    ]));
    assert!(v["mse"].as_f64().unwrap() > 0.0);

    let all_ones = netdesign(&["evaluate", "--network", path_str(&g), "--assignment", "[1, 1, 1]"]);
    assert_eq!(all_ones.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&all_ones.stderr).contains("degenerate"));
    let short = netdesign(&["evaluate", "--network", path_str(&g), "--assignment", "[1, 0]"]);
    assert_eq!(short.status.code(), Some(2));
    let missing = netdesign(&["evaluate", "--network", "/nonexistent/g.txt", "--assignment", "[1, 0]"]);
    assert_eq!(missing.status.code(), Some(1));
}

fn tiny_config(dir: &Path) -> String {
    let p = dir.join("tiny.json");
    fs::write(
        &p,
        r#"{"n_nodes": 30, "n_replications": 3, "n_mc_draws": 200, "n_baseline_draws": 10, "optimizer": {"n_restarts": 2}}"#,
    )
    .unwrap();
    path_str(&p).to_string()
}

#[test]
fn simulate_writes_schema_conformant_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = netdesign(&[
        "simulate",
        "--config",
        &cfg,
        "--study",
        "comparative",
        "-o",
        path_str(&out_dir),
        "--seed",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("median relative iMSE: optimal="));
    let text = fs::read_to_string(out_dir.join("comparative_records.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "replication_id,network_family,design_strategy,design_prior_id,imse_true,relative_imse"
    );
    assert_eq!(lines.count(), 4 * 3 * 3);
    let echo: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("comparative_records.config.json")).unwrap()).unwrap();
    assert_eq!(echo["master_seed"], 2);
    assert_eq!(echo["config"]["n_nodes"], 30);
}

#[test]
fn misspecification_uses_ten_pair_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.json");
    fs::write(
        &cfg,
        r#"{"network_families": [{"family": "erdos-renyi", "p": 0.15}], "n_nodes": 30, "n_replications": 2,
            "n_mc_draws": 100, "n_baseline_draws": 5, "optimizer": {"n_restarts": 1}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = netdesign(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--study",
        "misspec",
        "-o",
        path_str(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(out_dir.join("misspec_records.csv")).unwrap();
    let mut ids: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.contains(",optimal,"))
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 10);
    let echo: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("misspec_records.config.json")).unwrap()).unwrap();
    assert!(echo["config"]["design_priors"].is_null());
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    for study in ["comparative", "anova", "ranking"] {
        let mut contents = Vec::new();
        for run in 0..2 {
            let out_dir = dir.path().join(format!("{study}-{run}"));
            let out = netdesign(&[
                "simulate",
                "--config",
                &cfg,
                "--study",
                study,
                "-o",
                path_str(&out_dir),
                "--seed",
                "5",
                "--ranking-draws",
                "100",
                "--ranking-pairs",
                "5",
            ]);
            assert!(
                out.status.success(),
                "{study}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let mut files: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
            files.sort();
            let bytes: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|f| {
                    (
                        f.file_name().unwrap().to_string_lossy().into_owned(),
                        fs::read(f).unwrap(),
                    )
                })
                .collect();
            contents.push((out.stdout, bytes));
        }
        assert_eq!(contents[0], contents[1], "{study}");
    }
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n_nodes": 30, "bogus": 1}"#).unwrap();
    let out = netdesign(&["simulate", "--config", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    fs::write(&bad, r#"{"n_nodes": 30, "k_clusters": 40}"#).unwrap();
    let out = netdesign(&["simulate", "--config", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k_clusters"));
}

#[test]
fn worker_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_edgeless(dir.path(), 8);
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_netdesign"))
            .args(["design", "--network", &g, "--seed", "1"])
            .env("NETDESIGN_WORKERS", workers)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("0").status.code(), Some(2));
}
