use std::path::Path;
use std::process::{Command, Output};

fn gcs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcs"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to start gcs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn generate_certify_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gcs(&["gen-matrix", "--m", "24", "--n", "16", "--seed", "5", "--out", "A.txt"], d);
    assert!(o.status.success());
    std::fs::write(d.join("p.txt"), "0 1 2 3\n4 5 6 7\n8 9 10 11\n12 13 14 15\n").unwrap();

    let o = gcs(&["certify", "--matrix", "A.txt", "--partition", "p.txt", "--order", "4", "8"], d);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("order = 4") && text.contains("order = 8"));

    // y = A x for x supported on the second group, computed from the saved matrix
    let a = std::fs::read_to_string(d.join("A.txt")).unwrap();
    let rows: Vec<Vec<f64>> = a
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    let x = [0.0, 0.0, 0.0, 0.0, 1.0, -0.5, 0.25, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let y: Vec<String> = rows.iter().map(|r| r.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>().to_string()).collect();
    std::fs::write(d.join("y.txt"), y.join("\n")).unwrap();

    let o = gcs(
        &["solve", "--matrix", "A.txt", "--y", "y.txt", "--norm", "gl", "--partition", "p.txt", "--out", "r.json"],
        d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["converged"], true);
    assert_eq!(r["norm"], "gl");
    assert_eq!(r["options"]["max_iters"], 100000);
    let xh: Vec<f64> = r["x_hat"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let err: f64 = xh.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    assert!(err < 1e-5, "error {err}");

    let o = gcs(
        &["bounds", "--matrix", "A.txt", "--partition", "p.txt", "--k", "4", "--sigma", "0.1", "--eps", "0.01"],
        d,
    );
    assert!(o.status.success());
    let b = json(&o);
    assert_eq!(b["k"], 4);
    assert!(b.get("bound_c").is_some() && b.get("delta_2k").is_some());
}

#[test]
fn decompose_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.txt"), "1 0.1 0.6 0.6\n").unwrap();
    let o = gcs(&["decompose", "--x", "x.txt", "--groups", "uniform:2", "--k", "2", "--norm", "l1"], dir.path());
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["pieces"][0]["support"], serde_json::json!([2, 3]));
    assert_eq!(v["pieces"][1]["support"], serde_json::json!([0, 1]));
    assert!((v["sparsity_index"].as_f64().unwrap() - 1.1).abs() < 1e-15);
}

#[test]
fn sample_size_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcs(&["sample-size", "--n", "20000", "--k", "20", "--delta", "0.25", "--zeta", "1e-6"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("m = "));
    assert!(text.contains("family_term = "));
    let o = gcs(
        &["sample-size", "--n", "20000", "--k", "20", "--delta", "0.25", "--zeta", "1e-6", "--g", "6000", "--smax", "5", "--json"],
        dir.path(),
    );
    let v = json(&o);
    assert!(v["m"].as_u64().unwrap() < 128_045);
}

#[test]
fn experiment_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.cfg"),
        "n = 12\nm = 30\nk = 4\npartition = uniform:2\npenalty = gl\neps = 0.01\ntrials = 4\nseed = 1\ncsv = a.csv\njson = a.json\n",
    )
    .unwrap();
    let o = gcs(&["experiment", "--config", "run.cfg"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = gcs(&["--threads", "1", "experiment", "--config", "run.cfg", "--csv", "b.csv"], d);
    assert!(o.status.success());
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("a.json")).unwrap()).unwrap();
    assert_eq!(s["successful"], 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gcs(&["--help"], d).status.code(), Some(0));
    assert_eq!(gcs(&["frobnicate"], d).status.code(), Some(1));
    assert_eq!(gcs(&["certify", "--matrix", "missing.txt", "--order", "2"], d).status.code(), Some(1));
    assert_eq!(gcs(&["sample-size", "--n", "10", "--k", "20", "--delta", "0.2", "--zeta", "0.1"], d).status.code(), Some(1));

    // every trial fails at the solve stage: tree penalties have no prox
    std::fs::write(d.join("tree.txt"), "l2 1 0 1\nl2 1 2 3\n").unwrap();
    std::fs::write(
        d.join("bad.cfg"),
        "n = 4\nm = 4\nk = 2\npartition = uniform:2\npenalty = tree:tree.txt\napprox = gl\nconstants = empirical:20\ntrials = 2\n",
    )
    .unwrap();
    let o = gcs(&["experiment", "--config", "bad.cfg"], d);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("error: "));
}
