use gcs_core::groups::{enumerate_gks, sparsity_index, GroupPartition};
use gcs_core::harness::{draw_signal, run_experiment, ExperimentConfig, SignalModel, CSV_SCHEMA};
use gcs_core::norms::NormSpec;

const BASE: &str = "\
n = 12
m = 10
k = 4
partition = uniform:2
penalty = gl
eps = 0.01
trials = 5
seed = 3
";

#[test]
fn writes_csv_and_json_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, format!("{BASE}csv = out/trials.csv\njson = out/summary.json\n")).unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    let out = run_experiment(&cfg).unwrap();
    out.write(&cfg).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("out/trials.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_SCHEMA));
    let header = lines.next().unwrap();
    assert!(header.starts_with("trial,matrix_seed,signal_seed,noise_seed,status,"));
    assert!(!header.contains("wall"));
    assert_eq!(lines.count(), 5);

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(json["trials"], 5);
    assert_eq!(json["successful"], 5);
    assert_eq!(json["wall_time_trials"].as_array().unwrap().len(), 5);
    assert_eq!(json["config"]["seed"], 3);
}

#[test]
fn shared_matrix_and_bernoulli_ensemble() {
    let cfg = ExperimentConfig::parse(&format!("{BASE}matrix = shared\nensemble = bernoulli\n"), None).unwrap();
    let out = run_experiment(&cfg).unwrap();
    let first = &out.records[0];
    for r in &out.records {
        assert_eq!(r.matrix_seed, first.matrix_seed);
        assert_eq!((r.rho_low_k, r.delta_2k), (first.rho_low_k, first.delta_2k));
    }
    assert!(out.records.windows(2).all(|w| w[0].signal_seed != w[1].signal_seed));
}

#[test]
fn per_trial_seeds_do_not_depend_on_trial_count() {
    let short = run_experiment(&ExperimentConfig::parse(BASE, None).unwrap()).unwrap();
    let long = run_experiment(&ExperimentConfig::parse(&BASE.replace("trials = 5", "trials = 8"), None).unwrap()).unwrap();
    let (a, b) = (short.csv().unwrap(), long.csv().unwrap());
    let prefix: Vec<&str> = b.lines().take(a.lines().count()).collect();
    assert_eq!(a.lines().collect::<Vec<_>>(), prefix);
}

#[test]
fn compressible_signals_have_a_positive_sparsity_index() {
    let p = GroupPartition::uniform(12, 2).unwrap();
    let fam = enumerate_gks(&p, 4).unwrap();
    let gl = NormSpec::group_l2(p.clone());
    for seed in 0..10 {
        let x = draw_signal(SignalModel::Compressible { rate: 0.5 }, &fam, seed);
        let s4 = sparsity_index(&x, &gl, &fam).unwrap();
        let s8 = sparsity_index(&x, &gl, &enumerate_gks(&p, 8).unwrap()).unwrap();
        assert!(s4 > 0.0 && s8 < s4);
    }
}

#[test]
fn failed_stages_are_recorded_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tree.txt"), "l2 1 0 1\nl2 1 2 3\nl2 1 4 5\nl2 1 6 7\nl2 1 8 9\nl2 1 10 11\n").unwrap();
    let text = format!("{BASE}approx = gl\nconstants = empirical:50\n").replace("penalty = gl", "penalty = tree:tree.txt");
    let cfg = ExperimentConfig::parse(&text, Some(dir.path())).unwrap();
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.summary.successful, 0);
    assert!(out.records.iter().all(|r| r.status.starts_with("error:") && r.rho_low_k.is_some()));
}

#[test]
fn config_errors() {
    for bad in [
        format!("{BASE}colour = blue\n"),
        format!("{BASE}n = 13\n"),
        BASE.replace("penalty = gl", ""),
        BASE.replace("trials = 5", "trials = 0"),
        format!("{BASE}signal = compressible:1.5\n"),
        format!("{BASE}noise = cube\n"),
        BASE.replace("uniform:2", "uniform:5"),
        format!("{BASE}this line has no equals sign\n"),
    ] {
        assert!(ExperimentConfig::parse(&bad, None).is_err(), "{bad}");
    }
}
