use std::path::Path;

use recourse_core::audit::GroupChoice;
use recourse_core::pipeline::{run_solve, LoadedFront, PredictorSpec, RunConfig, TreeJson};
use recourse_core::predictor::PredictorModel;
use recourse_core::schema::{Dataset, Value};
use recourse_core::solver::{SolveStatus, SolverConfig};
use recourse_core::synth::{gen_synth, write_synth, GroupSpec, SynthSpec, ThresholdSpec};

fn spec(group: bool) -> ThresholdSpec {
    ThresholdSpec {
        rows: 600,
        test_rows: 300,
        seed: 11,
        bins: 8,
        income_min: 0.0,
        income_max: 100.0,
        threshold: 60.0,
        max_bin_shift: None,
        numeric_features: 1,
        categorical_features: 1,
        categories: 3,
        extras_actionable: true,
        group: group.then(|| GroupSpec {
            feature: "group".into(),
            focus: "a".into(),
            reference: "b".into(),
            focus_share: 0.4,
            focus_threshold: 75.0,
            focus_income_shift: 10.0,
        }),
        label_noise: 0.0,
    }
}

fn config(dir: &Path, predictor: PredictorSpec) -> RunConfig {
    let mut config = RunConfig::new(dir.join("data.csv"), dir.join("schema.json"), dir.join("out"));
    config.predictor = predictor;
    config.solver = SolverConfig::new(2, 3, 20);
    config.sparsity = 2;
    config
}

fn setup(group: bool) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let output = gen_synth(&SynthSpec::Threshold(spec(group))).unwrap();
    write_synth(&output, dir.path()).unwrap();
    dir
}

#[test]
fn front_round_trips_and_reproduces_training_values() {
    let dir = setup(true);
    let config = config(dir.path(), PredictorSpec::Rules(dir.path().join("rules.json")));
    let report = run_solve(&config).unwrap();
    assert_eq!(report.front.status, SolveStatus::Complete);
    assert!(report.front.solutions.len() >= 2);
    for name in ["front.json", "stats.json", "front.csv"] {
        assert!(config.out.join(name).exists(), "{name} missing");
    }

    let loaded = LoadedFront::load(&config.out.join("front.json")).unwrap();
    assert_eq!(loaded.file, report.front);
    let train = loaded.load_data(&config.data).unwrap();
    let metrics = loaded.evaluate(&train).unwrap();
    for (m, record) in metrics.iter().zip(&loaded.file.solutions) {
        assert_eq!(m.cost_ticks, record.cost_ticks, "solution {}", record.index);
        assert_eq!(m.failures, record.v_loss, "solution {}", record.index);
        assert_eq!(m.n, loaded.file.n_affected);
    }
    // The resolved trees are the solver's trees.
    let solved: Vec<_> = report.result.front.iter().map(|(_, t)| t.clone()).collect();
    assert_eq!(solved.len(), loaded.resolved.trees.len());
    for (a, b) in solved.iter().zip(&loaded.resolved.trees) {
        assert_eq!(a.depth(), b.depth());
        assert_eq!(a.branch_count(), b.branch_count());
    }
}

#[test]
fn logistic_run_is_reproducible() {
    let dir = setup(false);
    let first = run_solve(&config(dir.path(), PredictorSpec::Logistic)).unwrap();
    let text = std::fs::read_to_string(dir.path().join("out/front.json")).unwrap();
    let second = run_solve(&config(dir.path(), PredictorSpec::Logistic)).unwrap();
    assert_eq!(first.front, second.front);
    assert_eq!(text, std::fs::read_to_string(dir.path().join("out/front.json")).unwrap());
    let loaded = LoadedFront::load(&dir.path().join("out/front.json")).unwrap();
    let test = loaded.load_data(&dir.path().join("test.csv")).unwrap();
    let metrics = loaded.evaluate(&test).unwrap();
    assert_eq!(metrics.len(), loaded.file.solutions.len());
    assert!(metrics.iter().all(|m| (0.0..=2.0).contains(&m.invalidity)));
}

#[test]
fn cache_file_is_reused() {
    let dir = setup(false);
    let mut config = config(dir.path(), PredictorSpec::Rules(dir.path().join("rules.json")));
    config.cache_file = Some(dir.path().join("cache.bin"));
    let first = run_solve(&config).unwrap();
    assert!(dir.path().join("cache.bin").exists());
    let second = run_solve(&config).unwrap();
    assert_eq!(first.front, second.front);
    config.sparsity = 1;
    let err = run_solve(&config).err().expect("stale cache accepted");
    assert!(err.to_string().contains("hash mismatch"), "{err}");
}

#[test]
fn group_metrics_pool_to_the_overall_metrics() {
    let dir = setup(true);
    let config = config(dir.path(), PredictorSpec::Rules(dir.path().join("rules.json")));
    run_solve(&config).unwrap();
    let loaded = LoadedFront::load(&config.out.join("front.json")).unwrap();
    let data = loaded.load_data(&dir.path().join("test.csv")).unwrap();
    let report = loaded.audit(&data, "group", &GroupChoice::default()).unwrap();
    assert_eq!(report.focus_group, "a");
    assert_eq!(report.reference_group, "b");
    for s in &report.per_solution {
        let pooled = s.groups[1..].iter().fold(s.groups[0], |acc, g| acc.pool(g));
        assert_eq!(pooled.totals(), s.overall.totals());
        assert_eq!(pooled.n, s.overall.n);
        assert!((pooled.invalidity - s.overall.invalidity).abs() < 1e-12);
    }
    assert!(report.classifier.groups.iter().any(|g| g.group == "a"));
    assert_eq!(report.solutions, loaded.file.solutions.len());
}

fn tests_feature(tree: &TreeJson, name: &str) -> bool {
    match tree {
        TreeJson::Leaf { .. } => false,
        TreeJson::Branch { predicate, fail, pass } => {
            predicate.feature == name || tests_feature(fail, name) || tests_feature(pass, name)
        }
    }
}

#[test]
fn identical_groups_have_no_gap() {
    let dir = setup(true);
    let config = config(dir.path(), PredictorSpec::Rules(dir.path().join("rules.json")));
    run_solve(&config).unwrap();
    let loaded = LoadedFront::load(&config.out.join("front.json")).unwrap();
    let data = loaded.load_data(&config.data).unwrap();
    // Every "a" row becomes a twin row tagged "b", so both groups hold the
    // same reference-group instances.
    let g = data.schema.index_of("group").unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (x, y) in data.instances.iter().zip(data.labels.as_ref().unwrap()) {
        if x[g] == Value::Category(1) {
            let mut twin = x.clone();
            twin[g] = Value::Category(0);
            rows.push(twin);
            labels.push(*y);
        }
    }
    let reference: Vec<_> = rows
        .iter()
        .map(|x| {
            let mut y = x.clone();
            y[g] = Value::Category(1);
            y
        })
        .collect();
    let mut all = rows.clone();
    all.extend(reference);
    let mut all_labels = labels.clone();
    all_labels.extend(labels);
    // Under the group rule the twins would be labeled differently, so the
    // audit runs with a group-blind copy of the reference rule.
    let blind = Dataset::new(data.schema.clone(), all, Some(all_labels)).unwrap();
    let mut front = loaded.file.clone();
    if let PredictorModel::Rules(rules) = &mut front.predictor {
        rules.rules.retain(|r| r.when.iter().all(|c| c.feature != "group"));
    }
    // Trees that test the group send twins to different leaves.
    front.solutions.retain(|s| !tests_feature(&s.tree, "group"));
    assert!(!front.solutions.is_empty());
    let loaded = LoadedFront::from_file(front).unwrap();
    let report = loaded
        .audit(
            &blind,
            "group",
            &GroupChoice {
                focus: Some("a".into()),
                reference: Some("b".into()),
            },
        )
        .unwrap();
    assert_eq!(report.cost_gap.mean, 0.0);
    assert_eq!(report.loss_gap.mean, 0.0);
    assert_eq!(report.invalidity_gap.mean, 0.0);
    assert_eq!(report.cost_gap.sd, 0.0);
    assert_eq!(report.classifier.disparate_impact_ratio, 1.0);
}

#[test]
fn bad_inputs_name_their_stage() {
    let dir = setup(false);
    let mut config = config(dir.path(), PredictorSpec::Logistic);
    config.solver = SolverConfig::new(1, 3, 1);
    let err = run_solve(&config).err().unwrap();
    assert!(err.is_config(), "{err}");

    let mut config = self::config(dir.path(), PredictorSpec::Logistic);
    config.solver.min_leaf = 100_000;
    let err = run_solve(&config).err().unwrap();
    assert!(err.is_infeasible(), "{err}");

    let mut config = self::config(dir.path(), PredictorSpec::Logistic);
    config.data = dir.path().join("missing.csv");
    let err = run_solve(&config).err().unwrap();
    assert!(err.to_string().contains("ingest"), "{err}");
}
