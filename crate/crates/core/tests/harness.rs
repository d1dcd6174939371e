use boostlab::harness::{
    event_e_summary, run_experiment, synthesize_dataset, DatasetKind, DatasetSpec, ExperimentConfig, ExperimentKind,
    OutputFormat,
};
use boostlab::record::ExperimentRecord;
use boostlab::LabError;
use serde_json::json;

fn csv_data_rows(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn adversary_grid_has_one_row_per_seed_and_cell() {
    let cfg = ExperimentConfig::new(ExperimentKind::AdversarySim, (1..=50).collect())
        .with_param("p", json!([1, 2, 3]))
        .with_param("m", 128)
        .with_param("d", 10)
        .with_param("beta", 2.0);
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.table.rows.len(), 150);
    assert_eq!(out.failures, 0);
    for col in ["seed", "p", "t", "beta", "gamma", "d", "m", "event_E", "test_error", "error_on_hidden", "hidden_size"] {
        assert!(out.table.column(col).is_some(), "missing {col}");
    }
    let summary = event_e_summary(&out.table).unwrap();
    assert_eq!(summary.len(), 3);
    assert!(summary.iter().all(|s| s.trials == 50));
}

#[test]
fn protocol_violations_are_recorded_and_excluded() {
    // the prober issues 3 queries per round but only 2 are declared
    let cfg = ExperimentConfig::new(ExperimentKind::AdversarySim, vec![1, 2, 3])
        .with_param("learner", "subset")
        .with_param("width", 3)
        .with_param("t", json!([2, 3]))
        .with_param("m", 64)
        .with_param("d", 8);
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.failures, 3);
    let status: Vec<_> = out.table.values("status").unwrap().cloned().collect();
    assert_eq!(&status[..3], &[json!("ProtocolViolation"), json!("ProtocolViolation"), json!("ProtocolViolation")]);
    assert!(status[3..].iter().all(|s| s == "ok"));
    let summary = event_e_summary(&out.table).unwrap();
    assert_eq!((summary[0].trials, summary[1].trials), (0, 3));
}

#[test]
fn default_tail_grid_passes() {
    let cfg = ExperimentConfig::new(ExperimentKind::TailCheck, vec![1]);
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.table.rows.len(), 32);
    assert!(out.table.values("pass").unwrap().all(|v| v == true));
    assert!(out.table.values("checked").unwrap().all(|v| v == true));
    for col in ["rho", "delta", "mu", "n", "analytic_bound", "empirical", "ci_low", "ci_high", "pass"] {
        assert!(out.table.column(col).is_some(), "missing {col}");
    }
}

#[test]
fn sampled_boost_reruns_match_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for run in 0..2 {
        let mut cfg = ExperimentConfig::new(ExperimentKind::SampledBoost, vec![7])
            .with_param("m", 50)
            .with_param("gamma", 0.2);
        cfg.output.path = Some(dir.path().join(format!("run{run}.csv")));
        cfg.output.header_meta = false;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.table.get(0, "ledger_p"), Some(&json!(1)));
        texts.push(std::fs::read_to_string(cfg.output.path.unwrap()).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert!(texts[0].starts_with("cell,seed,"));
}

#[test]
fn header_meta_is_the_only_difference() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::BoundsTable, vec![0]).with_param("m", json!([100, 1000]));
    cfg.output.path = Some(dir.path().join("with.csv"));
    run_experiment(&cfg).unwrap();
    let with = std::fs::read_to_string(dir.path().join("with.csv")).unwrap();
    assert!(with.starts_with("# boostlab bounds-table generated_at_unix="));
    cfg.output.header_meta = false;
    cfg.output.path = Some(dir.path().join("without.csv"));
    run_experiment(&cfg).unwrap();
    let without = std::fs::read_to_string(dir.path().join("without.csv")).unwrap();
    assert_eq!(csv_data_rows(&with), csv_data_rows(&without));
}

#[test]
fn json_output_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Adaboost, vec![3])
        .with_param("m", 30)
        .with_param("rounds", 4);
    cfg.output.path = Some(dir.path().join("out.json"));
    cfg.output.format = OutputFormat::Json;
    cfg.output.trace_dir = Some(dir.path().join("traces"));
    run_experiment(&cfg).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(doc["kind"], "adaboost");
    assert_eq!(doc["rows"][0]["ledger_p"], 4);
    assert_eq!(doc["rows"][0]["ledger_t"], 1);
    let trace_file = std::fs::read_dir(dir.path().join("traces")).unwrap().next().unwrap().unwrap().path();
    let trace: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(trace_file).unwrap()).unwrap();
    assert_eq!(trace["trace"]["rounds"].as_array().unwrap().len(), 4);
    let record: ExperimentRecord = serde_json::from_value(trace["record"].clone()).unwrap();
    assert_eq!(record.ledger.p(), 4);
}

#[test]
fn invalid_configs_fail_before_running() {
    let bad_gamma = ExperimentConfig::new(ExperimentKind::SampledBoost, vec![1]).with_param("gamma", json!([0.1, 0.7]));
    assert!(matches!(run_experiment(&bad_gamma), Err(LabError::InvalidInput(_))));
    let unknown = ExperimentConfig::new(ExperimentKind::BoundsTable, vec![1]).with_param("gama", 0.1);
    assert!(matches!(run_experiment(&unknown), Err(LabError::InvalidInput(_))));
    let no_seeds = ExperimentConfig::new(ExperimentKind::BoundsTable, vec![]);
    assert!(run_experiment(&no_seeds).is_err());
    let over_budget = ExperimentConfig::new(ExperimentKind::AdversarySim, vec![1]).with_param("d", 2);
    assert!(matches!(run_experiment(&over_budget), Err(LabError::InvalidInput(_))));
    let mut unwritable = ExperimentConfig::new(ExperimentKind::BoundsTable, vec![1]);
    unwritable.output.path = Some("/nonexistent-dir/x.csv".into());
    assert!(matches!(run_experiment(&unwritable), Err(LabError::InvalidInput(_))));
}

#[test]
fn failing_cells_are_recorded_and_the_run_continues() {
    let cfg = ExperimentConfig::new(ExperimentKind::SampledBoost, vec![1, 2])
        .with_param("dataset", json!(["negated", "finite-class"]))
        .with_param("m", 20);
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.failures, 2);
    assert_eq!(out.exit_code(), 3);
    let status: Vec<_> = out.table.values("status").unwrap().cloned().collect();
    assert_eq!(status, vec![json!("WeakLearnerContractViolation"); 2].into_iter().chain(vec![json!("ok"); 2]).collect::<Vec<_>>());
}

#[test]
fn datasets() {
    let with_c = synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 100, 5, 0.1), 4).unwrap();
    let again = synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 100, 5, 0.1), 4).unwrap();
    assert_eq!(with_c.sample, again.sample);
    assert_eq!(with_c.concept, again.concept);
    let mut session = boostlab::OracleSession::new(&with_c.oracle);
    let cfg = boostlab::boosters::BoostConfig::new(0.1, 5).with_seed(1);
    let run = boostlab::boosters::sampled_boost(&with_c.sample, &mut session, &cfg).unwrap();
    assert_eq!(run.trace.margins.min_margin, 1.0);
    assert!(synthesize_dataset(&DatasetSpec::new(DatasetKind::FiniteClass, 10, 5, 0.0), 0).is_err());
}
