use std::fs;

use spinfluct::harness::{run_and_write, ExperimentConfig, ExperimentKind, KPolicy};

fn cfg(kind: ExperimentKind, dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        ns: vec![8],
        replicas: 60,
        master_seed: 3,
        k_policy: KPolicy::Explicit { k: 3 },
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn fluct_outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (summary, files) = run_and_write(&cfg(ExperimentKind::Fluct, a.path())).unwrap();
    run_and_write(&ExperimentConfig { workers: 2, ..cfg(ExperimentKind::Fluct, b.path()) }).unwrap();
    let csv_a = fs::read(files.replicas_csv.as_ref().unwrap()).unwrap();
    let csv_b = fs::read(b.path().join("fluct_replicas.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("replica_id,seed,F,recentered,C1,C2,C3,sum,residual\n"));
    assert_eq!(text.lines().count(), 61);
    assert!(summary.assertions_enabled);
    assert_eq!(summary.checks.len(), 4);

    let plot = fs::read_to_string(files.plot_csv.unwrap()).unwrap();
    assert!(plot.starts_with("rank,value,normal_quantile\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files.summary_json).unwrap()).unwrap();
    assert_eq!(json["kind"], "fluct");
    assert_eq!(
        ExperimentConfig::from_text(json["effective_config"].as_str().unwrap()).unwrap(),
        cfg(ExperimentKind::Fluct, a.path())
    );
}

#[test]
fn every_kind_writes_a_summary() {
    for kind in [ExperimentKind::CyclesP, ExperimentKind::CyclesQ, ExperimentKind::Residual, ExperimentKind::QnMixture] {
        let dir = tempfile::tempdir().unwrap();
        let mut c = cfg(kind, dir.path());
        if kind == ExperimentKind::Residual {
            c.ns = vec![4, 6];
        }
        let (summary, files) = run_and_write(&c).unwrap();
        assert!(files.summary_json.exists(), "{kind}");
        assert_eq!(summary.kind, kind);
        assert!(!summary.checks.is_empty(), "{kind}");
    }
}

#[test]
fn supercritical_runs_without_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(ExperimentKind::Fluct, dir.path());
    c.beta = 0.9;
    let (summary, files) = run_and_write(&c).unwrap();
    assert!(!summary.assertions_enabled);
    assert!(summary.checks.is_empty());
    assert!(summary.passed);
    assert!(files.plot_csv.is_none());
    assert!(summary.theory["s2"].is_null());
}
