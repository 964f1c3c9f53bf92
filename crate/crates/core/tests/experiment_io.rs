use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use flock_core::exec::ExecMode;
use flock_core::experiment::{
    parse_override_value, preset, run_scenario_with, sha256_hex, simulate, verify_manifest,
    GraphSpec, InitialData, RunManifest, ScenarioConfig, ScenarioSummary,
};
use flock_core::Error;

fn small_fig3a(out: &Path) -> ScenarioConfig {
    let mut cfg = preset("fig3a_leaders").unwrap();
    cfg.horizon = 1.0;
    cfg.out_dir = out.to_path_buf();
    cfg.snapshot_times = vec![0.5];
    cfg.outputs.push("distance_matrix".into());
    cfg
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn runs_are_byte_identical_across_modes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_scenario_with(&small_fig3a(a.path()), ExecMode::Parallel).unwrap();
    run_scenario_with(&small_fig3a(b.path()), ExecMode::Sequential).unwrap();
    let (fa, fb) = (outputs(a.path()), outputs(b.path()));
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    assert_eq!(fa, fb);
    for label in [
        "fixed_one",
        "fixed_two",
        "switching_one",
        "switching_two",
        "mixed_one_two",
    ] {
        for file in ["diameter.csv", "envelope.csv", "distance_matrix.t0.5.csv"] {
            assert!(
                fa.contains_key(&format!("{label}.{file}")),
                "{label}.{file}"
            );
        }
    }
}

#[test]
fn manifest_digests_cover_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_fig3a(dir.path());
    let m = run_scenario_with(&cfg, ExecMode::Parallel).unwrap();
    assert!(verify_manifest(dir.path()).unwrap().is_empty());

    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let on_disk: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(on_disk.files.len(), m.files.len());
    assert_eq!(on_disk.config, cfg);
    let files = outputs(dir.path());
    assert_eq!(files.len(), m.files.len());
    for f in &m.files {
        assert_eq!(f.sha256, sha256_hex(&files[&f.path]));
    }

    let summary: ScenarioSummary = serde_json::from_slice(&files["summary.json"]).unwrap();
    assert_eq!(summary.runs.len(), 5);
    assert!(summary.runs.iter().all(|r| r.envelope.is_some()));

    let victim = dir.path().join("fixed_one.diameter.csv");
    fs::write(&victim, b"t,value\n0,0\n").unwrap();
    assert_eq!(
        verify_manifest(dir.path()).unwrap(),
        vec!["fixed_one.diameter.csv".to_string()]
    );
}

#[test]
fn diameter_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario_with(&small_fig3a(dir.path()), ExecMode::Sequential).unwrap();
    let text = fs::read_to_string(dir.path().join("fixed_one.diameter.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0].0, 0.0);
    assert!((rows[100].0 - 1.0).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
}

#[test]
fn config_file_round_trip_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = preset("sec53_radius_sweep").unwrap();
    fs::write(&path, cfg.to_json()).unwrap();
    let loaded = ScenarioConfig::load(&path).unwrap();
    assert_eq!(loaded, cfg);

    let changed = loaded
        .with_override("model.radius_d", parse_override_value("0.58"))
        .unwrap();
    assert_eq!(changed.model.radius_d, 0.58);
    let changed = changed
        .with_override("seed", parse_override_value("7"))
        .unwrap();
    assert_eq!(changed.seed, 7);
    assert!(matches!(
        changed.with_override("model.no_such_field.x", parse_override_value("1")),
        Err(e) if e.is_config_error()
    ));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = preset("fig3a_leaders").unwrap();
    cfg.outputs.push("no_such_metric".into());
    assert!(matches!(cfg.validate(), Err(e) if e.is_config_error()));

    let mut cfg = preset("fig3a_leaders").unwrap();
    cfg.snapshot_times = vec![25.0];
    assert!(cfg.validate().is_err());

    let mut cfg = preset("tab_adaptive_cs").unwrap();
    cfg.graph_spec = preset("fig3a_leaders").unwrap().graph_spec;
    assert!(cfg.validate().is_err());

    assert!(matches!(
        ScenarioConfig::from_json("{"),
        Err(Error::Parse(_))
    ));
    assert!(preset("no_such_preset").is_err());
}

#[test]
fn off_grid_snapshot_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_fig3a(dir.path());
    cfg.snapshot_times = vec![0.505];
    assert!(run_scenario_with(&cfg, ExecMode::Sequential).is_err());
}

#[test]
fn explicit_initial_data_on_complete_graph() {
    let mut cfg = preset("fig3a_leaders").unwrap();
    cfg.variants.clear();
    cfg.envelope = None;
    cfg.outputs = vec!["fluctuation_norm".into()];
    cfg.graph_spec = Some(GraphSpec::new("complete"));
    cfg.horizon = 1.0;
    cfg.sample_every = 100;
    cfg.initial_data = InitialData::Explicit {
        positions: vec![vec![0.0], vec![1.0], vec![3.0]],
        velocities: None,
        kappa: None,
    };
    let r = simulate(&cfg, "tiny").unwrap();
    let fl = r.series("fluctuation_norm").unwrap();
    let expected = fl.initial_value().unwrap() * (-3.0_f64).exp();
    assert!((fl.final_value().unwrap() - expected).abs() < 1e-9 * expected);
}
