use std::fs;
use std::path::{Path, PathBuf};

use wheelsim_core::config::{RunConfig, Scenario};
use wheelsim_core::cycle::{cycle_distance, load_cycle, SpeedUnit};
use wheelsim_core::efficiency_map::{load_map, save_map, synthesize_motoring_map, MapMode, MapSynthesisSpec};
use wheelsim_core::report::{curve_csv, emit_curve, emit_report, read_report, Report};
use wheelsim_core::Error;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/cycles")
        .join(name)
}

#[test]
fn shipped_cycles_have_expected_distances() {
    let udds = load_cycle(&data("udds.csv"), SpeedUnit::Mph).unwrap();
    let hwfet = load_cycle(&data("hwfet.csv"), SpeedUnit::Mph).unwrap();
    assert!(
        (cycle_distance(&udds) - 11.99).abs() < 0.01,
        "{}",
        cycle_distance(&udds)
    );
    assert!(
        (cycle_distance(&hwfet) - 16.51).abs() < 0.01,
        "{}",
        cycle_distance(&hwfet)
    );
    assert_eq!(udds.duration_s(), 1369.0);
    assert_eq!(hwfet.duration_s(), 765.0);
}

#[test]
fn default_map_survives_disk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("motoring.csv");
    let map = synthesize_motoring_map(&MapSynthesisSpec::motoring_default()).unwrap();
    save_map(&map, &path).unwrap();
    assert_eq!(load_map(&path, MapMode::Motoring).unwrap(), map);
}

fn run_all(config: &RunConfig) -> (Report, Vec<String>) {
    let prepared = config.prepare().unwrap();
    let mut results = Vec::new();
    let mut curves = Vec::new();
    for s in &config.scenarios {
        let out = config.run_scenario(&prepared, s).unwrap();
        if let Some(sweep) = &out.sweep {
            curves.push(curve_csv(sweep));
        }
        results.push(out.result);
    }
    let report = Report::new(
        config.vehicle.clone(),
        config.environment.clone(),
        prepared.provenance,
        results,
    );
    (report, curves)
}

#[test]
fn identical_configs_give_identical_bytes() {
    let config = RunConfig::default();
    let (a, ca) = run_all(&config);
    let (b, cb) = run_all(&config);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(ca, cb);

    let dir = tempfile::tempdir().unwrap();
    emit_report(&a, &dir.path().join("r1.json")).unwrap();
    emit_report(&b, &dir.path().join("r2.json")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("r1.json")).unwrap(),
        fs::read(dir.path().join("r2.json")).unwrap()
    );
    assert_eq!(read_report(&dir.path().join("r1.json")).unwrap(), a);
}

#[test]
fn curve_rows_equal_grid_size() {
    let config = RunConfig::default();
    let prepared = config.prepare().unwrap();
    let out = config.run_scenario(&prepared, &config.scenarios[1]).unwrap();
    let sweep = out.sweep.unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    emit_curve(&sweep, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 120);
}

#[test]
fn cycle_scenarios_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("hwfet.csv"), dir.path().join("hwfet.csv")).unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{ "scenarios": [
              { "cycle": { "path": "hwfet.csv", "unit": "mph" } },
              { "cycle": { "path": "hwfet.csv", "unit": "mph", "baseline": true } }
           ] }"#,
    )
    .unwrap();
    let config = RunConfig::load(&cfg).unwrap();
    config.validate().unwrap();
    let (report, _) = run_all(&config);
    assert_eq!(report.results.len(), 2);
    assert!(matches!(config.scenarios[1], Scenario::Cycle(ref c) if c.baseline));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let (report, _) = run_all(&RunConfig {
        scenarios: vec![Scenario::CaseStudy],
        ..RunConfig::default()
    });
    let err = emit_report(&report, &blocker.join("r.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("file"));
}
