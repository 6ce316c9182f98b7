//! Replays the checked-in fuzz corpus through the parsers on stable.

use std::fs;
use std::path::{Path, PathBuf};

use wheelsim_core::config::RunConfig;
use wheelsim_core::cycle::{DrivingCycle, SpeedUnit};
use wheelsim_core::efficiency_map::{EfficiencyMap, MapMode};
use wheelsim_core::report::parse_report;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn map_seeds_parse_and_round_trip() {
    for (p, text) in seeds("map_csv") {
        let mode = if p.to_string_lossy().contains("braking") {
            MapMode::Braking
        } else {
            MapMode::Motoring
        };
        let map = EfficiencyMap::parse_csv(&text, mode).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(EfficiencyMap::parse_csv(&map.to_csv(), mode).unwrap(), map);
    }
}

#[test]
fn cycle_seeds_parse() {
    for (p, text) in seeds("cycle_csv") {
        DrivingCycle::parse_csv(&text, "seed", SpeedUnit::Mph).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn config_seeds_prepare() {
    for (p, text) in seeds("run_config") {
        let config = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        config.prepare().unwrap();
    }
}

#[test]
fn report_seeds_round_trip() {
    for (p, text) in seeds("report_json") {
        let report = parse_report(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(report.to_json(), text);
    }
}

#[test]
fn override_seeds_apply() {
    for (p, text) in seeds("param_override") {
        let lines: Vec<String> = text.lines().map(str::to_owned).collect();
        RunConfig::default()
            .with_overrides(&lines)
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
