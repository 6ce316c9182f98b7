//! Report JSON and sweep curve CSV.
//!
//! Both are written deterministically: no timestamps, fields in declaration
//! order, floats in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::case_study::CaseStudyReport;
use crate::cycle::CycleResult;
use crate::dynamics::{Environment, VehicleParams};
use crate::error::{Error, Result};
use crate::strategy::{OperatingPoint, SlopeScenario, SpeedSweep, SweepGrid};

pub const SCHEMA_VERSION: u32 = 1;
pub const CURVE_HEADER: &str = "speed_kmh,rpm,torque_nm,eta,energy_wh_per_km,feasible";

/// Where a map came from and what exactly it contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapProvenance {
    /// `default`, `synthesize`, `uniform` or `file:<path>`.
    pub source: String,
    /// Fingerprint of the synthesis spec, when synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec_fingerprint: Option<String>,
    /// Fingerprint of the grid values.
    pub grid_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapsProvenance {
    pub motoring: MapProvenance,
    pub braking: MapProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioResult {
    Slope {
        scenario: SlopeScenario,
        grid: SweepGrid,
        points: usize,
        feasible_points: usize,
        optimum: OperatingPoint,
    },
    Cycle {
        baseline: bool,
        result: CycleResult,
    },
    CaseStudy(Box<CaseStudyReport>),
}

impl ScenarioResult {
    pub fn from_sweep(sweep: &SpeedSweep, grid: SweepGrid) -> Self {
        ScenarioResult::Slope {
            scenario: sweep.scenario.clone(),
            grid,
            points: sweep.points.len(),
            feasible_points: sweep.points.iter().filter(|p| p.is_feasible()).count(),
            optimum: sweep.optimum.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub generator: String,
    pub vehicle: VehicleParams,
    pub environment: Environment,
    pub maps: MapsProvenance,
    pub results: Vec<ScenarioResult>,
}

impl Report {
    pub fn new(
        vehicle: VehicleParams,
        environment: Environment,
        maps: MapsProvenance,
        results: Vec<ScenarioResult>,
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            generator: concat!("wheelsim ", env!("CARGO_PKG_VERSION")).to_string(),
            vehicle,
            environment,
            maps,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn parse_report(text: &str) -> Result<Report> {
    let report: Report = serde_json::from_str(text).map_err(json_error)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported report schema version {} (expected {SCHEMA_VERSION})",
            report.schema_version
        )));
    }
    Ok(report)
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text)
}

pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    write_file(path, &report.to_json())
}

pub fn curve_csv(sweep: &SpeedSweep) -> String {
    let mut out = String::with_capacity(64 * (sweep.points.len() + 1));
    out.push_str(CURVE_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for p in &sweep.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.speed_kmh,
            p.rpm,
            p.torque_per_motor_nm,
            opt(p.motor_efficiency.filter(|_| p.is_feasible())),
            opt(p.energy_wh_per_km),
            p.is_feasible()
        );
    }
    out
}

pub fn emit_curve(sweep: &SpeedSweep, path: &Path) -> Result<()> {
    write_file(path, &curve_csv(sweep))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Syntax errors become parse errors; well-formed JSON with the wrong shape
/// is a configuration error.
pub(crate) fn json_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof => Error::parse(e.line() as u64, Some(e.column()), e.to_string()),
        Category::Io => Error::Config(e.to_string()),
        Category::Data => Error::Config(e.to_string()),
    }
}
