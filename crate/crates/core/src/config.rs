//! Run configuration: JSON with unit-suffixed keys, plus `KEY=VALUE`
//! overrides addressed by dotted path.
//!
//! ```json
//! {
//!   "vehicle": { "sscm_power_w": 240.0 },
//!   "maps": { "motoring": "default", "braking": { "file": "maps/braking.csv" } },
//!   "scenarios": [
//!     { "slope": { "slope_deg": 10.0 } },
//!     { "cycle": { "path": "cycles/udds.csv", "unit": "mph" } },
//!     "case_study"
//!   ]
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::case_study::{run_case_study, CaseStudyConfig};
use crate::cycle::{load_cycle, simulate_baseline_cycle, simulate_cycle, CycleOptions, RegenPolicy, SpeedUnit};
use crate::dynamics::{Environment, VehicleParams};
use crate::efficiency_map::{
    load_map, synthesize_braking_map, synthesize_motoring_map, EfficiencyMap, MapMode, MapSynthesisSpec,
};
use crate::error::{Error, Result};
use crate::report::{json_error, MapProvenance, MapsProvenance, ScenarioResult};
use crate::strategy::{ClassifierSpeed, EnergyModel, MapSet, SlopeScenario, SpeedSweep, SweepGrid};

pub const CONFIG_ENV_VAR: &str = "WHEELSIM_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSource {
    /// The built-in calibrated surface for the mode.
    #[default]
    Default,
    Synthesize(MapSynthesisSpec),
    /// One efficiency everywhere, over the vehicle's motor limits.
    Uniform(f64),
    File(PathBuf),
}

impl MapSource {
    fn load(&self, mode: MapMode, params: &VehicleParams, base_dir: &Path) -> Result<(EfficiencyMap, MapProvenance)> {
        let synth = |spec: &MapSynthesisSpec| match mode {
            MapMode::Motoring => synthesize_motoring_map(spec),
            MapMode::Braking => synthesize_braking_map(spec),
        };
        let (map, source, spec_fingerprint) = match self {
            MapSource::Default => {
                let spec = match mode {
                    MapMode::Motoring => MapSynthesisSpec::motoring_default(),
                    MapMode::Braking => MapSynthesisSpec::braking_default(),
                };
                (synth(&spec)?, "default".to_string(), Some(spec.fingerprint()))
            }
            MapSource::Synthesize(spec) => (synth(spec)?, "synthesize".to_string(), Some(spec.fingerprint())),
            MapSource::Uniform(eta) => (
                EfficiencyMap::uniform(mode, *eta, params.max_motor_rpm, params.max_motor_torque_nm)?,
                "uniform".to_string(),
                None,
            ),
            MapSource::File(path) => {
                let full = base_dir.join(path);
                (load_map(&full, mode)?, format!("file:{}", path.display()), None)
            }
        };
        let provenance = MapProvenance {
            source,
            spec_fingerprint,
            grid_fingerprint: map.fingerprint(),
        };
        Ok((map, provenance))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapsConfig {
    pub motoring: MapSource,
    pub braking: MapSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleScenario {
    pub path: PathBuf,
    #[serde(default = "default_unit")]
    pub unit: SpeedUnit,
    /// Run the conventional baseline vehicle instead of the configured one.
    #[serde(default)]
    pub baseline: bool,
}

fn default_unit() -> SpeedUnit {
    SpeedUnit::Mph
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Slope(SlopeScenario),
    Cycle(CycleScenario),
    CaseStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub vehicle: VehicleParams,
    pub environment: Environment,
    pub maps: MapsConfig,
    pub classifier_speed: ClassifierSpeed,
    pub sweep: SweepGrid,
    pub cycle: CycleOptions,
    pub case_study: CaseStudyConfig,
    pub scenarios: Vec<Scenario>,
    pub output_dir: Option<PathBuf>,
    /// Directory relative paths are resolved against; the config file's own
    /// directory when loaded from disk.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let slope = |deg: f64| Scenario::Slope(SlopeScenario::new(deg).with_initial_speed(30.0));
        RunConfig {
            vehicle: VehicleParams::iwm_aev(),
            environment: Environment::default(),
            maps: MapsConfig::default(),
            classifier_speed: ClassifierSpeed::default(),
            sweep: SweepGrid::default(),
            cycle: CycleOptions {
                regen: RegenPolicy::default(),
                ..CycleOptions::default()
            },
            case_study: CaseStudyConfig::default(),
            scenarios: [0.0, 5.0, 10.0, 15.0, -5.0, -10.0, -15.0, -0.2, -0.5, -0.8]
                .into_iter()
                .map(slope)
                .chain([Scenario::CaseStudy])
                .collect(),
            output_dir: None,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Built model plus where its maps came from.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub model: EnergyModel,
    pub provenance: MapsProvenance,
}

/// Output of one scenario: the report entry and, for slopes, the full sweep.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub result: ScenarioResult,
    pub sweep: Option<SpeedSweep>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        Ok(config)
    }

    /// Apply `key.path=value` overrides. Values are read as JSON when they
    /// parse as JSON and as plain strings otherwise. Every path must name a
    /// field that exists in the fully defaulted configuration.
    pub fn with_overrides<S: AsRef<str>>(self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self);
        }
        let base_dir = self.base_dir.clone();
        let mut value = serde_json::to_value(&self).expect("config serializes");
        for o in overrides {
            apply_override(&mut value, o.as_ref())?;
        }
        let mut config: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("scenario list is empty".into()));
        }
        self.cycle.regen.validate()?;
        for s in &self.scenarios {
            match s {
                Scenario::Slope(slope) => slope.validate()?,
                Scenario::Cycle(c) => {
                    load_cycle(&self.base_dir.join(&c.path), c.unit)?;
                }
                Scenario::CaseStudy => {}
            }
        }
        self.prepare().map(|_| ())
    }

    pub fn prepare(&self) -> Result<PreparedRun> {
        self.vehicle.validate()?;
        self.environment.validate()?;
        let (motoring, mp) = self
            .maps
            .motoring
            .load(MapMode::Motoring, &self.vehicle, &self.base_dir)?;
        let (braking, bp) = self
            .maps
            .braking
            .load(MapMode::Braking, &self.vehicle, &self.base_dir)?;
        let model = EnergyModel::new(
            self.vehicle.clone(),
            self.environment.clone(),
            MapSet::new(motoring, braking)?,
        )?
        .with_classifier_speed(self.classifier_speed);
        Ok(PreparedRun {
            model,
            provenance: MapsProvenance {
                motoring: mp,
                braking: bp,
            },
        })
    }

    pub fn run_scenario(&self, prepared: &PreparedRun, scenario: &Scenario) -> Result<ScenarioOutput> {
        match scenario {
            Scenario::Slope(s) => {
                let sweep = prepared.model.sweep_speeds(s, &self.sweep)?;
                Ok(ScenarioOutput {
                    result: ScenarioResult::from_sweep(&sweep, self.sweep),
                    sweep: Some(sweep),
                })
            }
            Scenario::Cycle(c) => {
                let cycle = load_cycle(&self.base_dir.join(&c.path), c.unit)?;
                let result = if c.baseline {
                    simulate_baseline_cycle(&cycle, &self.cycle)?
                } else {
                    simulate_cycle(&cycle, &prepared.model, &self.cycle)?
                };
                Ok(ScenarioOutput {
                    result: ScenarioResult::Cycle {
                        baseline: c.baseline,
                        result,
                    },
                    sweep: None,
                })
            }
            Scenario::CaseStudy => {
                let report = run_case_study(&prepared.model, &self.case_study)?;
                Ok(ScenarioOutput {
                    result: ScenarioResult::CaseStudy(Box::new(report)),
                    sweep: None,
                })
            }
        }
    }
}

/// Set the value at a dotted path inside `root`. Array elements are addressed
/// by index.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str::<Value>(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));

    let mut cursor = root;
    for part in key.split('.') {
        cursor = match cursor {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::Config(format!("override path `{key}` does not exist (at `{part}`)")))?;
    }
    *cursor = value;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.vehicle, VehicleParams::iwm_aev());
        assert!(!c.scenarios.is_empty());
        c.validate().unwrap();
    }

    #[test]
    fn partial_blocks_and_sources() {
        let c = RunConfig::parse(
            r#"{
                "vehicle": { "sscm_power_w": 0.0 },
                "maps": { "motoring": { "uniform": 0.9 }, "braking": "default" },
                "scenarios": [ { "slope": { "slope_deg": 5.0 } }, "case_study" ]
            }"#,
        )
        .unwrap();
        assert_eq!(c.vehicle.sscm_power_w, 0.0);
        assert_eq!(c.vehicle.vehicle_mass_kg, 1436.0);
        assert_eq!(c.maps.motoring, MapSource::Uniform(0.9));
        let prepared = c.prepare().unwrap();
        assert_eq!(prepared.provenance.motoring.source, "uniform");
        assert!(prepared.provenance.braking.spec_fingerprint.is_some());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(
            RunConfig::parse(r#"{ "vehicle": { "mass": 1 } }"#),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::parse(r#"{ "vehicle": "#), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_scenarios_rejected() {
        let c = RunConfig::parse(r#"{ "scenarios": [] }"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_edit_nested_fields() {
        let c = RunConfig::default()
            .with_overrides(&[
                "vehicle.rolling_coeff=0.012",
                "scenarios.1.slope.slope_deg=7",
                "cycle.regen.chain_eff=0.7",
            ])
            .unwrap();
        assert_eq!(c.vehicle.rolling_coeff, 0.012);
        assert!(matches!(&c.scenarios[1], Scenario::Slope(s) if s.slope_deg == 7.0));
        assert_eq!(c.cycle.regen.chain_eff, Some(0.7));
        let c = RunConfig::default()
            .with_overrides(&["classifier_speed=evaluated"])
            .unwrap();
        assert_eq!(c.classifier_speed, ClassifierSpeed::Evaluated);
    }

    #[test]
    fn bad_overrides() {
        for o in [
            "vehicle.nope=1",
            "novalue",
            "=3",
            "vehicle.vehicle_mass_kg=heavy",
            "scenarios.99.slope=1",
        ] {
            assert!(
                matches!(RunConfig::default().with_overrides(&[o]), Err(Error::Config(_))),
                "{o}"
            );
        }
    }

    #[test]
    fn file_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let map = synthesize_braking_map(&MapSynthesisSpec::braking_default()).unwrap();
        crate::efficiency_map::save_map(&map, &dir.path().join("b.csv")).unwrap();
        fs::write(dir.path().join("c.csv"), "time_s,speed\n0,0\n10,36\n20,0\n").unwrap();
        let cfg = dir.path().join("run.json");
        fs::write(
            &cfg,
            r#"{ "maps": { "braking": { "file": "b.csv" } },
                 "scenarios": [ { "cycle": { "path": "c.csv", "unit": "kmh" } } ] }"#,
        )
        .unwrap();
        let c = RunConfig::load(&cfg).unwrap();
        c.validate().unwrap();
        let prepared = c.prepare().unwrap();
        assert_eq!(prepared.model.maps.braking(), &map);
        let out = c.run_scenario(&prepared, &c.scenarios[0]).unwrap();
        assert!(matches!(out.result, ScenarioResult::Cycle { baseline: false, .. }));
        assert!(matches!(
            RunConfig::load(&dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
