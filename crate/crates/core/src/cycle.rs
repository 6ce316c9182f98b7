//! Time-stepped energy use over a speed trace.
//!
//! Each sample interval is one step: acceleration is the forward difference
//! of the two speeds and forces are evaluated at the interval mean speed.
//! Positive net force draws traction energy through the motoring chain.
//! While decelerating, the part of the net braking force that comes from
//! shedding kinetic energy is recovered through the braking chain.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{wheel_rpm, Environment, MotionState, Resistances, VehicleParams};
use crate::efficiency_map::{EfficiencyMap, MapMode};
use crate::error::{Error, Result};
use crate::strategy::{EnergyModel, MapSet};
use crate::units::{joules_to_wh, kmh_to_ms, mph_to_kmh, RPM_TORQUE_PER_KW, SECONDS_PER_HOUR};

pub const CYCLE_HEADER: [&str; 2] = ["time_s", "speed"];

/// Flat motor efficiency assumed for the conventional baseline drive.
pub const BASELINE_MOTOR_EFFICIENCY: f64 = 0.89;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedUnit {
    Kmh,
    Mph,
}

impl SpeedUnit {
    fn to_kmh(self, v: f64) -> f64 {
        match self {
            SpeedUnit::Kmh => v,
            SpeedUnit::Mph => mph_to_kmh(v),
        }
    }
}

impl FromStr for SpeedUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmh" | "km/h" => Ok(SpeedUnit::Kmh),
            "mph" => Ok(SpeedUnit::Mph),
            other => Err(Error::Config(format!(
                "unknown speed unit `{other}` (expected kmh or mph)"
            ))),
        }
    }
}

impl fmt::Display for SpeedUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeedUnit::Kmh => "kmh",
            SpeedUnit::Mph => "mph",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub time_s: f64,
    pub speed_kmh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingCycle {
    pub name: String,
    samples: Vec<CycleSample>,
    pub source_unit: SpeedUnit,
}

impl DrivingCycle {
    pub fn new(name: impl Into<String>, samples: Vec<CycleSample>, source_unit: SpeedUnit) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("driving cycle", "need at least 2 samples"));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.speed_kmh >= 0.0 && s.speed_kmh.is_finite()) || !s.time_s.is_finite() {
                return Err(Error::domain(
                    "driving cycle",
                    format!("sample {i} has invalid speed {}", s.speed_kmh),
                ));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| !(w[1].time_s > w[0].time_s)) {
            return Err(Error::domain(
                "driving cycle",
                format!("time not increasing at sample {}", i + 1),
            ));
        }
        Ok(DrivingCycle {
            name: name.into(),
            samples,
            source_unit,
        })
    }

    /// Constant speed for `duration_s`, sampled every `dt_s`.
    pub fn constant(speed_kmh: f64, duration_s: f64, dt_s: f64) -> Result<Self> {
        let n = (duration_s / dt_s).round().max(1.0) as usize;
        let samples = (0..=n)
            .map(|k| CycleSample {
                time_s: k as f64 * dt_s,
                speed_kmh,
            })
            .collect();
        Self::new(format!("constant-{speed_kmh}"), samples, SpeedUnit::Kmh)
    }

    /// Parse a `time_s,speed` CSV. Speeds are converted from `unit` to km/h.
    pub fn parse_csv(text: &str, name: &str, unit: SpeedUnit) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut header_seen = false;
        let mut samples: Vec<CycleSample> = Vec::new();
        let mut last_line = 1;
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(e.position().map_or(0, |p| p.line()), None, e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            last_line = line;
            if record.iter().all(str::is_empty) {
                continue;
            }
            if !header_seen {
                if record.iter().collect::<Vec<_>>() != CYCLE_HEADER {
                    return Err(Error::parse(line, None, "expected header `time_s,speed`"));
                }
                header_seen = true;
                continue;
            }
            if record.len() != 2 {
                return Err(Error::parse(
                    line,
                    None,
                    format!("expected 2 fields, found {}", record.len()),
                ));
            }
            let time_s = parse_number(&record, line, 0)?;
            let speed = parse_number(&record, line, 1)?;
            if speed < 0.0 {
                return Err(Error::parse(line, Some(2), format!("negative speed {speed}")));
            }
            if let Some(prev) = samples.last() {
                if !(time_s > prev.time_s) {
                    return Err(Error::parse(
                        line,
                        Some(1),
                        format!("time {time_s} does not increase past {}", prev.time_s),
                    ));
                }
            }
            samples.push(CycleSample {
                time_s,
                speed_kmh: unit.to_kmh(speed),
            });
        }
        if !header_seen {
            return Err(Error::parse(1, None, "missing header `time_s,speed`"));
        }
        if samples.len() < 2 {
            return Err(Error::parse(
                last_line,
                None,
                format!("need at least 2 samples, found {}", samples.len()),
            ));
        }
        Ok(DrivingCycle {
            name: name.to_string(),
            samples,
            source_unit: unit,
        })
    }

    pub fn samples(&self) -> &[CycleSample] {
        &self.samples
    }

    pub fn duration_s(&self) -> f64 {
        self.samples[self.samples.len() - 1].time_s - self.samples[0].time_s
    }

    /// Same trace played backwards in time.
    pub fn reversed(&self) -> Self {
        let end = self.samples[self.samples.len() - 1].time_s;
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| CycleSample {
                time_s: end - s.time_s,
                speed_kmh: s.speed_kmh,
            })
            .collect();
        DrivingCycle {
            name: format!("{}-reversed", self.name),
            samples,
            source_unit: self.source_unit,
        }
    }

    /// Linear resampling with every interval split into `parts` pieces.
    pub fn subdivided(&self, parts: usize) -> Self {
        let parts = parts.max(1);
        let mut samples = Vec::with_capacity((self.samples.len() - 1) * parts + 1);
        for w in self.samples.windows(2) {
            for k in 0..parts {
                let f = k as f64 / parts as f64;
                samples.push(CycleSample {
                    time_s: w[0].time_s + f * (w[1].time_s - w[0].time_s),
                    speed_kmh: w[0].speed_kmh + f * (w[1].speed_kmh - w[0].speed_kmh),
                });
            }
        }
        samples.push(self.samples[self.samples.len() - 1]);
        DrivingCycle {
            name: self.name.clone(),
            samples,
            source_unit: self.source_unit,
        }
    }
}

fn parse_number(record: &csv::StringRecord, line: u64, col: usize) -> Result<f64> {
    let raw = record.get(col).unwrap_or("");
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            line,
            Some(col + 1),
            format!("`{raw}` is not a finite number"),
        )),
    }
}

pub fn load_cycle(path: &Path, unit: SpeedUnit) -> Result<DrivingCycle> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map_or_else(|| "cycle".to_string(), |s| s.to_string_lossy().into_owned());
    DrivingCycle::parse_csv(&text, &name, unit)
}

/// Trapezoidal distance in km.
pub fn cycle_distance(cycle: &DrivingCycle) -> f64 {
    cycle
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].speed_kmh + w[1].speed_kmh) * (w[1].time_s - w[0].time_s))
        .sum::<f64>()
        / SECONDS_PER_HOUR
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegenPolicy {
    /// Share of the decelerating power that is eligible for recovery.
    pub recovery_fraction: f64,
    /// Fixed battery-to-wheel recovery efficiency. When absent it is composed
    /// per step from the braking map and the vehicle's chain efficiencies.
    #[serde(default)]
    pub chain_eff: Option<f64>,
}

impl Default for RegenPolicy {
    fn default() -> Self {
        RegenPolicy {
            recovery_fraction: 1.0,
            chain_eff: None,
        }
    }
}

impl RegenPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.recovery_fraction) {
            return Err(Error::domain(
                "regen policy",
                format!("recovery fraction {} not in [0, 1]", self.recovery_fraction),
            ));
        }
        if let Some(eta) = self.chain_eff {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::domain(
                    "regen policy",
                    format!("chain efficiency {eta} not in (0, 1]"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleOptions {
    #[serde(default)]
    pub slope_deg: f64,
    #[serde(default)]
    pub cargo_mass_kg: f64,
    #[serde(default)]
    pub regen: RegenPolicy,
    #[serde(default)]
    pub trace: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            slope_deg: 0.0,
            cargo_mass_kg: 0.0,
            regen: RegenPolicy::default(),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleStep {
    pub t_start_s: f64,
    pub dt_s: f64,
    pub speed_kmh: f64,
    pub accel_m_s2: f64,
    pub net_force_n: f64,
    pub rpm: f64,
    pub torque_per_motor_nm: f64,
    pub motor_efficiency: Option<f64>,
    pub traction_wh: f64,
    pub regen_wh: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub cycle: String,
    pub distance_km: f64,
    pub duration_s: f64,
    pub unit_energy_wh_per_km: f64,
    pub traction_wh: f64,
    pub regen_wh: f64,
    pub sscm_wh: f64,
    /// Net traction (after regeneration) over total energy.
    pub traction_share: f64,
    pub sscm_share: f64,
    pub regen_recovered_wh_per_km: f64,
    /// Steps whose torque or speed had to be clamped to the map range.
    pub clamped_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<CycleStep>>,
}

pub fn simulate_cycle(cycle: &DrivingCycle, model: &EnergyModel, options: &CycleOptions) -> Result<CycleResult> {
    options.regen.validate()?;
    let distance_km = cycle_distance(cycle);
    if !(distance_km > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let p = &model.params;
    let motors = f64::from(p.motor_count);
    let motoring_chain = p.battery_discharge_eff * p.inverter_eff * p.transmission_eff;
    let braking_chain = p.battery_charge_eff * p.brake_recovery_rate * p.transmission_eff * p.inverter_eff;

    let mut traction_j = 0.0;
    let mut regen_j = 0.0;
    let mut clamped_steps = 0;
    let mut trace = options.trace.then(Vec::new);

    for w in cycle.samples.windows(2) {
        let dt = w[1].time_s - w[0].time_s;
        let v_mid_kmh = 0.5 * (w[0].speed_kmh + w[1].speed_kmh);
        if v_mid_kmh <= 0.0 {
            continue;
        }
        let accel = (kmh_to_ms(w[1].speed_kmh) - kmh_to_ms(w[0].speed_kmh)) / dt;
        let motion = MotionState {
            speed_kmh: v_mid_kmh,
            accel_m_s2: accel,
            slope_deg: options.slope_deg,
            cargo_mass_kg: options.cargo_mass_kg,
        };
        let forces = Resistances::at(&motion, p, &model.env);
        let net = forces.total();
        let raw_rpm = wheel_rpm(v_mid_kmh, p.tire_radius_m);
        let raw_torque = net.abs() * p.tire_radius_m / motors;
        // wheel power from torque and speed, same convention as the strategy rates
        let wheel_power_w = |force_n: f64| force_n * p.tire_radius_m * raw_rpm / RPM_TORQUE_PER_KW * 1000.0;

        let mut step = CycleStep {
            t_start_s: w[0].time_s,
            dt_s: dt,
            speed_kmh: v_mid_kmh,
            accel_m_s2: accel,
            net_force_n: net,
            rpm: raw_rpm,
            torque_per_motor_nm: raw_torque,
            motor_efficiency: None,
            traction_wh: 0.0,
            regen_wh: 0.0,
            clamped: false,
        };

        if net > 0.0 {
            let (eta, clamped) = clamped_efficiency(model.maps.motoring(), p, raw_rpm, raw_torque)?;
            step.clamped = clamped;
            step.motor_efficiency = Some(eta);
            let e = wheel_power_w(net) * dt / (motoring_chain * eta);
            traction_j += e;
            step.traction_wh = joules_to_wh(e);
        } else if accel < 0.0 && net < 0.0 {
            let eta_r = match options.regen.chain_eff {
                Some(eta) => eta,
                None => {
                    let (eta_b, clamped) = clamped_efficiency(model.maps.braking(), p, raw_rpm, raw_torque)?;
                    step.clamped = clamped;
                    step.motor_efficiency = Some(eta_b);
                    eta_b * braking_chain
                }
            };
            let recoverable = forces.acceleration.abs().min(-net);
            let e = options.regen.recovery_fraction * eta_r * wheel_power_w(recoverable) * dt;
            regen_j += e;
            step.regen_wh = joules_to_wh(e);
        }
        if step.clamped {
            clamped_steps += 1;
        }
        if let Some(t) = trace.as_mut() {
            t.push(step);
        }
    }

    let duration_s = cycle.duration_s();
    let sscm_j = p.sscm_power_w * duration_s;
    let total_j = traction_j - regen_j + sscm_j;
    let (traction_share, sscm_share) = if total_j != 0.0 {
        let s = sscm_j / total_j;
        (1.0 - s, s)
    } else {
        (1.0, 0.0)
    };
    Ok(CycleResult {
        cycle: cycle.name.clone(),
        distance_km,
        duration_s,
        unit_energy_wh_per_km: joules_to_wh(total_j) / distance_km,
        traction_wh: joules_to_wh(traction_j),
        regen_wh: joules_to_wh(regen_j),
        sscm_wh: joules_to_wh(sscm_j),
        traction_share,
        sscm_share,
        regen_recovered_wh_per_km: joules_to_wh(regen_j) / distance_km,
        clamped_steps,
        trace,
    })
}

fn clamped_efficiency(map: &EfficiencyMap, p: &VehicleParams, rpm: f64, torque: f64) -> Result<(f64, bool)> {
    let rpm_cap = p.max_motor_rpm.min(map.max_rpm());
    let torque_cap = p.max_motor_torque_nm.min(map.max_torque_nm());
    let clamped = rpm > rpm_cap || torque > torque_cap;
    let eta = map.operating_efficiency(rpm.min(rpm_cap), torque.min(torque_cap))?;
    if !(eta > 0.0) {
        return Err(Error::domain(
            "cycle step",
            format!("motor efficiency {eta} at {rpm:.0} rpm, {torque:.0} N·m"),
        ));
    }
    Ok((eta, clamped))
}

/// Conventional geared EV with a flat motor efficiency and no sensing load.
pub fn baseline_model() -> Result<EnergyModel> {
    let params = VehicleParams::baseline_ev();
    let map = |mode| {
        EfficiencyMap::uniform(
            mode,
            BASELINE_MOTOR_EFFICIENCY,
            params.max_motor_rpm,
            params.max_motor_torque_nm,
        )
    };
    let maps = MapSet::new(map(MapMode::Motoring)?, map(MapMode::Braking)?)?;
    EnergyModel::new(params, Environment::default(), maps)
}

pub fn simulate_baseline_cycle(cycle: &DrivingCycle, options: &CycleOptions) -> Result<CycleResult> {
    simulate_cycle(cycle, &baseline_model()?, options)
}
