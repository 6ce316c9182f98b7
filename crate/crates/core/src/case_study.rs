//! Round trip over a gentle grade: the in-wheel AEV at its optimal speeds
//! against a conventional EV's reported consumption.

use serde::{Deserialize, Serialize};

use crate::cycle::baseline_model;
use crate::dynamics::DriveStateKind;
use crate::error::{Error, Result};
use crate::strategy::{EnergyModel, SlopeScenario, SweepGrid};

/// Shares of the conventional EV's consumption that do not apply to a
/// constant-speed driverless vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemovalShares {
    pub acceleration: f64,
    pub auxiliary: f64,
    pub driver_mass: f64,
}

impl Default for RemovalShares {
    fn default() -> Self {
        RemovalShares {
            acceleration: 0.173,
            auxiliary: 0.027,
            driver_mass: 0.069,
        }
    }
}

impl RemovalShares {
    pub fn sum(&self) -> f64 {
        self.acceleration + self.auxiliary + self.driver_mass
    }
}

/// Scale `raw_wh_per_km` down by the removed consumers.
pub fn adjust_baseline(raw_wh_per_km: f64, shares: &RemovalShares) -> Result<f64> {
    for (name, s) in [
        ("acceleration", shares.acceleration),
        ("auxiliary", shares.auxiliary),
        ("driver_mass", shares.driver_mass),
    ] {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::domain(
                "removal shares",
                format!("{name} share {s} not in [0, 1)"),
            ));
        }
    }
    let total = shares.sum();
    if total >= 1.0 {
        return Err(Error::domain(
            "removal shares",
            format!("shares sum to {total}, must be < 1"),
        ));
    }
    Ok(raw_wh_per_km * (1.0 - total))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudyConfig {
    pub baseline_raw_wh_per_km: f64,
    pub shares: RemovalShares,
    pub slope_deg: f64,
    pub leg_distance_km: f64,
    /// Cruise speed of the conventional EV, for the first-principles baseline.
    pub baseline_speed_kmh: f64,
    pub driver_mass_kg: f64,
    pub grid: SweepGrid,
}

impl Default for CaseStudyConfig {
    fn default() -> Self {
        CaseStudyConfig {
            baseline_raw_wh_per_km: 157.9,
            shares: RemovalShares::default(),
            slope_deg: 0.3,
            leg_distance_km: 124.1,
            baseline_speed_kmh: 88.5,
            driver_mass_kg: 89.7,
            grid: SweepGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub slope_deg: f64,
    pub distance_km: f64,
    pub speed_kmh: f64,
    pub energy_wh_per_km: f64,
    pub state: DriveStateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPrinciplesBaseline {
    pub upslope: Leg,
    pub downslope: Leg,
    pub average_wh_per_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub baseline_raw_wh_per_km: f64,
    pub baseline_adjusted_wh_per_km: f64,
    pub shares: RemovalShares,
    pub iwm_upslope: Leg,
    pub iwm_downslope: Leg,
    pub iwm_average_wh_per_km: f64,
    /// 1 − iwm_average / baseline_adjusted.
    pub savings: f64,
    pub first_principles_baseline: FirstPrinciplesBaseline,
    pub savings_vs_first_principles: f64,
}

fn weighted_average(legs: [&Leg; 2]) -> f64 {
    let d: f64 = legs.iter().map(|l| l.distance_km).sum();
    legs.iter().map(|l| l.energy_wh_per_km * l.distance_km).sum::<f64>() / d
}

fn optimal_leg(model: &EnergyModel, scenario: &SlopeScenario, grid: &SweepGrid) -> Result<Leg> {
    let opt = model.optimal_speed(scenario, grid)?;
    Ok(Leg {
        slope_deg: scenario.slope_deg,
        distance_km: scenario.distance_km,
        speed_kmh: opt.speed_kmh,
        energy_wh_per_km: opt.energy_wh_per_km.expect("optimum is feasible"),
        state: opt.state,
    })
}

fn cruise_leg(model: &EnergyModel, scenario: &SlopeScenario, speed_kmh: f64) -> Result<Leg> {
    let point = model.evaluate(speed_kmh, scenario)?;
    if let Some(v) = point.violation {
        return Err(Error::Infeasible(v));
    }
    Ok(Leg {
        slope_deg: scenario.slope_deg,
        distance_km: scenario.distance_km,
        speed_kmh,
        energy_wh_per_km: point.energy_wh_per_km.expect("feasible point has energy"),
        state: point.state,
    })
}

pub fn run_case_study(model: &EnergyModel, config: &CaseStudyConfig) -> Result<CaseStudyReport> {
    let adjusted = adjust_baseline(config.baseline_raw_wh_per_km, &config.shares)?;
    let leg = |slope_deg: f64| SlopeScenario {
        distance_km: config.leg_distance_km,
        ..SlopeScenario::new(slope_deg)
    };

    let up = optimal_leg(model, &leg(config.slope_deg), &config.grid)?;
    let down_scenario = leg(-config.slope_deg).with_initial_speed(up.speed_kmh);
    let down = optimal_leg(model, &down_scenario, &config.grid)?;
    let average = weighted_average([&up, &down]);

    let base = baseline_model()?.with_classifier_speed(model.classifier_speed);
    let v = config.baseline_speed_kmh;
    let base_up = cruise_leg(&base, &leg(config.slope_deg).with_cargo(config.driver_mass_kg), v)?;
    let base_down = cruise_leg(
        &base,
        &leg(-config.slope_deg)
            .with_cargo(config.driver_mass_kg)
            .with_initial_speed(v),
        v,
    )?;
    let base_average = weighted_average([&base_up, &base_down]);

    Ok(CaseStudyReport {
        baseline_raw_wh_per_km: config.baseline_raw_wh_per_km,
        baseline_adjusted_wh_per_km: adjusted,
        shares: config.shares,
        iwm_upslope: up,
        iwm_downslope: down,
        iwm_average_wh_per_km: average,
        savings: 1.0 - average / adjusted,
        first_principles_baseline: FirstPrinciplesBaseline {
            upslope: base_up,
            downslope: base_down,
            average_wh_per_km: base_average,
        },
        savings_vs_first_principles: 1.0 - average / base_average,
    })
}
