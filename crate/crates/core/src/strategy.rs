//! Constant-speed energy on a grade and the speed that optimizes it.
//!
//! Energy per kilometre is signed: positive when the battery is drained,
//! negative when the slope leaves a net regeneration. One argmin therefore
//! serves both the "least consumption" and the "most regeneration" cases.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    classify_drive_state, demand_torque, wheel_rpm, DriveStateKind, Environment, MotionState, VehicleParams,
};
use crate::efficiency_map::{
    synthesize_braking_map, synthesize_motoring_map, EfficiencyMap, MapMode, MapSynthesisSpec,
};
use crate::error::{Error, Result};
use crate::units::{KMH_PER_MS, RPM_TORQUE_PER_KW};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeScenario {
    /// Positive uphill.
    pub slope_deg: f64,
    /// Speed at which the drive state is judged on a downslope.
    #[serde(default)]
    pub initial_speed_kmh: f64,
    #[serde(default = "default_distance")]
    pub distance_km: f64,
    #[serde(default)]
    pub cargo_mass_kg: f64,
    #[serde(default)]
    pub accel_m_s2: f64,
}

fn default_distance() -> f64 {
    1.0
}

impl SlopeScenario {
    pub fn new(slope_deg: f64) -> Self {
        SlopeScenario {
            slope_deg,
            initial_speed_kmh: 0.0,
            distance_km: default_distance(),
            cargo_mass_kg: 0.0,
            accel_m_s2: 0.0,
        }
    }

    pub fn with_initial_speed(mut self, initial_speed_kmh: f64) -> Self {
        self.initial_speed_kmh = initial_speed_kmh;
        self
    }

    pub fn with_cargo(mut self, cargo_mass_kg: f64) -> Self {
        self.cargo_mass_kg = cargo_mass_kg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km > 0.0 && self.distance_km.is_finite()) {
            return Err(Error::domain(
                "slope scenario",
                format!("distance must be > 0, got {}", self.distance_km),
            ));
        }
        if !(self.initial_speed_kmh >= 0.0 && self.initial_speed_kmh.is_finite()) {
            return Err(Error::domain(
                "slope scenario",
                format!("initial speed must be >= 0, got {}", self.initial_speed_kmh),
            ));
        }
        self.motion_at(0.0).validate()
    }

    fn motion_at(&self, speed_kmh: f64) -> MotionState {
        MotionState {
            speed_kmh,
            accel_m_s2: self.accel_m_s2,
            slope_deg: self.slope_deg,
            cargo_mass_kg: self.cargo_mass_kg,
        }
    }
}

/// Which speed the drive-state classifier looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierSpeed {
    /// The scenario's initial speed, fixed for the whole sweep.
    #[default]
    Initial,
    /// The speed being evaluated.
    Evaluated,
}

/// Why an operating point cannot be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RpmAboveLimit {
        rpm: f64,
        limit: f64,
    },
    TorqueAboveLimit {
        torque_per_motor_nm: f64,
        limit: f64,
    },
    /// The demand torque at this speed has the opposite sign to the one the
    /// classified drive state needs.
    RegimeMismatch {
        state: DriveStateKind,
        demand_torque_nm: f64,
    },
    NonPositiveEfficiency {
        efficiency: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RpmAboveLimit { rpm, limit } => write!(f, "wheel speed {rpm:.1} rpm above {limit} rpm"),
            Violation::TorqueAboveLimit {
                torque_per_motor_nm,
                limit,
            } => {
                write!(f, "per-motor torque {torque_per_motor_nm:.1} N·m above {limit} N·m")
            }
            Violation::RegimeMismatch {
                state,
                demand_torque_nm,
            } => {
                write!(
                    f,
                    "demand torque {demand_torque_nm:.1} N·m does not fit the {state:?} state"
                )
            }
            Violation::NonPositiveEfficiency { efficiency } => {
                write!(f, "motor efficiency {efficiency} is not positive")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub speed_kmh: f64,
    pub rpm: f64,
    pub state: DriveStateKind,
    pub total_torque_nm: f64,
    pub torque_per_motor_nm: f64,
    /// Map efficiency used, absent for balanced or infeasible points.
    pub motor_efficiency: Option<f64>,
    /// λ when motoring, λ₂ when braking, 0 when balanced.
    pub energy_factor_nm: Option<f64>,
    pub energy_wh_per_km: Option<f64>,
    pub violation: Option<Violation>,
}

impl OperatingPoint {
    pub fn is_feasible(&self) -> bool {
        self.violation.is_none()
    }
}

/// The two maps an in-wheel drive uses.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSet {
    motoring: EfficiencyMap,
    braking: EfficiencyMap,
}

impl MapSet {
    pub fn new(motoring: EfficiencyMap, braking: EfficiencyMap) -> Result<Self> {
        if motoring.mode() != MapMode::Motoring || braking.mode() != MapMode::Braking {
            return Err(Error::domain("map set", "maps must be (motoring, braking)"));
        }
        Ok(MapSet { motoring, braking })
    }

    pub fn synthesized_default() -> Result<Self> {
        Self::new(
            synthesize_motoring_map(&MapSynthesisSpec::motoring_default())?,
            synthesize_braking_map(&MapSynthesisSpec::braking_default())?,
        )
    }

    pub fn motoring(&self) -> &EfficiencyMap {
        &self.motoring
    }

    pub fn braking(&self) -> &EfficiencyMap {
        &self.braking
    }
}

/// Speed grid for sweeps. With `refine_step` set, the optimum is re-searched
/// at that resolution within one grid step of the best grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub v_min_kmh: f64,
    pub v_max_kmh: f64,
    pub step_kmh: f64,
    #[serde(default)]
    pub refine_step_kmh: Option<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            v_min_kmh: 1.0,
            v_max_kmh: 120.0,
            step_kmh: 1.0,
            refine_step_kmh: Some(0.1),
        }
    }
}

impl SweepGrid {
    pub fn coarse(v_min_kmh: f64, v_max_kmh: f64, step_kmh: f64) -> Self {
        SweepGrid {
            v_min_kmh,
            v_max_kmh,
            step_kmh,
            refine_step_kmh: None,
        }
    }

    fn validate(&self, max_speed_kmh: f64) -> Result<()> {
        let bad = |reason: String| Err(Error::domain("sweep grid", reason));
        if !(self.v_min_kmh > 0.0 && self.v_min_kmh < self.v_max_kmh) {
            return bad(format!(
                "need 0 < v_min < v_max, got {} and {}",
                self.v_min_kmh, self.v_max_kmh
            ));
        }
        if self.v_max_kmh > max_speed_kmh + 1e-9 {
            return bad(format!(
                "v_max {} km/h exceeds {:.2} km/h, the speed at the motor speed limit",
                self.v_max_kmh, max_speed_kmh
            ));
        }
        if !(self.step_kmh > 0.0 && self.step_kmh.is_finite()) {
            return bad(format!("step must be > 0, got {}", self.step_kmh));
        }
        if let Some(r) = self.refine_step_kmh {
            if !(r > 0.0 && r <= self.step_kmh) {
                return bad(format!("refine step must be in (0, step], got {r}"));
            }
        }
        Ok(())
    }

    fn speeds(&self) -> Vec<f64> {
        steps(self.v_min_kmh, self.v_max_kmh, self.step_kmh)
    }
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedSweep {
    pub scenario: SlopeScenario,
    pub points: Vec<OperatingPoint>,
    pub optimum: OperatingPoint,
}

/// Traction energy per distance (kWh/km) for a demanding factor λ in N·m.
pub fn traction_energy_rate(lambda_nm: f64, params: &VehicleParams) -> f64 {
    let chain = params.battery_discharge_eff * params.transmission_eff * params.inverter_eff;
    30.0 / (PI * params.tire_radius_m * KMH_PER_MS * RPM_TORQUE_PER_KW * chain) * lambda_nm
}

/// Recovered energy per distance (kWh/km) for a regenerating factor λ₂.
pub fn recovery_energy_rate(lambda2_nm: f64, params: &VehicleParams) -> f64 {
    let chain = params.battery_charge_eff * params.brake_recovery_rate * params.transmission_eff * params.inverter_eff;
    30.0 * chain / (PI * params.tire_radius_m * KMH_PER_MS * RPM_TORQUE_PER_KW) * lambda2_nm
}

/// Vehicle, environment and maps bundled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub params: VehicleParams,
    pub env: Environment,
    pub maps: MapSet,
    pub classifier_speed: ClassifierSpeed,
}

impl EnergyModel {
    pub fn new(params: VehicleParams, env: Environment, maps: MapSet) -> Result<Self> {
        params.validate()?;
        env.validate()?;
        Ok(EnergyModel {
            params,
            env,
            maps,
            classifier_speed: ClassifierSpeed::default(),
        })
    }

    pub fn with_classifier_speed(mut self, classifier_speed: ClassifierSpeed) -> Self {
        self.classifier_speed = classifier_speed;
        self
    }

    pub fn drive_state(&self, speed_kmh: f64, scenario: &SlopeScenario) -> DriveStateKind {
        let v = match self.classifier_speed {
            ClassifierSpeed::Initial => scenario.initial_speed_kmh,
            ClassifierSpeed::Evaluated => speed_kmh,
        };
        classify_drive_state(&scenario.motion_at(v), &self.params, &self.env)
    }

    /// λ = T_dem / η_m for a motoring point.
    pub fn demanding_energy_factor(&self, speed_kmh: f64, scenario: &SlopeScenario) -> Result<f64> {
        let point = self.evaluate(speed_kmh, scenario)?;
        require_state(DriveStateKind::Motoring, point.state)?;
        into_feasible(point).map(|p| p.energy_factor_nm.unwrap_or(0.0))
    }

    /// λ₂ = |T_dem| · η_b for a braking point; zero on a balanced slope.
    pub fn regenerating_energy_factor(&self, speed_kmh: f64, scenario: &SlopeScenario) -> Result<f64> {
        let point = self.evaluate(speed_kmh, scenario)?;
        if point.state == DriveStateKind::Motoring {
            require_state(DriveStateKind::Braking, point.state)?;
        }
        into_feasible(point).map(|p| p.energy_factor_nm.unwrap_or(0.0))
    }

    /// Signed energy per km at constant speed.
    pub fn energy_per_km(&self, speed_kmh: f64, scenario: &SlopeScenario) -> Result<f64> {
        into_feasible(self.evaluate(speed_kmh, scenario)?).map(|p| p.energy_wh_per_km.unwrap_or(0.0))
    }

    /// Full operating point at `speed_kmh`. Constraint violations are
    /// recorded on the point; only invalid input is an error.
    pub fn evaluate(&self, speed_kmh: f64, scenario: &SlopeScenario) -> Result<OperatingPoint> {
        if speed_kmh == 0.0 {
            return Err(Error::ZeroDistance);
        }
        scenario.validate()?;
        let motion = scenario.motion_at(speed_kmh);
        motion.validate()?;

        let p = &self.params;
        let state = self.drive_state(speed_kmh, scenario);
        let total = demand_torque(&motion, p, &self.env);
        let per_motor = total / f64::from(p.motor_count);
        let rpm = wheel_rpm(speed_kmh, p.tire_radius_m);
        let mut point = OperatingPoint {
            speed_kmh,
            rpm,
            state,
            total_torque_nm: total,
            torque_per_motor_nm: per_motor,
            motor_efficiency: None,
            energy_factor_nm: None,
            energy_wh_per_km: None,
            violation: None,
        };

        let regime_ok = match state {
            DriveStateKind::Motoring => total >= 0.0,
            DriveStateKind::Braking => total <= 0.0,
            DriveStateKind::Balanced => true,
        };
        if !regime_ok {
            point.violation = Some(Violation::RegimeMismatch {
                state,
                demand_torque_nm: total,
            });
            return Ok(point);
        }
        let rpm_excess = rpm / p.max_motor_rpm - 1.0;
        let torque_excess = per_motor.abs() / p.max_motor_torque_nm - 1.0;
        if rpm_excess > 0.0 || torque_excess > 0.0 {
            point.violation = Some(if rpm_excess >= torque_excess {
                Violation::RpmAboveLimit {
                    rpm,
                    limit: p.max_motor_rpm,
                }
            } else {
                Violation::TorqueAboveLimit {
                    torque_per_motor_nm: per_motor.abs(),
                    limit: p.max_motor_torque_nm,
                }
            });
            return Ok(point);
        }

        let sscm = p.sscm_power_w / speed_kmh;
        match state {
            DriveStateKind::Balanced => {
                point.energy_factor_nm = Some(0.0);
                point.energy_wh_per_km = Some(sscm);
            }
            DriveStateKind::Motoring => {
                let eta = self.maps.motoring.operating_efficiency(rpm, per_motor)?;
                point.motor_efficiency = Some(eta);
                if !(eta > 0.0) {
                    point.violation = Some(Violation::NonPositiveEfficiency { efficiency: eta });
                    return Ok(point);
                }
                let lambda = total / eta;
                point.energy_factor_nm = Some(lambda);
                point.energy_wh_per_km = Some(1000.0 * traction_energy_rate(lambda, p) + sscm);
            }
            DriveStateKind::Braking => {
                let eta = self.maps.braking.operating_efficiency(rpm, per_motor.abs())?;
                point.motor_efficiency = Some(eta);
                let lambda2 = total.abs() * eta;
                point.energy_factor_nm = Some(lambda2);
                point.energy_wh_per_km = Some(-(1000.0 * recovery_energy_rate(lambda2, p) - sscm));
            }
        }
        Ok(point)
    }

    pub fn sweep_speeds(&self, scenario: &SlopeScenario, grid: &SweepGrid) -> Result<SpeedSweep> {
        grid.validate(self.params.max_speed_kmh())?;
        scenario.validate()?;
        let points = grid
            .speeds()
            .into_iter()
            .map(|v| self.evaluate(v, scenario))
            .collect::<Result<Vec<_>>>()?;
        let grid_best = best_point(points.iter()).ok_or(Error::NoFeasiblePoint)?.clone();

        let optimum = match grid.refine_step_kmh {
            None => grid_best,
            Some(r) => {
                let lo = (grid_best.speed_kmh - grid.step_kmh).max(grid.v_min_kmh);
                let hi = (grid_best.speed_kmh + grid.step_kmh).min(grid.v_max_kmh);
                let local = steps(lo, hi, r)
                    .into_iter()
                    .map(|v| self.evaluate(v, scenario))
                    .collect::<Result<Vec<_>>>()?;
                best_point(std::iter::once(&grid_best).chain(local.iter()))
                    .expect("grid best is feasible")
                    .clone()
            }
        };
        Ok(SpeedSweep {
            scenario: scenario.clone(),
            points,
            optimum,
        })
    }

    pub fn optimal_speed(&self, scenario: &SlopeScenario, grid: &SweepGrid) -> Result<OperatingPoint> {
        Ok(self.sweep_speeds(scenario, grid)?.optimum)
    }
}

/// Lowest signed energy; ties go to the lower speed.
fn best_point<'a>(points: impl Iterator<Item = &'a OperatingPoint>) -> Option<&'a OperatingPoint> {
    points
        .filter_map(|p| p.energy_wh_per_km.filter(|_| p.is_feasible()).map(|e| (p, e)))
        .fold(None, |best: Option<(&OperatingPoint, f64)>, (p, e)| match best {
            Some((b, be)) if be < e || (be == e && b.speed_kmh <= p.speed_kmh) => Some((b, be)),
            _ => Some((p, e)),
        })
        .map(|(p, _)| p)
}

fn require_state(expected: DriveStateKind, actual: DriveStateKind) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::State { expected, actual })
    }
}

fn into_feasible(point: OperatingPoint) -> Result<OperatingPoint> {
    match point.violation {
        Some(v) => Err(Error::Infeasible(v)),
        None => Ok(point),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{aero_resistance, rolling_resistance, slope_resistance};
    use proptest::prelude::*;

    fn model() -> EnergyModel {
        EnergyModel::new(
            VehicleParams::iwm_aev(),
            Environment::default(),
            MapSet::synthesized_default().unwrap(),
        )
        .unwrap()
    }

    fn flat_unity_model(eta: f64) -> EnergyModel {
        let m = EfficiencyMap::uniform(MapMode::Motoring, eta.min(0.945), 1600.0, 1250.0).unwrap();
        let b = EfficiencyMap::uniform(MapMode::Braking, eta.min(0.91), 1600.0, 1250.0).unwrap();
        EnergyModel::new(
            VehicleParams::iwm_aev(),
            Environment::default(),
            MapSet::new(m, b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn traction_rate_constant() {
        let p = VehicleParams::iwm_aev();
        let expected = 30.0 / (PI * 0.31595 * 3.6 * 9550.0 * 0.885 * 1.0 * 0.974) * 1000.0;
        assert!((traction_energy_rate(1000.0, &p) - expected).abs() < 1e-12);
        assert!((traction_energy_rate(1000.0, &p) - 1.0199).abs() < 1e-3);
        assert_eq!(traction_energy_rate(0.0, &p), 0.0);
    }

    #[test]
    fn recovery_rate_constant() {
        let p = VehicleParams::iwm_aev();
        let rate = recovery_energy_rate(286.0, &p);
        assert!((rate - 0.1805).abs() < 1e-3, "{rate}");
        assert_eq!(recovery_energy_rate(0.0, &p), 0.0);
    }

    #[test]
    fn demanding_factor_composes_force_and_map() {
        let m = model();
        let s = SlopeScenario::new(5.0);
        let lambda = m.demanding_energy_factor(36.0, &s).unwrap();
        let rpm = wheel_rpm(36.0, 0.31595);
        let eta = m.maps.motoring().lookup(rpm, 447.5 / 2.0).unwrap();
        assert!((lambda - 447.5 / eta).abs() < 0.5, "{lambda} vs {}", 447.5 / eta);
        assert!(lambda >= 447.0);
    }

    #[test]
    fn zero_demand_gives_zero_factor() {
        let mut p = VehicleParams::iwm_aev();
        p.rolling_coeff = 0.0;
        let m = EnergyModel::new(p, Environment::default(), MapSet::synthesized_default().unwrap()).unwrap();
        let s = SlopeScenario::new(0.0);
        let small = m.demanding_energy_factor(0.5, &s).unwrap();
        let smaller = m.demanding_energy_factor(0.05, &s).unwrap();
        assert!(smaller < small && smaller < 1e-3);
    }

    #[test]
    fn regenerating_factor_on_5_degree_downslope() {
        let m = model();
        let s = SlopeScenario::new(-5.0).with_initial_speed(30.0);
        let state = MotionState::cruising(40.0, -5.0);
        let (p, e) = (&m.params, &m.env);
        let t =
            (slope_resistance(&state, p, e).abs() - rolling_resistance(&state, p, e) - aero_resistance(&state, p, e))
                * p.tire_radius_m;
        assert!((t - 324.8).abs() < 1.0, "{t}");
        let eta = m
            .maps
            .braking()
            .lookup(wheel_rpm(40.0, p.tire_radius_m), t / 2.0)
            .unwrap();
        let lambda2 = m.regenerating_energy_factor(40.0, &s).unwrap();
        assert!((lambda2 - t * eta).abs() < 1e-9);
        assert!(lambda2 <= t);
    }

    #[test]
    fn unity_braking_efficiency_passes_torque_through() {
        // the braking ceiling forbids η = 1, so check the ratio instead
        let m = flat_unity_model(0.91);
        let s = SlopeScenario::new(-10.0).with_initial_speed(30.0);
        let point = m.evaluate(50.0, &s).unwrap();
        let lambda2 = point.energy_factor_nm.unwrap();
        assert!((lambda2 / point.total_torque_nm.abs() - 0.91).abs() < 1e-15);
    }

    #[test]
    fn state_errors() {
        let m = model();
        let down = SlopeScenario::new(-5.0).with_initial_speed(30.0);
        assert!(matches!(
            m.demanding_energy_factor(40.0, &down),
            Err(Error::State {
                expected: DriveStateKind::Motoring,
                actual: DriveStateKind::Braking
            })
        ));
        let up = SlopeScenario::new(5.0);
        assert!(matches!(
            m.regenerating_energy_factor(40.0, &up),
            Err(Error::State { .. })
        ));
    }

    #[test]
    fn balanced_slope_costs_only_sscm() {
        let m = model();
        // find the balanced grade at 30 km/h by bisection
        let (mut lo, mut hi) = (-5.0f64, 0.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            match classify_drive_state(&MotionState::cruising(30.0, mid), &m.params, &m.env) {
                DriveStateKind::Braking => lo = mid,
                DriveStateKind::Motoring => hi = mid,
                DriveStateKind::Balanced => {
                    lo = mid;
                    break;
                }
            }
        }
        let s = SlopeScenario::new(lo).with_initial_speed(30.0);
        assert_eq!(m.drive_state(30.0, &s), DriveStateKind::Balanced);
        assert_eq!(m.regenerating_energy_factor(30.0, &s).unwrap(), 0.0);
        assert!((m.energy_per_km(30.0, &s).unwrap() - 240.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn rpm_limit_is_infeasible() {
        let m = model();
        let v = 1650.0 * 0.12 * PI * 0.31595;
        let point = m.evaluate(v, &SlopeScenario::new(0.0)).unwrap();
        assert!(matches!(point.violation, Some(Violation::RpmAboveLimit { .. })));
        assert!(matches!(
            m.energy_per_km(v, &SlopeScenario::new(0.0)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn torque_limit_is_infeasible() {
        let m = model();
        let point = m.evaluate(30.0, &SlopeScenario::new(60.0)).unwrap();
        assert!(matches!(point.violation, Some(Violation::TorqueAboveLimit { .. })));
    }

    #[test]
    fn regime_mismatch_on_shallow_downslope_at_speed() {
        // classified as braking at 30 km/h, but at 120 km/h drag wins
        let m = model();
        let s = SlopeScenario::new(-2.0).with_initial_speed(30.0);
        assert_eq!(m.drive_state(120.0, &s), DriveStateKind::Braking);
        let point = m.evaluate(120.0, &s).unwrap();
        assert!(matches!(point.violation, Some(Violation::RegimeMismatch { .. })));
    }

    #[test]
    fn zero_speed_is_rejected() {
        assert!(matches!(
            model().energy_per_km(0.0, &SlopeScenario::new(5.0)),
            Err(Error::ZeroDistance)
        ));
    }

    #[test]
    fn regen_below_sscm_draw_is_net_consumption() {
        let m = model();
        let s = SlopeScenario::new(-0.8).with_initial_speed(30.0);
        assert_eq!(m.drive_state(5.0, &s), DriveStateKind::Braking);
        assert!(m.energy_per_km(5.0, &s).unwrap() > 0.0);
    }

    #[test]
    fn sweep_validation() {
        let m = model();
        let s = SlopeScenario::new(5.0);
        assert!(m.sweep_speeds(&s, &SweepGrid::coarse(0.0, 100.0, 1.0)).is_err());
        assert!(m.sweep_speeds(&s, &SweepGrid::coarse(10.0, 5.0, 1.0)).is_err());
        assert!(m.sweep_speeds(&s, &SweepGrid::coarse(1.0, 200.0, 1.0)).is_err());
        assert!(m.sweep_speeds(&s, &SweepGrid::coarse(1.0, 100.0, 0.0)).is_err());
        assert!(matches!(
            m.sweep_speeds(&SlopeScenario::new(70.0), &SweepGrid::coarse(1.0, 120.0, 1.0)),
            Err(Error::NoFeasiblePoint)
        ));
    }

    #[test]
    fn coarse_optimum_is_a_grid_point() {
        let m = model();
        let sweep = m
            .sweep_speeds(&SlopeScenario::new(10.0), &SweepGrid::coarse(1.0, 120.0, 1.0))
            .unwrap();
        assert_eq!(sweep.points.len(), 120);
        assert!(sweep.points.windows(2).all(|w| w[1].speed_kmh > w[0].speed_kmh));
        assert!(sweep.points.contains(&sweep.optimum));
        let best = sweep.optimum.energy_wh_per_km.unwrap();
        assert!(sweep
            .points
            .iter()
            .filter_map(|p| p.energy_wh_per_km)
            .all(|e| e >= best));
    }

    #[test]
    fn refinement_never_worse() {
        let m = model();
        for theta in [5.0, 10.0, -10.0] {
            let s = SlopeScenario::new(theta).with_initial_speed(30.0);
            let coarse = m.optimal_speed(&s, &SweepGrid::coarse(1.0, 120.0, 1.0)).unwrap();
            let fine = m.optimal_speed(&s, &SweepGrid::default()).unwrap();
            assert!(fine.energy_wh_per_km.unwrap() <= coarse.energy_wh_per_km.unwrap());
            assert!((fine.speed_kmh - coarse.speed_kmh).abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn ties_go_to_lower_speed() {
        let a = OperatingPoint {
            speed_kmh: 10.0,
            rpm: 0.0,
            state: DriveStateKind::Motoring,
            total_torque_nm: 0.0,
            torque_per_motor_nm: 0.0,
            motor_efficiency: None,
            energy_factor_nm: None,
            energy_wh_per_km: Some(5.0),
            violation: None,
        };
        let b = OperatingPoint {
            speed_kmh: 20.0,
            ..a.clone()
        };
        assert_eq!(best_point([&b, &a].into_iter()).unwrap().speed_kmh, 10.0);
        assert_eq!(best_point([&a, &b].into_iter()).unwrap().speed_kmh, 10.0);
    }

    #[test]
    fn optima_respect_limits() {
        let m = model();
        for theta in [5.0, 10.0, 15.0, -5.0, -10.0, -15.0] {
            let s = SlopeScenario::new(theta).with_initial_speed(30.0);
            let opt = m.optimal_speed(&s, &SweepGrid::default()).unwrap();
            assert!(opt.rpm <= 1600.0 && opt.torque_per_motor_nm.abs() <= 1250.0);
        }
    }

    proptest! {
        #[test]
        fn factor_path_matches_direct_power(v in 1.0..150.0f64, theta in 0.0..12.0f64, cargo in 0.0..300.0f64) {
            let m = model();
            let s = SlopeScenario::new(theta).with_cargo(cargo);
            let point = m.evaluate(v, &s).unwrap();
            prop_assume!(point.is_feasible());
            let p = &m.params;
            let eta = point.motor_efficiency.unwrap();
            let direct = point.total_torque_nm * point.rpm
                / (RPM_TORQUE_PER_KW * p.battery_discharge_eff * p.inverter_eff * eta * p.transmission_eff)
                / v * 1000.0
                + p.sscm_power_w / v;
            let via_factor = point.energy_wh_per_km.unwrap();
            prop_assert!(((via_factor - direct) / direct).abs() < 1e-9);
        }

        #[test]
        fn rates_are_linear(l in 0.0..5000.0f64, c in 0.0..10.0f64) {
            let p = VehicleParams::iwm_aev();
            let t = traction_energy_rate(l, &p);
            let r = recovery_energy_rate(l, &p);
            prop_assert!((traction_energy_rate(c * l, &p) - c * t).abs() <= 1e-12 * (1.0 + c * t));
            prop_assert!((recovery_energy_rate(c * l, &p) - c * r).abs() <= 1e-12 * (1.0 + c * r));
        }

        #[test]
        fn evaluation_is_order_independent(speeds in proptest::collection::vec(1.0..150.0f64, 1..20)) {
            let m = model();
            let s = SlopeScenario::new(-7.0).with_initial_speed(30.0);
            let forward: Vec<_> = speeds.iter().map(|&v| m.evaluate(v, &s).unwrap()).collect();
            let mut backward: Vec<_> = speeds.iter().rev().map(|&v| m.evaluate(v, &s).unwrap()).collect();
            backward.reverse();
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn point_invariants(v in 1.0..190.0f64, theta in -20.0..20.0f64) {
            let m = model();
            let s = SlopeScenario::new(theta).with_initial_speed(30.0);
            let point = m.evaluate(v, &s).unwrap();
            prop_assert_eq!(point.rpm, wheel_rpm(v, m.params.tire_radius_m));
            prop_assert_eq!(point.torque_per_motor_nm, point.total_torque_nm / 2.0);
            prop_assert_eq!(point.is_feasible(), point.energy_wh_per_km.is_some());
        }
    }
}
