//! Longitudinal force and kinematics layer.
//!
//! Sign conventions: slope angle is positive uphill, and the slope force is
//! signed the same way, so a downhill grade pushes the vehicle forward with a
//! negative resistance. Speeds are km/h at the API boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::kmh_to_ms;

/// Absolute tolerance (N) inside which slope force and rolling plus aero drag
/// are considered balanced.
pub const BALANCE_TOLERANCE_N: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    pub vehicle_mass_kg: f64,
    /// Equivalent translational mass of the rotating parts, added to the body
    /// mass when accelerating.
    pub rotating_inertia_mass_kg: f64,
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub tire_radius_m: f64,
    pub rolling_coeff: f64,
    pub battery_charge_eff: f64,
    pub battery_discharge_eff: f64,
    pub transmission_eff: f64,
    pub inverter_eff: f64,
    pub brake_recovery_rate: f64,
    pub sscm_power_w: f64,
    pub max_motor_rpm: f64,
    pub max_motor_torque_nm: f64,
    pub motor_count: u32,
}

impl VehicleParams {
    /// Mid-size autonomous EV with two in-wheel motors.
    pub fn iwm_aev() -> Self {
        VehicleParams {
            vehicle_mass_kg: 1436.0,
            rotating_inertia_mass_kg: 148.0,
            frontal_area_m2: 2.7435,
            drag_coeff: 0.29,
            tire_radius_m: 0.31595,
            rolling_coeff: 0.01,
            battery_charge_eff: 0.867,
            battery_discharge_eff: 0.885,
            transmission_eff: 1.0,
            inverter_eff: 0.974,
            brake_recovery_rate: 0.85,
            sscm_power_w: 240.0,
            max_motor_rpm: 1600.0,
            max_motor_torque_nm: 1250.0,
            motor_count: 2,
        }
    }

    /// The conventional front-motor EV the in-wheel design is derived from:
    /// heavier, geared, no sensing and computing load.
    pub fn baseline_ev() -> Self {
        VehicleParams {
            vehicle_mass_kg: 1481.0,
            transmission_eff: 0.93,
            inverter_eff: 0.95,
            sscm_power_w: 0.0,
            ..Self::iwm_aev()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vehicle_mass_kg", self.vehicle_mass_kg),
            ("rotating_inertia_mass_kg", self.rotating_inertia_mass_kg),
            ("frontal_area_m2", self.frontal_area_m2),
            ("tire_radius_m", self.tire_radius_m),
            ("max_motor_rpm", self.max_motor_rpm),
            ("max_motor_torque_nm", self.max_motor_torque_nm),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::domain(
                    "vehicle parameters",
                    format!("{name} must be > 0, got {value}"),
                ));
            }
        }
        let non_negative = [
            ("drag_coeff", self.drag_coeff),
            ("rolling_coeff", self.rolling_coeff),
            ("sscm_power_w", self.sscm_power_w),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::domain(
                    "vehicle parameters",
                    format!("{name} must be >= 0, got {value}"),
                ));
            }
        }
        let fractions = [
            ("battery_charge_eff", self.battery_charge_eff),
            ("battery_discharge_eff", self.battery_discharge_eff),
            ("transmission_eff", self.transmission_eff),
            ("inverter_eff", self.inverter_eff),
            ("brake_recovery_rate", self.brake_recovery_rate),
        ];
        for (name, value) in fractions {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::domain(
                    "vehicle parameters",
                    format!("{name} must be in (0, 1], got {value}"),
                ));
            }
        }
        if self.motor_count == 0 {
            return Err(Error::domain("vehicle parameters", "motor_count must be >= 1"));
        }
        Ok(())
    }

    /// Total torque the motors can deliver together.
    pub fn max_total_torque_nm(&self) -> f64 {
        self.max_motor_torque_nm * f64::from(self.motor_count)
    }

    /// Road speed at which the wheels reach the motor speed ceiling.
    pub fn max_speed_kmh(&self) -> f64 {
        self.max_motor_rpm * 0.12 * PI * self.tire_radius_m
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::iwm_aev()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Environment {
    pub air_density_kg_m3: f64,
    pub gravity_m_s2: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            air_density_kg_m3: 1.2041,
            gravity_m_s2: 9.81,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if !(self.air_density_kg_m3 > 0.0 && self.air_density_kg_m3.is_finite()) {
            return Err(Error::domain("environment", "air_density_kg_m3 must be > 0"));
        }
        if !(self.gravity_m_s2 > 0.0 && self.gravity_m_s2.is_finite()) {
            return Err(Error::domain("environment", "gravity_m_s2 must be > 0"));
        }
        Ok(())
    }
}

/// Instantaneous driving condition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionState {
    pub speed_kmh: f64,
    pub accel_m_s2: f64,
    /// Positive uphill.
    pub slope_deg: f64,
    pub cargo_mass_kg: f64,
}

impl MotionState {
    pub fn cruising(speed_kmh: f64, slope_deg: f64) -> Self {
        MotionState {
            speed_kmh,
            slope_deg,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed_kmh >= 0.0 && self.speed_kmh.is_finite()) {
            return Err(Error::domain(
                "motion state",
                format!("speed must be >= 0, got {}", self.speed_kmh),
            ));
        }
        if !(self.slope_deg.abs() < 90.0) {
            return Err(Error::domain(
                "motion state",
                format!("|slope| must be < 90°, got {}", self.slope_deg),
            ));
        }
        if !(self.cargo_mass_kg >= 0.0 && self.cargo_mass_kg.is_finite()) {
            return Err(Error::domain("motion state", "cargo mass must be >= 0"));
        }
        if !self.accel_m_s2.is_finite() {
            return Err(Error::domain("motion state", "acceleration must be finite"));
        }
        Ok(())
    }

    fn slope_rad(&self) -> f64 {
        self.slope_deg.to_radians()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveStateKind {
    Motoring,
    Balanced,
    Braking,
}

pub fn aero_resistance(state: &MotionState, params: &VehicleParams, env: &Environment) -> f64 {
    let v = kmh_to_ms(state.speed_kmh);
    0.5 * params.drag_coeff * params.frontal_area_m2 * env.air_density_kg_m3 * v * v
}

pub fn rolling_resistance(state: &MotionState, params: &VehicleParams, env: &Environment) -> f64 {
    (params.vehicle_mass_kg + state.cargo_mass_kg) * env.gravity_m_s2 * state.slope_rad().cos() * params.rolling_coeff
}

pub fn slope_resistance(state: &MotionState, params: &VehicleParams, env: &Environment) -> f64 {
    (params.vehicle_mass_kg + state.cargo_mass_kg) * env.gravity_m_s2 * state.slope_rad().sin()
}

pub fn acceleration_resistance(state: &MotionState, params: &VehicleParams) -> f64 {
    (params.vehicle_mass_kg + params.rotating_inertia_mass_kg + state.cargo_mass_kg) * state.accel_m_s2
}

/// The four resistance forces at one instant, in N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resistances {
    pub aero: f64,
    pub rolling: f64,
    pub slope: f64,
    pub acceleration: f64,
}

impl Resistances {
    pub fn at(state: &MotionState, params: &VehicleParams, env: &Environment) -> Self {
        Resistances {
            aero: aero_resistance(state, params, env),
            rolling: rolling_resistance(state, params, env),
            slope: slope_resistance(state, params, env),
            acceleration: acceleration_resistance(state, params),
        }
    }

    pub fn total(&self) -> f64 {
        self.acceleration + self.slope + self.rolling + self.aero
    }
}

/// Total wheel torque needed to hold the motion state; negative when the
/// wheels must brake.
pub fn demand_torque(state: &MotionState, params: &VehicleParams, env: &Environment) -> f64 {
    Resistances::at(state, params, env).total() * params.tire_radius_m
}

/// Demand torque written as `k·v² + b` with `v` in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    /// N·m per (m/s)².
    pub k: f64,
    /// N·m.
    pub b: f64,
}

impl QuadraticCoeffs {
    pub fn torque_at(&self, speed_kmh: f64) -> f64 {
        let v = kmh_to_ms(speed_kmh);
        self.k * v * v + self.b
    }
}

pub fn quadratic_coeffs(
    slope_deg: f64,
    accel_m_s2: f64,
    cargo_mass_kg: f64,
    params: &VehicleParams,
    env: &Environment,
) -> QuadraticCoeffs {
    let theta = slope_deg.to_radians();
    let k = params.drag_coeff * params.frontal_area_m2 * env.air_density_kg_m3 / 2.0 * params.tire_radius_m;
    let inertial = (params.vehicle_mass_kg + params.rotating_inertia_mass_kg + cargo_mass_kg) * accel_m_s2;
    let grade = (theta.sin() + params.rolling_coeff * theta.cos())
        * (params.vehicle_mass_kg + cargo_mass_kg)
        * env.gravity_m_s2;
    QuadraticCoeffs {
        k,
        b: (inertial + grade) * params.tire_radius_m,
    }
}

/// Wheel speed in rpm for a road speed in km/h.
pub fn wheel_rpm(speed_kmh: f64, tire_radius_m: f64) -> f64 {
    speed_kmh / (0.12 * PI * tire_radius_m)
}

/// Motoring, balanced or braking, judged from slope force against rolling and
/// aerodynamic drag at the state's speed. Flat and uphill roads always motor.
pub fn classify_drive_state(state: &MotionState, params: &VehicleParams, env: &Environment) -> DriveStateKind {
    if state.slope_deg >= 0.0 {
        return DriveStateKind::Motoring;
    }
    let pull = slope_resistance(state, params, env).abs();
    let drag = rolling_resistance(state, params, env) + aero_resistance(state, params, env);
    let excess = pull - drag;
    if excess.abs() <= BALANCE_TOLERANCE_N {
        DriveStateKind::Balanced
    } else if excess > 0.0 {
        DriveStateKind::Braking
    } else {
        DriveStateKind::Motoring
    }
}
