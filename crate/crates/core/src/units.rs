//! Unit conversions. Speeds cross the public API in km/h and are converted
//! here, once, before any force is evaluated.

pub const KMH_PER_MS: f64 = 3.6;
pub const KMH_PER_MPH: f64 = 1.609344;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
/// Power (kW) = torque (N·m) × speed (rpm) / 9550.
pub const RPM_TORQUE_PER_KW: f64 = 9550.0;

pub fn kmh_to_ms(v_kmh: f64) -> f64 {
    v_kmh / KMH_PER_MS
}

pub fn ms_to_kmh(v_ms: f64) -> f64 {
    v_ms * KMH_PER_MS
}

pub fn mph_to_kmh(v_mph: f64) -> f64 {
    v_mph * KMH_PER_MPH
}

pub fn joules_to_wh(e_j: f64) -> f64 {
    e_j / SECONDS_PER_HOUR
}
