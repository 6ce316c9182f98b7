//! Parametric efficiency surfaces.
//!
//! Each axis gets a skewed bump `((x/xp) * exp(1 - x/xp))^decay`, zero at the
//! origin and one at `xp`. The speed-axis peak drifts linearly with torque
//! (`ridge_tilt`) so the high-efficiency island leans the way measured
//! in-wheel motor maps do. The product is rescaled so the grid maximum equals
//! `peak_efficiency` and the origin sits at `floor_efficiency`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EfficiencyMap, MapMode};
use crate::error::{Error, Result};

const PEAK_FRAC_CLAMP: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSynthesisSpec {
    pub peak_efficiency: f64,
    pub floor_efficiency: f64,
    /// Speed-axis peak as a fraction of `max_rpm`, at the torque peak.
    pub peak_speed_frac: f64,
    /// Torque-axis peak as a fraction of `max_torque_nm`.
    pub peak_torque_frac: f64,
    pub speed_decay: f64,
    pub torque_decay: f64,
    /// Shift of the speed peak fraction per unit torque fraction.
    pub ridge_tilt: f64,
    pub speed_points: usize,
    pub torque_points: usize,
    pub max_rpm: f64,
    pub max_torque_nm: f64,
    /// The synthesized map must have at least `min_area_fraction` of its
    /// nodes strictly above `area_threshold`.
    pub area_threshold: f64,
    pub min_area_fraction: f64,
}

impl MapSynthesisSpec {
    pub fn motoring_default() -> Self {
        MapSynthesisSpec {
            peak_efficiency: 0.945,
            floor_efficiency: 0.55,
            peak_speed_frac: 0.46,
            peak_torque_frac: 0.22,
            speed_decay: 0.45,
            torque_decay: 0.58,
            ridge_tilt: 0.44,
            speed_points: 33,
            torque_points: 26,
            max_rpm: 1600.0,
            max_torque_nm: 1250.0,
            area_threshold: 0.60,
            min_area_fraction: 0.90,
        }
    }

    pub fn braking_default() -> Self {
        MapSynthesisSpec {
            peak_efficiency: 0.91,
            peak_speed_frac: 0.43,
            peak_torque_frac: 0.33,
            torque_decay: 0.38,
            ridge_tilt: 0.69,
            ..Self::motoring_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::domain("map synthesis spec", reason));
        let (lo, hi) = (self.floor_efficiency, self.peak_efficiency);
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return bad(format!("need 0 < floor < peak <= 1, got floor {lo}, peak {hi}"));
        }
        for (name, f) in [
            ("peak_speed_frac", self.peak_speed_frac),
            ("peak_torque_frac", self.peak_torque_frac),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return bad(format!("{name} must be in (0, 1), got {f}"));
            }
        }
        for (name, d) in [("speed_decay", self.speed_decay), ("torque_decay", self.torque_decay)] {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("{name} must be positive, got {d}"));
            }
        }
        if !self.ridge_tilt.is_finite() {
            return bad(format!("ridge_tilt must be finite, got {}", self.ridge_tilt));
        }
        if self.speed_points < 8 || self.torque_points < 8 {
            return bad(format!(
                "resolution must be at least 8 per axis, got {}x{}",
                self.speed_points, self.torque_points
            ));
        }
        for (name, m) in [("max_rpm", self.max_rpm), ("max_torque_nm", self.max_torque_nm)] {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("{name} must be positive, got {m}"));
            }
        }
        if !(0.0..=1.0).contains(&self.area_threshold) || !(0.0..=1.0).contains(&self.min_area_fraction) {
            return bad("area_threshold and min_area_fraction must be in [0, 1]".to_string());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(json))
    }

    fn synthesize(&self, mode: MapMode) -> Result<EfficiencyMap> {
        self.validate()?;
        if self.peak_efficiency > mode.ceiling() {
            return Err(Error::domain(
                "map synthesis spec",
                format!(
                    "peak {} exceeds the {mode:?} ceiling {}",
                    self.peak_efficiency,
                    mode.ceiling()
                ),
            ));
        }
        let speed_axis = linspace(self.max_rpm, self.speed_points);
        let torque_axis = linspace(self.max_torque_nm, self.torque_points);

        let mut raw = vec![vec![0.0; self.torque_points]; self.speed_points];
        let mut best = (0.0, 0, 0);
        for (i, row) in raw.iter_mut().enumerate() {
            let x = speed_axis[i] / self.max_rpm;
            for (j, cell) in row.iter_mut().enumerate() {
                let y = torque_axis[j] / self.max_torque_nm;
                let xp = (self.peak_speed_frac + self.ridge_tilt * (y - self.peak_torque_frac))
                    .clamp(PEAK_FRAC_CLAMP.0, PEAK_FRAC_CLAMP.1);
                *cell = bump(x, xp, self.speed_decay) * bump(y, self.peak_torque_frac, self.torque_decay);
                if *cell > best.0 {
                    best = (*cell, i, j);
                }
            }
        }

        let (lo, hi) = (self.floor_efficiency, self.peak_efficiency);
        let rows: Vec<Vec<f64>> = raw
            .iter()
            .map(|row| row.iter().map(|&p| lo + (hi - lo) * (p / best.0)).collect())
            .collect();
        let mut rows = rows;
        // pin the maximum so it is not off by a rounding ulp
        rows[best.1][best.2] = hi;

        let map = EfficiencyMap::new(mode, speed_axis, torque_axis, rows)?;
        let fraction = map.area_fraction_above(self.area_threshold);
        if fraction < self.min_area_fraction {
            return Err(Error::Calibration(format!(
                "{:.3} of the {mode:?} map lies above {}, need at least {}",
                fraction, self.area_threshold, self.min_area_fraction
            )));
        }
        Ok(map)
    }
}

fn linspace(max: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|k| max * k as f64 / last).collect()
}

fn bump(x: f64, xp: f64, decay: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = x / xp;
    (r * (1.0 - r).exp()).powf(decay)
}

pub fn synthesize_motoring_map(spec: &MapSynthesisSpec) -> Result<EfficiencyMap> {
    spec.synthesize(MapMode::Motoring)
}

pub fn synthesize_braking_map(spec: &MapSynthesisSpec) -> Result<EfficiencyMap> {
    spec.synthesize(MapMode::Braking)
}
