//! Motor efficiency surfaces over (rotating speed, torque).
//!
//! A map is a rectangular grid whose axes both start at zero. Lookups use
//! bilinear interpolation, which is exact at grid nodes and never leaves the
//! range of the four corners of the enclosing cell.

mod csv_io;
mod synth;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, MapAxis, Result};

pub use csv_io::{load_map, save_map, CORNER_MARKER};
pub use synth::{synthesize_braking_map, synthesize_motoring_map, MapSynthesisSpec};

/// Below these operating values the motor is treated as running at the map
/// floor instead of extrapolating toward zero efficiency.
pub const DEAD_BAND_RPM: f64 = 10.0;
pub const DEAD_BAND_TORQUE_NM: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMode {
    Motoring,
    Braking,
}

impl MapMode {
    /// Highest efficiency a map of this mode may contain.
    pub fn ceiling(self) -> f64 {
        match self {
            MapMode::Motoring => 0.945,
            MapMode::Braking => 0.91,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMap {
    mode: MapMode,
    speed_axis: Vec<f64>,
    torque_axis: Vec<f64>,
    /// Row-major, one row per speed node.
    grid: Vec<f64>,
    floor: f64,
}

impl EfficiencyMap {
    /// `rows[i][j]` is the efficiency at `speed_axis[i]`, `torque_axis[j]`.
    pub fn new(mode: MapMode, speed_axis: Vec<f64>, torque_axis: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_axis("speed axis", &speed_axis)?;
        check_axis("torque axis", &torque_axis)?;
        if rows.len() != speed_axis.len() {
            return Err(Error::domain(
                "efficiency map",
                format!("{} rows for {} speed nodes", rows.len(), speed_axis.len()),
            ));
        }
        let mut grid = Vec::with_capacity(speed_axis.len() * torque_axis.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != torque_axis.len() {
                return Err(Error::domain(
                    "efficiency map",
                    format!("row {i} has {} values, expected {}", row.len(), torque_axis.len()),
                ));
            }
            for (j, &eta) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&eta) {
                    return Err(Error::domain(
                        "efficiency map",
                        format!("value {eta} at ({i}, {j}) is outside [0, 1]"),
                    ));
                }
                if eta > mode.ceiling() {
                    return Err(Error::domain(
                        "efficiency map",
                        format!(
                            "value {eta} at ({i}, {j}) exceeds the {mode:?} ceiling {}",
                            mode.ceiling()
                        ),
                    ));
                }
            }
            grid.extend_from_slice(row);
        }
        let floor = grid.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        Ok(EfficiencyMap {
            mode,
            speed_axis,
            torque_axis,
            grid,
            floor: if floor.is_finite() { floor } else { 0.0 },
        })
    }

    /// A flat map holding one efficiency everywhere.
    pub fn uniform(mode: MapMode, efficiency: f64, max_rpm: f64, max_torque_nm: f64) -> Result<Self> {
        let speed_axis = vec![0.0, max_rpm];
        let torque_axis = vec![0.0, max_torque_nm];
        let rows = vec![vec![efficiency; 2]; 2];
        Self::new(mode, speed_axis, torque_axis, rows)
    }

    pub fn mode(&self) -> MapMode {
        self.mode
    }

    pub fn speed_axis(&self) -> &[f64] {
        &self.speed_axis
    }

    pub fn torque_axis(&self) -> &[f64] {
        &self.torque_axis
    }

    pub fn max_rpm(&self) -> f64 {
        *self.speed_axis.last().expect("axis has >= 2 points")
    }

    pub fn max_torque_nm(&self) -> f64 {
        *self.torque_axis.last().expect("axis has >= 2 points")
    }

    pub fn value(&self, speed_idx: usize, torque_idx: usize) -> f64 {
        self.grid[speed_idx * self.torque_axis.len() + torque_idx]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.grid.chunks(self.torque_axis.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.grid
    }

    /// Smallest strictly positive efficiency on the grid.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Largest grid value and its (speed, torque) node indices. Ties resolve
    /// to the first node in row-major order.
    pub fn peak(&self) -> (f64, usize, usize) {
        let nt = self.torque_axis.len();
        let (idx, &v) =
            self.grid.iter().enumerate().fold(
                (0, &f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        (v, idx / nt, idx % nt)
    }

    pub fn min_value(&self) -> f64 {
        self.grid.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear lookup at `rpm`, `torque_nm`.
    pub fn lookup(&self, rpm: f64, torque_nm: f64) -> Result<f64> {
        check_range(MapAxis::Speed, rpm, self.max_rpm())?;
        check_range(MapAxis::Torque, torque_nm, self.max_torque_nm())?;
        let i = cell_index(&self.speed_axis, rpm);
        let j = cell_index(&self.torque_axis, torque_nm);
        Ok(self.interpolate_in_cell(i, j, rpm, torque_nm))
    }

    /// Lookup used by the energy models: inside the low-speed / low-torque
    /// dead band the map floor is returned.
    pub fn operating_efficiency(&self, rpm: f64, torque_nm: f64) -> Result<f64> {
        if (0.0..DEAD_BAND_RPM).contains(&rpm) || (0.0..DEAD_BAND_TORQUE_NM).contains(&torque_nm) {
            check_range(MapAxis::Speed, rpm, self.max_rpm())?;
            check_range(MapAxis::Torque, torque_nm, self.max_torque_nm())?;
            return Ok(self.floor);
        }
        self.lookup(rpm, torque_nm)
    }

    fn interpolate_in_cell(&self, i: usize, j: usize, rpm: f64, torque_nm: f64) -> f64 {
        let (n0, n1) = (self.speed_axis[i], self.speed_axis[i + 1]);
        let (t0, t1) = (self.torque_axis[j], self.torque_axis[j + 1]);
        let u = (rpm - n0) / (n1 - n0);
        let w = (torque_nm - t0) / (t1 - t0);
        let g00 = self.value(i, j);
        let g10 = self.value(i + 1, j);
        let g01 = self.value(i, j + 1);
        let g11 = self.value(i + 1, j + 1);
        (1.0 - u) * (1.0 - w) * g00 + u * (1.0 - w) * g10 + (1.0 - u) * w * g01 + u * w * g11
    }

    /// Fraction of grid nodes whose efficiency is strictly above `threshold`.
    pub fn area_fraction_above(&self, threshold: f64) -> f64 {
        let above = self.grid.iter().filter(|&&v| v > threshold).count();
        above as f64 / self.grid.len() as f64
    }

    /// SHA-256 over the mode, axes and grid values.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{:?}", self.mode).as_bytes());
        for v in self.speed_axis.iter().chain(&self.torque_axis).chain(&self.grid) {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::domain(
            "efficiency map",
            format!("{name} needs at least 2 points"),
        ));
    }
    if axis[0] != 0.0 {
        return Err(Error::domain(
            "efficiency map",
            format!("{name} must start at 0, got {}", axis[0]),
        ));
    }
    if let Some(w) = axis.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::domain(
            "efficiency map",
            format!("{name} must be strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    Ok(())
}

fn check_range(axis: MapAxis, value: f64, limit: f64) -> Result<()> {
    if value.is_nan() {
        return Err(Error::domain("map lookup", format!("{axis} is NaN")));
    }
    if value < 0.0 {
        return Err(Error::BelowRange {
            axis,
            value,
            limit: 0.0,
        });
    }
    if value > limit {
        return Err(Error::AboveRange { axis, value, limit });
    }
    Ok(())
}

/// Index of the cell `[axis[i], axis[i+1]]` containing `x`; the last node
/// belongs to the last cell.
fn cell_index(axis: &[f64], x: f64) -> usize {
    let upper = axis.partition_point(|&a| a <= x);
    upper.saturating_sub(1).min(axis.len() - 2)
}

/// Motor efficiency from electromagnetic power and its three loss terms.
pub fn efficiency_from_losses(electromagnetic_w: f64, copper_w: f64, core_w: f64, magnet_w: f64) -> Result<f64> {
    if !(electromagnetic_w > 0.0) {
        return Err(Error::domain(
            "loss model",
            format!("electromagnetic power must be > 0, got {electromagnetic_w}"),
        ));
    }
    for (name, loss) in [("copper", copper_w), ("core", core_w), ("magnet", magnet_w)] {
        if !(loss >= 0.0) {
            return Err(Error::domain(
                "loss model",
                format!("{name} loss must be >= 0, got {loss}"),
            ));
        }
    }
    let total = copper_w + core_w + magnet_w;
    if total > electromagnetic_w {
        return Err(Error::domain(
            "loss model",
            format!("losses {total} W exceed electromagnetic power {electromagnetic_w} W"),
        ));
    }
    Ok(1.0 - total / electromagnetic_w)
}
