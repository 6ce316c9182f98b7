//! Sensing and computing hardware load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SscmComponent {
    pub name: String,
    pub model: String,
    pub power_w: f64,
    pub mass_kg: f64,
    pub count: u32,
}

impl SscmComponent {
    pub fn new(name: &str, model: &str, power_w: f64, mass_kg: f64, count: u32) -> Self {
        SscmComponent {
            name: name.to_string(),
            model: model.to_string(),
            power_w,
            mass_kg,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power_w >= 0.0 && self.power_w.is_finite()) || !(self.mass_kg >= 0.0 && self.mass_kg.is_finite()) {
            return Err(Error::domain(
                "SSCM component",
                format!("{}: power and mass must be >= 0", self.name),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SscmTotals {
    pub power_w: f64,
    pub mass_kg: f64,
}

/// Level-4 sensor and compute suite.
pub fn default_components() -> Vec<SscmComponent> {
    vec![
        SscmComponent::new("LIDAR", "Velodyne VLP-16", 8.0, 0.83, 2),
        SscmComponent::new("Radar", "Bosch LRR4", 4.5, 0.24, 2),
        SscmComponent::new("Camera", "Point Grey Dragonfly2", 2.1, 0.045, 7),
        SscmComponent::new("Sonar", "Bosch ultrasonic", 0.052, 0.02, 8),
        SscmComponent::new("GPS", "NovAtel PwrPak7", 1.8, 0.51, 1),
        SscmComponent::new("V2X radio", "Cohda MK5", 2.1, 0.01, 1),
        SscmComponent::new("Computer", "NVIDIA Drive PX2", 98.0, 5.075, 2),
        SscmComponent::new("Wire harness and case", "", 0.0, 5.7, 1),
    ]
}

pub fn sscm_aggregate(components: &[SscmComponent]) -> SscmTotals {
    components.iter().fold(
        SscmTotals {
            power_w: 0.0,
            mass_kg: 0.0,
        },
        |acc, c| {
            let n = f64::from(c.count);
            SscmTotals {
                power_w: acc.power_w + c.power_w * n,
                mass_kg: acc.mass_kg + c.mass_kg * n,
            }
        },
    )
}

pub fn validate_components(components: &[SscmComponent]) -> Result<()> {
    components.iter().try_for_each(SscmComponent::validate)
}
