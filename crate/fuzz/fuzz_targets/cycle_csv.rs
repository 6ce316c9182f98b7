#![no_main]

use libfuzzer_sys::fuzz_target;
use wheelsim_core::cycle::{cycle_distance, DrivingCycle, SpeedUnit};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for unit in [SpeedUnit::Kmh, SpeedUnit::Mph] {
        if let Ok(cycle) = DrivingCycle::parse_csv(text, "fuzz", unit) {
            let d = cycle_distance(&cycle);
            assert!(d.is_finite() && d >= 0.0);
        }
    }
});
