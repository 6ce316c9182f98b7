#![no_main]

use libfuzzer_sys::fuzz_target;
use wheelsim_core::efficiency_map::{EfficiencyMap, MapMode};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for mode in [MapMode::Motoring, MapMode::Braking] {
        if let Ok(map) = EfficiencyMap::parse_csv(text, mode) {
            let again = EfficiencyMap::parse_csv(&map.to_csv(), mode).expect("written map reparses");
            assert_eq!(again, map);
            let _ = map.operating_efficiency(map.max_rpm() * 0.5, map.max_torque_nm() * 0.5);
        }
    }
});
