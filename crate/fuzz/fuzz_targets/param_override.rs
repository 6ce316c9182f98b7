#![no_main]

use libfuzzer_sys::fuzz_target;
use wheelsim_core::config::{apply_override, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let mut root = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    let raw_ok = lines.iter().all(|l| apply_override(&mut root, l).is_ok());
    let typed = RunConfig::default().with_overrides(&lines);
    if !raw_ok {
        assert!(typed.is_err());
    }
});
