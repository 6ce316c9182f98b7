#![no_main]

use libfuzzer_sys::fuzz_target;
use wheelsim_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::parse(text) {
        // validate may touch the filesystem for cycle scenarios; only check the model setup
        let _ = config.prepare();
    }
});
