#![no_main]

use libfuzzer_sys::fuzz_target;
use wheelsim_core::report::parse_report;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_report(text) {
        assert_eq!(
            parse_report(&report.to_json()).expect("written report reparses"),
            report
        );
    }
});
