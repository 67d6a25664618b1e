#![no_main]

use libfuzzer_sys::fuzz_target;
use nanosim::netlist::{format_value, parse_value};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Some(v) = parse_value(text) {
        if v.is_finite() {
            assert_eq!(parse_value(&format_value(v)), Some(v), "{text:?}");
        }
    }
});
