#![no_main]

use libfuzzer_sys::fuzz_target;
use nanosim::netlist::parse_element_card;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_element_card(text);
    }
});
