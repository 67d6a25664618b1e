#![no_main]

use libfuzzer_sys::fuzz_target;
use nanosim::Circuit;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Compiling exercises node numbering and model binding on whatever parsed.
    if let Ok(net) = nanosim::parse_netlist(text) {
        let _ = Circuit::compile(&net);
    }
});
