#![no_main]

use libfuzzer_sys::fuzz_target;
use nanosim::parse_netlist;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(net) = parse_netlist(text) else {
        return;
    };
    let printed = net.to_string();
    let again = parse_netlist(&printed).unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
    assert_eq!(net, again, "{printed}");
});
