#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing must never panic; accepted documents must round-trip through the
// canonical serialization.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(slp) = slp_core::parse_slp(text) {
        let doc = slp_core::serialize_slp(&slp);
        let back = slp_core::parse_slp(&doc).expect("canonical form parses");
        assert_eq!(back, slp);
    }
});
