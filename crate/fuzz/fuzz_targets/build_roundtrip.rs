#![no_main]

use libfuzzer_sys::fuzz_target;

// The ingestion compressor must round-trip arbitrary byte strings read as
// Latin-1 code points.
fuzz_target!(|data: &[u8]| {
    if data.is_empty() || data.len() > 1 << 16 {
        return;
    }
    let chars = slp_core::decode_input(data, false).unwrap();
    let slp = slp_core::build_grammar(&chars).expect("nonempty input compresses");
    let back: Vec<char> = slp
        .expand_with_cap(1 << 20)
        .expect("expansion fits the cap")
        .chars()
        .collect();
    assert_eq!(back, chars);
    assert_eq!(slp_core::encode_output(&back, false).unwrap(), data);
});
