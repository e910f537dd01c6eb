#![no_main]

use libfuzzer_sys::fuzz_target;

use slp_core::engine::{Engine, EngineKind};
use slp_core::substring::extract;

// Any grammar the parser accepts must answer queries consistently: every
// engine agrees with the size-guided walk, traces stay within the light
// edge bound and extraction matches character-by-character access.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(slp) = slp_core::parse_slp(text) else {
        return;
    };
    if slp.rule_count() > 2_000 {
        return;
    }
    let n = slp.text_len();
    let engines = [
        Engine::build(slp.clone(), EngineKind::Baseline, 0),
        Engine::build(slp.clone(), EngineKind::LinearSpace, 0),
        Engine::build(slp.clone(), EngineKind::Biased, 0),
        Engine::build(slp.clone(), EngineKind::Biased, 2),
    ];
    let bound = if n > 1 { n.ilog2() as usize + 1 } else { 1 };
    let mut x = 0x9e3779b97f4a7c15u64 ^ n;
    for _ in 0..16 {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let i = x % n;
        let expect = slp.naive_access(i).unwrap();
        for e in &engines {
            let (ch, trace, _) = e.access_traced(i).unwrap();
            assert_eq!(ch, expect);
            assert!(trace.descend_count() <= bound);
        }
        let j = i + 1 + (x >> 32) % 64;
        let j = j.min(n);
        let (s, stats) = extract(&engines[3], i, j).unwrap();
        assert_eq!(stats.decode_steps, j - i);
        assert_eq!(s.chars().next(), Some(expect));
    }
});
