#![no_main]

use arbitrary::Arbitrary;
use libfuzzer_sys::fuzz_target;

use slp_core::engine::{Engine, EngineKind};
use slp_core::{search, sellers_match, SellersMatcher};

#[derive(Arbitrary, Debug)]
struct Case<'a> {
    pattern: &'a [u8],
    text: &'a [u8],
    k: u8,
}

// Grammar-side search must agree with the flat matcher on the expansion.
fuzz_target!(|case: Case<'_>| {
    if case.pattern.is_empty() || case.pattern.len() > 16 {
        return;
    }
    if case.text.is_empty() || case.text.len() > 4_096 {
        return;
    }
    let k = (case.k as usize) % case.pattern.len();
    let pattern: Vec<char> = case.pattern.iter().map(|&b| b as char).collect();
    let text: Vec<char> = case.text.iter().map(|&b| b as char).collect();
    let slp = slp_core::build_grammar(&text).unwrap();
    let engine = Engine::build(slp, EngineKind::Biased, 1);
    let (ends, stats) = search(&engine, &pattern, k, &SellersMatcher).unwrap();
    let expect: Vec<u64> = sellers_match(&pattern, &text, k)
        .into_iter()
        .map(|x| x as u64)
        .collect();
    assert_eq!(ends, expect);
    assert!(stats.max_window <= 2 * (pattern.len() + k) as u64);
});
