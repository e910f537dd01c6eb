//! Property tests over the public surface.

use proptest::prelude::*;

use slp_core::engine::{Engine, EngineKind};
use slp_core::generate::{random_slp_with_cap, GenMode};
use slp_core::ibst::{IntervalBiasedTree, QueryCounters};
use slp_core::substring::extract;
use slp_core::{
    build_grammar, parse_slp, search, sellers_match, serialize_slp, SellersMatcher,
};

fn arb_mode() -> impl Strategy<Value = GenMode> {
    prop_oneof![
        Just(GenMode::Chain),
        Just(GenMode::Balanced),
        Just(GenMode::Mixed),
    ]
}

fn arb_slp() -> impl Strategy<Value = slp_core::Slp> {
    (any::<u64>(), 1u32..200, 1u32..4, arb_mode()).prop_map(|(seed, extra, alphabet, mode)| {
        random_slp_with_cap(seed, alphabet + extra, alphabet, mode, 4_096).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_parse_roundtrip(slp in arb_slp()) {
        let doc = serialize_slp(&slp);
        let back = parse_slp(&doc).unwrap();
        prop_assert_eq!(&back, &slp);
        prop_assert_eq!(serialize_slp(&back), doc);
    }

    #[test]
    fn engines_equal_expansion(slp in arb_slp(), indices in proptest::collection::vec(any::<u64>(), 8)) {
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        let n = slp.text_len();
        for (kind, lv) in [
            (EngineKind::Baseline, 0),
            (EngineKind::LinearSpace, 0),
            (EngineKind::Biased, 2),
        ] {
            let e = Engine::build(slp.clone(), kind, lv);
            for &raw in &indices {
                let i = raw % n;
                prop_assert_eq!(e.access(i).unwrap(), text[i as usize]);
            }
        }
    }

    #[test]
    fn naive_access_equals_expansion(slp in arb_slp()) {
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        for i in 0..slp.text_len() {
            prop_assert_eq!(slp.naive_access(i).unwrap(), text[i as usize]);
        }
    }

    #[test]
    fn extraction_equals_slice(slp in arb_slp(), spans in proptest::collection::vec((any::<u64>(), any::<u64>()), 6)) {
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        let n = slp.text_len();
        let e = Engine::build(slp, EngineKind::Biased, 1);
        for &(a, b) in &spans {
            let i = a % (n + 1);
            let j = i + (b % (n - i + 1));
            let (s, stats) = extract(&e, i, j).unwrap();
            let expect: String = text[i as usize..j as usize].iter().collect();
            prop_assert_eq!(s, expect);
            prop_assert_eq!(stats.decode_steps, j - i);
        }
    }

    #[test]
    fn repair_roundtrips(text in "[a-f]{1,300}") {
        let chars: Vec<char> = text.chars().collect();
        let slp = build_grammar(&chars).unwrap();
        prop_assert_eq!(slp.expand().unwrap(), text);
    }

    #[test]
    fn repair_roundtrips_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 1..400)) {
        let chars: Vec<char> = bytes.iter().map(|&b| b as char).collect();
        let slp = build_grammar(&chars).unwrap();
        let back: Vec<char> = slp.expand().unwrap().chars().collect();
        prop_assert_eq!(back, chars);
    }

    #[test]
    fn ibst_predecessor_equals_linear_scan(
        steps in proptest::collection::vec(1u64..1000, 1..120),
        probes in proptest::collection::vec(any::<u64>(), 32),
    ) {
        let mut bounds = vec![0u64];
        for s in steps {
            bounds.push(bounds.last().unwrap() + s);
        }
        let tree = IntervalBiasedTree::build(bounds.clone()).unwrap();
        tree.audit_depths().unwrap();
        let top = *bounds.last().unwrap();
        let mut ctr = QueryCounters::default();
        for &raw in &probes {
            let p = raw % (top + 1);
            let expect = bounds
                .iter()
                .rposition(|&b| b <= p)
                .map(|i| i.min(bounds.len() - 2))
                .unwrap();
            prop_assert_eq!(tree.predecessor(p, &mut ctr), (expect, bounds[expect]));
        }
    }

    #[test]
    fn search_equals_flat_matcher(slp in arb_slp(), pat in "[a-c]{1,8}", k in 0usize..3) {
        let pattern: Vec<char> = pat.chars().collect();
        prop_assume!(k < pattern.len());
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        let e = Engine::build(slp, EngineKind::Biased, 1);
        let (ends, _) = search(&e, &pattern, k, &SellersMatcher).unwrap();
        let expect: Vec<u64> = sellers_match(&pattern, &text, k)
            .into_iter()
            .map(|x| x as u64)
            .collect();
        prop_assert_eq!(ends, expect);
    }
}
