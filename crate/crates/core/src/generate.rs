//! Deterministic test-grammar generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grammar::{Rule, RuleId, Slp};

/// Soft bound on the expansion length of generated grammars.
pub const DEFAULT_SIZE_CAP: u64 = 1 << 40;

/// Shape of the generated grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMode {
    /// Worst-case parse-tree height: every pair extends the previous rule.
    Chain,
    /// Complete-tree reduction, height grows logarithmically.
    Balanced,
    /// Spine-biased random pairs.
    Mixed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("need n_rules >= alphabet ({n_rules} < {alphabet})")]
    TooFewRules { n_rules: u32, alphabet: u32 },
    #[error("alphabet must be between 1 and 26")]
    BadAlphabet,
}

/// Generates a valid grammar with `n_rules` rules over the first
/// `alphabet` lowercase letters. Deterministic in `seed`.
pub fn random_slp(seed: u64, n_rules: u32, alphabet: u32, mode: GenMode) -> Result<Slp, GenError> {
    random_slp_with_cap(seed, n_rules, alphabet, mode, DEFAULT_SIZE_CAP)
}

/// As `random_slp` with a soft cap on expansion lengths: whenever a drawn
/// pair would overshoot, the partner collapses to a terminal (the result
/// length can exceed the cap by at most one per rule).
pub fn random_slp_with_cap(
    seed: u64,
    n_rules: u32,
    alphabet: u32,
    mode: GenMode,
    size_cap: u64,
) -> Result<Slp, GenError> {
    if alphabet == 0 || alphabet > 26 {
        return Err(GenError::BadAlphabet);
    }
    if n_rules < alphabet {
        return Err(GenError::TooFewRules { n_rules, alphabet });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rules: Vec<Rule> = (0..alphabet)
        .map(|i| Rule::Terminal((b'a' + i as u8) as char))
        .collect();
    let mut sizes: Vec<u64> = vec![1; alphabet as usize];

    let push = |rules: &mut Vec<Rule>, sizes: &mut Vec<u64>, l: u32, r: u32| {
        rules.push(Rule::Pair(RuleId(l), RuleId(r)));
        sizes.push(sizes[l as usize] + sizes[r as usize]);
    };

    match mode {
        GenMode::Chain => {
            while (rules.len() as u32) < n_rules {
                let i = rules.len() as u32;
                let spine = i - 1;
                let mut other = rng.gen_range(0..i);
                if sizes[spine as usize].saturating_add(sizes[other as usize]) > size_cap {
                    other = rng.gen_range(0..alphabet);
                }
                if rng.gen_bool(0.5) {
                    push(&mut rules, &mut sizes, spine, other);
                } else {
                    push(&mut rules, &mut sizes, other, spine);
                }
            }
        }
        GenMode::Balanced => {
            // Complete-tree reduction over a random terminal sequence of
            // width w, spending exactly w - 1 pair rules.
            let w = n_rules - alphabet + 1;
            let mut layer: Vec<u32> = (0..w).map(|_| rng.gen_range(0..alphabet)).collect();
            while layer.len() > 1 {
                let mut next = Vec::with_capacity(layer.len().div_ceil(2));
                let mut k = 0;
                while k + 1 < layer.len() {
                    push(&mut rules, &mut sizes, layer[k], layer[k + 1]);
                    next.push(rules.len() as u32 - 1);
                    k += 2;
                }
                if k < layer.len() {
                    next.push(layer[k]);
                }
                layer = next;
            }
        }
        GenMode::Mixed => {
            // Spine-biased: the root usually covers most of the grammar
            // but heights stay irregular.
            while (rules.len() as u32) < n_rules {
                let i = rules.len() as u32;
                let spine = if rng.gen_bool(0.7) {
                    i - 1
                } else {
                    rng.gen_range(0..i)
                };
                let mut other = rng.gen_range(0..i);
                if sizes[spine as usize].saturating_add(sizes[other as usize]) > size_cap {
                    other = rng.gen_range(0..alphabet);
                }
                if rng.gen_bool(0.5) {
                    push(&mut rules, &mut sizes, spine, other);
                } else {
                    push(&mut rules, &mut sizes, other, spine);
                }
            }
        }
    }

    let slp = Slp::new(rules).expect("generated grammar is valid");
    Ok(slp)
}

/// X_i -> X_{i-1} X_{i-1} over a single terminal; expansion length 2^depth.
pub fn doubling_chain(depth: u32) -> Slp {
    let mut rules = vec![Rule::Terminal('a')];
    for i in 1..=depth {
        rules.push(Rule::Pair(RuleId(i - 1), RuleId(i - 1)));
    }
    Slp::new(rules).expect("doubling chain is valid")
}

/// Doubling spine interleaved with small light rules: expansion length at
/// least 2^rounds with a varied character mix, still only O(rounds) rules.
pub fn skewed_huge(rounds: u32, seed: u64) -> Slp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rules = vec![Rule::Terminal('a'), Rule::Terminal('b'), Rule::Terminal('c')];
    let mut spine = 0u32;
    for _ in 0..rounds {
        let pad = rng.gen_range(0..3);
        let (l, r) = if rng.gen_bool(0.5) {
            (spine, pad)
        } else {
            (pad, spine)
        };
        rules.push(Rule::Pair(RuleId(l), RuleId(r)));
        let j = rules.len() as u32 - 1;
        rules.push(Rule::Pair(RuleId(j), RuleId(j)));
        spine = rules.len() as u32 - 1;
    }
    Slp::new(rules).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = random_slp(1, 100, 2, GenMode::Mixed).unwrap();
        let b = random_slp(1, 100, 2, GenMode::Mixed).unwrap();
        assert_eq!(a, b);
        let c = random_slp(2, 100, 2, GenMode::Mixed).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn chain_mode_is_tall() {
        let slp = random_slp(3, 50, 1, GenMode::Chain).unwrap();
        assert!(slp.parse_tree_height() >= 49);
    }

    #[test]
    fn balanced_mode_is_shallow() {
        let slp = random_slp(4, 63, 1, GenMode::Balanced).unwrap();
        assert_eq!(slp.rule_count(), 63);
        let h = slp.parse_tree_height();
        assert!(h <= 12, "height {h} not log2-proportional for 63 rules");
    }

    #[test]
    fn caps_are_respected() {
        let cap = 1 << 16;
        for mode in [GenMode::Chain, GenMode::Mixed] {
            let slp = random_slp_with_cap(9, 3000, 3, mode, cap).unwrap();
            assert!(slp.text_len() <= cap + 3000, "mode {mode:?}");
        }
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(random_slp(0, 1, 2, GenMode::Mixed).is_err());
        assert!(random_slp(0, 5, 0, GenMode::Mixed).is_err());
    }

    #[test]
    fn doubling_chain_size() {
        assert_eq!(doubling_chain(40).text_len(), 1 << 40);
    }

    #[test]
    fn skewed_huge_is_huge_and_varied() {
        let slp = skewed_huge(40, 5);
        assert!(slp.text_len() >= 1 << 40);
        assert!(slp.text_len() < 1 << 45);
    }
}
