//! Grammar construction from raw text: greedy most-frequent-pair
//! replacement over a doubly linked symbol sequence, then a left-to-right
//! fold of whatever remains.

use std::collections::BinaryHeap;
use std::collections::HashMap;

use thiserror::Error;

use crate::grammar::{Rule, RuleId, Slp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("cannot build a grammar for empty input")]
    EmptyInput,
    #[error("input has more than u32::MAX symbols")]
    TooLong,
}

const DEAD: u32 = u32::MAX;

#[inline]
fn pack(a: u32, b: u32) -> u64 {
    ((a as u64) << 32) | b as u64
}

struct PairRec {
    count: u32,
    positions: Vec<u32>,
}

struct Sequence {
    sym: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    head: u32,
    live: usize,
}

impl Sequence {
    fn new(symbols: Vec<u32>) -> Self {
        let n = symbols.len();
        let prev: Vec<u32> = (0..n as u32).map(|i| i.wrapping_sub(1)).collect();
        let next: Vec<u32> = (1..=n as u32).map(|i| if i == n as u32 { DEAD } else { i }).collect();
        Sequence {
            sym: symbols,
            prev,
            next,
            head: 0,
            live: n,
        }
    }

    #[inline]
    fn alive(&self, i: u32) -> bool {
        self.sym[i as usize] != DEAD
    }

    /// Removes position i from the linked sequence.
    fn unlink(&mut self, i: u32) {
        let p = self.prev[i as usize];
        let n = self.next[i as usize];
        if p == DEAD {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n != DEAD {
            self.prev[n as usize] = p;
        }
        self.sym[i as usize] = DEAD;
        self.live -= 1;
    }
}

struct PairTable {
    map: HashMap<u64, PairRec>,
    heap: BinaryHeap<(u32, std::cmp::Reverse<u64>)>,
}

impl PairTable {
    fn add(&mut self, a: u32, b: u32, pos: u32) {
        let key = pack(a, b);
        let rec = self.map.entry(key).or_insert(PairRec {
            count: 0,
            positions: Vec::new(),
        });
        rec.count += 1;
        rec.positions.push(pos);
        if rec.count >= 2 {
            self.heap.push((rec.count, std::cmp::Reverse(key)));
        }
    }

    fn remove(&mut self, a: u32, b: u32) {
        if let Some(rec) = self.map.get_mut(&pack(a, b)) {
            rec.count = rec.count.saturating_sub(1);
        }
    }
}

/// Builds a grammar whose expansion is exactly `text`.
pub fn build_grammar(text: &[char]) -> Result<Slp, BuildError> {
    if text.is_empty() {
        return Err(BuildError::EmptyInput);
    }
    if text.len() >= u32::MAX as usize {
        return Err(BuildError::TooLong);
    }

    // Terminals numbered by first appearance.
    let mut rules: Vec<Rule> = Vec::new();
    let mut term_of: HashMap<char, u32> = HashMap::new();
    let symbols: Vec<u32> = text
        .iter()
        .map(|&ch| {
            *term_of.entry(ch).or_insert_with(|| {
                rules.push(Rule::Terminal(ch));
                rules.len() as u32 - 1
            })
        })
        .collect();

    let mut seq = Sequence::new(symbols);
    let mut pairs = PairTable {
        map: HashMap::new(),
        heap: BinaryHeap::new(),
    };
    {
        let mut i = seq.head;
        while seq.next[i as usize] != DEAD {
            let j = seq.next[i as usize];
            pairs.add(seq.sym[i as usize], seq.sym[j as usize], i);
            i = j;
        }
    }

    // Replace the most frequent pair until nothing occurs twice. Ties break
    // toward the smallest packed pair key for determinism.
    while let Some((count, std::cmp::Reverse(key))) = pairs.heap.pop() {
        let current = match pairs.map.get(&key) {
            Some(rec) => rec.count,
            None => continue,
        };
        if current != count {
            continue; // stale heap entry
        }
        if current < 2 {
            continue;
        }
        let a = (key >> 32) as u32;
        let b = key as u32;
        rules.push(Rule::Pair(RuleId(a), RuleId(b)));
        let x = rules.len() as u32 - 1;

        let positions = std::mem::take(&mut pairs.map.get_mut(&key).unwrap().positions);
        for i in positions {
            if !seq.alive(i) || seq.sym[i as usize] != a {
                continue;
            }
            let j = seq.next[i as usize];
            if j == DEAD || seq.sym[j as usize] != b {
                continue;
            }
            // Guard against the overlapping case "aaa": the occurrence at
            // `i` may have been consumed as the right half of the previous
            // replacement; alive checks above already cover it because the
            // right half is unlinked.
            let l = seq.prev[i as usize];
            let r = seq.next[j as usize];
            if l != DEAD {
                pairs.remove(seq.sym[l as usize], a);
            }
            if r != DEAD {
                pairs.remove(b, seq.sym[r as usize]);
            }
            pairs.remove(a, b);
            seq.unlink(j);
            seq.sym[i as usize] = x;
            if l != DEAD {
                pairs.add(seq.sym[l as usize], x, l);
            }
            if r != DEAD {
                pairs.add(x, seq.sym[r as usize], i);
            }
        }
        pairs.map.remove(&key);
    }

    // Fold the remaining sequence left to right.
    let mut i = seq.head;
    let mut acc = seq.sym[i as usize];
    while seq.next[i as usize] != DEAD {
        i = seq.next[i as usize];
        rules.push(Rule::Pair(RuleId(acc), RuleId(seq.sym[i as usize])));
        acc = rules.len() as u32 - 1;
    }

    Ok(Slp::new(rules).expect("construction preserves topological order"))
}

/// Reads raw bytes as text: Latin-1 (one char per byte) by default, UTF-8
/// when `utf8` is set.
pub fn decode_input(bytes: &[u8], utf8: bool) -> Result<Vec<char>, std::str::Utf8Error> {
    if utf8 {
        Ok(std::str::from_utf8(bytes)?.chars().collect())
    } else {
        Ok(bytes.iter().map(|&b| b as char).collect())
    }
}

/// Encodes chars back to bytes; the inverse of `decode_input`.
pub fn encode_output(chars: &[char], utf8: bool) -> Result<Vec<u8>, char> {
    if utf8 {
        Ok(chars.iter().collect::<String>().into_bytes())
    } else {
        chars
            .iter()
            .map(|&c| {
                let cp = c as u32;
                if cp <= 0xFF {
                    Ok(cp as u8)
                } else {
                    Err(c)
                }
            })
            .collect()
    }
}
