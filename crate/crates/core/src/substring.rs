//! Substring extraction: two top-down searches plus a linear decode of the
//! subtrees hanging between them, collected through per-node links to the
//! next suffix node with a light child on each side.

use crate::engine::{Cost, Engine, SearchStep};
use crate::grammar::{Rule, RuleId, Slp, SlpError};
use crate::heavy_path::{HForest, HeavyInfo, HeavySide};

/// Per-node pointers to the nearest strict H-ancestor (deeper node of the
/// heavy path suffix) whose light child hangs on the given side.
#[derive(Debug, Clone)]
pub struct LightLinks {
    pub next_left: Vec<Option<RuleId>>,
    pub next_right: Vec<Option<RuleId>>,
}

impl LightLinks {
    #[inline]
    pub fn next(&self, v: RuleId, side: HeavySide) -> Option<RuleId> {
        match side {
            HeavySide::Left => self.next_left[v.idx()],
            HeavySide::Right => self.next_right[v.idx()],
        }
    }
}

/// Computes the light links in one ascending pass (H-parents are heavy
/// children and have smaller rule ids).
pub fn build_light_links(slp: &Slp, info: &HeavyInfo, forest: &HForest) -> LightLinks {
    let n = slp.rule_count();
    let mut next_left = vec![None; n];
    let mut next_right = vec![None; n];
    for v in 0..n {
        if let Some(w) = forest.parent[v] {
            let side = info.light_child(slp, w).map(|(_, s)| s);
            next_left[v] = if side == Some(HeavySide::Left) {
                Some(w)
            } else {
                next_left[w.idx()]
            };
            next_right[v] = if side == Some(HeavySide::Right) {
                Some(w)
            } else {
                next_right[w.idx()]
            };
        }
    }
    LightLinks {
        next_left,
        next_right,
    }
}

/// A piece of an extraction plan: a boundary character or a whole subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Item {
    Ch(char),
    Tree(RuleId),
}

/// Work accounting for one extraction.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExtractStats {
    pub random_accesses: u32,
    pub decode_steps: u64,
    pub collected_roots: u64,
    pub cost: Cost,
}

struct Collector<'a> {
    e: &'a Engine,
}

impl<'a> Collector<'a> {
    fn slp(&self) -> &Slp {
        self.e.slp()
    }

    /// Nodes of `start`'s heavy path suffix with a light child on `side`,
    /// in suffix order, including `start` itself, stopping before `until`.
    fn walk(&self, start: RuleId, side: HeavySide, until: Option<RuleId>, out: &mut Vec<RuleId>) {
        let links = self.e.links();
        let qualifies = self
            .e
            .info()
            .light_child(self.slp(), start)
            .map(|(_, s)| s == side)
            .unwrap_or(false);
        let mut cur = if qualifies {
            Some(start)
        } else {
            links.next(start, side)
        };
        while let Some(w) = cur {
            if Some(w) == until {
                return;
            }
            out.push(w);
            cur = links.next(w, side);
        }
        debug_assert!(until.is_none(), "walk should have reached the stop node");
    }

    fn light(&self, w: RuleId) -> RuleId {
        self.e
            .info()
            .light_child(self.slp(), w)
            .expect("walked node has a light child")
            .0
    }

    /// Pushes the blocks of the walk as subtree items; right-side walks
    /// visit outer blocks first and are emitted reversed into string order.
    fn push_walk(&self, start: RuleId, side: HeavySide, until: Option<RuleId>, items: &mut Vec<Item>) {
        let mut nodes = Vec::new();
        self.walk(start, side, until, &mut nodes);
        match side {
            HeavySide::Left => {
                for w in nodes {
                    items.push(Item::Tree(self.light(w)));
                }
            }
            HeavySide::Right => {
                for w in nodes.into_iter().rev() {
                    items.push(Item::Tree(self.light(w)));
                }
            }
        }
    }

    /// Strict variant: starts at the link of `start` rather than `start`.
    fn push_walk_strict(
        &self,
        start: RuleId,
        side: HeavySide,
        until: Option<RuleId>,
        items: &mut Vec<Item>,
    ) {
        if let Some(next) = self.e.links().next(start, side) {
            if Some(next) != until {
                self.push_walk(next, side, until, items);
            }
        }
    }

    /// S(u)[p ..], the suffix of u's expansion from 1-based position p.
    fn suffix(&self, u: RuleId, p: u64, items: &mut Vec<Item>, cost: &mut Cost) {
        match self.e.search_step(u, p, cost) {
            SearchStep::Hit => {
                items.push(Item::Ch(self.e.meta().ch[u.idx()]));
                self.push_walk(u, HeavySide::Right, None, items);
            }
            SearchStep::Descend {
                at,
                side: HeavySide::Left,
                entered,
                rebased,
            } => {
                self.suffix(entered, rebased, items, cost);
                self.push_walk_strict(at, HeavySide::Left, None, items);
                items.push(Item::Ch(self.e.meta().ch[u.idx()]));
                self.push_walk(u, HeavySide::Right, None, items);
            }
            SearchStep::Descend {
                at,
                side: HeavySide::Right,
                entered,
                rebased,
            } => {
                self.suffix(entered, rebased, items, cost);
                self.push_walk(u, HeavySide::Right, Some(at), items);
            }
        }
    }

    /// S(u)[.. p], the prefix of u's expansion through 1-based position p.
    fn prefix(&self, u: RuleId, p: u64, items: &mut Vec<Item>, cost: &mut Cost) {
        match self.e.search_step(u, p, cost) {
            SearchStep::Hit => {
                self.push_walk(u, HeavySide::Left, None, items);
                items.push(Item::Ch(self.e.meta().ch[u.idx()]));
            }
            SearchStep::Descend {
                at,
                side: HeavySide::Left,
                entered,
                rebased,
            } => {
                self.push_walk(u, HeavySide::Left, Some(at), items);
                self.prefix(entered, rebased, items, cost);
            }
            SearchStep::Descend {
                at,
                side: HeavySide::Right,
                entered,
                rebased,
            } => {
                self.push_walk(u, HeavySide::Left, None, items);
                items.push(Item::Ch(self.e.meta().ch[u.idx()]));
                self.push_walk_strict(at, HeavySide::Right, None, items);
                self.prefix(entered, rebased, items, cost);
            }
        }
    }
}

/// Lowest common node of the search paths for positions `i` and `j - 1`,
/// found by one parallel top-down search; returns the node with the
/// rebased 0-based offsets of both positions inside its expansion.
pub fn lca_of_paths(e: &Engine, i: u64, j: u64) -> Result<(RuleId, u64, u64), SlpError> {
    let n = e.text_len();
    if i >= j || j > n {
        return Err(SlpError::IndexOutOfRange { index: j, len: n });
    }
    let mut cost = Cost::default();
    let mut v = e.slp().root();
    let mut pa = i + 1;
    let mut pb = j;
    loop {
        let sa = e.search_step(v, pa, &mut cost);
        if pa == pb {
            // Degenerate span: follow the single search to its terminus.
            match sa {
                SearchStep::Hit => return Ok((v, pa - 1, pb - 1)),
                SearchStep::Descend {
                    entered, rebased, ..
                } => {
                    v = entered;
                    pa = rebased;
                    pb = rebased;
                    continue;
                }
            }
        }
        let sb = e.search_step(v, pb, &mut cost);
        match (sa, sb) {
            (
                SearchStep::Descend {
                    at: aa,
                    side: da,
                    entered: ea,
                    rebased: ra,
                },
                SearchStep::Descend {
                    at: ab,
                    side: db,
                    entered: eb,
                    rebased: rb,
                },
            ) if aa == ab && da == db => {
                debug_assert_eq!(ea, eb);
                v = ea;
                pa = ra;
                pb = rb;
            }
            _ => return Ok((v, pa - 1, pb - 1)),
        }
    }
}

/// Collects S(v)[a ..= b] (1-based, inclusive) as boundary characters and
/// whole subtrees, in string order, using one search for a degenerate
/// range and two otherwise.
pub fn collect_node_range(
    e: &Engine,
    v: RuleId,
    a: u64,
    b: u64,
    stats: &mut ExtractStats,
) -> Vec<Item> {
    debug_assert!(a >= 1 && a <= b && b <= e.slp().size(v));
    let col = Collector { e };
    let mut items: Vec<Item> = Vec::new();
    let mut cost = Cost::default();

    if a == b {
        let mut u = v;
        let mut p = a;
        loop {
            match e.search_step(u, p, &mut cost) {
                SearchStep::Hit => {
                    items.push(Item::Ch(e.meta().ch[u.idx()]));
                    break;
                }
                SearchStep::Descend {
                    entered, rebased, ..
                } => {
                    u = entered;
                    p = rebased;
                }
            }
        }
        stats.random_accesses += 1;
    } else {
        // Parallel descent to the divergence node, then one suffix search
        // for `a` and one prefix search for `b`.
        let mut u = v;
        let mut pa = a;
        let mut pb = b;
        let (sa, sb) = loop {
            let sa = e.search_step(u, pa, &mut cost);
            let sb = e.search_step(u, pb, &mut cost);
            match (sa, sb) {
                (
                    SearchStep::Descend {
                        at: aa,
                        side: da,
                        entered: ea,
                        rebased: ra,
                    },
                    SearchStep::Descend {
                        at: ab,
                        side: db,
                        entered: eb,
                        rebased: rb,
                    },
                ) if aa == ab && da == db => {
                    debug_assert_eq!(ea, eb);
                    u = ea;
                    pa = ra;
                    pb = rb;
                }
                pair => break pair,
            }
        };
        stats.random_accesses += 2;

        match sa {
            SearchStep::Hit => items.push(Item::Ch(e.meta().ch[u.idx()])),
            SearchStep::Descend {
                entered, rebased, ..
            } => col.suffix(entered, rebased, &mut items, &mut cost),
        }
        match (sa, sb) {
            (
                SearchStep::Hit,
                SearchStep::Descend {
                    at: ab,
                    side: HeavySide::Right,
                    ..
                },
            ) => {
                col.push_walk_strict(ab, HeavySide::Right, None, &mut items);
            }
            (
                SearchStep::Descend {
                    at: aa,
                    side: HeavySide::Left,
                    ..
                },
                SearchStep::Hit,
            ) => {
                col.push_walk_strict(aa, HeavySide::Left, None, &mut items);
            }
            (
                SearchStep::Descend {
                    at: aa,
                    side: HeavySide::Left,
                    ..
                },
                SearchStep::Descend {
                    at: ab,
                    side: HeavySide::Left,
                    ..
                },
            ) => {
                col.push_walk_strict(aa, HeavySide::Left, Some(ab), &mut items);
            }
            (
                SearchStep::Descend {
                    at: aa,
                    side: HeavySide::Left,
                    ..
                },
                SearchStep::Descend {
                    at: ab,
                    side: HeavySide::Right,
                    ..
                },
            ) => {
                col.push_walk_strict(aa, HeavySide::Left, None, &mut items);
                items.push(Item::Ch(e.meta().ch[u.idx()]));
                col.push_walk_strict(ab, HeavySide::Right, None, &mut items);
            }
            (
                SearchStep::Descend {
                    at: aa,
                    side: HeavySide::Right,
                    ..
                },
                SearchStep::Descend {
                    at: ab,
                    side: HeavySide::Right,
                    ..
                },
            ) => {
                col.push_walk_strict(ab, HeavySide::Right, Some(aa), &mut items);
            }
            other => unreachable!("impossible divergence {other:?}"),
        }
        match sb {
            SearchStep::Hit => items.push(Item::Ch(e.meta().ch[u.idx()])),
            SearchStep::Descend {
                entered, rebased, ..
            } => col.prefix(entered, rebased, &mut items, &mut cost),
        }
    }
    stats.cost.add(&cost);
    items
}

/// Decodes collected items in order, counting one decode step per
/// character and one collected root per subtree.
pub fn decode_items(slp: &Slp, items: &[Item], out: &mut String, stats: &mut ExtractStats) {
    for item in items {
        match *item {
            Item::Ch(c) => {
                out.push(c);
                stats.decode_steps += 1;
            }
            Item::Tree(v) => {
                stats.collected_roots += 1;
                decode_tree(slp, v, out, &mut stats.decode_steps);
            }
        }
    }
}

/// Decodes S(v)[a ..= b] (1-based, inclusive) directly to characters.
pub fn decode_node_range(
    e: &Engine,
    v: RuleId,
    a: u64,
    b: u64,
    stats: &mut ExtractStats,
) -> Vec<char> {
    let items = collect_node_range(e, v, a, b, stats);
    let mut s = String::with_capacity((b - a + 1) as usize);
    decode_items(e.slp(), &items, &mut s, stats);
    s.chars().collect()
}

/// Decodes S[i, j) using two searches and O(j - i) decode work.
pub fn extract(e: &Engine, i: u64, j: u64) -> Result<(String, ExtractStats), SlpError> {
    let n = e.text_len();
    if i > j || j > n {
        return Err(SlpError::IndexOutOfRange {
            index: j.max(i),
            len: n,
        });
    }
    let mut stats = ExtractStats::default();
    if i == j {
        return Ok((String::new(), stats));
    }
    let items = collect_node_range(e, e.slp().root(), i + 1, j, &mut stats);
    let mut out = String::with_capacity((j - i) as usize);
    decode_items(e.slp(), &items, &mut out, &mut stats);
    debug_assert_eq!(stats.decode_steps, j - i);
    Ok((out, stats))
}

fn decode_tree(slp: &Slp, v: RuleId, out: &mut String, steps: &mut u64) {
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        match slp.rule(u) {
            Rule::Terminal(ch) => {
                out.push(ch);
                *steps += 1;
            }
            Rule::Pair(l, r) => {
                stack.push(r);
                stack.push(l);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineKind;
    use crate::generate::{random_slp, random_slp_with_cap, skewed_huge, GenMode};
    use crate::grammar::fixtures::abaababa;
    use crate::heavy_path::{build_forest, decompose, heavy_suffix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn engines(slp: &Slp) -> Vec<Engine> {
        vec![
            Engine::build(slp.clone(), EngineKind::Baseline, 0),
            Engine::build(slp.clone(), EngineKind::LinearSpace, 0),
            Engine::build(slp.clone(), EngineKind::Biased, 1),
        ]
    }

    #[test]
    fn light_links_on_abaababa() {
        let slp = abaababa();
        let info = decompose(&slp);
        let forest = build_forest(&slp, &info);
        let links = build_light_links(&slp, &info, &forest);
        // All heavy children are left, so every suffix node except the
        // terminals has a right-hanging light child.
        assert_eq!(links.next_right[5], Some(RuleId(4)));
        assert_eq!(links.next_right[4], Some(RuleId(3)));
        assert_eq!(links.next_right[3], Some(RuleId(2)));
        assert_eq!(links.next_right[2], None);
        assert!(links.next_left.iter().all(|x| x.is_none()));
    }

    #[test]
    fn walk_equals_naive_parent_walk() {
        for seed in 0..6 {
            let slp = random_slp(seed + 40, 400, 3, GenMode::Mixed).unwrap();
            let info = decompose(&slp);
            let forest = build_forest(&slp, &info);
            let e = Engine::build(slp.clone(), EngineKind::Biased, 1);
            let col = Collector { e: &e };
            for v in 0..slp.rule_count() {
                let v = RuleId(v as u32);
                for side in [HeavySide::Left, HeavySide::Right] {
                    let mut via_links = Vec::new();
                    col.walk(v, side, None, &mut via_links);
                    let by_hand: Vec<RuleId> = heavy_suffix(&forest, v)
                        .into_iter()
                        .filter(|&w| {
                            info.light_child(&slp, w)
                                .map(|(_, s)| s == side)
                                .unwrap_or(false)
                        })
                        .collect();
                    assert_eq!(via_links, by_hand, "node {v} side {side:?}");
                }
            }
        }
    }

    #[test]
    fn extract_spec_examples() {
        let slp = abaababa();
        for e in engines(&slp) {
            let (s, stats) = extract(&e, 2, 5).unwrap();
            assert_eq!(s, "aab");
            assert_eq!(stats.decode_steps, 3);
            assert_eq!(stats.random_accesses, 2);
            assert!(stats.collected_roots <= 3);

            assert_eq!(extract(&e, 3, 3).unwrap().0, "");
            assert_eq!(extract(&e, 0, 8).unwrap().0, "abaababa");
            assert!(extract(&e, 5, 9).is_err());
        }
    }

    #[test]
    fn single_character_span() {
        let slp = abaababa();
        let e = Engine::build(slp, EngineKind::Biased, 1);
        let (s, stats) = extract(&e, 4, 5).unwrap();
        assert_eq!(s, "b");
        assert_eq!(stats.random_accesses, 1);
        assert_eq!(stats.decode_steps, 1);
    }

    #[test]
    fn lca_examples() {
        let slp = abaababa();
        let e = Engine::build(slp.clone(), EngineKind::Biased, 1);
        // Full span: both searches leave the root differently.
        let (v, a, b) = lca_of_paths(&e, 0, 8).unwrap();
        assert_eq!(v, slp.root());
        assert_eq!((a, b), (0, 7));
        // The divergence node's expansion covers both rebased offsets.
        let (v, a, b) = lca_of_paths(&e, 2, 5).unwrap();
        let sub: Vec<char> = slp.expand_node(v).unwrap().chars().collect();
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        assert_eq!(sub[a as usize], text[2]);
        assert_eq!(sub[b as usize], text[4]);
        // Degenerate span ends at the search terminus.
        let (_, a, b) = lca_of_paths(&e, 3, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_spans_match_oracle_slices() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (seed, mode) in [
            (1, GenMode::Chain),
            (2, GenMode::Balanced),
            (3, GenMode::Mixed),
            (4, GenMode::Mixed),
        ] {
            let slp = random_slp_with_cap(seed + 80, 500, 3, mode, 1 << 14).unwrap();
            let text: Vec<char> = slp.expand().unwrap().chars().collect();
            let n = slp.text_len();
            for e in engines(&slp) {
                for _ in 0..300 {
                    let i = rng.gen_range(0..n);
                    let j = rng.gen_range(i..=n);
                    let (s, stats) = extract(&e, i, j).unwrap();
                    let expect: String = text[i as usize..j as usize].iter().collect();
                    assert_eq!(s, expect, "span {i}..{j} engine {}", e.kind().name());
                    assert_eq!(stats.decode_steps, j - i);
                    assert!(stats.collected_roots <= j - i);
                }
            }
        }
    }

    #[test]
    fn huge_grammar_extraction() {
        let slp = skewed_huge(40, 11);
        let n = slp.text_len();
        let e = Engine::build(slp, EngineKind::Biased, 1);
        let mid = n / 2;
        let (s, stats) = extract(&e, mid, mid + 10_000).unwrap();
        assert_eq!(s.len(), 10_000);
        assert_eq!(stats.decode_steps, 10_000);
        assert_eq!(stats.random_accesses, 2);
        // Spot-check the boundary characters against single accesses.
        assert_eq!(s.chars().next().unwrap(), e.access(mid).unwrap());
        assert_eq!(s.chars().last().unwrap(), e.access(mid + 9_999).unwrap());
    }
}
