//! Heavy path decomposition of the grammar by expansion length, the heavy
//! path suffix forest H with per-side edge weights, and per-node suffix
//! metadata.
//!
//! H has one node per grammar rule; the parent of a pair rule is its heavy
//! child, so the roots of H are exactly the terminal rules and the ancestor
//! chain of a node spells out its heavy path suffix.

use serde::Serialize;

use crate::grammar::{Rule, RuleId, Slp};

/// Which child of a pair rule is heavy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeavySide {
    Left,
    Right,
}

/// Per-rule heavy-child choice. `None` for terminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeavyInfo {
    pub heavy: Vec<Option<HeavySide>>,
}

impl HeavyInfo {
    #[inline]
    pub fn heavy_child(&self, slp: &Slp, v: RuleId) -> Option<RuleId> {
        match (self.heavy[v.idx()], slp.rule(v)) {
            (Some(HeavySide::Left), Rule::Pair(l, _)) => Some(l),
            (Some(HeavySide::Right), Rule::Pair(_, r)) => Some(r),
            _ => None,
        }
    }

    /// The light child and the side it hangs on, for pair rules.
    #[inline]
    pub fn light_child(&self, slp: &Slp, v: RuleId) -> Option<(RuleId, HeavySide)> {
        match (self.heavy[v.idx()], slp.rule(v)) {
            // The light child hangs on the side opposite the heavy one.
            (Some(HeavySide::Left), Rule::Pair(_, r)) => Some((r, HeavySide::Right)),
            (Some(HeavySide::Right), Rule::Pair(l, _)) => Some((l, HeavySide::Left)),
            _ => None,
        }
    }
}

/// Picks the child of maximum expansion length for every pair rule.
/// Equal sizes break toward the left child.
pub fn decompose(slp: &Slp) -> HeavyInfo {
    let heavy = slp
        .rules()
        .iter()
        .map(|rule| match *rule {
            Rule::Terminal(_) => None,
            Rule::Pair(l, r) => {
                if slp.size(l) >= slp.size(r) {
                    Some(HeavySide::Left)
                } else {
                    Some(HeavySide::Right)
                }
            }
        })
        .collect();
    HeavyInfo { heavy }
}

/// The heavy path suffix forest.
#[derive(Debug, Clone)]
pub struct HForest {
    /// Parent in H = the heavy child of the rule; `None` for terminals.
    pub parent: Vec<Option<RuleId>>,
    /// Weight of the edge to the parent, per side. Exactly one of the two
    /// is nonzero-eligible: the side the light child hangs on carries its
    /// size, the other side carries 0.
    pub left_weight: Vec<u64>,
    pub right_weight: Vec<u64>,
}

impl HForest {
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    pub fn weight(&self, v: RuleId, side: HeavySide) -> u64 {
        match side {
            HeavySide::Left => self.left_weight[v.idx()],
            HeavySide::Right => self.right_weight[v.idx()],
        }
    }

    pub fn roots(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_none())
            .map(|(i, _)| RuleId(i as u32))
    }

    /// Depth of each node below its H-root.
    pub fn depths(&self) -> Vec<u32> {
        // Parents are heavy children and therefore have smaller rule ids.
        let mut d = vec![0u32; self.parent.len()];
        for v in 0..self.parent.len() {
            if let Some(p) = self.parent[v] {
                d[v] = d[p.idx()] + 1;
            }
        }
        d
    }
}

/// Builds H from the heavy-child choices in O(n).
pub fn build_forest(slp: &Slp, info: &HeavyInfo) -> HForest {
    let n = slp.rule_count();
    let mut parent = vec![None; n];
    let mut left_weight = vec![0u64; n];
    let mut right_weight = vec![0u64; n];
    for i in 0..n {
        let v = RuleId(i as u32);
        if let Some(h) = info.heavy_child(slp, v) {
            parent[i] = Some(h);
            let (light, side) = info.light_child(slp, v).expect("pair rule has a light child");
            match side {
                HeavySide::Left => left_weight[i] = slp.size(light),
                HeavySide::Right => right_weight[i] = slp.size(light),
            }
        }
    }
    HForest {
        parent,
        left_weight,
        right_weight,
    }
}

/// Per-node suffix metadata: the 1-based leaf index `z` of the suffix
/// terminal within the node's expansion, and that terminal's character.
#[derive(Debug, Clone)]
pub struct SuffixMeta {
    pub z: Vec<u64>,
    pub ch: Vec<char>,
    /// Total left/right light mass from the node to its H-root; `z` is
    /// `left_total + 1`.
    pub left_total: Vec<u64>,
    pub right_total: Vec<u64>,
}

/// Accumulates suffix metadata root-to-node over H in O(n) total.
pub fn suffix_meta(slp: &Slp, forest: &HForest) -> SuffixMeta {
    let n = slp.rule_count();
    let mut left_total = vec![0u64; n];
    let mut right_total = vec![0u64; n];
    let mut ch = vec!['\0'; n];
    // Parents have smaller ids, so ascending order sees parents first.
    for i in 0..n {
        match forest.parent[i] {
            None => {
                ch[i] = match slp.rule(RuleId(i as u32)) {
                    Rule::Terminal(c) => c,
                    Rule::Pair(..) => unreachable!("H-roots are terminals"),
                };
            }
            Some(p) => {
                left_total[i] = left_total[p.idx()] + forest.left_weight[i];
                right_total[i] = right_total[p.idx()] + forest.right_weight[i];
                ch[i] = ch[p.idx()];
            }
        }
    }
    let z = left_total.iter().map(|&l| l + 1).collect();
    SuffixMeta {
        z,
        ch,
        left_total,
        right_total,
    }
}

/// A collapsed nondecreasing size sequence: strictly increasing values plus,
/// per value, the largest raw index attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeSeq {
    pub values: Vec<u64>,
    pub idx_map: Vec<u32>,
}

impl SizeSeq {
    /// Collapses a nondecreasing raw sequence, keeping the deepest raw
    /// index per value so a predecessor lands at the node whose light
    /// child actually contains the position.
    pub fn from_raw(raw: &[u64]) -> SizeSeq {
        let mut values = Vec::new();
        let mut idx_map: Vec<u32> = Vec::new();
        for (i, &v) in raw.iter().enumerate() {
            if let Some(&last) = values.last() {
                debug_assert!(v >= last, "raw sequence must be nondecreasing");
                if v == last {
                    *idx_map.last_mut().unwrap() = i as u32;
                    continue;
                }
            }
            values.push(v);
            idx_map.push(i as u32);
        }
        SizeSeq { values, idx_map }
    }
}

/// Raw left/right size sequences of a heavy path suffix given bottom-up
/// (from the suffix head toward the terminal): entry `i` is 1 plus the
/// side-light mass of the first `i` nodes.
pub fn raw_size_sequences(forest: &HForest, path: &[RuleId]) -> (Vec<u64>, Vec<u64>) {
    let mut left = Vec::with_capacity(path.len());
    let mut right = Vec::with_capacity(path.len());
    let mut l = 1u64;
    let mut r = 1u64;
    left.push(l);
    right.push(r);
    for &v in &path[..path.len() - 1] {
        l += forest.left_weight[v.idx()];
        r += forest.right_weight[v.idx()];
        left.push(l);
        right.push(r);
    }
    (left, right)
}

/// Collapsed left/right size sequences for a heavy path suffix.
pub fn size_sequences(forest: &HForest, path: &[RuleId]) -> (SizeSeq, SizeSeq) {
    let (l, r) = raw_size_sequences(forest, path);
    (SizeSeq::from_raw(&l), SizeSeq::from_raw(&r))
}

/// The heavy path suffix of `v`: `v`, its heavy child, and so on down to a
/// terminal.
pub fn heavy_suffix(forest: &HForest, v: RuleId) -> Vec<RuleId> {
    let mut path = vec![v];
    let mut cur = v;
    while let Some(p) = forest.parent[cur.idx()] {
        path.push(p);
        cur = p;
    }
    path
}

/// Histogram entry block for the `stats` surface.
#[derive(Debug, Serialize)]
pub struct HeavyPathStats {
    pub h_roots: usize,
    pub max_h_depth: u32,
    /// light_edge_histogram[d] = number of grammar nodes whose top-down
    /// search path from the root crosses exactly d light edges.
    pub light_edge_histogram: Vec<u64>,
}

pub fn heavy_path_stats(slp: &Slp, info: &HeavyInfo, forest: &HForest) -> HeavyPathStats {
    let h_roots = forest.roots().count();
    let max_h_depth = forest.depths().into_iter().max().unwrap_or(0);

    // Light depth per node measured from the root of the grammar.
    let n = slp.rule_count();
    let mut light_depth = vec![u32::MAX; n];
    let root = slp.root();
    light_depth[root.idx()] = 0;
    for i in (0..n).rev() {
        let d = light_depth[i];
        if d == u32::MAX {
            continue;
        }
        if let Rule::Pair(l, r) = slp.rule(RuleId(i as u32)) {
            let heavy = info.heavy_child(slp, RuleId(i as u32)).unwrap();
            for c in [l, r] {
                let cd = if c == heavy { d } else { d + 1 };
                if cd < light_depth[c.idx()] {
                    light_depth[c.idx()] = cd;
                }
            }
        }
    }
    let max_d = light_depth
        .iter()
        .filter(|&&d| d != u32::MAX)
        .max()
        .copied()
        .unwrap_or(0);
    let mut hist = vec![0u64; max_d as usize + 1];
    for &d in &light_depth {
        if d != u32::MAX {
            hist[d as usize] += 1;
        }
    }
    HeavyPathStats {
        h_roots,
        max_h_depth,
        light_edge_histogram: hist,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::fixtures::{abaababa, fig2};
    use crate::generate::{random_slp, GenMode};

    #[test]
    fn abaababa_all_left_heavy() {
        let slp = abaababa();
        let info = decompose(&slp);
        for i in 2..6 {
            assert_eq!(info.heavy[i], Some(HeavySide::Left), "rule {i}");
        }
        assert_eq!(info.heavy[0], None);
        assert_eq!(info.heavy[1], None);
    }

    #[test]
    fn tie_breaks_left() {
        let slp = abaababa();
        let info = decompose(&slp);
        // Rule 2 has children of sizes (1, 1).
        assert_eq!(info.heavy[2], Some(HeavySide::Left));
    }

    #[test]
    fn skewed_rule_marks_bigger_side() {
        // Children sizes (2, 5): right is heavy.
        let slp = crate::format::parse_slp(
            "SLPv1 6 5\n0 T 97\n1 P 0 0\n2 P 1 0\n3 P 2 1\n4 P 3 0\n5 P 1 3\n",
        )
        .unwrap();
        assert_eq!(slp.size(RuleId(1)), 2);
        assert_eq!(slp.size(RuleId(3)), 5);
        let info = decompose(&slp);
        assert_eq!(info.heavy[5], Some(HeavySide::Right));
    }

    #[test]
    fn forest_of_abaababa() {
        let slp = abaababa();
        let forest = build_forest(&slp, &decompose(&slp));
        // H-path from the root: 5 -> 4 -> 3 -> 2 -> 0 with right weights
        // (3, 2, 1, 1) and left weights all zero.
        let suffix = heavy_suffix(&forest, RuleId(5));
        assert_eq!(
            suffix,
            vec![RuleId(5), RuleId(4), RuleId(3), RuleId(2), RuleId(0)]
        );
        let rw: Vec<u64> = suffix[..4]
            .iter()
            .map(|v| forest.right_weight[v.idx()])
            .collect();
        assert_eq!(rw, vec![3, 2, 1, 1]);
        assert!(suffix[..4].iter().all(|v| forest.left_weight[v.idx()] == 0));
        let roots: Vec<RuleId> = forest.roots().collect();
        assert_eq!(roots, vec![RuleId(0), RuleId(1)]);
    }

    #[test]
    fn terminal_only_forest() {
        let slp = crate::grammar::Slp::new(vec![Rule::Terminal('x')]).unwrap();
        let forest = build_forest(&slp, &decompose(&slp));
        assert_eq!(forest.roots().count(), 1);
        assert!(forest.parent[0].is_none());
    }

    #[test]
    fn random_forest_roots_equal_terminals() {
        let slp = random_slp(11, 1000, 4, GenMode::Mixed).unwrap();
        let forest = build_forest(&slp, &decompose(&slp));
        let terminals = slp
            .rules()
            .iter()
            .filter(|r| matches!(r, Rule::Terminal(_)))
            .count();
        assert_eq!(forest.roots().count(), terminals);
    }

    #[test]
    fn suffix_meta_of_abaababa() {
        let slp = abaababa();
        let forest = build_forest(&slp, &decompose(&slp));
        let meta = suffix_meta(&slp, &forest);
        assert_eq!(meta.z[5], 1);
        assert_eq!(meta.ch[5], 'a');
        // Terminals carry their own character at z = 1.
        assert_eq!(meta.z[1], 1);
        assert_eq!(meta.ch[1], 'b');
    }

    #[test]
    fn suffix_meta_oracle_check() {
        for seed in 0..5 {
            let slp = random_slp(seed, 300, 3, GenMode::Mixed).unwrap();
            let forest = build_forest(&slp, &decompose(&slp));
            let meta = suffix_meta(&slp, &forest);
            for i in 0..slp.rule_count() {
                let v = RuleId(i as u32);
                if slp.size(v) <= 1 << 12 {
                    let s: Vec<char> = slp.expand_node(v).unwrap().chars().collect();
                    assert_eq!(
                        s[(meta.z[i] - 1) as usize],
                        meta.ch[i],
                        "node {i} of seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn z_of_heavy_right_child() {
        // A rule with a size-3 light left child satisfies
        // z = 1 + 3 + (z of heavy child - 1).
        let slp = fig2();
        let forest = build_forest(&slp, &decompose(&slp));
        let meta = suffix_meta(&slp, &forest);
        let root = slp.root();
        let heavy = decompose(&slp).heavy_child(&slp, root).unwrap();
        assert_eq!(slp.size(RuleId(3)), 3);
        assert_eq!(meta.z[root.idx()], 1 + 3 + (meta.z[heavy.idx()] - 1));
    }

    #[test]
    fn size_sequences_of_abaababa_suffix() {
        let slp = abaababa();
        let forest = build_forest(&slp, &decompose(&slp));
        let suffix = heavy_suffix(&forest, RuleId(5));
        let (raw_l, raw_r) = raw_size_sequences(&forest, &suffix);
        assert_eq!(raw_r, vec![1, 4, 6, 7, 8]);
        assert_eq!(raw_l, vec![1, 1, 1, 1, 1]);
        let (l, r) = size_sequences(&forest, &suffix);
        assert_eq!(l.values, vec![1]);
        assert_eq!(l.idx_map, vec![4]);
        assert_eq!(r.values, vec![1, 4, 6, 7, 8]);
        // l_k + r_k - 1 = size of the suffix head.
        assert_eq!(raw_l.last().unwrap() + raw_r.last().unwrap() - 1, 8);
    }

    #[test]
    fn single_node_suffix_sequences() {
        let slp = abaababa();
        let forest = build_forest(&slp, &decompose(&slp));
        let (l, r) = size_sequences(&forest, &[RuleId(1)]);
        assert_eq!(l.values, vec![1]);
        assert_eq!(r.values, vec![1]);
    }

    /// The size-7 suffix with left sequence predecessor l_2 = 4: realized
    /// by overriding the tie at rule 4 toward the right child.
    #[test]
    fn fig2_sequences() {
        let slp = fig2();
        assert_eq!(slp.expand().unwrap(), "ababaab");
        let mut info = decompose(&slp);
        info.heavy[4] = Some(HeavySide::Right);
        let forest = build_forest(&slp, &info);
        let suffix = heavy_suffix(&forest, slp.root());
        assert_eq!(
            suffix,
            vec![RuleId(6), RuleId(5), RuleId(4), RuleId(0)],
            "suffix should have four nodes"
        );
        assert_eq!(slp.size(slp.root()), 7);
        let (raw_l, raw_r) = raw_size_sequences(&forest, &suffix);
        assert_eq!(raw_l, vec![1, 4, 4, 5]);
        assert_eq!(raw_r, vec![1, 1, 3, 3]);
        assert_eq!(raw_l[2], 4, "l_2 = 4");
        assert_eq!(raw_r[1], 1, "r_1 exists with value 1");
        let meta = suffix_meta(&slp, &forest);
        assert_eq!(meta.z[6], 5);
    }

    #[test]
    fn light_children_are_at_most_half() {
        for seed in 0..5 {
            let slp = random_slp(seed + 20, 500, 3, GenMode::Mixed).unwrap();
            let info = decompose(&slp);
            for i in 0..slp.rule_count() {
                if let Some((light, _)) = info.light_child(&slp, RuleId(i as u32)) {
                    assert!(slp.size(light) <= slp.size(RuleId(i as u32)) / 2);
                }
            }
        }
    }

    #[test]
    fn size_identity_along_suffixes() {
        let slp = random_slp(9, 400, 3, GenMode::Chain).unwrap();
        let forest = build_forest(&slp, &decompose(&slp));
        for i in 0..slp.rule_count() {
            let suffix = heavy_suffix(&forest, RuleId(i as u32));
            let (l, r) = raw_size_sequences(&forest, &suffix);
            assert_eq!(
                l.last().unwrap() + r.last().unwrap() - 1,
                slp.size(RuleId(i as u32))
            );
        }
    }
}
