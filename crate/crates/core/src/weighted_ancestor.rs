//! Weighted ancestor queries on the heavy path suffix forest.
//!
//! The forest H is decomposed into its own heavy paths; each path stores
//! its left/right cumulative weight sequence behind an interval-biased
//! search tree. Queries that leave their path navigate the light
//! representation L (one vertex per path), which is indexed either flat
//! (one search tree per root-to-leaf chain) or through a top/bottom split
//! whose bottom trees are contracted into branching representations and
//! indexed recursively.

use serde::Serialize;

use crate::grammar::{RuleId, Slp};
use crate::heavy_path::{HForest, HeavySide, SuffixMeta};
use crate::ibst::{IntervalBiasedTree, QueryCounters};

const NONE: u32 = u32::MAX;

/// Answer of a weighted ancestor query: the deepest node of the heavy path
/// suffix of `u` whose cumulative side weight from `u` is still below the
/// budget; the search descends into this node's light child.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaHit {
    pub node: RuleId,
    /// Cumulative side weight from the query node to `node` (the paper's
    /// l_i or r_i minus one).
    pub cum: u64,
    /// Steps from the query node to `node` along the suffix.
    pub steps: u32,
}

/// Signals that the budget exceeds the total side weight of the suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoAncestor;

// ---------------------------------------------------------------------
// Collapsed cumulative chains
// ---------------------------------------------------------------------

/// A nondecreasing cumulative sequence collapsed to strict boundaries,
/// answering "deepest raw index with value < x".
#[derive(Debug, Clone)]
pub struct Chain {
    raw: Vec<u64>,
    bounds: Vec<u64>,
    /// Deepest raw index attaining each boundary value.
    deepest: Vec<u32>,
    /// Boundary index of each raw value.
    interval_of_raw: Vec<u32>,
    ibst: Option<IntervalBiasedTree>,
}

impl Chain {
    pub fn new(raw: Vec<u64>, with_ibst: bool) -> Chain {
        debug_assert!(!raw.is_empty() && raw[0] == 0);
        let mut bounds: Vec<u64> = Vec::new();
        let mut deepest: Vec<u32> = Vec::new();
        let mut interval_of_raw = Vec::with_capacity(raw.len());
        for (i, &v) in raw.iter().enumerate() {
            match bounds.last() {
                Some(&last) if v == last => *deepest.last_mut().unwrap() = i as u32,
                Some(&last) => {
                    debug_assert!(v > last, "cumulative sequence must be nondecreasing");
                    bounds.push(v);
                    deepest.push(i as u32);
                }
                None => {
                    bounds.push(v);
                    deepest.push(i as u32);
                }
            }
            interval_of_raw.push(bounds.len() as u32 - 1);
        }
        let ibst = if with_ibst && bounds.len() >= 2 {
            Some(IntervalBiasedTree::build(bounds.clone()).expect("strict boundaries"))
        } else {
            None
        };
        Chain {
            raw,
            bounds,
            deepest,
            interval_of_raw,
            ibst,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cum(&self, pos: usize) -> u64 {
        self.raw[pos]
    }

    #[inline]
    pub fn total(&self) -> u64 {
        *self.raw.last().unwrap()
    }

    pub fn build_steps(&self) -> u64 {
        self.ibst.as_ref().map_or(0, |t| t.build_steps())
    }

    pub fn ibst(&self) -> Option<&IntervalBiasedTree> {
        self.ibst.as_ref()
    }

    /// Deepest raw index M with raw[M] < x, starting no lower than
    /// `start`. Requires raw[start] < x <= total.
    pub fn locate(&self, start: usize, x: u64, ctr: &mut QueryCounters) -> (usize, u64) {
        debug_assert!(x > self.raw[start] && x <= self.total());
        match &self.ibst {
            Some(t) => {
                let (iv, lo) = t.predecessor_from(self.interval_of_raw[start] as usize, x - 1, ctr);
                (self.deepest[iv] as usize, lo)
            }
            None => self.locate_binary(x, ctr),
        }
    }

    /// Binary-search fallback used by the linear-space engine; probes are
    /// charged like predecessor node visits.
    pub fn locate_binary(&self, x: u64, ctr: &mut QueryCounters) -> (usize, u64) {
        debug_assert!(x >= 1 && x <= self.total());
        let mut lo = 0usize;
        let mut hi = self.bounds.len();
        while lo < hi {
            ctr.pred_visits += 1;
            let m = (lo + hi) / 2;
            if self.bounds[m] < x {
                lo = m + 1;
            } else {
                hi = m;
            }
        }
        debug_assert!(lo >= 1);
        (self.deepest[lo - 1] as usize, self.bounds[lo - 1])
    }
}

// ---------------------------------------------------------------------
// Heavy decomposition of H
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HPath {
    /// Path nodes from the H-leaf (a heavy path suffix head) toward the
    /// H-root; consecutive entries are H-parent links.
    pub nodes: Vec<RuleId>,
    pub left: Chain,
    pub right: Chain,
}

impl HPath {
    #[inline]
    pub fn chain(&self, side: HeavySide) -> &Chain {
        match side {
            HeavySide::Left => &self.left,
            HeavySide::Right => &self.right,
        }
    }

    #[inline]
    pub fn top(&self) -> RuleId {
        *self.nodes.last().unwrap()
    }
}

/// Heavy decomposition of H with per-path cumulative chains. This is the
/// whole index for the linear-space engine; the biased engine layers the
/// light representation on top.
#[derive(Debug, Clone)]
pub struct HPathIndex {
    pub paths: Vec<HPath>,
    /// (path, position) of every grammar node.
    pub node_loc: Vec<(u32, u32)>,
    /// Depth below the H-root, per grammar node.
    pub h_depth: Vec<u32>,
    pub build_work: u64,
}

impl HPathIndex {
    pub fn build(slp: &Slp, forest: &HForest, with_ibst: bool) -> HPathIndex {
        let n = slp.rule_count();

        // Subtree leaf counts in H; children have larger rule ids than
        // their parents, so one descending sweep suffices.
        let mut leafcount = vec![0u64; n];
        let mut heavy_child = vec![NONE; n];
        let mut best = vec![0u64; n];
        for v in (0..n).rev() {
            if leafcount[v] == 0 {
                leafcount[v] = 1;
            }
            if let Some(p) = forest.parent[v] {
                leafcount[p.idx()] += leafcount[v];
                // Later candidates have smaller ids; >= keeps the smallest
                // id among maxima.
                if leafcount[v] >= best[p.idx()] {
                    best[p.idx()] = leafcount[v];
                    heavy_child[p.idx()] = v as u32;
                }
            }
        }

        // Path tops: H-roots and light H-children.
        let mut paths = Vec::new();
        let mut node_loc = vec![(NONE, NONE); n];
        let mut build_work = 0u64;
        for v in 0..n {
            let is_top = match forest.parent[v] {
                None => true,
                Some(p) => heavy_child[p.idx()] != v as u32,
            };
            if !is_top {
                continue;
            }
            let mut nodes = Vec::new();
            let mut cur = v as u32;
            loop {
                nodes.push(RuleId(cur));
                let next = heavy_child[cur as usize];
                if next == NONE {
                    break;
                }
                cur = next;
            }
            nodes.reverse();
            let pid = paths.len() as u32;
            let mut left = Vec::with_capacity(nodes.len());
            let mut right = Vec::with_capacity(nodes.len());
            let (mut l, mut r) = (0u64, 0u64);
            left.push(0);
            right.push(0);
            for (pos, &u) in nodes.iter().enumerate() {
                node_loc[u.idx()] = (pid, pos as u32);
                if pos + 1 < nodes.len() {
                    l += forest.left_weight[u.idx()];
                    r += forest.right_weight[u.idx()];
                    left.push(l);
                    right.push(r);
                }
            }
            build_work += 2 * nodes.len() as u64;
            let left = Chain::new(left, with_ibst);
            let right = Chain::new(right, with_ibst);
            build_work += left.build_steps() + right.build_steps();
            paths.push(HPath { nodes, left, right });
        }
        HPathIndex {
            paths,
            node_loc,
            h_depth: forest.depths(),
            build_work,
        }
    }

    #[inline]
    fn hit(&self, u: RuleId, node: RuleId, cum: u64) -> WaHit {
        WaHit {
            node,
            cum,
            steps: self.h_depth[u.idx()] - self.h_depth[node.idx()],
        }
    }

    fn side_total(meta: &SuffixMeta, u: RuleId, side: HeavySide) -> u64 {
        match side {
            HeavySide::Left => meta.left_total[u.idx()],
            HeavySide::Right => meta.right_total[u.idx()],
        }
    }

    /// Weighted ancestor by walking path-by-path with binary searches.
    pub fn wa_query_bsearch(
        &self,
        forest: &HForest,
        meta: &SuffixMeta,
        u: RuleId,
        budget: u64,
        side: HeavySide,
        ctr: &mut QueryCounters,
    ) -> Result<WaHit, NoAncestor> {
        if budget == 0 || budget > Self::side_total(meta, u, side) {
            return Err(NoAncestor);
        }
        let (mut pid, mut pos) = self.node_loc[u.idx()];
        let mut consumed = 0u64;
        loop {
            let path = &self.paths[pid as usize];
            let chain = path.chain(side);
            let avail = chain.total() - chain.cum(pos as usize);
            if budget <= consumed + avail {
                let x = chain.cum(pos as usize) + (budget - consumed);
                let (m, c) = chain.locate_binary(x, ctr);
                debug_assert!(m >= pos as usize);
                return Ok(self.hit(u, path.nodes[m], consumed + c - chain.cum(pos as usize)));
            }
            consumed += avail;
            let tau = path.top();
            let w = forest.parent[tau.idx()].expect("budget was prechecked");
            let e = forest.weight(tau, side);
            if budget <= consumed + e {
                return Ok(self.hit(u, tau, consumed));
            }
            consumed += e;
            let loc = self.node_loc[w.idx()];
            pid = loc.0;
            pos = loc.1;
        }
    }
}

// ---------------------------------------------------------------------
// Generic weighted forests and chain indexes
// ---------------------------------------------------------------------

/// A weighted forest: per-vertex parent and weight of the parent edge.
#[derive(Debug, Clone)]
pub struct WForest {
    pub parent: Vec<Option<u32>>,
    pub weight: Vec<u64>,
}

impl WForest {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn children(&self) -> Vec<Vec<u32>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p as usize].push(v as u32);
            }
        }
        ch
    }

    /// Vertices in breadth-first order, parents before children.
    fn bfs_order(&self, children: &[Vec<u32>]) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.parent.len() as u32)
            .filter(|&v| self.parent[v as usize].is_none())
            .collect();
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(&children[v as usize]);
        }
        debug_assert_eq!(order.len(), self.parent.len());
        order
    }
}

/// Root-to-leaf chains with one search tree each; every covered vertex
/// knows one chain through it. Chains are stored leaf-first so ancestor
/// queries move toward the end of the sequence and can start from the
/// vertex's own interval.
#[derive(Debug)]
struct ChainIndex {
    chains: Vec<(Vec<u32>, Chain)>,
    loc: Vec<(u32, u32)>,
    build_work: u64,
}

impl ChainIndex {
    fn build(forest: &WForest, include: Option<&[bool]>) -> ChainIndex {
        let n = forest.parent.len();
        let inc = |v: usize| include.map_or(true, |m| m[v]);
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if !inc(v) {
                continue;
            }
            if let Some(p) = forest.parent[v] {
                debug_assert!(inc(p as usize), "included set must be upward closed");
                children[p as usize].push(v as u32);
            }
        }
        let mut chains: Vec<(Vec<u32>, Chain)> = Vec::new();
        let mut loc = vec![(NONE, NONE); n];
        let mut build_work = 0u64;
        for root in 0..n {
            if !inc(root) || forest.parent[root].is_some() {
                continue;
            }
            // Iterative DFS carrying the current root-to-vertex path.
            let mut path: Vec<u32> = Vec::new();
            let mut stack: Vec<(u32, usize)> = vec![(root as u32, 0)];
            while let Some(&mut (v, ref mut next_child)) = stack.last_mut() {
                if *next_child == 0 {
                    path.push(v);
                    if children[v as usize].is_empty() {
                        // Materialize the chain leaf-first.
                        let nodes: Vec<u32> = path.iter().rev().copied().collect();
                        let mut cums = Vec::with_capacity(nodes.len());
                        cums.push(0u64);
                        for m in 0..nodes.len() - 1 {
                            cums.push(cums[m] + forest.weight[nodes[m] as usize]);
                        }
                        let cid = chains.len() as u32;
                        for (pos, &u) in nodes.iter().enumerate() {
                            if loc[u as usize].0 == NONE {
                                loc[u as usize] = (cid, pos as u32);
                            }
                        }
                        build_work += nodes.len() as u64;
                        let chain = Chain::new(cums, true);
                        build_work += chain.build_steps();
                        chains.push((nodes, chain));
                    }
                }
                if *next_child < children[v as usize].len() {
                    let c = children[v as usize][*next_child];
                    *next_child += 1;
                    stack.push((c, 0));
                } else {
                    stack.pop();
                    path.pop();
                }
            }
        }
        ChainIndex {
            chains,
            loc,
            build_work,
        }
    }

    /// Deepest ancestor-or-self `a` of `v` with cum(v -> a) < q, where the
    /// parent of `a` reaches at least q; `None` when the whole chain above
    /// `v` weighs less than q.
    fn query(&self, v: u32, q: u64, ctr: &mut QueryCounters) -> Option<(u32, u64)> {
        let (cid, pos) = self.loc[v as usize];
        debug_assert_ne!(cid, NONE, "vertex not covered by this chain index");
        let (nodes, chain) = &self.chains[cid as usize];
        let e = chain.cum(pos as usize);
        if e + q > chain.total() {
            return None;
        }
        let (m, c) = chain.locate(pos as usize, e + q, ctr);
        Some((nodes[m], c - e))
    }
}

// ---------------------------------------------------------------------
// The recursive weighted ancestor index over a forest
// ---------------------------------------------------------------------

/// Weighted ancestor index over an arbitrary weighted forest.
///
/// Level 0 indexes every root-to-leaf chain directly. Higher levels split
/// the forest into a top tree and bottom trees, contract each bottom
/// tree's unary paths into a branching representation and index that
/// recursively one level lower.
#[derive(Debug)]
pub enum WaTree {
    Flat(FlatIndex),
    Split(Box<SplitIndex>),
}

#[derive(Debug)]
pub struct FlatIndex {
    size: usize,
    chains: ChainIndex,
}

#[derive(Debug)]
pub struct SplitIndex {
    forest: WForest,
    is_bottom: Vec<bool>,
    /// Bottom-tree root and weighted distance to it, per bottom vertex.
    broot: Vec<u32>,
    d: Vec<u64>,
    top: ChainIndex,
    /// Unary-path decomposition of the bottom trees; paths are stored
    /// bottom-first with cumulative weights from the path bottom.
    paths: Vec<(Vec<u32>, Chain)>,
    path_of: Vec<(u32, u32)>,
    /// Branching representation: one vertex per unary path.
    b_forest: WForest,
    b_index: Box<WaTree>,
    b_root_dist: Vec<u64>,
    leaf_count_threshold: u64,
    top_leaves: usize,
    build_work: u64,
}

impl WaTree {
    pub fn build(forest: WForest, levels: u8) -> WaTree {
        if levels == 0 || forest.is_empty() {
            let chains = ChainIndex::build(&forest, None);
            return WaTree::Flat(FlatIndex {
                size: forest.len(),
                chains,
            });
        }
        WaTree::Split(Box::new(SplitIndex::build(forest, levels)))
    }

    /// Deepest ancestor-or-self of `v` with cumulative distance < q whose
    /// parent reaches at least q; `None` when the chain to the root weighs
    /// less than q. Requires q >= 1.
    pub fn query(&self, v: u32, q: u64, ctr: &mut QueryCounters) -> Option<(u32, u64)> {
        debug_assert!(q >= 1);
        match self {
            WaTree::Flat(f) => f.chains.query(v, q, ctr),
            WaTree::Split(s) => s.query(v, q, ctr),
        }
    }

    pub fn build_work(&self) -> u64 {
        match self {
            WaTree::Flat(f) => f.chains.build_work,
            WaTree::Split(s) => s.build_work,
        }
    }

    /// Vertex counts per recursion level, for the stats surface.
    pub fn level_sizes(&self, out: &mut Vec<u64>, depth: usize) {
        if out.len() <= depth {
            out.resize(depth + 1, 0);
        }
        match self {
            WaTree::Flat(f) => out[depth] += f.size as u64,
            WaTree::Split(s) => {
                out[depth] += s.forest.len() as u64;
                s.b_index.level_sizes(out, depth + 1);
            }
        }
    }

    fn audit(&self) -> Result<(), String> {
        match self {
            WaTree::Flat(_) => Ok(()),
            WaTree::Split(s) => s.audit(),
        }
    }
}

impl SplitIndex {
    fn build(forest: WForest, levels: u8) -> SplitIndex {
        let n = forest.len();
        let children = forest.children();
        let order = forest.bfs_order(&children);

        let mut leafcount = vec![0u64; n];
        for &v in order.iter().rev() {
            if leafcount[v as usize] == 0 {
                leafcount[v as usize] = 1;
            }
            if let Some(p) = forest.parent[v as usize] {
                leafcount[p as usize] += leafcount[v as usize];
            }
        }

        // Bottom trees: maximally high subtrees with at most
        // ceil(log2(n)) leaves.
        let k = if n <= 2 {
            1
        } else {
            (n as u64 - 1).ilog2() as u64 + 1
        };
        let mut is_bottom = vec![false; n];
        let mut broot = vec![NONE; n];
        let mut d = vec![0u64; n];
        for &v in &order {
            let vu = v as usize;
            let parent_big = match forest.parent[vu] {
                None => true,
                Some(p) => leafcount[p as usize] > k,
            };
            if leafcount[vu] <= k && parent_big {
                is_bottom[vu] = true;
                broot[vu] = v;
            } else if let Some(p) = forest.parent[vu] {
                if is_bottom[p as usize] {
                    is_bottom[vu] = true;
                    broot[vu] = broot[p as usize];
                    d[vu] = d[p as usize] + forest.weight[vu];
                }
            }
        }

        let top_mask: Vec<bool> = is_bottom.iter().map(|b| !b).collect();
        let top = ChainIndex::build(&forest, Some(&top_mask));
        let top_leaves = (0..n)
            .filter(|&v| top_mask[v] && children[v].iter().all(|&c| is_bottom[c as usize]))
            .count();

        // Unary-path decomposition of the bottom trees: a vertex joins its
        // single child's path, so branching vertices and leaves start paths.
        let mut paths: Vec<(Vec<u32>, Chain)> = Vec::new();
        let mut path_of = vec![(NONE, NONE); n];
        let mut build_work = top.build_work;
        for v in 0..n as u32 {
            let vu = v as usize;
            if !is_bottom[vu] || children[vu].len() == 1 {
                continue;
            }
            let mut nodes = vec![v];
            let mut cur = v;
            while broot[cur as usize] != cur {
                let p = forest.parent[cur as usize].expect("non-root bottom vertex has a parent");
                if children[p as usize].len() == 1 {
                    nodes.push(p);
                    cur = p;
                } else {
                    break;
                }
            }
            let pid = paths.len() as u32;
            let mut cums = Vec::with_capacity(nodes.len());
            cums.push(0u64);
            for m in 0..nodes.len() - 1 {
                cums.push(cums[m] + forest.weight[nodes[m] as usize]);
            }
            for (pos, &u) in nodes.iter().enumerate() {
                path_of[u as usize] = (pid, pos as u32);
            }
            build_work += nodes.len() as u64;
            let chain = Chain::new(cums, true);
            build_work += chain.build_steps();
            paths.push((nodes, chain));
        }

        // Branching representation: a vertex per path; the edge to the
        // parent path carries the original weight plus the child path's
        // weighted length.
        let m = paths.len();
        let mut b_parent = vec![None; m];
        let mut b_weight = vec![0u64; m];
        for (pid, (nodes, chain)) in paths.iter().enumerate() {
            let tau = *nodes.last().unwrap();
            if broot[tau as usize] == tau {
                continue;
            }
            let p = forest.parent[tau as usize].unwrap();
            debug_assert_eq!(path_of[p as usize].1, 0, "parent of a path top is branching");
            b_parent[pid] = Some(path_of[p as usize].0);
            b_weight[pid] = forest.weight[tau as usize] + chain.total();
        }
        let b_forest = WForest {
            parent: b_parent,
            weight: b_weight,
        };
        let mut b_root_dist = vec![0u64; m];
        {
            let bch = b_forest.children();
            for &v in &b_forest.bfs_order(&bch) {
                if let Some(p) = b_forest.parent[v as usize] {
                    b_root_dist[v as usize] =
                        b_root_dist[p as usize] + b_forest.weight[v as usize];
                }
            }
        }
        let b_index = Box::new(WaTree::build(b_forest.clone(), levels - 1));
        build_work += b_index.build_work();

        SplitIndex {
            forest,
            is_bottom,
            broot,
            d,
            top,
            paths,
            path_of,
            b_forest,
            b_index,
            b_root_dist,
            leaf_count_threshold: k,
            top_leaves,
            build_work,
        }
    }

    fn query(&self, v: u32, q: u64, ctr: &mut QueryCounters) -> Option<(u32, u64)> {
        let vu = v as usize;
        if !self.is_bottom[vu] {
            return self.top.query(v, q, ctr);
        }
        if q <= self.d[vu] {
            return Some(self.bottom_locate(v, q, ctr));
        }
        let r = self.broot[vu];
        let rem = q - self.d[vu];
        let p = self.forest.parent[r as usize]?;
        let w = self.forest.weight[r as usize];
        if rem <= w {
            return Some((r, self.d[vu]));
        }
        let (a, c) = self.top.query(p, rem - w, ctr)?;
        Some((a, c + self.d[vu] + w))
    }

    /// Locates within the bottom tree of `v`; requires 1 <= q <= d(v).
    fn bottom_locate(&self, v: u32, q: u64, ctr: &mut QueryCounters) -> (u32, u64) {
        let (pi, pos) = self.path_of[v as usize];
        let (nodes, chain) = &self.paths[pi as usize];
        let s_v = chain.cum(pos as usize);
        let to_top = chain.total() - s_v;
        if q <= to_top {
            let (m, c) = chain.locate(pos as usize, s_v + q, ctr);
            return (nodes[m], c - s_v);
        }
        let x = q - to_top;
        let tau = *nodes.last().unwrap();
        let b1 = self.forest.parent[tau as usize].expect("answer stays inside the bottom tree");
        let w1 = self.forest.weight[tau as usize];
        if x <= w1 {
            return (tau, to_top);
        }
        let y = x - w1;
        let (pi1, pos1) = self.path_of[b1 as usize];
        debug_assert_eq!(pos1, 0);
        let (nodes1, chain1) = &self.paths[pi1 as usize];
        if y <= chain1.total() {
            let (m, c) = chain1.locate(0, y, ctr);
            return (nodes1[m], to_top + w1 + c);
        }
        let (bj, dj) = match self.b_index.query(pi1, y, ctr) {
            Some(hit) => hit,
            None => {
                // The whole branching chain weighs less than y; the answer
                // sits on the topmost path of the branching forest.
                let mut root = pi1;
                while let Some(p) = self.b_forest.parent[root as usize] {
                    root = p;
                }
                (root, self.b_root_dist[pi1 as usize])
            }
        };
        let (nodes_j, chain_j) = &self.paths[bj as usize];
        let off = to_top + w1 + dj;
        if y <= dj + chain_j.total() {
            debug_assert!(dj < y);
            let (m, c) = chain_j.locate(0, y - dj, ctr);
            (nodes_j[m], off + c)
        } else {
            (*nodes_j.last().unwrap(), off + chain_j.total())
        }
    }

    fn audit(&self) -> Result<(), String> {
        // Every internal branching vertex has at least two children.
        for (v, ch) in self.b_forest.children().iter().enumerate() {
            if ch.len() == 1 {
                return Err(format!("branching representation vertex {v} has one child"));
            }
        }
        self.b_index.audit()
    }
}

// ---------------------------------------------------------------------
// The full index over H
// ---------------------------------------------------------------------

/// Deepest supported recursion level of the branching representation.
pub const MAX_LEVELS: u8 = 2;

#[derive(Debug)]
pub struct WaIndex {
    pub hp: HPathIndex,
    /// The light representation: one vertex per heavy path of H, an edge
    /// per light edge, weighted per side by the light edge weight plus the
    /// weight above the attachment node.
    pub l_left: WForest,
    pub l_right: WForest,
    wa_left: WaTree,
    wa_right: WaTree,
    pub levels: u8,
    pub build_work: u64,
}

#[derive(Debug, Serialize)]
pub struct WaStats {
    pub path_count: usize,
    pub l_height: u32,
    pub top_size: usize,
    pub bottom_size: usize,
    pub top_leaves: usize,
    pub leaf_count_threshold: u64,
    pub level_sizes: Vec<u64>,
}

impl WaIndex {
    pub fn build(slp: &Slp, forest: &HForest, levels: u8) -> WaIndex {
        assert!(levels <= MAX_LEVELS);
        let hp = HPathIndex::build(slp, forest, true);
        let m = hp.paths.len();
        let mut l_parent = vec![None; m];
        let mut lw_left = vec![0u64; m];
        let mut lw_right = vec![0u64; m];
        for (pid, path) in hp.paths.iter().enumerate() {
            let tau = path.top();
            if let Some(w) = forest.parent[tau.idx()] {
                let (wp, wpos) = hp.node_loc[w.idx()];
                l_parent[pid] = Some(wp);
                let above =
                    |chain: &Chain| chain.total() - chain.cum(wpos as usize);
                lw_left[pid] = forest.left_weight[tau.idx()] + above(&hp.paths[wp as usize].left);
                lw_right[pid] =
                    forest.right_weight[tau.idx()] + above(&hp.paths[wp as usize].right);
            }
        }
        let l_left = WForest {
            parent: l_parent.clone(),
            weight: lw_left,
        };
        let l_right = WForest {
            parent: l_parent,
            weight: lw_right,
        };
        let wa_left = WaTree::build(l_left.clone(), levels);
        let wa_right = WaTree::build(l_right.clone(), levels);
        let build_work = hp.build_work + wa_left.build_work() + wa_right.build_work();
        WaIndex {
            hp,
            l_left,
            l_right,
            wa_left,
            wa_right,
            levels,
            build_work,
        }
    }

    fn side_tree(&self, side: HeavySide) -> &WaTree {
        match side {
            HeavySide::Left => &self.wa_left,
            HeavySide::Right => &self.wa_right,
        }
    }

    /// The deepest node of `u`'s heavy path suffix whose cumulative side
    /// weight from `u` stays below `budget` while its successor reaches it.
    pub fn wa_query(
        &self,
        forest: &HForest,
        meta: &SuffixMeta,
        u: RuleId,
        budget: u64,
        side: HeavySide,
        ctr: &mut QueryCounters,
    ) -> Result<WaHit, NoAncestor> {
        if budget == 0 || budget > HPathIndex::side_total(meta, u, side) {
            return Err(NoAncestor);
        }
        let (pid, pos) = self.hp.node_loc[u.idx()];
        let path = &self.hp.paths[pid as usize];
        let chain = path.chain(side);
        let above = chain.total() - chain.cum(pos as usize);
        if budget <= above {
            let (m, c) = chain.locate(pos as usize, chain.cum(pos as usize) + budget, ctr);
            return Ok(self.hp.hit(u, path.nodes[m], c - chain.cum(pos as usize)));
        }
        let x = budget - above;
        let (pv, dl) = self
            .side_tree(side)
            .query(pid, x, ctr)
            .expect("total weight was prechecked");
        let prev = &self.hp.paths[pv as usize];
        let tau = prev.top();
        let w = forest.parent[tau.idx()].expect("a path below the root has an attachment");
        let e = forest.weight(tau, side);
        let landed = above + dl + e;
        if budget <= landed {
            return Ok(self.hp.hit(u, tau, above + dl));
        }
        let (pj, wpos) = self.hp.node_loc[w.idx()];
        let chain_j = self.hp.paths[pj as usize].chain(side);
        let x_abs = chain_j.cum(wpos as usize) + (budget - landed);
        debug_assert!(x_abs <= chain_j.total());
        let (m, c) = chain_j.locate(wpos as usize, x_abs, ctr);
        Ok(self.hp.hit(
            u,
            self.hp.paths[pj as usize].nodes[m],
            landed + (c - chain_j.cum(wpos as usize)),
        ))
    }

    pub fn stats(&self) -> WaStats {
        let m = self.hp.paths.len();
        let children = self.l_left.children();
        let order = self.l_left.bfs_order(&children);
        let mut depth = vec![0u32; m];
        let mut l_height = 0u32;
        for &v in &order {
            if let Some(p) = self.l_left.parent[v as usize] {
                depth[v as usize] = depth[p as usize] + 1;
            }
            l_height = l_height.max(depth[v as usize] + 1);
        }
        let (top_size, bottom_size, top_leaves, threshold) = match &self.wa_left {
            WaTree::Flat(_) => (m, 0, 0, 0),
            WaTree::Split(s) => {
                let bottoms = s.is_bottom.iter().filter(|&&b| b).count();
                (m - bottoms, bottoms, s.top_leaves, s.leaf_count_threshold)
            }
        };
        let mut level_sizes = Vec::new();
        self.wa_left.level_sizes(&mut level_sizes, 0);
        WaStats {
            path_count: m,
            l_height,
            top_size,
            bottom_size,
            top_leaves,
            leaf_count_threshold: threshold,
            level_sizes,
        }
    }

    pub fn audit(&self) -> Result<(), String> {
        self.wa_left.audit()?;
        self.wa_right.audit()
    }
}
