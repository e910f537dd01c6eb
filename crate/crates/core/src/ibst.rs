//! Interval-biased search trees: a predecessor structure over strictly
//! increasing boundaries where a query answered by an interval of length x
//! out of a universe of extent W visits at most floor(log2(W/x)) + 1 nodes.

use std::fmt::Write as _;

use thiserror::Error;

use crate::rmq::Rmq;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IbstError {
    #[error("need at least two boundaries")]
    TooFewBoundaries,
    #[error("boundaries must be strictly increasing at position {at}")]
    NotIncreasing { at: usize },
}

/// Visit accounting shared by all predecessor queries.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct QueryCounters {
    /// Tree nodes inspected across all queries.
    pub pred_visits: u64,
    /// Queries whose start hint was invalid and fell back to the root.
    pub fallbacks: u64,
}

#[derive(Debug, Clone)]
struct Node {
    interval: u32,
    left: u32,
    right: u32,
    lca_with_last: u32,
}

/// See the module docs. Boundaries b_0 < b_1 < ... < b_t define intervals
/// [b_i, b_{i+1}) for i in 0..t; queries are half-open with p = b_t mapping
/// to the last interval.
#[derive(Debug, Clone)]
pub struct IntervalBiasedTree {
    bounds: Vec<u64>,
    nodes: Vec<Node>,
    root: u32,
    node_of_interval: Vec<u32>,
    build_steps: u64,
}

struct Builder<'a> {
    bounds: &'a [u64],
    rmq: Rmq,
    nodes: Vec<Node>,
    node_of_interval: Vec<u32>,
    steps: u64,
}

impl<'a> Builder<'a> {
    /// Builds the subtree over intervals j..=k and returns its root.
    fn build(&mut self, j: usize, k: usize) -> u32 {
        let i = self.pick_root(j, k);
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node {
            interval: i as u32,
            left: NONE,
            right: NONE,
            lca_with_last: NONE,
        });
        self.node_of_interval[i] = idx;
        if i > j {
            let l = self.build(j, i - 1);
            self.nodes[idx as usize].left = l;
        }
        if i < k {
            let r = self.build(i + 1, k);
            self.nodes[idx as usize].right = r;
        }
        idx
    }

    /// Chooses the interval stored at the root of the subtree over
    /// intervals j..=k: the unique interval longer than half the extent if
    /// it exists, otherwise the split making both sides at most half.
    fn pick_root(&mut self, j: usize, k: usize) -> usize {
        if j == k {
            return j;
        }
        let b = self.bounds;
        let extent = b[k + 1] - b[j];
        let widest = self.rmq.query(j, k);
        if 2 * (self.rmq.value(widest) as u128) > extent as u128 {
            return widest;
        }
        // Largest i in [j, k] with 2 * (b[i] - b[j]) <= extent; found by a
        // two-sided doubling scan followed by a binary search inside the
        // bracket, so the cost is O(log min(i - j, k - i)).
        let thresh = 2 * (b[j] as u128) + extent as u128;
        let le = |i: usize| 2 * (b[i] as u128) <= thresh;
        self.steps += 1;
        if le(k) {
            return k;
        }
        let mut lo = j;
        let mut hi = k;
        let mut d = 1usize;
        loop {
            let xl = j + d;
            if xl >= hi {
                break;
            }
            self.steps += 1;
            if !le(xl) {
                hi = xl;
                break;
            }
            lo = xl;
            let xr = k - d;
            if xr <= lo {
                break;
            }
            self.steps += 1;
            if le(xr) {
                lo = xr;
                break;
            }
            hi = xr;
            d *= 2;
        }
        while hi - lo > 1 {
            self.steps += 1;
            let m = (lo + hi) / 2;
            if le(m) {
                lo = m;
            } else {
                hi = m;
            }
        }
        lo
    }
}

impl IntervalBiasedTree {
    pub fn build(bounds: Vec<u64>) -> Result<IntervalBiasedTree, IbstError> {
        if bounds.len() < 2 {
            return Err(IbstError::TooFewBoundaries);
        }
        for i in 1..bounds.len() {
            if bounds[i] <= bounds[i - 1] {
                return Err(IbstError::NotIncreasing { at: i });
            }
        }
        let t = bounds.len() - 1;
        let lengths: Vec<u64> = (0..t).map(|i| bounds[i + 1] - bounds[i]).collect();
        let mut builder = Builder {
            bounds: &bounds,
            rmq: Rmq::new(lengths),
            nodes: Vec::with_capacity(t),
            node_of_interval: vec![NONE; t],
            steps: 0,
        };
        let root = builder.build(0, t - 1);
        let Builder {
            mut nodes, steps, node_of_interval, ..
        } = builder;

        // lca_with_last: mark the root-to-last-interval path, then assign
        // every node the deepest marked ancestor-or-self.
        let last_node = node_of_interval[t - 1];
        let mut on_path = vec![false; nodes.len()];
        let mut cur = root;
        loop {
            on_path[cur as usize] = true;
            if cur == last_node {
                break;
            }
            let n = &nodes[cur as usize];
            cur = if (t as u32 - 1) > n.interval {
                n.right
            } else {
                n.left
            };
        }
        let mut stack = vec![(root, root)];
        while let Some((idx, mut lca)) = stack.pop() {
            if on_path[idx as usize] {
                lca = idx;
            }
            nodes[idx as usize].lca_with_last = lca;
            let n = &nodes[idx as usize];
            if n.left != NONE {
                stack.push((n.left, lca));
            }
            if n.right != NONE {
                stack.push((n.right, lca));
            }
        }

        Ok(IntervalBiasedTree {
            bounds,
            nodes,
            root,
            node_of_interval,
            build_steps: steps,
        })
    }

    #[inline]
    pub fn interval_count(&self) -> usize {
        self.bounds.len() - 1
    }

    #[inline]
    pub fn universe(&self) -> (u64, u64) {
        (self.bounds[0], *self.bounds.last().unwrap())
    }

    /// Doubling/binary probes spent during construction.
    #[inline]
    pub fn build_steps(&self) -> u64 {
        self.build_steps
    }

    #[inline]
    pub fn boundary(&self, i: usize) -> u64 {
        self.bounds[i]
    }

    /// The unique interval index i with b_i <= p < b_{i+1} (p = b_t maps to
    /// the last interval), plus its left boundary.
    pub fn predecessor(&self, p: u64, ctr: &mut QueryCounters) -> (usize, u64) {
        self.descend(self.root, p, ctr)
    }

    /// Same as `predecessor`, starting from the lowest common ancestor of
    /// interval `k` and the last interval. Requires p >= b_k; a violation
    /// falls back to a full query and is flagged in the counters.
    pub fn predecessor_from(&self, k: usize, p: u64, ctr: &mut QueryCounters) -> (usize, u64) {
        if p < self.bounds[k] {
            ctr.fallbacks += 1;
            return self.descend(self.root, p, ctr);
        }
        let start = self.nodes[self.node_of_interval[k] as usize].lca_with_last;
        self.descend(start, p, ctr)
    }

    fn descend(&self, start: u32, p: u64, ctr: &mut QueryCounters) -> (usize, u64) {
        let (lo0, hi0) = self.universe();
        assert!(p >= lo0 && p <= hi0, "predecessor query {p} outside [{lo0}, {hi0}]");
        let last = (self.interval_count() - 1) as u32;
        let mut cur = start;
        loop {
            ctr.pred_visits += 1;
            let n = &self.nodes[cur as usize];
            let lo = self.bounds[n.interval as usize];
            let hi = self.bounds[n.interval as usize + 1];
            if p < lo {
                cur = n.left;
            } else if p >= hi && n.interval != last {
                cur = n.right;
            } else {
                return (n.interval as usize, lo);
            }
        }
    }

    /// (interval index, depth) pairs with the root at depth 1.
    pub fn depths(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, 1u32)];
        while let Some((idx, d)) = stack.pop() {
            let n = &self.nodes[idx as usize];
            out.push((n.interval as usize, d));
            if n.left != NONE {
                stack.push((n.left, d + 1));
            }
            if n.right != NONE {
                stack.push((n.right, d + 1));
            }
        }
        out
    }

    /// Checks the depth bound for every node: an interval of length x is
    /// stored at depth at most floor(log2(W/x)) + 1.
    pub fn audit_depths(&self) -> Result<(), String> {
        let (lo, hi) = self.universe();
        let w = hi - lo;
        for (iv, depth) in self.depths() {
            let x = self.bounds[iv + 1] - self.bounds[iv];
            let bound = (w / x).ilog2() + 1;
            if depth > bound {
                return Err(format!(
                    "interval {iv} (length {x}) at depth {depth} > {bound}"
                ));
            }
        }
        Ok(())
    }

    /// GraphViz rendering for the debug dump.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name} {{");
        let _ = writeln!(out, "  node [shape=box];");
        for (idx, n) in self.nodes.iter().enumerate() {
            let lo = self.bounds[n.interval as usize];
            let hi = self.bounds[n.interval as usize + 1];
            let _ = writeln!(out, "  n{idx} [label=\"[{lo},{hi})\"];");
            if n.left != NONE {
                let _ = writeln!(out, "  n{idx} -> n{};", n.left);
            }
            if n.right != NONE {
                let _ = writeln!(out, "  n{idx} -> n{};", n.right);
            }
        }
        let _ = writeln!(out, "}}");
        out
    }
}
