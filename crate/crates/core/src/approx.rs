//! Compressed approximate string matching: one bottom-up pass over the
//! grammar, a boundary window per pair rule decoded through the substring
//! machinery, and a pluggable matcher for the flat cases.

use thiserror::Error;

use crate::engine::{Cost, Engine};
use crate::grammar::{Rule, RuleId};
use crate::substring::{decode_node_range, ExtractStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("pattern must not be empty")]
    EmptyPattern,
    #[error("error threshold {k} must be smaller than the pattern length {m}")]
    ThresholdTooLarge { k: usize, m: usize },
}

/// An uncompressed approximate matcher: all 0-based end positions of
/// substrings of `text` within edit distance `k` of `pattern`, strictly
/// increasing.
pub trait Matcher {
    fn find_ends(&self, pattern: &[char], text: &[char], k: usize) -> Vec<usize>;
    fn name(&self) -> &'static str;
}

/// Column-rolling dynamic programming over edit distance: O(|T| |P|) time
/// and O(|P|) working space.
#[derive(Debug, Default, Clone, Copy)]
pub struct SellersMatcher;

impl Matcher for SellersMatcher {
    fn find_ends(&self, pattern: &[char], text: &[char], k: usize) -> Vec<usize> {
        sellers_match(pattern, text, k)
    }

    fn name(&self) -> &'static str {
        "sellers"
    }
}

/// See `SellersMatcher`.
pub fn sellers_match(pattern: &[char], text: &[char], k: usize) -> Vec<usize> {
    let m = pattern.len();
    debug_assert!(m >= 1 && k < m);
    // col[i] = edit distance between pattern[..i] and the cheapest suffix
    // of text[..j] as columns sweep left to right; row 0 stays 0 so a
    // match may start anywhere.
    let mut col: Vec<usize> = (0..=m).collect();
    let mut next = vec![0usize; m + 1];
    let mut out = Vec::new();
    for (j, &tc) in text.iter().enumerate() {
        next[0] = 0;
        for i in 1..=m {
            let sub = col[i - 1] + usize::from(pattern[i - 1] != tc);
            let del = col[i] + 1;
            let ins = next[i - 1] + 1;
            next[i] = sub.min(del).min(ins);
        }
        if next[m] <= k {
            out.push(j);
        }
        std::mem::swap(&mut col, &mut next);
    }
    out
}

/// Occurrence lists per grammar node: the window hits owned by the node
/// plus shared references to the children lists.
#[derive(Debug, Default, Clone)]
struct NodeOcc {
    any: bool,
    /// End positions within S(v) contributed by this node alone (leaf
    /// matches, or window matches not already present in a child).
    own: Vec<u64>,
}

/// Work and memory accounting for one search.
#[derive(Debug, Default, Clone, Copy)]
pub struct SearchStats {
    pub nodes: u64,
    pub window_chars: u64,
    pub max_window: u64,
    /// Total end positions materialized across all nodes.
    pub sum_occ_local: u64,
    pub occ: u64,
    pub cost: Cost,
}

/// The boundary window of a pair rule: the last min(|left|, m + k)
/// characters of the left child followed by the first min(|right|, m + k)
/// characters of the right child, plus its 0-based offset within S(v).
pub fn boundary_window(e: &Engine, v: RuleId, m: usize, k: usize) -> (Vec<char>, u64) {
    let Rule::Pair(l, r) = e.slp().rule(v) else {
        panic!("boundary windows are defined for pair rules");
    };
    let span = (m + k) as u64;
    let left_len = e.slp().size(l);
    let right_len = e.slp().size(r);
    let t_l = left_len.min(span);
    let t_r = right_len.min(span);
    let mut stats = ExtractStats::default();
    let mut out = decode_node_range(e, l, left_len - t_l + 1, left_len, &mut stats);
    out.extend(decode_node_range(e, r, 1, t_r, &mut stats));
    (out, left_len - t_l)
}

/// Finds all 0-based end positions in S of substrings within edit
/// distance `k` of `pattern`, without expanding S.
pub fn search(
    e: &Engine,
    pattern: &[char],
    k: usize,
    matcher: &dyn Matcher,
) -> Result<(Vec<u64>, SearchStats), ApproxError> {
    search_impl(e, pattern, k, matcher, true)
}

fn search_impl(
    e: &Engine,
    pattern: &[char],
    k: usize,
    matcher: &dyn Matcher,
    use_window: bool,
) -> Result<(Vec<u64>, SearchStats), ApproxError> {
    let m = pattern.len();
    if m == 0 {
        return Err(ApproxError::EmptyPattern);
    }
    if k >= m {
        return Err(ApproxError::ThresholdTooLarge { k, m });
    }
    let slp = e.slp();
    let n = slp.rule_count();
    let mut stats = SearchStats::default();
    let mut occ: Vec<NodeOcc> = Vec::with_capacity(n);

    for idx in 0..n {
        stats.nodes += 1;
        let v = RuleId(idx as u32);
        let node = match slp.rule(v) {
            Rule::Terminal(ch) => {
                let own: Vec<u64> = checked_ends(matcher, pattern, &[ch], k)
                    .into_iter()
                    .map(|x| x as u64)
                    .collect();
                NodeOcc {
                    any: !own.is_empty(),
                    own,
                }
            }
            Rule::Pair(l, r) => {
                let split = slp.size(l);
                let mut own = Vec::new();
                if use_window {
                    let (window, offset) = boundary_window(e, v, m, k);
                    stats.window_chars += window.len() as u64;
                    stats.max_window = stats.max_window.max(window.len() as u64);
                    for end in checked_ends(matcher, pattern, &window, k) {
                        let g = offset + end as u64;
                        // Ends inside the left part are always matches of
                        // the left child; ends in the right part may
                        // duplicate a right-child match.
                        if g >= split && !contains(slp, &occ, r, g - split) {
                            own.push(g);
                        }
                    }
                }
                NodeOcc {
                    any: occ[l.idx()].any || occ[r.idx()].any || !own.is_empty(),
                    own,
                }
            }
        };
        stats.sum_occ_local += node.own.len() as u64;
        occ.push(node);
    }

    let out = flatten(slp, &occ, slp.root());
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "merge must be strictly increasing");
    stats.occ = out.len() as u64;
    Ok((out, stats))
}

/// Whether `pos` is an occurrence end within S(v), resolved through the
/// shared child lists.
fn contains(slp: &crate::grammar::Slp, occ: &[NodeOcc], v: RuleId, pos: u64) -> bool {
    let mut v = v;
    let mut pos = pos;
    loop {
        let node = &occ[v.idx()];
        if !node.any {
            return false;
        }
        if node.own.binary_search(&pos).is_ok() {
            return true;
        }
        match slp.rule(v) {
            Rule::Terminal(_) => return false,
            Rule::Pair(l, r) => {
                let split = slp.size(l);
                if pos < split {
                    v = l;
                } else {
                    v = r;
                    pos -= split;
                }
            }
        }
    }
}

/// Materializes the root's occurrence list in string order by walking the
/// parse tree, pruning subtrees with no matches anywhere. Window hits of a
/// node are merged into its right part, whose start offset is remembered
/// on a mark stack (frames pair up LIFO).
fn flatten(slp: &crate::grammar::Slp, occ: &[NodeOcc], root: RuleId) -> Vec<u64> {
    enum Frame {
        Enter(RuleId, u64),
        Mark,
        Merge(RuleId, u64),
    }
    let mut out: Vec<u64> = Vec::new();
    let mut marks: Vec<usize> = Vec::new();
    let mut stack = vec![Frame::Enter(root, 0)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(v, base) => {
                let node = &occ[v.idx()];
                if !node.any {
                    continue;
                }
                match slp.rule(v) {
                    Rule::Terminal(_) => out.extend(node.own.iter().map(|&e| e + base)),
                    Rule::Pair(l, r) => {
                        let split = slp.size(l);
                        if node.own.is_empty() {
                            stack.push(Frame::Enter(r, base + split));
                            stack.push(Frame::Enter(l, base));
                        } else {
                            stack.push(Frame::Merge(v, base));
                            stack.push(Frame::Enter(r, base + split));
                            stack.push(Frame::Mark);
                            stack.push(Frame::Enter(l, base));
                        }
                    }
                }
            }
            Frame::Mark => marks.push(out.len()),
            Frame::Merge(v, base) => {
                let right_start = marks.pop().expect("marks pair with merges");
                let tail: Vec<u64> = out.split_off(right_start);
                let mut wi = occ[v.idx()].own.iter().map(|&e| e + base).peekable();
                let mut ti = tail.into_iter().peekable();
                loop {
                    match (wi.peek(), ti.peek()) {
                        (Some(&w), Some(&t)) => {
                            debug_assert_ne!(w, t, "window hits were deduplicated");
                            if w < t {
                                out.push(w);
                                wi.next();
                            } else {
                                out.push(t);
                                ti.next();
                            }
                        }
                        (Some(_), None) => {
                            out.push(wi.next().unwrap());
                        }
                        (None, Some(_)) => {
                            out.push(ti.next().unwrap());
                        }
                        (None, None) => break,
                    }
                }
            }
        }
    }
    out
}

/// Runs the matcher and, in debug builds, checks its output contract.
fn checked_ends(matcher: &dyn Matcher, pattern: &[char], text: &[char], k: usize) -> Vec<usize> {
    let ends = matcher.find_ends(pattern, text, k);
    debug_assert!(
        ends.windows(2).all(|w| w[0] < w[1]),
        "{} must produce strictly increasing ends",
        matcher.name()
    );
    debug_assert!(ends.iter().all(|&e| e < text.len()));
    ends
}
