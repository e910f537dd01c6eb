//! Straight-line programs: the grammar model, validation and the
//! brute-force expansion oracle everything else is checked against.

use std::fmt;

use thiserror::Error;

/// Default cap on the expansion oracle, in characters.
pub const DEFAULT_ORACLE_CAP: u64 = 1 << 24;

/// Index of a grammar rule. Rules are densely numbered `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u32);

impl RuleId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single grammar rule: either one terminal or the concatenation of two
/// earlier rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Terminal(char),
    Pair(RuleId, RuleId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlpError {
    #[error("grammar has no rules")]
    Empty,
    #[error("rule {rule}: forward reference to rule {child}")]
    ForwardReference { rule: u32, child: u32 },
    #[error("expansion length overflows 64 bits at rule {rule}")]
    SizeOverflow { rule: u32 },
    #[error("expansion of {len} characters exceeds oracle cap {cap}")]
    OracleCapExceeded { len: u64, cap: u64 },
    #[error("index {index} out of range for string of length {len}")]
    IndexOutOfRange { index: u64, len: u64 },
}

/// A validated straight-line program.
///
/// Rules are topologically ordered (children strictly precede parents),
/// the root is the last rule, and per-rule expansion lengths are
/// precomputed. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<Rule>,
    sizes: Vec<u64>,
}

impl Slp {
    /// Validates `rules` and computes expansion sizes. The last rule is the
    /// root.
    pub fn new(rules: Vec<Rule>) -> Result<Self, SlpError> {
        if rules.is_empty() {
            return Err(SlpError::Empty);
        }
        let sizes = compute_sizes(&rules)?;
        Ok(Slp { rules, sizes })
    }

    /// Builds an `Slp` without revalidating; only for tests that inject
    /// deliberately inconsistent data.
    #[doc(hidden)]
    pub fn from_parts_unchecked(rules: Vec<Rule>, sizes: Vec<u64>) -> Self {
        Slp { rules, sizes }
    }

    #[inline]
    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    #[inline]
    pub fn root(&self) -> RuleId {
        RuleId((self.rules.len() - 1) as u32)
    }

    #[inline]
    pub fn rule(&self, v: RuleId) -> Rule {
        self.rules[v.idx()]
    }

    #[inline]
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Expansion length of `v`.
    #[inline]
    pub fn size(&self, v: RuleId) -> u64 {
        self.sizes[v.idx()]
    }

    #[inline]
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Length of the represented string.
    #[inline]
    pub fn text_len(&self) -> u64 {
        self.sizes[self.rules.len() - 1]
    }

    /// Expands the whole string, refusing to materialize more than `cap`
    /// characters.
    pub fn expand_with_cap(&self, cap: u64) -> Result<String, SlpError> {
        self.expand_node_with_cap(self.root(), cap)
    }

    /// Expands with the default oracle cap.
    pub fn expand(&self) -> Result<String, SlpError> {
        self.expand_with_cap(DEFAULT_ORACLE_CAP)
    }

    /// Expands the string derived from `v`.
    pub fn expand_node(&self, v: RuleId) -> Result<String, SlpError> {
        self.expand_node_with_cap(v, DEFAULT_ORACLE_CAP)
    }

    pub fn expand_node_with_cap(&self, v: RuleId, cap: u64) -> Result<String, SlpError> {
        let len = self.size(v);
        if len > cap {
            return Err(SlpError::OracleCapExceeded { len, cap });
        }
        let mut out = String::with_capacity(len as usize);
        // Explicit stack; parse trees can be as deep as the rule count.
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            match self.rule(u) {
                Rule::Terminal(ch) => out.push(ch),
                Rule::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        debug_assert_eq!(out.chars().count() as u64, len);
        Ok(out)
    }

    /// Random access by walking the parse tree top-down using stored sizes.
    /// Costs one rule visit per level of the parse tree.
    pub fn naive_access(&self, i: u64) -> Result<char, SlpError> {
        let n = self.text_len();
        if i >= n {
            return Err(SlpError::IndexOutOfRange { index: i, len: n });
        }
        let mut v = self.root();
        let mut i = i;
        loop {
            match self.rule(v) {
                Rule::Terminal(ch) => {
                    debug_assert_eq!(i, 0);
                    return Ok(ch);
                }
                Rule::Pair(l, r) => {
                    let left_len = self.size(l);
                    if i < left_len {
                        v = l;
                    } else {
                        i -= left_len;
                        v = r;
                    }
                }
            }
        }
    }

    /// Rule visits performed by `naive_access` for index `i`.
    pub fn naive_access_cost(&self, i: u64) -> Result<u64, SlpError> {
        let n = self.text_len();
        if i >= n {
            return Err(SlpError::IndexOutOfRange { index: i, len: n });
        }
        let mut v = self.root();
        let mut i = i;
        let mut visits = 1u64;
        loop {
            match self.rule(v) {
                Rule::Terminal(_) => return Ok(visits),
                Rule::Pair(l, r) => {
                    let left_len = self.size(l);
                    if i < left_len {
                        v = l;
                    } else {
                        i -= left_len;
                        v = r;
                    }
                    visits += 1;
                }
            }
        }
    }

    /// Height of the parse tree (edges on the longest root-to-leaf path).
    pub fn parse_tree_height(&self) -> u64 {
        let mut h = vec![0u64; self.rules.len()];
        for (i, rule) in self.rules.iter().enumerate() {
            if let Rule::Pair(l, r) = rule {
                h[i] = 1 + h[l.idx()].max(h[r.idx()]);
            }
        }
        h[self.rules.len() - 1]
    }
}

/// Computes per-rule expansion lengths in one bottom-up pass, checking the
/// topological order along the way.
pub fn compute_sizes(rules: &[Rule]) -> Result<Vec<u64>, SlpError> {
    let mut sizes: Vec<u64> = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let size = match *rule {
            Rule::Terminal(_) => 1,
            Rule::Pair(l, r) => {
                if l.idx() >= i {
                    return Err(SlpError::ForwardReference {
                        rule: i as u32,
                        child: l.0,
                    });
                }
                if r.idx() >= i {
                    return Err(SlpError::ForwardReference {
                        rule: i as u32,
                        child: r.0,
                    });
                }
                sizes[l.idx()]
                    .checked_add(sizes[r.idx()])
                    .ok_or(SlpError::SizeOverflow { rule: i as u32 })?
            }
        };
        sizes.push(size);
    }
    Ok(sizes)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Six-rule grammar generating "abaababa".
    pub fn abaababa() -> Slp {
        let rules = vec![
            Rule::Terminal('a'),
            Rule::Terminal('b'),
            Rule::Pair(RuleId(0), RuleId(1)),
            Rule::Pair(RuleId(2), RuleId(0)),
            Rule::Pair(RuleId(3), RuleId(2)),
            Rule::Pair(RuleId(4), RuleId(3)),
        ];
        Slp::new(rules).unwrap()
    }

    /// Seven-rule grammar generating "ababaab" whose root heavy path
    /// suffix has left sequence (1,4,4,5) and right sequence (1,1,3,3)
    /// once rule 4's tie is broken toward the right child.
    pub fn fig2() -> Slp {
        let rules = vec![
            Rule::Terminal('a'),
            Rule::Terminal('b'),
            Rule::Pair(RuleId(0), RuleId(1)),
            Rule::Pair(RuleId(2), RuleId(0)),
            Rule::Pair(RuleId(1), RuleId(0)),
            Rule::Pair(RuleId(4), RuleId(2)),
            Rule::Pair(RuleId(3), RuleId(5)),
        ];
        Slp::new(rules).unwrap()
    }

    /// X_i -> X_{i-1} X_{i-1} doubling chain of the given depth over 'a'.
    pub fn doubling_chain(depth: u32) -> Slp {
        let mut rules = vec![Rule::Terminal('a')];
        for i in 1..=depth {
            rules.push(Rule::Pair(RuleId(i - 1), RuleId(i - 1)));
        }
        Slp::new(rules).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn sizes_of_abaababa() {
        let slp = abaababa();
        assert_eq!(slp.sizes(), &[1, 1, 2, 3, 5, 8]);
        assert_eq!(slp.text_len(), 8);
    }

    #[test]
    fn expand_matches_fixture_string() {
        let slp = abaababa();
        assert_eq!(slp.expand().unwrap(), "abaababa");
        assert_eq!(slp.expand_node(RuleId(2)).unwrap(), "ab");
        assert_eq!(slp.expand_node(RuleId(3)).unwrap(), "aba");
        assert_eq!(slp.expand_node(RuleId(4)).unwrap(), "abaab");
        assert_eq!(slp.expand_node(RuleId(0)).unwrap(), "a");
    }

    #[test]
    fn terminal_only_grammar() {
        let slp = Slp::new(vec![Rule::Terminal('a')]).unwrap();
        assert_eq!(slp.sizes(), &[1]);
        assert_eq!(slp.text_len(), 1);
        assert_eq!(slp.expand().unwrap(), "a");
    }

    #[test]
    fn doubling_chain_sizes() {
        let slp = doubling_chain(40);
        assert_eq!(slp.text_len(), 1 << 40);
        let err = slp.expand().unwrap_err();
        assert!(matches!(err, SlpError::OracleCapExceeded { .. }));
    }

    #[test]
    fn size_overflow_detected() {
        let mut rules = vec![Rule::Terminal('a')];
        for i in 1..=64u32 {
            rules.push(Rule::Pair(RuleId(i - 1), RuleId(i - 1)));
        }
        let err = Slp::new(rules).unwrap_err();
        assert!(matches!(err, SlpError::SizeOverflow { .. }));
    }

    #[test]
    fn forward_reference_rejected() {
        let rules = vec![
            Rule::Terminal('a'),
            Rule::Terminal('b'),
            Rule::Pair(RuleId(0), RuleId(1)),
            Rule::Pair(RuleId(4), RuleId(0)),
            Rule::Pair(RuleId(3), RuleId(2)),
        ];
        let err = Slp::new(rules).unwrap_err();
        assert_eq!(
            err,
            SlpError::ForwardReference { rule: 3, child: 4 }
        );
    }

    #[test]
    fn naive_access_matches_expansion() {
        let slp = abaababa();
        let text: Vec<char> = slp.expand().unwrap().chars().collect();
        for i in 0..slp.text_len() {
            assert_eq!(slp.naive_access(i).unwrap(), text[i as usize]);
        }
        assert_eq!(slp.naive_access(0).unwrap(), 'a');
        assert_eq!(slp.naive_access(4).unwrap(), 'b');
        assert!(matches!(
            slp.naive_access(8),
            Err(SlpError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn naive_access_cost_on_chain() {
        let slp = doubling_chain(10);
        assert_eq!(slp.parse_tree_height(), 10);
        assert_eq!(slp.naive_access_cost(0).unwrap(), 11);
    }
}
