//! End-to-end random access: the three-case search along heavy path
//! suffixes, driven by weighted ancestor queries, with interchangeable
//! backends and per-query cost counters.

use serde::Serialize;

use crate::grammar::{Rule, RuleId, Slp, SlpError};
use crate::heavy_path::{
    build_forest, decompose, suffix_meta, HForest, HeavyInfo, HeavySide, SuffixMeta,
};
use crate::ibst::QueryCounters;
use crate::substring::{build_light_links, LightLinks};
use crate::weighted_ancestor::{HPathIndex, NoAncestor, WaHit, WaIndex};

/// Which random access machinery backs the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    /// Top-down size-guided walk, one rule visit per parse tree level.
    Baseline,
    /// Heavy path search with binary searches over the path chains.
    LinearSpace,
    /// Heavy path search with interval-biased search trees.
    Biased,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Baseline => "baseline",
            EngineKind::LinearSpace => "linear",
            EngineKind::Biased => "biased",
        }
    }
}

#[derive(Debug)]
enum Backend {
    Baseline,
    Linear(HPathIndex),
    Biased(WaIndex),
}

/// Per-query work counters.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cost {
    pub rule_visits: u64,
    pub pred_visits: u64,
    pub hp_switches: u64,
    pub fallbacks: u64,
}

impl Cost {
    fn absorb(&mut self, q: QueryCounters) {
        self.pred_visits += q.pred_visits;
        self.fallbacks += q.fallbacks;
    }

    pub fn add(&mut self, other: &Cost) {
        self.rule_visits += other.rule_visits;
        self.pred_visits += other.pred_visits;
        self.hp_switches += other.hp_switches;
        self.fallbacks += other.fallbacks;
    }
}

/// One step of the top-down search from a heavy path suffix head.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStep {
    /// The position is the suffix terminal; the stored character answers.
    Hit,
    /// The position lives in the light child `entered` of suffix node
    /// `at`; continue there at 1-based position `rebased`.
    Descend {
        at: RuleId,
        side: HeavySide,
        entered: RuleId,
        rebased: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub head: RuleId,
    pub action: SearchStep,
}

/// The descent record of one access.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn descend_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.action, SearchStep::Descend { .. }))
            .count()
    }
}

/// An immutable random access engine over a grammar.
#[derive(Debug)]
pub struct Engine {
    slp: Slp,
    info: HeavyInfo,
    forest: HForest,
    meta: SuffixMeta,
    links: LightLinks,
    kind: EngineKind,
    levels: u8,
    backend: Backend,
    build_work: u64,
}

impl Engine {
    pub fn build(slp: Slp, kind: EngineKind, levels: u8) -> Engine {
        let info = decompose(&slp);
        Self::build_with_heavy(slp, info, kind, levels)
    }

    /// Builds with explicit heavy-child choices; lets callers break size
    /// ties the other way.
    pub fn build_with_heavy(slp: Slp, info: HeavyInfo, kind: EngineKind, levels: u8) -> Engine {
        let forest = build_forest(&slp, &info);
        let meta = suffix_meta(&slp, &forest);
        let links = build_light_links(&slp, &info, &forest);
        let backend = match kind {
            EngineKind::Baseline => Backend::Baseline,
            EngineKind::LinearSpace => Backend::Linear(HPathIndex::build(&slp, &forest, false)),
            EngineKind::Biased => Backend::Biased(WaIndex::build(&slp, &forest, levels)),
        };
        let build_work = match &backend {
            Backend::Baseline => slp.rule_count() as u64,
            Backend::Linear(hp) => hp.build_work,
            Backend::Biased(wa) => wa.build_work,
        };
        Engine {
            slp,
            info,
            forest,
            meta,
            links,
            kind,
            levels,
            backend,
            build_work,
        }
    }

    pub fn slp(&self) -> &Slp {
        &self.slp
    }

    pub fn info(&self) -> &HeavyInfo {
        &self.info
    }

    pub fn forest(&self) -> &HForest {
        &self.forest
    }

    pub fn meta(&self) -> &SuffixMeta {
        &self.meta
    }

    pub fn links(&self) -> &LightLinks {
        &self.links
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn text_len(&self) -> u64 {
        self.slp.text_len()
    }

    pub fn build_work(&self) -> u64 {
        self.build_work
    }

    pub fn wa_index(&self) -> Option<&WaIndex> {
        match &self.backend {
            Backend::Biased(wa) => Some(wa),
            _ => None,
        }
    }

    /// Weighted ancestor query against the engine's index.
    ///
    /// Panics for the baseline engine, which has none.
    pub fn wa_query(
        &self,
        u: RuleId,
        budget: u64,
        side: HeavySide,
        cost: &mut Cost,
    ) -> Result<WaHit, NoAncestor> {
        let mut ctr = QueryCounters::default();
        let out = match &self.backend {
            Backend::Baseline => panic!("baseline engine has no weighted ancestor index"),
            Backend::Linear(hp) => {
                hp.wa_query_bsearch(&self.forest, &self.meta, u, budget, side, &mut ctr)
            }
            Backend::Biased(wa) => wa.wa_query(&self.forest, &self.meta, u, budget, side, &mut ctr),
        };
        cost.absorb(ctr);
        out
    }

    /// One search step from suffix head `v` for 1-based position `p`.
    pub fn search_step(&self, v: RuleId, p: u64, cost: &mut Cost) -> SearchStep {
        debug_assert!(p >= 1 && p <= self.slp.size(v));
        match &self.backend {
            Backend::Baseline => self.baseline_step(v, p, cost),
            _ => self.indexed_step(v, p, cost),
        }
    }

    fn baseline_step(&self, v: RuleId, p: u64, cost: &mut Cost) -> SearchStep {
        let mut cur = v;
        let mut q = p;
        loop {
            cost.rule_visits += 1;
            match self.slp.rule(cur) {
                Rule::Terminal(_) => {
                    debug_assert_eq!(q, 1);
                    return SearchStep::Hit;
                }
                Rule::Pair(l, r) => {
                    let left_len = self.slp.size(l);
                    let heavy_left = self.info.heavy[cur.idx()] == Some(HeavySide::Left);
                    if q <= left_len {
                        if heavy_left {
                            cur = l;
                        } else {
                            return SearchStep::Descend {
                                at: cur,
                                side: HeavySide::Left,
                                entered: l,
                                rebased: q,
                            };
                        }
                    } else if heavy_left {
                        return SearchStep::Descend {
                            at: cur,
                            side: HeavySide::Right,
                            entered: r,
                            rebased: q - left_len,
                        };
                    } else {
                        q -= left_len;
                        cur = r;
                    }
                }
            }
        }
    }

    fn indexed_step(&self, v: RuleId, p: u64, cost: &mut Cost) -> SearchStep {
        cost.rule_visits += 1;
        let z = self.meta.z[v.idx()];
        if p == z {
            return SearchStep::Hit;
        }
        if p < z {
            let hit = self
                .wa_query(v, p, HeavySide::Left, cost)
                .expect("p < z keeps the budget within the left mass");
            let (entered, side) = self
                .info
                .light_child(&self.slp, hit.node)
                .expect("the located node has a light child");
            debug_assert_eq!(side, HeavySide::Left);
            // Position within the entered subtree: p - l_i + 1.
            let rebased = p - hit.cum;
            debug_assert!(rebased >= 1 && rebased <= self.slp.size(entered));
            SearchStep::Descend {
                at: hit.node,
                side,
                entered,
                rebased,
            }
        } else {
            let size = self.slp.size(v);
            let budget = size - p + 1;
            let hit = self
                .wa_query(v, budget, HeavySide::Right, cost)
                .expect("p > z keeps the budget within the right mass");
            let (entered, side) = self
                .info
                .light_child(&self.slp, hit.node)
                .expect("the located node has a light child");
            debug_assert_eq!(side, HeavySide::Right);
            let su = self.slp.size(entered);
            // Interval bookkeeping: the entered block ends r_i - 1 = cum
            // characters before the end of S(v).
            let rebased = p - (size - hit.cum - su);
            // Cross-check against the closed form over the raw right
            // sequence, r_k - r_{i+1} characters after z.
            debug_assert_eq!(
                rebased as i128,
                p as i128
                    - (z as i128
                        + ((size - z + 1) as i128 - (hit.cum + su + 1) as i128))
            );
            debug_assert!(rebased >= 1 && rebased <= su);
            SearchStep::Descend {
                at: hit.node,
                side,
                entered,
                rebased,
            }
        }
    }

    pub fn access(&self, i: u64) -> Result<char, SlpError> {
        Ok(self.access_traced(i)?.0)
    }

    pub fn access_with_cost(&self, i: u64) -> Result<(char, Cost), SlpError> {
        let (ch, _, cost) = self.access_traced(i)?;
        Ok((ch, cost))
    }

    /// Full access: character, descent trace and cost counters.
    pub fn access_traced(&self, i: u64) -> Result<(char, Trace, Cost), SlpError> {
        let n = self.text_len();
        if i >= n {
            return Err(SlpError::IndexOutOfRange { index: i, len: n });
        }
        let mut cost = Cost::default();
        let mut trace = Trace::default();
        let mut v = self.slp.root();
        let mut p = i + 1;
        loop {
            let step = self.search_step(v, p, &mut cost);
            trace.steps.push(TraceStep {
                head: v,
                action: step,
            });
            match step {
                SearchStep::Hit => {
                    return Ok((self.meta.ch[v.idx()], trace, cost));
                }
                SearchStep::Descend {
                    entered, rebased, ..
                } => {
                    cost.hp_switches += 1;
                    v = entered;
                    p = rebased;
                }
            }
        }
    }
}
