//! Random access, substring extraction and approximate pattern matching on
//! grammar-compressed strings, without decompressing them.
//!
//! A string is represented as a straight-line program: a context-free
//! grammar where every rule derives either one terminal or the
//! concatenation of two earlier rules. Queries run over a heavy path
//! decomposition of the grammar whose per-path size sequences sit behind
//! interval-biased search trees, so the predecessor work telescopes to
//! O(log N) per access. Substrings decode with two such searches plus
//! output-linear work, and approximate matching traverses the grammar once,
//! matching a pattern against constant-size boundary windows.

pub mod approx;
pub mod engine;
pub mod format;
pub mod generate;
pub mod grammar;
pub mod heavy_path;
pub mod ibst;
pub mod repair;
pub mod rmq;
pub mod substring;
pub mod verify;
pub mod weighted_ancestor;

pub use approx::{boundary_window, search, sellers_match, Matcher, SellersMatcher};
pub use engine::{Cost, Engine, EngineKind, Trace};
pub use format::{parse_slp, serialize_slp};
pub use generate::{doubling_chain, random_slp, skewed_huge, GenMode};
pub use grammar::{Rule, RuleId, Slp, SlpError};
pub use repair::{build_grammar, decode_input, encode_output};
pub use substring::{extract, lca_of_paths};
