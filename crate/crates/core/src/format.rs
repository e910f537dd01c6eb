//! The SLPv1 text format.
//!
//! ```text
//! SLPv1 <n> <root-id>
//! <id> T <codepoint-decimal>
//! <id> P <left-id> <right-id>
//! ```
//!
//! One item per line, ids ascending from 0, `#` starts a comment.

use thiserror::Error;

use crate::grammar::{Rule, RuleId, Slp, SlpError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: malformed: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: expected rule id {expected}, found {found}")]
    IdOutOfOrder {
        line: usize,
        expected: u32,
        found: u32,
    },
    #[error("line {line}: forward reference to rule {child}")]
    ForwardReference { line: usize, child: u32 },
    #[error("line {line}: codepoint {value} is not a unicode scalar")]
    BadCodepoint { line: usize, value: u32 },
    #[error("missing root: header declares root {root} but grammar has {n} rules (root must be the last rule)")]
    MissingRoot { root: u32, n: u32 },
    #[error("header declares {declared} rules, document has {actual}")]
    RuleCountMismatch { declared: u32, actual: u32 },
    #[error("missing header line")]
    MissingHeader,
    #[error(transparent)]
    Grammar(#[from] SlpError),
}

fn malformed(line: usize, detail: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        detail: detail.into(),
    }
}

fn parse_u32(line: usize, tok: &str, what: &str) -> Result<u32, FormatError> {
    tok.parse::<u32>()
        .map_err(|_| malformed(line, format!("bad {what} `{tok}`")))
}

/// Parses an SLPv1 document into a validated grammar.
pub fn parse_slp(text: &str) -> Result<Slp, FormatError> {
    // Strip comments, keep 1-based line numbers for diagnostics.
    let mut items = text.lines().enumerate().filter_map(|(no, raw)| {
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let body = body.trim();
        if body.is_empty() {
            None
        } else {
            Some((no + 1, body))
        }
    });

    let (header_line, header) = items.next().ok_or(FormatError::MissingHeader)?;
    let mut toks = header.split_ascii_whitespace();
    match toks.next() {
        Some("SLPv1") => {}
        _ => return Err(malformed(header_line, "expected `SLPv1 <n> <root-id>`")),
    }
    let n = parse_u32(
        header_line,
        toks.next()
            .ok_or_else(|| malformed(header_line, "missing rule count"))?,
        "rule count",
    )?;
    let root = parse_u32(
        header_line,
        toks.next()
            .ok_or_else(|| malformed(header_line, "missing root id"))?,
        "root id",
    )?;
    if toks.next().is_some() {
        return Err(malformed(header_line, "trailing tokens in header"));
    }
    if n == 0 || root != n - 1 {
        return Err(FormatError::MissingRoot { root, n });
    }

    let mut rules: Vec<Rule> = Vec::new();
    for (line, body) in items {
        let mut toks = body.split_ascii_whitespace();
        let id = parse_u32(line, toks.next().unwrap(), "rule id")?;
        let expected = rules.len() as u32;
        if id != expected {
            return Err(FormatError::IdOutOfOrder {
                line,
                expected,
                found: id,
            });
        }
        let kind = toks
            .next()
            .ok_or_else(|| malformed(line, "missing rule kind"))?;
        let rule = match kind {
            "T" => {
                let cp = parse_u32(
                    line,
                    toks.next()
                        .ok_or_else(|| malformed(line, "missing codepoint"))?,
                    "codepoint",
                )?;
                let ch = char::from_u32(cp)
                    .ok_or(FormatError::BadCodepoint { line, value: cp })?;
                Rule::Terminal(ch)
            }
            "P" => {
                let l = parse_u32(
                    line,
                    toks.next()
                        .ok_or_else(|| malformed(line, "missing left id"))?,
                    "left id",
                )?;
                let r = parse_u32(
                    line,
                    toks.next()
                        .ok_or_else(|| malformed(line, "missing right id"))?,
                    "right id",
                )?;
                if l >= id {
                    return Err(FormatError::ForwardReference { line, child: l });
                }
                if r >= id {
                    return Err(FormatError::ForwardReference { line, child: r });
                }
                Rule::Pair(RuleId(l), RuleId(r))
            }
            other => return Err(malformed(line, format!("unknown rule kind `{other}`"))),
        };
        if toks.next().is_some() {
            return Err(malformed(line, "trailing tokens"));
        }
        rules.push(rule);
    }

    if rules.len() as u32 != n {
        return Err(FormatError::RuleCountMismatch {
            declared: n,
            actual: rules.len() as u32,
        });
    }
    Ok(Slp::new(rules)?)
}

/// Serializes a grammar into the canonical SLPv1 document.
///
/// `parse_slp(serialize_slp(slp))` reproduces an identical grammar and
/// re-serializing reproduces identical bytes.
pub fn serialize_slp(slp: &Slp) -> String {
    let n = slp.rule_count();
    let mut out = String::with_capacity(16 * n);
    out.push_str(&format!("SLPv1 {} {}\n", n, n - 1));
    for (i, rule) in slp.rules().iter().enumerate() {
        match rule {
            Rule::Terminal(ch) => out.push_str(&format!("{} T {}\n", i, *ch as u32)),
            Rule::Pair(l, r) => out.push_str(&format!("{} P {} {}\n", i, l.0, r.0)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::fixtures::abaababa;
    use crate::generate::{random_slp, GenMode};

    const ABAABABA_DOC: &str = "SLPv1 6 5\n\
                                0 T 97\n\
                                1 T 98\n\
                                2 P 0 1\n\
                                3 P 2 0\n\
                                4 P 3 2\n\
                                5 P 4 3\n";

    #[test]
    fn parse_fixture_document() {
        let slp = parse_slp(ABAABABA_DOC).unwrap();
        assert_eq!(slp.text_len(), 8);
        assert_eq!(slp.expand().unwrap(), "abaababa");
        assert_eq!(slp, abaababa());
    }

    #[test]
    fn serialize_is_canonical() {
        let slp = abaababa();
        assert_eq!(serialize_slp(&slp), ABAABABA_DOC);
    }

    #[test]
    fn roundtrip_identity() {
        let slp = abaababa();
        let doc = serialize_slp(&slp);
        assert_eq!(parse_slp(&doc).unwrap(), slp);
        assert_eq!(serialize_slp(&parse_slp(&doc).unwrap()), doc);

        let single = parse_slp("SLPv1 1 0\n0 T 97\n").unwrap();
        assert_eq!(single.text_len(), 1);
        assert_eq!(parse_slp(&serialize_slp(&single)).unwrap(), single);
    }

    #[test]
    fn roundtrip_large_random() {
        let slp = random_slp(7, 1000, 4, GenMode::Mixed).unwrap();
        let doc = serialize_slp(&slp);
        let back = parse_slp(&doc).unwrap();
        assert_eq!(back, slp);
        assert_eq!(serialize_slp(&back), doc);
    }

    #[test]
    fn comments_and_blank_lines() {
        let doc = "# a grammar\nSLPv1 1 0 # header\n\n0 T 97 # the only rule\n";
        let slp = parse_slp(doc).unwrap();
        assert_eq!(slp.expand().unwrap(), "a");
    }

    #[test]
    fn forward_reference_reported() {
        let doc = "SLPv1 5 4\n0 T 97\n1 T 98\n2 P 0 1\n3 P 4 0\n4 P 3 2\n";
        let err = parse_slp(doc).unwrap_err();
        assert_eq!(err, FormatError::ForwardReference { line: 5, child: 4 });
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(matches!(parse_slp(""), Err(FormatError::MissingHeader)));
        assert!(matches!(
            parse_slp("SLPv1 2 0\n0 T 97\n1 P 0 0\n"),
            Err(FormatError::MissingRoot { .. })
        ));
        assert!(matches!(
            parse_slp("SLPv1 1 0\n0 T 1114112\n"),
            Err(FormatError::BadCodepoint { .. })
        ));
        assert!(matches!(
            parse_slp("SLPv1 2 1\n0 T 97\n"),
            Err(FormatError::RuleCountMismatch { .. })
        ));
        assert!(matches!(
            parse_slp("SLPv1 2 1\n0 T 97\n2 P 0 0\n"),
            Err(FormatError::IdOutOfOrder { .. })
        ));
        assert!(matches!(
            parse_slp("SLPv1 1 0\n0 Q 3\n"),
            Err(FormatError::Malformed { .. })
        ));
    }
}
