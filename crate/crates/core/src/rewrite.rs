//! String rewriting of words by oriented equations `small = large`.
//!
//! A rule rewrites an occurrence of its large side to its small side, so
//! every step strictly decreases a word in shortlex order and rewriting
//! always terminates. Steps rewrite the leftmost occurrence of any large
//! side, preferring the lowest rule index among occurrences starting at
//! the same position. Occurrences are located with an Aho–Corasick
//! automaton over all large sides.
//!
//! Rule files hold one rule per line, `small = large`, in the token syntax
//! of [`crate::word`]. `#` starts a comment, and a line `builtin:figure1`
//! includes the built-in 21-rule system.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{
    build_pattern_dfa, complement_and_trim, is_cofinite, is_finite_language, CofinitenessReport,
    Dfa, PatternMatcher,
};
use crate::word::{Letter, Word, WordError};

/// An oriented equation between words, read `small = large`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub small: Word,
    pub large: Word,
}

impl Rule {
    pub fn new(small: Word, large: Word) -> Rule {
        Rule { small, large }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.small, self.large)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("rule {index} ({rule}) is not oriented: the small side must precede the large side in shortlex order")]
    NotOriented { index: usize, rule: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown builtin rule set `{0}`")]
    UnknownBuiltin(String),
    #[error("the set of irreducible words is infinite")]
    Infinite,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// One rewriting step: rule `rule` (0-based) applied at `position`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: usize,
    pub position: usize,
    pub result: Word,
}

/// A rewriting system with a precompiled matcher for its large sides.
#[derive(Debug, Clone)]
pub struct RewriteSystem {
    rules: Vec<Rule>,
    matcher: PatternMatcher,
}

const FIGURE1: &[(&str, &str)] = &[
    ("iI", "iI iI"),
    ("iD", "iD iD"),
    ("iI", "iI cv"),
    ("iI", "cv iI"),
    ("iI iD", "iD iI"),
    ("iD cv", "cv iD"),
    ("eps", "cv cv"),
    ("iD iI", "cD iI iD"),
    ("iD iI", "iI cD iI"),
    ("iI cD", "iI cD iD"),
    ("cD iI", "iD cD iI"),
    ("cD cD", "cD iD cD"),
    ("cD cD", "cD cD cD"),
    ("cD cD iD", "cD cD iI cD"),
    ("iD cD cD", "cD iI cD cD"),
    ("cv cD iI", "iD cv cD iI"),
    ("cD cv cD cv", "cv cD cv cD"),
    ("cv cD iI cD", "iD cv cD cD iD"),
    ("cD cv cD cD cv", "cv cD cD cv cD"),
    (
        "cD iD cv cD iD cv cD iD cv cD iD cv cD iD",
        "cv cD iD cv cD iD cv cD iD cv cD iD cv cD iD cv",
    ),
    (
        "cD iI cD cv cD iI cD cv cD",
        "cv cD iI cD cv cD iI cD cv cD",
    ),
];

/// The built-in 21 equations between words, valid on all structures with
/// at least five elements.
pub fn figure1_rules() -> Vec<Rule> {
    FIGURE1
        .iter()
        .map(|(s, l)| Rule::new(Word::parse(s).unwrap(), Word::parse(l).unwrap()))
        .collect()
}

impl RewriteSystem {
    pub fn new(rules: Vec<Rule>) -> Result<RewriteSystem, RewriteError> {
        for (i, r) in rules.iter().enumerate() {
            if r.small >= r.large {
                return Err(RewriteError::NotOriented {
                    index: i + 1,
                    rule: r.to_string(),
                });
            }
        }
        let large: Vec<Word> = rules.iter().map(|r| r.large.clone()).collect();
        // Orientation guarantees nonempty large sides.
        let matcher = PatternMatcher::new(&large).expect("large sides are nonempty");
        Ok(RewriteSystem { rules, matcher })
    }

    pub fn figure1() -> RewriteSystem {
        RewriteSystem::new(figure1_rules()).expect("built-in rules are oriented")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn large_sides(&self) -> Vec<Word> {
        self.rules.iter().map(|r| r.large.clone()).collect()
    }

    /// Rewrites the leftmost occurrence of a large side, if any.
    pub fn rewrite_step(&self, w: &Word) -> Option<Step> {
        let (pos, rule) = self.matcher.leftmost(w.letters())?;
        let r = &self.rules[rule];
        let mut out: Vec<Letter> = Vec::with_capacity(w.len() + r.small.len() - r.large.len());
        out.extend_from_slice(&w.letters()[..pos]);
        out.extend_from_slice(r.small.letters());
        out.extend_from_slice(&w.letters()[pos + r.large.len()..]);
        Some(Step {
            rule,
            position: pos,
            result: Word(out),
        })
    }

    /// Rewrites until irreducible; returns the normal form and the steps.
    pub fn normalize(&self, w: &Word) -> (Word, Vec<Step>) {
        let mut cur = w.clone();
        let mut trace = Vec::new();
        while let Some(step) = self.rewrite_step(&cur) {
            debug_assert!(step.result < cur, "rewriting must decrease shortlex order");
            cur = step.result.clone();
            trace.push(step);
        }
        (cur, trace)
    }

    pub fn is_irreducible(&self, w: &Word) -> bool {
        self.matcher.leftmost(w.letters()).is_none()
    }

    /// The automaton of irreducible words (complemented and trimmed).
    pub fn irreducible_dfa(&self) -> Dfa {
        complement_and_trim(&build_pattern_dfa(&self.large_sides()).expect("nonempty patterns"))
    }

    pub fn cofiniteness(&self) -> CofinitenessReport {
        is_cofinite(&self.large_sides()).expect("nonempty patterns")
    }

    /// Number of irreducible words, if finite.
    pub fn count_irreducibles(&self) -> Result<u128, RewriteError> {
        is_finite_language(&self.irreducible_dfa())
            .count
            .ok_or(RewriteError::Infinite)
    }

    /// All irreducible words in shortlex order, if finitely many.
    pub fn enumerate_irreducibles(&self) -> Result<Vec<Word>, RewriteError> {
        let d = self.irreducible_dfa();
        if !is_finite_language(&d).finite {
            return Err(RewriteError::Infinite);
        }
        let useful = d.useful_states();
        let mut out = Vec::new();
        // Breadth-first by length; extending a lexicographically sorted
        // layer letter by letter keeps the next layer sorted.
        let mut layer: Vec<(Vec<Letter>, u32)> = Vec::new();
        if useful[d.start as usize] {
            layer.push((Vec::new(), d.start));
        }
        while !layer.is_empty() {
            let mut next = Vec::new();
            for (w, s) in &layer {
                if d.accepting[*s as usize] {
                    out.push(Word(w.clone()));
                }
                for l in Letter::ALL {
                    let t = d.trans[*s as usize][l.index()];
                    if useful[t as usize] {
                        let mut w2 = w.clone();
                        w2.push(l);
                        next.push((w2, t));
                    }
                }
            }
            layer = next;
        }
        Ok(out)
    }

    /// The system in rule-file syntax.
    pub fn to_text(&self) -> String {
        self.rules.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Parses a rule file.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, RewriteError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("builtin:") {
            rules.extend(builtin(name)?);
            continue;
        }
        let (s, l) = line.split_once('=').ok_or_else(|| RewriteError::Syntax {
            line: i + 1,
            msg: format!("expected `small = large`, found `{line}`"),
        })?;
        let parse = |x: &str| {
            Word::parse(x).map_err(|e| RewriteError::Syntax {
                line: i + 1,
                msg: e.to_string(),
            })
        };
        rules.push(Rule::new(parse(s)?, parse(l)?));
    }
    Ok(rules)
}

/// A named built-in rule set.
pub fn builtin(name: &str) -> Result<Vec<Rule>, RewriteError> {
    match name {
        "figure1" => Ok(figure1_rules()),
        _ => Err(RewriteError::UnknownBuiltin(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let sys = RewriteSystem::figure1();
        assert_eq!(sys.normalize(&w("cv cv iI")).0, w("iI"));
        assert_eq!(sys.normalize(&w("iI iI iI")).0, w("iI"));
        let (nf, trace) = sys.normalize(&w("cD cD cD cD"));
        assert_eq!(nf, w("cD cD"));
        assert_eq!(trace.len(), 2);
    }

    #[test]
    fn leftmost_then_lowest_index() {
        let sys = RewriteSystem::figure1();
        // `cv iI` (rule 4) starts at 0; `iI iI` (rule 1) starts at 1.
        let s = sys.rewrite_step(&w("cv iI iI")).unwrap();
        assert_eq!((s.rule, s.position), (3, 0));
    }

    #[test]
    fn orientation_is_enforced() {
        let r = RewriteSystem::new(vec![Rule::new(w("iI iI"), w("iI"))]);
        assert!(matches!(r, Err(RewriteError::NotOriented { index: 1, .. })));
    }

    #[test]
    fn rule_file_parsing() {
        let rules = parse_rules("# comment\nbuiltin:figure1\n eps = cv cv # again\n").unwrap();
        assert_eq!(rules.len(), 22);
        assert!(parse_rules("iI iI").is_err());
        assert!(parse_rules("builtin:nope").is_err());
        let text = RewriteSystem::figure1().to_text();
        assert_eq!(parse_rules(&text).unwrap(), figure1_rules());
    }

    #[test]
    fn empty_system_is_infinite() {
        let sys = RewriteSystem::new(vec![]).unwrap();
        assert_eq!(sys.count_irreducibles(), Err(RewriteError::Infinite));
    }
}
