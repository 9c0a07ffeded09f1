//! Verdict-producing equivalence procedures.
//!
//! Verdicts are three-valued because the bounded model checks behind them
//! are incomplete:
//!
//! * `Equivalent` carries a justification that can be replayed: a
//!   constant-class derivation, or rewriting traces under the certified
//!   rule system together with the small universe sizes checked
//!   exhaustively.
//! * `Inequivalent` carries a structure that separates the inputs; it is
//!   re-evaluated whenever a verdict is built.
//! * `Unknown` records the window of sizes and samples that found nothing.
//!
//! [`decide_terms`] routes its inputs:
//!
//! 1. Two variable-free terms are decided exactly by their constant
//!    classes.
//! 2. Terms with at most one variable occurrence that, after collapsing
//!    constant subterms, contain no dagger are pushed through the normal
//!    forms (complement, projection, union). Each
//!    disjunct with a variable becomes a basic word, which the certified
//!    rules normalise. Equal canonical forms are equivalent on structures
//!    with at least five elements, and the smaller sizes admitted by the
//!    model class are checked exhaustively.
//! 3. Everything else, and every pipeline mismatch, gets a bounded check.
//!    This check can only report `Inequivalent` or `Unknown`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{cayley, classify_const, decide_0vo, CayleyOp, ConstClass, ConstDecision, ModelClass};
use crate::normalforms::{collapse_constants, complement_nf, projection_nf, union_nf};
use crate::rewrite::{Rule, RewriteSystem, Step};
use crate::search::{OracleConfig, WordOracle, WordWitness};
use crate::semantics::{eval, exhaustive_check, random_check, SemanticsError, Structure, DEFAULT_BUDGET};
use crate::term::{fresh_var, Term};
use crate::word::{decompose_1vo, reduce_word, Word};

/// Universe sizes from which the certified rules hold.
pub const RULES_MIN_SIZE: usize = 5;

/// Parameters of the bounded checks used by [`decide_terms`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideConfig {
    /// Largest universe size checked exhaustively (within `budget`).
    pub max_exhaustive_size: usize,
    /// Universe size checked by sampling.
    pub sample_size: usize,
    pub samples: usize,
    pub seed: u64,
    /// Evaluation budget per exhaustive size.
    pub budget: u64,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            max_exhaustive_size: 5,
            sample_size: 6,
            samples: 100_000,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// The window a bounded check covered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checked {
    pub exhaustive_sizes: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub samples_per_size: usize,
}

/// A normalisation trace of one word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordTrace {
    pub start: Word,
    pub steps: Vec<Step>,
    pub normal_form: Word,
}

impl WordTrace {
    fn new(sys: &RewriteSystem, w: &Word) -> WordTrace {
        let (normal_form, steps) = sys.normalize(w);
        WordTrace {
            start: w.clone(),
            steps,
            normal_form,
        }
    }

    /// Whether each step rewrites an occurrence of a rule's large side to
    /// its small side and the last result is `normal_form`.
    pub fn replay(&self, rules: &[Rule]) -> bool {
        let mut cur = self.start.clone();
        for s in &self.steps {
            let Some(r) = rules.get(s.rule) else {
                return false;
            };
            let l = cur.letters();
            let end = s.position + r.large.len();
            if end > l.len() || l[s.position..end] != *r.large.letters() {
                return false;
            }
            let mut out = l[..s.position].to_vec();
            out.extend_from_slice(r.small.letters());
            out.extend_from_slice(&l[end..]);
            if Word(out) != s.result {
                return false;
            }
            cur = s.result.clone();
        }
        cur == self.normal_form
    }
}

/// One disjunct of the union normal form with a variable occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjunctTrace {
    /// The disjunct, with the variable literal replaced by the hole.
    pub disjunct: String,
    pub trace: WordTrace,
}

/// Canonical form of a term in the one-occurrence pipeline: a union of a
/// constant class and words applied to a literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canonical {
    pub constant: Option<ConstClass>,
    /// (literal, normal-form word) pairs.
    pub words: BTreeSet<(String, Word)>,
}

/// Why two inputs are equivalent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    /// Both variable-free terms have this class; the listed small sizes
    /// were checked exhaustively.
    Constant { class: ConstClass, small_sizes: Vec<usize> },
    /// Both words rewrite to the same normal form.
    Words { lhs: WordTrace, rhs: WordTrace },
    /// Both terms reach the same canonical form; sizes in `small_sizes`
    /// were checked exhaustively.
    Pipeline {
        canonical: Canonical,
        lhs: Vec<DisjunctTrace>,
        rhs: Vec<DisjunctTrace>,
        small_sizes: Vec<usize>,
    },
}

impl Justification {
    /// Replays the rewriting traces and Cayley-table derivations.
    pub fn replay(&self, t1: Option<&Term>, t2: Option<&Term>) -> bool {
        let rules = RewriteSystem::figure1();
        let rules = rules.rules();
        match self {
            Justification::Constant { class, .. } => [t1, t2]
                .into_iter()
                .flatten()
                .all(|t| classify_const(t).ok() == Some(*class)),
            Justification::Words { lhs, rhs } => {
                lhs.replay(rules) && rhs.replay(rules) && lhs.normal_form == rhs.normal_form
            }
            Justification::Pipeline { lhs, rhs, .. } => {
                lhs.iter().chain(rhs).all(|d| d.trace.replay(rules))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent(Justification),
    Inequivalent(Structure),
    Unknown(Checked),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Equivalent(_) => "equivalent",
            Verdict::Inequivalent(_) => "inequivalent",
            Verdict::Unknown(_) => "unknown",
        }
    }

    /// `{"verdict": ..., "witness": ..., "checked": ...}`.
    pub fn to_json_value(&self) -> Value {
        match self {
            Verdict::Equivalent(j) => json!({
                "verdict": self.name(),
                "witness": serde_json::to_value(j).expect("serialisable"),
                "checked": Value::Null,
            }),
            Verdict::Inequivalent(s) => json!({
                "verdict": self.name(),
                "witness": s.to_json_value(),
                "checked": Value::Null,
            }),
            Verdict::Unknown(c) => json!({
                "verdict": self.name(),
                "witness": Value::Null,
                "checked": serde_json::to_value(c).expect("serialisable"),
            }),
        }
    }
}

/// Builds an `Inequivalent` verdict after checking that `s` separates.
fn separating(t1: &Term, t2: &Term, s: Structure) -> Verdict {
    let a = eval(t1, &s).expect("witness binds all variables");
    let b = eval(t2, &s).expect("witness binds all variables");
    assert_ne!(a, b, "witness must separate the terms");
    Verdict::Inequivalent(s)
}

/// Decides `w1[a] = w2[a]` on structures with at least five elements.
///
/// Equal normal forms under the certified rules give `Equivalent`.
/// Otherwise `oracle` searches for a separating relation; its witnesses
/// lie in the oracle's window (sizes five and up by default).
pub fn decide_word_equiv(w1: &Word, w2: &Word, oracle: &WordOracle) -> Verdict {
    let sys = RewriteSystem::figure1();
    let lhs = WordTrace::new(&sys, w1);
    let rhs = WordTrace::new(&sys, w2);
    if lhs.normal_form == rhs.normal_form {
        return Verdict::Equivalent(Justification::Words { lhs, rhs });
    }
    match oracle.counterexample(w1, w2) {
        Some(wit) => {
            let a = Term::var("a");
            separating(&w1.apply(&a), &w2.apply(&a), wit.to_structure())
        }
        None => {
            let cfg = oracle.config();
            Verdict::Unknown(Checked {
                exhaustive_sizes: vec![cfg.exhaustive_size],
                sample_sizes: cfg.sample_sizes.clone(),
                samples_per_size: cfg.samples_per_size,
            })
        }
    }
}

/// Decides `t1 = t2` over `class`; see the module documentation.
pub fn decide_terms(t1: &Term, t2: &Term, class: ModelClass, cfg: &DecideConfig) -> Verdict {
    let m = class.min_size();
    if t1.vo() == 0 && t2.vo() == 0 {
        return match decide_0vo(t1, t2, class).expect("variable-free") {
            ConstDecision::Equivalent(c) => Verdict::Equivalent(Justification::Constant {
                class: c,
                small_sizes: (m..3).collect(),
            }),
            ConstDecision::Inequivalent(s) => separating(t1, t2, s),
        };
    }
    if let (Some(c1), Some(c2)) = (pipeline(t1, t2), pipeline(t2, t1)) {
        if c1.canonical == c2.canonical {
            let small: Vec<usize> = (m..RULES_MIN_SIZE).collect();
            let cex = if small.is_empty() {
                None
            } else {
                exhaustive_check(t1, t2, &small, cfg.budget).expect("one occurrence fits any budget")
            };
            return match cex {
                Some(s) => separating(t1, t2, s),
                None => Verdict::Equivalent(Justification::Pipeline {
                    canonical: c1.canonical,
                    lhs: c1.traces,
                    rhs: c2.traces,
                    small_sizes: small,
                }),
            };
        }
    }
    bounded_check(t1, t2, m, cfg)
}

/// Exhaustive sizes `m..=max_exhaustive_size` while within budget, then
/// sampling at `max(sample_size, m)`.
pub fn bounded_check(t1: &Term, t2: &Term, min_size: usize, cfg: &DecideConfig) -> Verdict {
    let mut exhaustive = Vec::new();
    for size in min_size.max(1)..=cfg.max_exhaustive_size {
        match exhaustive_check(t1, t2, &[size], cfg.budget) {
            Ok(Some(s)) => return separating(t1, t2, s),
            Ok(None) => exhaustive.push(size),
            Err(SemanticsError::BudgetExceeded { .. }) => break,
            Err(e) => panic!("bounded check failed: {e}"),
        }
    }
    let size = cfg.sample_size.max(min_size);
    if let Some(s) = random_check(t1, t2, size, cfg.samples, cfg.seed).expect("valid sample size") {
        return separating(t1, t2, s);
    }
    Verdict::Unknown(Checked {
        exhaustive_sizes: exhaustive,
        sample_sizes: vec![size],
        samples_per_size: cfg.samples,
    })
}

struct PipelineResult {
    canonical: Canonical,
    traces: Vec<DisjunctTrace>,
}

/// Runs the one-occurrence pipeline on `t`; `other` only reserves names.
fn pipeline(t: &Term, other: &Term) -> Option<PipelineResult> {
    if t.vo() > 1 {
        return None;
    }
    let t = collapse_constants(t);
    if t.fragment_info().sigma_level? > 1 {
        return None;
    }
    let t = complement_nf(&t).ok()?;
    let hole = fresh_var(&[&t, other], "h");
    let (literal, t) = match find_literal(&t) {
        Some(lit) => {
            let replaced = replace_subterm(&t, &lit, &Term::var(&hole));
            (Some(lit.to_string()), replaced)
        }
        None => (None, t),
    };
    // `⊥` and `⊤` stay atoms: expanding `⊤` to `I ∪ D` would split one
    // letter into two disjuncts.
    let t = projection_nf(&t);
    let sys = RewriteSystem::figure1();
    let mut constant: Option<ConstClass> = None;
    let mut words = BTreeSet::new();
    let mut traces = Vec::new();
    for d in union_nf(&t).ok()? {
        if d.vo() == 0 {
            let c = classify_const(&d).ok()?;
            constant = Some(match constant {
                None => c,
                Some(k) => cayley(CayleyOp::Union, k, Some(c)).expect("binary"),
            });
            continue;
        }
        let (letters, base) = decompose_1vo(&d);
        if base != Term::var(&hole) {
            return None;
        }
        let w = reduce_word(&letters).ok()?;
        let trace = WordTrace::new(&sys, &w);
        words.insert((literal.clone()?, trace.normal_form.clone()));
        traces.push(DisjunctTrace {
            disjunct: d.to_string(),
            trace,
        });
    }
    match constant {
        Some(ConstClass::Top) => words.clear(),
        Some(ConstClass::Bot) => constant = None,
        _ => {}
    }
    Some(PipelineResult {
        canonical: Canonical { constant, words },
        traces,
    })
}

/// The variable or complemented variable in a complement normal form.
fn find_literal(t: &Term) -> Option<Term> {
    match t {
        Term::Var(_) => Some(t.clone()),
        Term::Compl(a) if matches!(**a, Term::Var(_)) => Some(t.clone()),
        _ => t.children().into_iter().find_map(find_literal),
    }
}

fn replace_subterm(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    match t.split() {
        None => t.clone(),
        Some((h, cs)) => h.build(cs.into_iter().map(|c| replace_subterm(c, from, to)).collect()),
    }
}

/// Outcome of checking one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCheck {
    pub rule: Rule,
    pub witness: Option<WordWitness>,
}

impl RuleCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// The oracle window used to certify rules: every relation on five
/// elements (no symmetry reduction) and `samples` relations at each of
/// sizes six and seven.
pub fn verification_config(samples: usize, seed: u64) -> OracleConfig {
    OracleConfig {
        exhaustive_size: 5,
        sample_sizes: vec![6, 7],
        samples_per_size: samples,
        seed,
        orbit_reduction: false,
    }
}

/// Checks every rule with one oracle built from `cfg`.
pub fn verify_rules(rules: &[Rule], cfg: &OracleConfig) -> Vec<RuleCheck> {
    let oracle = WordOracle::new(cfg.clone()).expect("valid oracle configuration");
    rules
        .iter()
        .map(|r| RuleCheck {
            rule: r.clone(),
            witness: oracle.counterexample(&r.small, &r.large),
        })
        .collect()
}
