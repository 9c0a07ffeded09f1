//! The algebra of variable-free terms over structures with at least three
//! elements.
//!
//! On such structures every variable-free term denotes one of `⊥`, `⊤`,
//! `I` or `D`, and which one is determined by Cayley tables for the
//! operators. The tables for `∩`, `−`, `·` and `⌣` are transcribed; all
//! others are derived from them by the identities
//!
//! ```text
//! x ∪ y = (x⁻ ∩ y⁻)⁻        x † y = (x⁻ · y⁻)⁻
//! x^[1,1] = (x ∩ I)·⊤       x^[2,2] = ⊤·(x ∩ I)
//! x^[1,2] = x               x^[2,1] = x⌣
//! ```
//!
//! and the derivation runs at compile time.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semantics::{exhaustive_check, Structure, DEFAULT_BUDGET};
use crate::term::{Projection, Term};

/// The denotation class of a variable-free term on structures with at
/// least three elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstClass {
    Top,
    Bot,
    Id,
    Di,
}

use ConstClass::{Bot, Di, Id, Top};

impl ConstClass {
    /// In table order: ⊤, ⊥, I, D.
    pub const ALL: [ConstClass; 4] = [Top, Bot, Id, Di];

    const fn idx(self) -> usize {
        match self {
            Top => 0,
            Bot => 1,
            Id => 2,
            Di => 3,
        }
    }

    /// The canonical representative term.
    pub fn representative(self) -> Term {
        match self {
            Top => Term::Top,
            Bot => Term::Bot,
            Id => Term::Id,
            Di => Term::Di,
        }
    }
}

impl fmt::Display for ConstClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Top => "top",
            Bot => "bot",
            Id => "I",
            Di => "D",
        })
    }
}

type Table = [[ConstClass; 4]; 4];

/// Row operand ∩ column operand.
const INTER: Table = [
    [Top, Bot, Id, Di],
    [Bot, Bot, Bot, Bot],
    [Id, Bot, Id, Bot],
    [Di, Bot, Bot, Di],
];

const COMPL: [ConstClass; 4] = [Bot, Top, Di, Id];

/// Row operand · column operand.
const COMP: Table = [
    [Top, Bot, Top, Top],
    [Bot, Bot, Bot, Bot],
    [Top, Bot, Id, Di],
    [Top, Bot, Di, Top],
];

const CONV: [ConstClass; 4] = [Top, Bot, Id, Di];

const fn compl(x: ConstClass) -> ConstClass {
    COMPL[x.idx()]
}

const fn derive_dual(t: &Table) -> Table {
    let mut out = [[Top; 4]; 4];
    let mut i = 0;
    while i < 4 {
        let mut j = 0;
        while j < 4 {
            let x = compl(ConstClass::ALL[i]);
            let y = compl(ConstClass::ALL[j]);
            out[i][j] = compl(t[x.idx()][y.idx()]);
            j += 1;
        }
        i += 1;
    }
    out
}

const UNION: Table = derive_dual(&INTER);
const DAGGER: Table = derive_dual(&COMP);

const fn derive_projection(p: usize) -> [ConstClass; 4] {
    let mut out = [Top; 4];
    let mut i = 0;
    while i < 4 {
        let x = ConstClass::ALL[i];
        out[i] = match p {
            0 => x,
            1 => CONV[i],
            // (x ∩ I)·⊤
            2 => COMP[INTER[i][Id.idx()].idx()][Top.idx()],
            // ⊤·(x ∩ I)
            _ => COMP[Top.idx()][INTER[i][Id.idx()].idx()],
        };
        i += 1;
    }
    out
}

const PROJ: [[ConstClass; 4]; 4] = [
    derive_projection(0),
    derive_projection(1),
    derive_projection(2),
    derive_projection(3),
];

/// Operators of the constant algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CayleyOp {
    Union,
    Inter,
    Compl,
    Comp,
    Dagger,
    Proj(Projection),
}

impl CayleyOp {
    pub fn arity(self) -> usize {
        match self {
            CayleyOp::Compl | CayleyOp::Proj(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConstError {
    #[error("operator {op:?} takes {expected} operand(s)")]
    Arity { op: CayleyOp, expected: usize },
    #[error("term contains variable `{0}`")]
    NotVariableFree(String),
}

/// Looks up the Cayley table of `op`.
pub fn cayley(op: CayleyOp, x: ConstClass, y: Option<ConstClass>) -> Result<ConstClass, ConstError> {
    let arity_err = Err(ConstError::Arity {
        op,
        expected: op.arity(),
    });
    match (op, y) {
        (CayleyOp::Compl, None) => Ok(COMPL[x.idx()]),
        (CayleyOp::Proj(p), None) => Ok(PROJ[proj_idx(p)][x.idx()]),
        (CayleyOp::Compl | CayleyOp::Proj(_), Some(_)) => arity_err,
        (_, None) => arity_err,
        (CayleyOp::Union, Some(y)) => Ok(UNION[x.idx()][y.idx()]),
        (CayleyOp::Inter, Some(y)) => Ok(INTER[x.idx()][y.idx()]),
        (CayleyOp::Comp, Some(y)) => Ok(COMP[x.idx()][y.idx()]),
        (CayleyOp::Dagger, Some(y)) => Ok(DAGGER[x.idx()][y.idx()]),
    }
}

fn proj_idx(p: Projection) -> usize {
    match p {
        Projection::Identity => 0,
        Projection::Swap => 1,
        Projection::First => 2,
        Projection::Second => 3,
    }
}

/// The class of a variable-free term.
pub fn classify_const(t: &Term) -> Result<ConstClass, ConstError> {
    let bin = |op, a: &Term, b: &Term| -> Result<ConstClass, ConstError> {
        cayley(op, classify_const(a)?, Some(classify_const(b)?))
    };
    match t {
        Term::Var(v) => Err(ConstError::NotVariableFree(v.clone())),
        Term::Bot => Ok(Bot),
        Term::Top => Ok(Top),
        Term::Id => Ok(Id),
        Term::Di => Ok(Di),
        Term::Union(a, b) => bin(CayleyOp::Union, a, b),
        Term::Inter(a, b) => bin(CayleyOp::Inter, a, b),
        Term::Comp(a, b) => bin(CayleyOp::Comp, a, b),
        Term::Dagger(a, b) => bin(CayleyOp::Dagger, a, b),
        Term::Compl(a) => cayley(CayleyOp::Compl, classify_const(a)?, None),
        Term::Proj(a, p) => cayley(CayleyOp::Proj(*p), classify_const(a)?, None),
    }
}

/// The model classes equivalence can be relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelClass {
    /// All structures.
    Rel,
    /// Structures with at least `m` elements.
    AtLeast(usize),
}

impl ModelClass {
    /// The smallest universe size in the class.
    pub fn min_size(self) -> usize {
        match self {
            ModelClass::Rel => 1,
            ModelClass::AtLeast(m) => m.max(1),
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelClass::Rel => write!(f, "rel"),
            ModelClass::AtLeast(m) => write!(f, "rel>={m}"),
        }
    }
}

impl std::str::FromStr for ModelClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("rel") {
            return Ok(ModelClass::Rel);
        }
        s.strip_prefix("rel>=")
            .and_then(|m| m.parse::<usize>().ok())
            .filter(|m| *m >= 1)
            .map(ModelClass::AtLeast)
            .ok_or_else(|| format!("unknown model class `{s}` (expected `rel` or `rel>=M`)"))
    }
}

/// Outcome of deciding two variable-free terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstDecision {
    /// Both terms have this class (and agree on the small structures of
    /// the model class, if any lie below size 3).
    Equivalent(ConstClass),
    Inequivalent(Structure),
}

/// Decides equivalence of two variable-free terms over a model class.
///
/// Structures with at least three elements are decided by class
/// agreement; the one-element and two-element structures admitted by the
/// model class are checked directly.
pub fn decide_0vo(t1: &Term, t2: &Term, class: ModelClass) -> Result<ConstDecision, ConstError> {
    let c1 = classify_const(t1)?;
    let c2 = classify_const(t2)?;
    let m = class.min_size();
    let small: Vec<usize> = (m..3).collect();
    if !small.is_empty() {
        if let Some(s) = exhaustive_check(t1, t2, &small, DEFAULT_BUDGET).expect("variable-free check is trivial") {
            return Ok(ConstDecision::Inequivalent(s));
        }
    }
    if c1 == c2 {
        Ok(ConstDecision::Equivalent(c1))
    } else {
        // Distinct classes denote distinct relations on every structure of
        // size ≥ 3, so the least admissible such size separates them.
        Ok(ConstDecision::Inequivalent(Structure::new(m.max(3))))
    }
}
