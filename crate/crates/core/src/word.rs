//! Unary contexts as words.
//!
//! A single-hole context over the four basic operations
//!
//! | token | letter | context      |
//! |-------|--------|--------------|
//! | `iI`  | CapI   | `(_ ∩ I)`    |
//! | `iD`  | CapD   | `(_ ∩ D)`    |
//! | `cD`  | DotD   | `(_ · D)`    |
//! | `cv`  | Conv   | `(_)⌣`       |
//!
//! is a word over a four-letter alphabet, written leftmost-outermost:
//! `apply(x·w, t) = x[apply(w, t)]`. The empty word is written `eps`.
//!
//! General contexts (any constructor, arbitrary variable-free fillers)
//! are [`GeneralLetter`] sequences; [`reduce_letter`] rewrites each one to
//! an equivalent word over the basic alphabet on structures with at least
//! three elements.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{classify_const, ConstClass, ConstError};
use crate::semantics::Packed;
use crate::term::{Head, Projection, Term};

/// A letter of the basic alphabet, in shortlex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    CapI,
    CapD,
    DotD,
    Conv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::CapI, Letter::CapD, Letter::DotD, Letter::Conv];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Letter {
        Letter::ALL[i]
    }

    pub fn token(self) -> &'static str {
        match self {
            Letter::CapI => "iI",
            Letter::CapD => "iD",
            Letter::DotD => "cD",
            Letter::Conv => "cv",
        }
    }

    /// Plugs `t` into the hole.
    pub fn apply(self, t: Term) -> Term {
        match self {
            Letter::CapI => t.inter(Term::Id),
            Letter::CapD => t.inter(Term::Di),
            Letter::DotD => t.comp(Term::Di),
            Letter::Conv => t.conv(),
        }
    }

    /// Applies the letter to a packed relation.
    #[inline]
    pub fn apply_packed(self, p: &Packed, r: u64) -> u64 {
        match self {
            Letter::CapI => p.cap_i(r),
            Letter::CapD => p.cap_d(r),
            Letter::DotD => p.dot_d(r),
            Letter::Conv => p.transpose(r),
        }
    }

    pub fn to_general(self) -> GeneralLetter {
        match self {
            Letter::CapI => GeneralLetter::new(Head::Inter, 0, vec![Term::Id]),
            Letter::CapD => GeneralLetter::new(Head::Inter, 0, vec![Term::Di]),
            Letter::DotD => GeneralLetter::new(Head::Comp, 0, vec![Term::Di]),
            Letter::Conv => GeneralLetter::new(Head::Proj(Projection::Swap), 0, vec![]),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown letter `{0}` (expected iI, iD, cD, cv or eps)")]
    UnknownLetter(String),
    #[error("filler {0} is not variable-free")]
    FillerNotClosed(String),
    #[error("context constructor {0:?} has no basic-word equivalent")]
    Unsupported(Head),
    #[error("letter has {found} fillers, constructor {head:?} needs {expected}")]
    Malformed {
        head: Head,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Const(#[from] ConstError),
}

impl FromStr for Letter {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Letter::ALL
            .into_iter()
            .find(|l| l.token() == s)
            .ok_or_else(|| WordError::UnknownLetter(s.to_string()))
    }
}

/// A word over the basic alphabet. Ordered by shortlex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// `apply(w, t)`: the rightmost letter is innermost.
    pub fn apply(&self, t: &Term) -> Term {
        self.0.iter().rev().fold(t.clone(), |acc, l| l.apply(acc))
    }

    #[inline]
    pub fn apply_packed(&self, p: &Packed, r: u64) -> u64 {
        self.0.iter().rev().fold(r, |acc, l| l.apply_packed(p, acc))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Parses the whitespace-separated token syntax.
    pub fn parse(s: &str) -> Result<Word, WordError> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks == ["eps"] {
            return Ok(Word::empty());
        }
        toks.into_iter().map(Letter::from_str).collect::<Result<_, _>>().map(Word)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl FromStr for Word {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::parse(s)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(l.token())?;
        }
        Ok(())
    }
}

/// Shortlex order: shorter words first, equal lengths lexicographically.
pub fn shortlex_compare(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_compare(&self.0, &other.0)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single-hole context of depth one: a constructor with the hole at
/// position `hole` and variable-free terms in the other positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralLetter {
    pub head: Head,
    pub hole: usize,
    /// The non-hole arguments, left to right.
    pub fillers: Vec<Term>,
}

impl GeneralLetter {
    pub fn new(head: Head, hole: usize, fillers: Vec<Term>) -> GeneralLetter {
        GeneralLetter { head, hole, fillers }
    }

    pub fn apply(&self, t: Term) -> Term {
        let mut args = self.fillers.clone();
        args.insert(self.hole, t);
        self.head.build(args)
    }
}

impl fmt::Display for GeneralLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.apply(Term::var("_")))
    }
}

/// Applies a general word (leftmost-outermost).
pub fn apply_general(w: &[GeneralLetter], t: &Term) -> Term {
    w.iter().rev().fold(t.clone(), |acc, l| l.apply(acc))
}

/// Peels a term with at most one variable occurrence into a general word
/// and a leaf base (a variable, or a constant when the term is closed).
///
/// At each node the descent follows the child holding the variable, or the
/// leftmost child if there is none, so `apply_general(w, base) == t`.
pub fn decompose_1vo(t: &Term) -> (Vec<GeneralLetter>, Term) {
    let mut letters = Vec::new();
    let mut cur = t;
    while let Some((head, children)) = cur.split() {
        let hole = children.iter().position(|c| c.vo() > 0).unwrap_or(0);
        let fillers = children
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != hole)
            .map(|(_, c)| (*c).clone())
            .collect();
        letters.push(GeneralLetter::new(head, hole, fillers));
        cur = children[hole];
    }
    (letters, cur.clone())
}

fn w(letters: &[Letter]) -> Word {
    Word(letters.to_vec())
}

/// The basic word equivalent to a projection applied to the hole on
/// structures with at least three elements.
pub fn projection_word(p: Projection) -> Word {
    use Letter::*;
    match p {
        Projection::Identity => Word::empty(),
        Projection::Swap => w(&[Conv]),
        // x^[1,1] = (x∩I)·⊤ and ⊤ = D·D on three or more elements.
        Projection::First => w(&[DotD, DotD, CapI]),
        // x^[2,2] = ((x∩I)·⊤)⌣ since x∩I is symmetric.
        Projection::Second => w(&[Conv, DotD, DotD, CapI]),
    }
}

/// Rewrites a general letter over `∩`, `·` and projections into an
/// equivalent basic word (on structures with at least three elements).
///
/// The filler is classified by its constant class:
///
/// ```text
///            ⊥         ⊤        I      D
/// (_ ∩ θ)    iI iD     eps      iI     iD
/// (_ · θ)    iI iD     cD cD    eps    cD
/// ```
///
/// `(θ ∩ _)` reduces like `(_ ∩ θ)`, and `(θ · _)` reduces by conjugation
/// with the converse: `θ·x = (x⌣·θ)⌣` because every class is symmetric.
pub fn reduce_letter(x: &GeneralLetter) -> Result<Word, WordError> {
    use Letter::*;
    let expected = x.head.arity() - 1;
    if x.fillers.len() != expected || x.hole > expected {
        return Err(WordError::Malformed {
            head: x.head,
            expected,
            found: x.fillers.len(),
        });
    }
    if let Head::Proj(p) = x.head {
        return Ok(projection_word(p));
    }
    let filler = &x.fillers[0];
    if filler.vo() > 0 {
        return Err(WordError::FillerNotClosed(filler.to_string()));
    }
    let theta = classify_const(filler)?;
    let inter = || match theta {
        ConstClass::Bot => w(&[CapI, CapD]),
        ConstClass::Top => Word::empty(),
        ConstClass::Id => w(&[CapI]),
        ConstClass::Di => w(&[CapD]),
    };
    let comp_right = || match theta {
        ConstClass::Bot => w(&[CapI, CapD]),
        ConstClass::Top => w(&[DotD, DotD]),
        ConstClass::Id => Word::empty(),
        ConstClass::Di => w(&[DotD]),
    };
    match (x.head, x.hole) {
        (Head::Inter, _) => Ok(inter()),
        (Head::Comp, 0) => Ok(comp_right()),
        (Head::Comp, _) => {
            let inner = comp_right();
            if inner.is_empty() {
                Ok(inner)
            } else {
                Ok(w(&[Conv]).concat(&inner).concat(&w(&[Conv])))
            }
        }
        (h, _) => Err(WordError::Unsupported(h)),
    }
}

/// Reduces a whole general word letter by letter.
pub fn reduce_word(ws: &[GeneralLetter]) -> Result<Word, WordError> {
    ws.iter()
        .map(reduce_letter)
        .try_fold(Word::empty(), |acc, r| Ok(acc.concat(&r?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    #[test]
    fn token_round_trip() {
        let w = Word::parse("iI cv cD iD").unwrap();
        assert_eq!(w.to_string(), "iI cv cD iD");
        assert_eq!(Word::parse("eps").unwrap(), Word::empty());
        assert_eq!(Word::empty().to_string(), "eps");
        assert!(Word::parse("iI xx").is_err());
    }

    #[test]
    fn shortlex_order() {
        let p = |s: &str| Word::parse(s).unwrap();
        assert!(p("cv") < p("iI iI"));
        assert!(p("iI cv") < p("iD iI"));
        assert!(p("eps") < p("iI"));
        assert!(p("iI") < p("iD") && p("iD") < p("cD") && p("cD") < p("cv"));
    }

    #[test]
    fn apply_is_leftmost_outermost() {
        let w = Word::parse("iI cD").unwrap();
        assert_eq!(w.apply(&Term::var("a")), parse_term("(a ; D) & I").unwrap());
    }

    #[test]
    fn decompose_and_reapply() {
        let t = parse_term("((a^ & I) ; D) | (I ; D)").unwrap();
        let (ws, base) = decompose_1vo(&t);
        assert_eq!(base, Term::var("a"));
        assert_eq!(apply_general(&ws, &base), t);
        let (ws, base) = decompose_1vo(&parse_term("I & D").unwrap());
        assert_eq!(base, Term::Id);
        assert_eq!(ws.len(), 1);
    }

    #[test]
    fn reduce_letter_table() {
        let l = |h, hole, f: &str| GeneralLetter::new(h, hole, vec![parse_term(f).unwrap()]);
        let p = |s: &str| Word::parse(s).unwrap();
        assert_eq!(reduce_letter(&l(Head::Inter, 0, "bot")).unwrap(), p("iI iD"));
        assert_eq!(reduce_letter(&l(Head::Inter, 1, "D ; D")).unwrap(), p("eps"));
        assert_eq!(reduce_letter(&l(Head::Comp, 0, "top")).unwrap(), p("cD cD"));
        assert_eq!(reduce_letter(&l(Head::Comp, 1, "D")).unwrap(), p("cv cD cv"));
        assert_eq!(reduce_letter(&l(Head::Comp, 1, "I")).unwrap(), p("eps"));
        assert!(matches!(
            reduce_letter(&l(Head::Union, 0, "I")),
            Err(WordError::Unsupported(Head::Union))
        ));
        assert!(matches!(
            reduce_letter(&l(Head::Inter, 0, "b")),
            Err(WordError::FillerNotClosed(_))
        ));
    }
}
