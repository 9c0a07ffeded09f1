//! Terms of the calculus of relations: syntax tree, parser, printer and
//! the structural analyses (variable occurrences, Σn/Πn levels, k-vo
//! decomposition and substitution).
//!
//! Concrete syntax, loosest to tightest:
//!
//! ```text
//! term    := term '|' term            union
//!          | term '&' term            intersection
//!          | term '$' term            dagger (relative sum)
//!          | term ';' term            composition
//!          | term '~' | term '^'      complement, converse (postfix)
//!          | term '[' d ',' d ']'     projection, d ∈ {1,2} (postfix)
//!          | ident | bot | top | I | D | '(' term ')'
//! ```
//!
//! All binary operators are left associative.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A map π: {1,2} → {1,2} used by the projection operator
/// `R^π = {(x1,x2) | (x_{π(1)}, x_{π(2)}) ∈ R}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Projection {
    /// `[1,2]`
    Identity,
    /// `[2,1]`, the converse.
    Swap,
    /// `[1,1]`
    First,
    /// `[2,2]`
    Second,
}

impl Projection {
    pub const ALL: [Projection; 4] = [
        Projection::Identity,
        Projection::Swap,
        Projection::First,
        Projection::Second,
    ];

    /// `(π(1), π(2))`, 1-based.
    pub fn images(self) -> (u8, u8) {
        match self {
            Projection::Identity => (1, 2),
            Projection::Swap => (2, 1),
            Projection::First => (1, 1),
            Projection::Second => (2, 2),
        }
    }

    pub fn from_images(a: u8, b: u8) -> Option<Projection> {
        match (a, b) {
            (1, 2) => Some(Projection::Identity),
            (2, 1) => Some(Projection::Swap),
            (1, 1) => Some(Projection::First),
            (2, 2) => Some(Projection::Second),
            _ => None,
        }
    }

    fn apply(self, i: u8) -> u8 {
        let (a, b) = self.images();
        if i == 1 {
            a
        } else {
            b
        }
    }

    /// Whether `π(1) ≠ π(2)`.
    pub fn is_injective(self) -> bool {
        matches!(self, Projection::Identity | Projection::Swap)
    }

    /// The single projection equivalent to applying `inner` first and then
    /// `outer`: `(ρ^inner)^outer = ρ^(inner.then(outer))`.
    ///
    /// As a map on indices this is `i ↦ outer(inner(i))`, since
    /// `(x1,x2) ∈ (ρ^π)^π'` iff `(x_{π'(π(1))}, x_{π'(π(2))}) ∈ ρ`.
    pub fn then(self, outer: Projection) -> Projection {
        let (a, b) = self.images();
        Projection::from_images(outer.apply(a), outer.apply(b)).expect("indices stay in {1,2}")
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::Swap => write!(f, "^"),
            p => {
                let (a, b) = p.images();
                write!(f, "[{a},{b}]")
            }
        }
    }
}

/// A term of the calculus of relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Bot,
    Top,
    /// The identity relation `I`.
    Id,
    /// The diversity relation `D`.
    Di,
    Union(Box<Term>, Box<Term>),
    Inter(Box<Term>, Box<Term>),
    Compl(Box<Term>),
    Comp(Box<Term>, Box<Term>),
    Dagger(Box<Term>, Box<Term>),
    Proj(Box<Term>, Projection),
}

/// The outermost constructor of a term, without its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Head {
    Union,
    Inter,
    Compl,
    Comp,
    Dagger,
    Proj(Projection),
}

impl Head {
    pub fn arity(self) -> usize {
        match self {
            Head::Compl | Head::Proj(_) => 1,
            _ => 2,
        }
    }

    /// Builds a term from this head and exactly `arity()` children.
    pub fn build(self, mut children: Vec<Term>) -> Term {
        assert_eq!(children.len(), self.arity(), "arity mismatch for {self:?}");
        if self.arity() == 1 {
            let c = Box::new(children.pop().unwrap());
            return match self {
                Head::Compl => Term::Compl(c),
                Head::Proj(p) => Term::Proj(c, p),
                _ => unreachable!(),
            };
        }
        let r = Box::new(children.pop().unwrap());
        let l = Box::new(children.pop().unwrap());
        match self {
            Head::Union => Term::Union(l, r),
            Head::Inter => Term::Inter(l, r),
            Head::Comp => Term::Comp(l, r),
            Head::Dagger => Term::Dagger(l, r),
            _ => unreachable!(),
        }
    }
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }
    pub fn union(self, other: Term) -> Term {
        Term::Union(Box::new(self), Box::new(other))
    }
    pub fn inter(self, other: Term) -> Term {
        Term::Inter(Box::new(self), Box::new(other))
    }
    pub fn comp(self, other: Term) -> Term {
        Term::Comp(Box::new(self), Box::new(other))
    }
    pub fn dagger(self, other: Term) -> Term {
        Term::Dagger(Box::new(self), Box::new(other))
    }
    pub fn compl(self) -> Term {
        Term::Compl(Box::new(self))
    }
    pub fn conv(self) -> Term {
        Term::Proj(Box::new(self), Projection::Swap)
    }
    pub fn proj(self, p: Projection) -> Term {
        Term::Proj(Box::new(self), p)
    }

    /// Head constructor and children, or `None` for leaves.
    pub fn split(&self) -> Option<(Head, Vec<&Term>)> {
        Some(match self {
            Term::Union(a, b) => (Head::Union, vec![a, b]),
            Term::Inter(a, b) => (Head::Inter, vec![a, b]),
            Term::Comp(a, b) => (Head::Comp, vec![a, b]),
            Term::Dagger(a, b) => (Head::Dagger, vec![a, b]),
            Term::Compl(a) => (Head::Compl, vec![a]),
            Term::Proj(a, p) => (Head::Proj(*p), vec![a]),
            _ => return None,
        })
    }

    pub fn children(&self) -> Vec<&Term> {
        self.split().map(|(_, c)| c).unwrap_or_default()
    }

    pub fn is_leaf(&self) -> bool {
        self.split().is_none()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Term::depth)
            .max()
            .unwrap_or(0)
    }

    /// Number of variable occurrences (leaves that are variables).
    pub fn vo(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            _ => self.children().into_iter().map(Term::vo).sum(),
        }
    }

    /// Occurrences of the variable `name`.
    pub fn occurrences(&self, name: &str) -> usize {
        match self {
            Term::Var(v) => usize::from(v == name),
            _ => self
                .children()
                .into_iter()
                .map(|c| c.occurrences(name))
                .sum(),
        }
    }

    /// The set of variable names.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    /// Whether the term contains a composition or dagger.
    pub fn has_comp_or_dagger(&self) -> bool {
        match self {
            Term::Comp(..) | Term::Dagger(..) => true,
            _ => self.children().into_iter().any(Term::has_comp_or_dagger),
        }
    }

    /// Replaces every occurrence of the variable `name` by `by`.
    pub fn substitute(&self, name: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == name => by.clone(),
            _ => match self.split() {
                None => self.clone(),
                Some((h, cs)) => h.build(cs.into_iter().map(|c| c.substitute(name, by)).collect()),
            },
        }
    }

    /// Renames every variable to `name`.
    pub fn rename_all_vars(&self, name: &str) -> Term {
        match self {
            Term::Var(_) => Term::var(name),
            _ => match self.split() {
                None => self.clone(),
                Some((h, cs)) => h.build(cs.into_iter().map(|c| c.rename_all_vars(name)).collect()),
            },
        }
    }

    /// Position in the Σn/Πn hierarchy.
    pub fn fragment_info(&self) -> FragmentInfo {
        let (s, p) = levels(self);
        FragmentInfo {
            sigma_level: s,
            pi_level: p,
        }
    }

    /// Whether this term has at most `k` variable occurrences and lies in
    /// Σn (or Πn).
    pub fn in_fragment(&self, n: u32, k: usize, side: Side) -> bool {
        if self.vo() > k {
            return false;
        }
        let info = self.fragment_info();
        let lvl = match side {
            Side::Sigma => info.sigma_level,
            Side::Pi => info.pi_level,
        };
        lvl.is_some_and(|l| l <= n)
    }
}

/// Selects the Σ or Π side of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Sigma,
    Pi,
}

/// Least levels of a term in the hierarchy. `None` means the term lies in
/// no level (a complement applied above a composition or dagger).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentInfo {
    pub sigma_level: Option<u32>,
    pub pi_level: Option<u32>,
}

impl fmt::Display for FragmentInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.sigma_level, self.pi_level) {
            (Some(s), Some(p)) => write!(f, "Sigma_{s} Pi_{p}"),
            _ => write!(f, "outside the hierarchy"),
        }
    }
}

/// Computes the least (Σ, Π) levels.
///
/// Membership is inductive: `t ∈ Σn` iff `t` is obtained by a closure rule
/// at level `n` or `t ∈ Σ(n-1) ∪ Π(n-1)`. Hence each level is the minimum
/// of the level given by the outermost closure rule and the other side's
/// level plus one.
fn levels(t: &Term) -> (Option<u32>, Option<u32>) {
    if !t.has_comp_or_dagger() {
        return (Some(0), Some(0));
    }
    let close = |s: Option<u32>, p: Option<u32>| -> (Option<u32>, Option<u32>) {
        let s2 = min_opt(s, p.map(|x| x + 1));
        let p2 = min_opt(p, s.map(|x| x + 1));
        (s2, p2)
    };
    match t {
        Term::Compl(_) => (None, None),
        Term::Proj(a, _) => {
            let (s, p) = levels(a);
            close(s.map(|x| x.max(1)), p.map(|x| x.max(1)))
        }
        Term::Union(a, b) | Term::Inter(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            close(max3(sa, sb), max3(pa, pb))
        }
        Term::Comp(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            let direct = max3(sa, sb);
            let via_pi = max3(pa, pb).map(|x| x + 1);
            close(min_opt(direct, via_pi), None)
        }
        Term::Dagger(a, b) => {
            let (sa, pa) = levels(a);
            let (sb, pb) = levels(b);
            let direct = max3(pa, pb);
            let via_sigma = max3(sa, sb).map(|x| x + 1);
            close(None, min_opt(direct, via_sigma))
        }
        _ => (Some(0), Some(0)),
    }
}

fn max3(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    Some(a?.max(b?).max(1))
}

fn min_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Errors raised by the structural term operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("expected at least {expected} variable occurrences, found {found}")]
    TooFewOccurrences { expected: usize, found: usize },
    #[error("variable `{0}` is not fresh")]
    NotFresh(String),
}

/// Result of [`decompose_kvo`]: `t = context[head(children)/hole]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvoDecomposition {
    /// The context `t0`, containing exactly one occurrence of `hole`.
    pub context: Term,
    pub hole: String,
    pub head: Head,
    /// The arguments of the head; each has strictly fewer than `k`
    /// variable occurrences.
    pub children: Vec<Term>,
}

impl KvoDecomposition {
    /// Reassembles the original term.
    pub fn recompose(&self) -> Term {
        self.context
            .substitute(&self.hole, &self.head.build(self.children.clone()))
    }
}

/// Splits a term with `k ≥ 2` variable occurrences as
/// `t = t0[f(t1..tm)/a]` where `t0` has `a` as its single variable
/// occurrence and every `ti` has at most `k-1` variable occurrences.
///
/// The descent follows the unique child holding all `k` occurrences until a
/// node is reached whose occurrences are split among its children.
pub fn decompose_kvo(t: &Term, hole: &str) -> Result<KvoDecomposition, TermError> {
    let k = t.vo();
    if k < 2 {
        return Err(TermError::TooFewOccurrences {
            expected: 2,
            found: k,
        });
    }
    if t.occurrences(hole) > 0 {
        return Err(TermError::NotFresh(hole.to_string()));
    }
    fn go(t: &Term, k: usize, hole: &str) -> (Term, Head, Vec<Term>) {
        let (head, children) = t.split().expect("a term with vo >= 2 is not a leaf");
        if let Some(i) = children.iter().position(|c| c.vo() == k) {
            let (ctx, h, cs) = go(children[i], k, hole);
            let rebuilt = children
                .iter()
                .enumerate()
                .map(|(j, c)| if j == i { ctx.clone() } else { (*c).clone() })
                .collect();
            (head.build(rebuilt), h, cs)
        } else {
            (
                Term::var(hole),
                head,
                children.into_iter().cloned().collect(),
            )
        }
    }
    let (context, head, children) = go(t, k, hole);
    Ok(KvoDecomposition {
        context,
        hole: hole.to_string(),
        head,
        children,
    })
}

/// A variable name not occurring in any of the given terms.
pub fn fresh_var(terms: &[&Term], prefix: &str) -> String {
    let used: BTreeSet<String> = terms.iter().flat_map(|t| t.vars()).collect();
    if !used.contains(prefix) {
        return prefix.to_string();
    }
    (0..)
        .map(|i| format!("{prefix}{i}"))
        .find(|n| !used.contains(n))
        .unwrap()
}

// ---------------------------------------------------------------------------
// Printing

const PREC_UNION: u8 = 1;
const PREC_INTER: u8 = 2;
const PREC_DAGGER: u8 = 3;
const PREC_COMP: u8 = 4;
const PREC_POSTFIX: u8 = 5;
const PREC_ATOM: u8 = 6;

fn prec(t: &Term) -> u8 {
    match t {
        Term::Union(..) => PREC_UNION,
        Term::Inter(..) => PREC_INTER,
        Term::Dagger(..) => PREC_DAGGER,
        Term::Comp(..) => PREC_COMP,
        Term::Compl(..) | Term::Proj(..) => PREC_POSTFIX,
        _ => PREC_ATOM,
    }
}

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let sub = |c: &Term, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if prec(c) < min {
            write!(f, "(")?;
            write_term(c, f)?;
            write!(f, ")")
        } else {
            write_term(c, f)
        }
    };
    let bin = |a: &Term, b: &Term, p: u8, op: &str, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        sub(a, p, f)?;
        write!(f, " {op} ")?;
        sub(b, p + 1, f)
    };
    match t {
        Term::Var(v) => write!(f, "{v}"),
        Term::Bot => write!(f, "bot"),
        Term::Top => write!(f, "top"),
        Term::Id => write!(f, "I"),
        Term::Di => write!(f, "D"),
        Term::Union(a, b) => bin(a, b, PREC_UNION, "|", f),
        Term::Inter(a, b) => bin(a, b, PREC_INTER, "&", f),
        Term::Dagger(a, b) => bin(a, b, PREC_DAGGER, "$", f),
        Term::Comp(a, b) => bin(a, b, PREC_COMP, ";", f),
        Term::Compl(a) => {
            sub(a, PREC_POSTFIX, f)?;
            write!(f, "~")
        }
        Term::Proj(a, p) => {
            sub(a, PREC_POSTFIX, f)?;
            write!(f, "{p}")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f)
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// A syntax error with the byte offset where it was detected and the set
/// of tokens that would have been accepted there.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at byte {offset}: expected one of {}, found {found}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(char),
    Digit(u8),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Digit(d) => write!(f, "`{d}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

const ATOM_START: &[&str] = &["identifier", "`bot`", "`top`", "`I`", "`D`", "`(`"];
const AFTER_TERM: &[&str] = &["`|`", "`&`", "`$`", "`;`", "`~`", "`^`", "`[`"];

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut p = Parser {
            src,
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
        };
        p.bump()?;
        Ok(p)
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = self.src[self.pos..].chars().next().unwrap();
        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if c.is_ascii_digit() {
            self.pos += 1;
            self.tok = Tok::Digit(c as u8 - b'0');
        } else if "|&$;~^[](),".contains(c) {
            self.pos += 1;
            self.tok = Tok::Sym(c);
        } else {
            return Err(ParseError {
                offset: self.pos,
                expected: ATOM_START
                    .iter()
                    .chain(AFTER_TERM)
                    .map(|s| s.to_string())
                    .collect(),
                found: format!("`{c}`"),
            });
        }
        Ok(())
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.tok_start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tok.to_string(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else {
            let e = format!("`{c}`");
            Err(self.error(&[e.as_str()]))
        }
    }

    fn binary(
        &mut self,
        level: usize,
    ) -> Result<Term, ParseError> {
        const OPS: [char; 4] = ['|', '&', '$', ';'];
        if level == OPS.len() {
            return self.postfix();
        }
        let mut lhs = self.binary(level + 1)?;
        while self.tok == Tok::Sym(OPS[level]) {
            self.bump()?;
            let rhs = self.binary(level + 1)?;
            lhs = match OPS[level] {
                '|' => lhs.union(rhs),
                '&' => lhs.inter(rhs),
                '$' => lhs.dagger(rhs),
                _ => lhs.comp(rhs),
            };
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        loop {
            match self.tok {
                Tok::Sym('~') => {
                    self.bump()?;
                    t = t.compl();
                }
                Tok::Sym('^') => {
                    self.bump()?;
                    t = t.conv();
                }
                Tok::Sym('[') => {
                    self.bump()?;
                    let a = self.index()?;
                    self.expect_sym(',')?;
                    let b = self.index()?;
                    self.expect_sym(']')?;
                    t = t.proj(Projection::from_images(a, b).unwrap());
                }
                _ => return Ok(t),
            }
        }
    }

    fn index(&mut self) -> Result<u8, ParseError> {
        match self.tok {
            Tok::Digit(d @ (1 | 2)) => {
                self.bump()?;
                Ok(d)
            }
            _ => Err(self.error(&["`1`", "`2`"])),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let t = match &self.tok {
            Tok::Ident(s) => match s.as_str() {
                "bot" => Term::Bot,
                "top" => Term::Top,
                "I" => Term::Id,
                "D" => Term::Di,
                _ => Term::Var(s.clone()),
            },
            Tok::Sym('(') => {
                self.bump()?;
                let t = self.binary(0)?;
                if self.tok != Tok::Sym(')') {
                    let mut exp: Vec<&str> = AFTER_TERM.to_vec();
                    exp.push("`)`");
                    return Err(self.error(&exp));
                }
                t
            }
            _ => return Err(self.error(ATOM_START)),
        };
        self.bump()?;
        Ok(t)
    }
}

/// Parses a term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.binary(0)?;
    if p.tok != Tok::End {
        let mut exp: Vec<&str> = AFTER_TERM.to_vec();
        exp.push("end of input");
        return Err(p.error(&exp));
    }
    Ok(t)
}

impl std::str::FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}
