//! Normal forms for terms and the Σn decomposition.
//!
//! * Complement normal form pushes complements down to variables using
//!   De Morgan, double negation, the constant complements and
//!   `(ρ^π)⁻ = (ρ⁻)^π`. It requires that no complement sits above a
//!   composition or dagger.
//! * Projection normal form pushes projections down to variables.
//! * [`elim_bot_top`] replaces `⊥` by `I ∩ D` and `⊤` by `I ∪ D`.
//! * Union normal form distributes `∩` and `·` over `∪`.
//!
//! Both rewriting normal forms rewrite the outermost redex first. With
//! that strategy no redex has an ancestor of the same kind, and the
//! measures [`complement_measure`] and [`projection_measure`] (the total
//! size of the arguments of operator nodes not yet at a variable) strictly
//! decrease at every step.

use thiserror::Error;

use crate::constants::{classify_const, ConstClass};
use crate::term::{Projection, Term};

/// Default node ceiling for [`union_nf`].
pub const UNION_NF_CEILING: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NfError {
    #[error("complement applied above a composition or dagger: {0}")]
    ComplementAboveComposition(String),
    #[error("union normal form does not support the subterm {0}")]
    UnionNfUnsupported(String),
    #[error("union normal form exceeds the node ceiling of {0}")]
    NodeCeiling(usize),
    #[error("term is not in Sigma_{n}: {term}")]
    NotInSigma { n: u32, term: String },
    #[error("term is not in any Pi level: {0}")]
    NotInPi(String),
    #[error("level {0} is below 2")]
    LevelTooSmall(u32),
    #[error("term has {0} variable occurrences; at most 1 allowed")]
    TooManyOccurrences(usize),
    #[error("variable `{0}` is not fresh")]
    NotFresh(String),
}

fn has_compl_above_comp(t: &Term) -> bool {
    match t {
        Term::Compl(a) => a.has_comp_or_dagger() || has_compl_above_comp(a),
        _ => t.children().into_iter().any(has_compl_above_comp),
    }
}

/// Rewrites the outermost-leftmost complement redex, if any.
pub fn complement_nf_step(t: &Term) -> Option<Term> {
    if let Term::Compl(a) = t {
        let r = match a.as_ref() {
            Term::Top => Some(Term::Bot),
            Term::Bot => Some(Term::Top),
            Term::Id => Some(Term::Di),
            Term::Di => Some(Term::Id),
            Term::Union(x, y) => Some((**x).clone().compl().inter((**y).clone().compl())),
            Term::Inter(x, y) => Some((**x).clone().compl().union((**y).clone().compl())),
            Term::Compl(x) => Some((**x).clone()),
            Term::Proj(x, p) => Some((**x).clone().compl().proj(*p)),
            Term::Var(_) | Term::Comp(..) | Term::Dagger(..) => None,
        };
        if r.is_some() {
            return r;
        }
    }
    rewrite_first_child(t, complement_nf_step)
}

fn rewrite_first_child(t: &Term, step: fn(&Term) -> Option<Term>) -> Option<Term> {
    let (head, children) = t.split()?;
    for (i, c) in children.iter().enumerate() {
        if let Some(new) = step(c) {
            let args = children
                .iter()
                .enumerate()
                .map(|(j, c)| if i == j { new.clone() } else { (*c).clone() })
                .collect();
            return Some(head.build(args));
        }
    }
    None
}

/// Sum of argument sizes over complement nodes whose argument is not a
/// variable.
pub fn complement_measure(t: &Term) -> usize {
    let own = match t {
        Term::Compl(a) if !matches!(**a, Term::Var(_)) => a.size(),
        _ => 0,
    };
    own + t.children().into_iter().map(complement_measure).sum::<usize>()
}

/// Complement normal form: complements only on variables.
pub fn complement_nf(t: &Term) -> Result<Term, NfError> {
    if has_compl_above_comp(t) {
        return Err(NfError::ComplementAboveComposition(t.to_string()));
    }
    let mut cur = t.clone();
    while let Some(next) = complement_nf_step(&cur) {
        cur = next;
    }
    Ok(cur)
}

/// Rewrites the outermost-leftmost projection redex, if any.
pub fn projection_nf_step(t: &Term) -> Option<Term> {
    if let Term::Proj(a, p) = t {
        let p = *p;
        let conv = |x: &Term| x.clone().conv();
        let r = match (a.as_ref(), p) {
            (x, Projection::Identity) => Some(x.clone()),
            (Term::Var(_), _) => None,
            (Term::Top, _) => Some(Term::Top),
            (Term::Bot, _) => Some(Term::Bot),
            (Term::Id, p) => Some(if p.is_injective() { Term::Id } else { Term::Top }),
            (Term::Di, p) => Some(if p.is_injective() { Term::Di } else { Term::Bot }),
            (Term::Union(x, y), p) => Some((**x).clone().proj(p).union((**y).clone().proj(p))),
            (Term::Inter(x, y), p) => Some((**x).clone().proj(p).inter((**y).clone().proj(p))),
            (Term::Compl(x), p) => Some((**x).clone().proj(p).compl()),
            (Term::Proj(x, q), p) => Some((**x).clone().proj(q.then(p))),
            (Term::Comp(x, y), Projection::Swap) => Some(conv(y).comp(conv(x))),
            (Term::Comp(x, y), Projection::First) => {
                Some((**x).clone().inter(conv(y)).comp(Term::Top))
            }
            (Term::Comp(x, y), Projection::Second) => {
                Some(Term::Top.comp(conv(x).inter((**y).clone())))
            }
            (Term::Dagger(x, y), Projection::Swap) => Some(conv(y).dagger(conv(x))),
            (Term::Dagger(x, y), Projection::First) => {
                Some((**x).clone().union(conv(y)).dagger(Term::Bot))
            }
            (Term::Dagger(x, y), Projection::Second) => {
                Some(Term::Bot.dagger(conv(x).union((**y).clone())))
            }
        };
        if r.is_some() {
            return r;
        }
    }
    rewrite_first_child(t, projection_nf_step)
}

/// Sum of argument sizes over projection nodes whose argument is not a
/// variable, plus the number of identity projections.
pub fn projection_measure(t: &Term) -> usize {
    let own = match t {
        Term::Proj(a, p) => {
            let arg = if matches!(**a, Term::Var(_)) { 0 } else { a.size() };
            arg + usize::from(*p == Projection::Identity)
        }
        _ => 0,
    };
    own + t.children().into_iter().map(projection_measure).sum::<usize>()
}

/// Projection normal form: projections only on variables, none of them
/// the identity.
pub fn projection_nf(t: &Term) -> Term {
    let mut cur = t.clone();
    while let Some(next) = projection_nf_step(&cur) {
        cur = next;
    }
    cur
}

/// Replaces `⊥` by `I ∩ D` and `⊤` by `I ∪ D`.
pub fn elim_bot_top(t: &Term) -> Term {
    match t {
        Term::Bot => Term::Id.inter(Term::Di),
        Term::Top => Term::Id.union(Term::Di),
        _ => match t.split() {
            None => t.clone(),
            Some((h, cs)) => h.build(cs.into_iter().map(elim_bot_top).collect()),
        },
    }
}

/// Whether `t` is treated as an atom by [`union_nf`]: a constant, or a
/// variable under any complements and projections.
fn is_literal(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Id | Term::Di | Term::Top | Term::Bot => true,
        Term::Compl(a) | Term::Proj(a, _) => matches!(**a, Term::Var(_)) || (is_literal(a) && a.vo() == 1),
        _ => false,
    }
}

/// Union normal form: a list of `∪`-free terms whose union is `t`.
pub fn union_nf(t: &Term) -> Result<Vec<Term>, NfError> {
    union_nf_with_ceiling(t, UNION_NF_CEILING)
}

pub fn union_nf_with_ceiling(t: &Term, ceiling: usize) -> Result<Vec<Term>, NfError> {
    fn go(t: &Term, ceiling: usize) -> Result<Vec<Term>, NfError> {
        if is_literal(t) {
            return Ok(vec![t.clone()]);
        }
        let product = |a: &Term, b: &Term, mk: fn(Term, Term) -> Term| -> Result<Vec<Term>, NfError> {
            let xs = go(a, ceiling)?;
            let ys = go(b, ceiling)?;
            let nodes: usize = xs.iter().map(Term::size).sum::<usize>() * ys.len()
                + ys.iter().map(Term::size).sum::<usize>() * xs.len();
            if nodes > ceiling {
                return Err(NfError::NodeCeiling(ceiling));
            }
            Ok(xs
                .iter()
                .flat_map(|x| ys.iter().map(move |y| mk(x.clone(), y.clone())))
                .collect())
        };
        match t {
            Term::Union(a, b) => {
                let mut xs = go(a, ceiling)?;
                xs.extend(go(b, ceiling)?);
                if xs.iter().map(Term::size).sum::<usize>() > ceiling {
                    return Err(NfError::NodeCeiling(ceiling));
                }
                Ok(xs)
            }
            Term::Inter(a, b) => product(a, b, Term::inter),
            Term::Comp(a, b) => product(a, b, Term::comp),
            _ => Err(NfError::UnionNfUnsupported(t.to_string())),
        }
    }
    go(t, ceiling)
}

/// Replaces every variable-free subterm by the representative of its
/// constant class.
pub fn collapse_constants(t: &Term) -> Term {
    if t.vo() == 0 {
        return classify_const(t)
            .expect("variable-free")
            .representative();
    }
    match t.split() {
        None => t.clone(),
        Some((h, cs)) => h.build(cs.into_iter().map(collapse_constants).collect()),
    }
}

/// Splits `t ∈ Σn` (`n ≥ 2`, at most one variable occurrence) as
/// `t ∼ t0[t1/a]` on structures with at least three elements, with
/// `t0 ∈ Σ1` and `t1 ∈ Π(n-1)`, both with at most one variable occurrence.
///
/// Variable-free subterms are first collapsed to their class
/// representatives, and the level of `t` is measured after collapsing (a
/// constant such as `D † D` counts as level 0). The split then descends through `∪`, `∩`, `·` and
/// projections along the child holding the variable until it reaches a
/// subterm in `Π(n-1)`.
pub fn decompose_sigma_n(t: &Term, n: u32, a: &str) -> Result<(Term, Term), NfError> {
    if n < 2 {
        return Err(NfError::LevelTooSmall(n));
    }
    if t.vo() > 1 {
        return Err(NfError::TooManyOccurrences(t.vo()));
    }
    if t.occurrences(a) > 0 {
        return Err(NfError::NotFresh(a.to_string()));
    }
    let collapsed = collapse_constants(t);
    if !collapsed.fragment_info().sigma_level.is_some_and(|s| s <= n) {
        return Err(NfError::NotInSigma {
            n,
            term: t.to_string(),
        });
    }
    Ok(split_sigma(&collapsed, n, a))
}

fn split_sigma(t: &Term, n: u32, a: &str) -> (Term, Term) {
    if t.vo() == 0 {
        return (t.clone(), Term::var(a));
    }
    let info = t.fragment_info();
    if info.sigma_level.is_some_and(|s| s < n) {
        if n > 2 {
            return split_sigma(t, n - 1, a);
        }
        // t ∈ Σ1: keep it whole and pass its variable through.
        let x = t.vars().into_iter().next().unwrap();
        return (t.substitute(&x, &Term::var(a)), Term::var(x));
    }
    if info.pi_level.is_some_and(|p| p < n) {
        return (Term::var(a), t.clone());
    }
    let (head, children) = t.split().expect("a term outside Π(n-1) is not a leaf");
    let i = children
        .iter()
        .position(|c| c.vo() == 1)
        .expect("one child holds the variable");
    let (c0, c1) = split_sigma(children[i], n, a);
    let args = children
        .iter()
        .enumerate()
        .map(|(j, c)| if j == i { c0.clone() } else { (*c).clone() })
        .collect();
    (head.build(args), c1)
}

/// For a term in some Π level, a term `ρ` in the dual Σ level with
/// `t ∼ ρ⁻`: the complement of `t` pushed down to variables, using also
/// `(ρ·υ)⁻ = ρ⁻ † υ⁻` and `(ρ†υ)⁻ = ρ⁻ · υ⁻`.
pub fn complement_dual(t: &Term) -> Result<Term, NfError> {
    if t.fragment_info().pi_level.is_none() {
        return Err(NfError::NotInPi(t.to_string()));
    }
    Ok(push_negation(t, true))
}

fn push_negation(t: &Term, neg: bool) -> Term {
    let bin = |a: &Term, b: &Term, pos: fn(Term, Term) -> Term, dual: fn(Term, Term) -> Term| {
        let f = if neg { dual } else { pos };
        f(push_negation(a, neg), push_negation(b, neg))
    };
    match t {
        Term::Var(_) => {
            if neg {
                t.clone().compl()
            } else {
                t.clone()
            }
        }
        Term::Top | Term::Bot | Term::Id | Term::Di => {
            let c = classify_const(t).unwrap();
            let c = if neg {
                crate::constants::cayley(crate::constants::CayleyOp::Compl, c, None).unwrap()
            } else {
                c
            };
            ConstClass::representative(c)
        }
        Term::Union(a, b) => bin(a, b, Term::union, Term::inter),
        Term::Inter(a, b) => bin(a, b, Term::inter, Term::union),
        Term::Comp(a, b) => bin(a, b, Term::comp, Term::dagger),
        Term::Dagger(a, b) => bin(a, b, Term::dagger, Term::comp),
        Term::Compl(a) => push_negation(a, !neg),
        Term::Proj(a, p) => push_negation(a, neg).proj(*p),
    }
}
