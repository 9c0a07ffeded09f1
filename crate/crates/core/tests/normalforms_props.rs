//! Each normal-form pass preserves semantics on its class, on 500 seeded
//! inputs per pass, checked exhaustively on small universes.

mod common;

use common::*;
use rand::RngCore;
use relfrag::normalforms::{
    collapse_constants, complement_dual, complement_measure, complement_nf, complement_nf_step,
    decompose_sigma_n, elim_bot_top, projection_measure, projection_nf, projection_nf_step, union_nf,
};
use relfrag::semantics::exhaustive_check;
use relfrag::{Projection, Term};

const INPUTS: usize = 500;
const BUDGET: u64 = 1 << 22;

fn agree(t1: &Term, t2: &Term, sizes: &[usize]) -> bool {
    exhaustive_check(t1, t2, sizes, BUDGET).unwrap().is_none()
}

/// Draws terms until `INPUTS` satisfy `keep`.
fn inputs(seed: u64, mut gen: impl FnMut(&mut dyn RngCore) -> Term, keep: impl Fn(&Term) -> bool) -> Vec<Term> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < INPUTS {
        tries += 1;
        assert!(tries < 200 * INPUTS, "generator rarely satisfies the class");
        let t = gen(&mut r);
        if keep(&t) {
            out.push(t);
        }
    }
    out
}

fn compl_above_comp(t: &Term) -> bool {
    match t {
        Term::Compl(a) => a.has_comp_or_dagger() || compl_above_comp(a),
        _ => t.children().into_iter().any(compl_above_comp),
    }
}

fn any_subterm(t: &Term, p: &dyn Fn(&Term) -> bool) -> bool {
    p(t) || t.children().into_iter().any(|c| any_subterm(c, p))
}

#[test]
fn complement_normal_form() {
    let ts = inputs(21, |r| gen_term(r, 4, &["a", "b"], Shape::ALL), |t| !compl_above_comp(t));
    for t in &ts {
        let nf = complement_nf(t).unwrap();
        assert!(agree(t, &nf, &[1, 2, 3]), "{t} -> {nf}");
        assert!(!any_subterm(&nf, &|s| matches!(s, Term::Compl(a) if !matches!(**a, Term::Var(_)))), "{nf}");
        let mut cur = t.clone();
        while let Some(next) = complement_nf_step(&cur) {
            assert!(complement_measure(&next) < complement_measure(&cur), "{cur} -> {next}");
            cur = next;
        }
        assert_eq!(cur, nf);
    }
}

#[test]
fn projection_normal_form() {
    let ts = inputs(22, |r| gen_term(r, 4, &["a", "b"], Shape::ALL), |_| true);
    for t in &ts {
        let nf = projection_nf(t);
        assert!(agree(t, &nf, &[1, 2, 3]), "{t} -> {nf}");
        assert!(
            !any_subterm(&nf, &|s| matches!(s, Term::Proj(a, p) if !matches!(**a, Term::Var(_)) || *p == Projection::Identity)),
            "{nf}"
        );
        let mut cur = t.clone();
        while let Some(next) = projection_nf_step(&cur) {
            assert!(projection_measure(&next) < projection_measure(&cur), "{cur} -> {next}");
            cur = next;
        }
    }
}

#[test]
fn bot_top_elimination() {
    let ts = inputs(23, |r| gen_term(r, 4, &["a", "b"], Shape::ALL), |_| true);
    for t in &ts {
        let e = elim_bot_top(t);
        assert!(agree(t, &e, &[1, 2, 3]), "{t} -> {e}");
        assert!(!any_subterm(&e, &|s| matches!(s, Term::Top | Term::Bot)));
    }
}

#[test]
fn union_normal_form() {
    let shape = Shape {
        union: true,
        inter: true,
        compl: false,
        comp: true,
        dagger: false,
        proj: false,
        constants: true,
    };
    let ts = inputs(24, |r| gen_term(r, 4, &["a", "b"], shape), |t| t.size() < 40);
    for t in &ts {
        let ds = union_nf(t).unwrap();
        assert!(!ds.is_empty());
        for d in &ds {
            assert!(!any_subterm(d, &|s| matches!(s, Term::Union(..))), "{d}");
        }
        let joined = ds.iter().cloned().reduce(Term::union).unwrap();
        assert!(agree(t, &joined, &[1, 2, 3]), "{t} -> {joined}");
    }
}

#[test]
fn union_normal_form_examples() {
    let p = |s: &str| relfrag::parse_term(s).unwrap();
    assert_eq!(union_nf(&p("(I | D) ; a")).unwrap(), vec![p("I ; a"), p("D ; a")]);
    assert_eq!(union_nf(&p("a & I")).unwrap(), vec![p("a & I")]);
    assert_eq!(union_nf(&p("(I | D) & (I | D)")).unwrap().len(), 4);
}

#[test]
fn constant_collapse_on_three_or_more_points() {
    let ts = inputs(25, |r| gen_term(r, 4, &["a"], Shape::ALL), |_| true);
    for t in &ts {
        let c = collapse_constants(t);
        assert!(agree(t, &c, &[3, 4]), "{t} -> {c}");
    }
}

#[test]
fn sigma_decomposition() {
    let ts = inputs(
        26,
        |r| gen_1vo(r, 7, "a", Shape::ALL),
        |t| {
            collapse_constants(t)
                .fragment_info()
                .sigma_level
                .is_some_and(|s| s >= 2)
        },
    );
    for t in &ts {
        let n = collapse_constants(t).fragment_info().sigma_level.unwrap();
        for level in [n, n + 1] {
            let (t0, t1) = decompose_sigma_n(t, level, "h").unwrap();
            assert!(t0.in_fragment(1, 1, relfrag::term::Side::Sigma), "{t0}");
            assert!(t1.in_fragment(level - 1, 1, relfrag::term::Side::Pi), "{t1}");
            let back = t0.substitute("h", &t1);
            assert!(agree(t, &back, &[3, 4]), "{t} -> {t0} / {t1}");
        }
    }
}

#[test]
fn complement_duality() {
    let ts = inputs(27, |r| gen_term(r, 4, &["a", "b"], Shape::ALL), |t| t.fragment_info().pi_level.is_some());
    for t in &ts {
        let n = t.fragment_info().pi_level.unwrap();
        let d = complement_dual(t).unwrap();
        assert!(d.fragment_info().sigma_level.is_some_and(|s| s <= n), "{t} -> {d}");
        assert!(agree(t, &d.clone().compl(), &[1, 2, 3]), "{t} -> {d}");
    }
    let p = |s: &str| relfrag::parse_term(s).unwrap();
    assert_eq!(complement_dual(&p("a $ b")).unwrap(), p("a~ ; b~"));
    assert_eq!(complement_dual(&p("I")).unwrap(), p("D"));
    assert_eq!(complement_dual(&p("a~")).unwrap(), p("a"));
}
