//! Words, letter reduction and the rewriting system, checked against
//! direct matrix computations.

mod common;

use common::*;
use rand::{Rng, RngCore};
use relfrag::rewrite::{figure1_rules, RewriteSystem};
use relfrag::semantics::{eval, exhaustive_check, Packed, Rel};
use relfrag::term::Head;
use relfrag::word::{reduce_letter, shortlex_compare, GeneralLetter, Letter, Word};
use relfrag::{Structure, Term};

/// A letter applied to a matrix, straight from its definition.
fn naive_letter(l: Letter, m: &Matrix) -> Matrix {
    let n = m.len();
    let mut out = vec![vec![false; n]; n];
    for x in 0..n {
        for y in 0..n {
            out[x][y] = match l {
                Letter::CapI => m[x][y] && x == y,
                Letter::CapD => m[x][y] && x != y,
                Letter::DotD => (0..n).any(|z| m[x][z] && z != y),
                Letter::Conv => m[y][x],
            };
        }
    }
    out
}

fn naive_word(w: &Word, m: &Matrix) -> Matrix {
    w.letters().iter().rev().fold(m.clone(), |acc, &l| naive_letter(l, &acc))
}

fn to_rel(m: &Matrix) -> Rel {
    let n = m.len();
    Rel::from_pairs(n, (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| m[x][y]))
}

fn random_word(r: &mut dyn RngCore, max_len: usize) -> Word {
    let len = r.gen_range(0..=max_len);
    Word((0..len).map(|_| Letter::from_index(r.gen_range(0..4))).collect())
}

#[test]
fn word_application_matches_definitions() {
    let mut r = rng(31);
    let a = Term::var("a");
    for _ in 0..2_000 {
        let w = random_word(&mut r, 10);
        let n = r.gen_range(1..=6);
        let m = random_matrix(&mut r, n);
        let want = to_rel(&naive_word(&w, &m));
        let s = Structure::new(n).with("a", to_rel(&m));
        assert_eq!(eval(&w.apply(&a), &s).unwrap(), want, "{w}");
        let p = Packed::new(n);
        assert_eq!(Rel::from_packed(n, w.apply_packed(&p, to_rel(&m).to_packed())), want, "{w}");
    }
}

#[test]
fn word_parsing_round_trips() {
    let mut r = rng(32);
    for _ in 0..1_000 {
        let w = random_word(&mut r, 15);
        assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }
    assert!(Word::parse("iI xx").is_err());
}

fn random_general_letter(r: &mut dyn RngCore) -> GeneralLetter {
    let filler = vec![gen_term(r, 2, &[], Shape::ALL)];
    match r.gen_range(0..5) {
        0 => GeneralLetter::new(Head::Inter, 0, filler),
        1 => GeneralLetter::new(Head::Inter, 1, filler),
        2 => GeneralLetter::new(Head::Comp, 0, filler),
        3 => GeneralLetter::new(Head::Comp, 1, filler),
        _ => GeneralLetter::new(Head::Proj(PROJECTIONS[r.gen_range(0..4)]), 0, vec![]),
    }
}

#[test]
fn letter_reduction_is_sound_on_three_or_more_points() {
    let mut r = rng(33);
    let a = Term::var("a");
    for _ in 0..500 {
        let x = random_general_letter(&mut r);
        let w = reduce_letter(&x).unwrap();
        let lhs = x.apply(a.clone());
        let rhs = w.apply(&a);
        assert!(exhaustive_check(&lhs, &rhs, &[3, 4], 1 << 20).unwrap().is_none(), "{lhs} vs {rhs}");
    }
}

#[test]
fn rewriting_steps_replace_a_large_side_by_its_small_side() {
    let sys = RewriteSystem::figure1();
    let mut r = rng(34);
    for _ in 0..2_000 {
        let w = random_word(&mut r, 16);
        let (nf, steps) = sys.normalize(&w);
        let mut cur = w.clone();
        for s in &steps {
            let rule = &sys.rules()[s.rule];
            let (p, k) = (s.position, rule.large.len());
            assert_eq!(&cur.0[p..p + k], rule.large.letters(), "step {s:?} on {cur}");
            let mut next = cur.0[..p].to_vec();
            next.extend_from_slice(rule.small.letters());
            next.extend_from_slice(&cur.0[p + k..]);
            assert_eq!(next, s.result.0);
            cur = s.result.clone();
        }
        assert_eq!(cur, nf);
        assert!(sys.is_irreducible(&nf));
        assert!(sys.rewrite_step(&nf).is_none());
        assert_ne!(shortlex_compare(nf.letters(), w.letters()), std::cmp::Ordering::Greater);
    }
}

#[test]
fn rules_are_oriented_and_hold_on_a_panel() {
    let mut r = rng(35);
    let panels: Vec<Matrix> = (0..2_000).map(|i| random_matrix(&mut r, 5 + i % 3)).collect();
    for rule in figure1_rules() {
        assert_eq!(shortlex_compare(rule.small.letters(), rule.large.letters()), std::cmp::Ordering::Less);
        for m in &panels {
            assert_eq!(naive_word(&rule.small, m), naive_word(&rule.large, m), "{rule}");
        }
    }
}

#[test]
fn normal_forms_agree_on_a_random_panel() {
    let sys = RewriteSystem::figure1();
    let mut r = rng(36);
    let p = Packed::new(5);
    let panel: Vec<u64> = (0..10_000).map(|_| r.next_u64() & p.full).collect();
    for _ in 0..200 {
        let w = random_word(&mut r, 12);
        let (nf, _) = sys.normalize(&w);
        for &rel in &panel {
            assert_eq!(w.apply_packed(&p, rel), nf.apply_packed(&p, rel), "{w} -> {nf}");
        }
    }
}
