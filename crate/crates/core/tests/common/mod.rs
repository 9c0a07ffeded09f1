//! Independent oracles and generators shared by the integration tests.
//!
//! The evaluator here works on `Vec<Vec<bool>>` matrices straight from the
//! set-theoretic definitions and shares no code with the library's
//! evaluators.

#![allow(dead_code)]

pub mod grammar;

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relfrag::{Projection, Structure, Term};

pub type Matrix = Vec<Vec<bool>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which constructors a generated term may use.
#[derive(Clone, Copy)]
pub struct Shape {
    pub union: bool,
    pub inter: bool,
    pub compl: bool,
    pub comp: bool,
    pub dagger: bool,
    pub proj: bool,
    pub constants: bool,
}

impl Shape {
    pub const ALL: Shape = Shape {
        union: true,
        inter: true,
        compl: true,
        comp: true,
        dagger: true,
        proj: true,
        constants: true,
    };
}

pub const PROJECTIONS: [Projection; 4] = [
    Projection::Identity,
    Projection::Swap,
    Projection::First,
    Projection::Second,
];

/// A random term of depth at most `depth` over `vars`.
pub fn gen_term(r: &mut dyn RngCore, depth: usize, vars: &[&str], shape: Shape) -> Term {
    let leaf = |r: &mut dyn RngCore| -> Term {
        let k = if shape.constants { r.gen_range(0..vars.len() + 4) } else { r.gen_range(0..vars.len()) };
        match k.checked_sub(vars.len()) {
            None => Term::var(vars[k]),
            Some(0) => Term::Bot,
            Some(1) => Term::Top,
            Some(2) => Term::Id,
            _ => Term::Di,
        }
    };
    if depth == 0 || r.gen_bool(0.25) {
        return leaf(r);
    }
    loop {
        let sub = |r: &mut dyn RngCore| gen_term(r, depth - 1, vars, shape);
        let t = match r.gen_range(0..6) {
            0 if shape.union => sub(r).union(sub(r)),
            1 if shape.inter => sub(r).inter(sub(r)),
            2 if shape.compl => sub(r).compl(),
            3 if shape.comp => sub(r).comp(sub(r)),
            4 if shape.dagger => sub(r).dagger(sub(r)),
            5 if shape.proj => {
                let p = PROJECTIONS[r.gen_range(0..4)];
                sub(r).proj(p)
            }
            _ => continue,
        };
        return t;
    }
}

/// A random term with exactly one occurrence of `var`, built from the
/// allowed constructors and constant fillers.
pub fn gen_1vo(r: &mut dyn RngCore, depth: usize, var: &str, shape: Shape) -> Term {
    if depth == 0 || r.gen_bool(0.2) {
        return Term::var(var);
    }
    let filler = |r: &mut dyn RngCore| {
        gen_term(
            r,
            1,
            &[],
            Shape {
                constants: true,
                ..shape
            },
        )
    };
    loop {
        let inner = gen_1vo(r, depth - 1, var, shape);
        let left = r.gen_bool(0.5);
        let pair = |a: Term, b: Term| if left { (a, b) } else { (b, a) };
        let t = match r.gen_range(0..6) {
            0 if shape.union => {
                let (a, b) = pair(inner, filler(r));
                a.union(b)
            }
            1 if shape.inter => {
                let (a, b) = pair(inner, filler(r));
                a.inter(b)
            }
            2 if shape.compl => inner.compl(),
            3 if shape.comp => {
                let (a, b) = pair(inner, filler(r));
                a.comp(b)
            }
            4 if shape.dagger => {
                let (a, b) = pair(inner, filler(r));
                a.dagger(b)
            }
            5 if shape.proj => inner.proj(PROJECTIONS[r.gen_range(0..4)]),
            _ => continue,
        };
        return t;
    }
}

/// Evaluates `t` from the set-theoretic definitions.
pub fn naive_eval(t: &Term, n: usize, env: &BTreeMap<String, Matrix>) -> Matrix {
    let full = |f: &dyn Fn(usize, usize) -> bool| -> Matrix {
        (0..n).map(|x| (0..n).map(|y| f(x, y)).collect()).collect()
    };
    match t {
        Term::Var(v) => env[v].clone(),
        Term::Bot => full(&|_, _| false),
        Term::Top => full(&|_, _| true),
        Term::Id => full(&|x, y| x == y),
        Term::Di => full(&|x, y| x != y),
        Term::Union(a, b) | Term::Inter(a, b) | Term::Comp(a, b) | Term::Dagger(a, b) => {
            let (ra, rb) = (naive_eval(a, n, env), naive_eval(b, n, env));
            match t {
                Term::Union(..) => full(&|x, y| ra[x][y] || rb[x][y]),
                Term::Inter(..) => full(&|x, y| ra[x][y] && rb[x][y]),
                Term::Comp(..) => full(&|x, y| (0..n).any(|z| ra[x][z] && rb[z][y])),
                _ => full(&|x, y| (0..n).all(|z| ra[x][z] || rb[z][y])),
            }
        }
        Term::Compl(a) => {
            let ra = naive_eval(a, n, env);
            full(&|x, y| !ra[x][y])
        }
        Term::Proj(a, p) => {
            let ra = naive_eval(a, n, env);
            let (i, j) = p.images();
            full(&|x, y| {
                let pick = |k: u8| if k == 1 { x } else { y };
                ra[pick(i)][pick(j)]
            })
        }
    }
}

pub fn to_matrices(s: &Structure) -> BTreeMap<String, Matrix> {
    s.relations
        .iter()
        .map(|(k, r)| {
            let m = (0..s.size).map(|x| (0..s.size).map(|y| r.contains(x, y)).collect()).collect();
            (k.clone(), m)
        })
        .collect()
}

/// The `index`-th assignment of matrices to `vars` on `n` points.
pub fn matrices_at(vars: &[String], n: usize, index: u64) -> BTreeMap<String, Matrix> {
    let mut env = BTreeMap::new();
    let mut bit = 0;
    for v in vars {
        let mut m = vec![vec![false; n]; n];
        for row in m.iter_mut() {
            for cell in row.iter_mut() {
                *cell = (index >> bit) & 1 == 1;
                bit += 1;
            }
        }
        env.insert(v.clone(), m);
    }
    env
}

pub fn joint_vars(ts: &[&Term]) -> Vec<String> {
    let mut vs: Vec<String> = ts.iter().flat_map(|t| t.vars()).collect();
    vs.sort();
    vs.dedup();
    vs
}

/// Whether `t1` and `t2` agree on every structure of each size, checked
/// naively. Sizes needing more than `2^22` structures are skipped.
pub fn naive_agree(t1: &Term, t2: &Term, sizes: &[usize]) -> bool {
    let vars = joint_vars(&[t1, t2]);
    sizes.iter().all(|&n| {
        let bits = vars.len() * n * n;
        assert!(bits <= 22, "naive scan too large");
        (0..1u64 << bits).all(|i| {
            let env = matrices_at(&vars, n, i);
            naive_eval(t1, n, &env) == naive_eval(t2, n, &env)
        })
    })
}

/// A random matrix with independent entries.
pub fn random_matrix(r: &mut dyn RngCore, n: usize) -> Matrix {
    (0..n).map(|_| (0..n).map(|_| r.gen_bool(0.5)).collect()).collect()
}
