//! First-order translation of terms and prover exports.
//!
//! [`standard_translation`] maps a term and two point variables `u`, `v` to
//! a formula true exactly when `(u, v)` is in the denotation of the term.
//! Point variables come in two families, `x` and `y`. The free pair is
//! usually `x0, y0`. A composition or dagger binds a fresh intermediate
//! point: from the `x` family when its left operand is variable-free and
//! its right operand is not, and from the `y` family otherwise. Indices
//! are allocated in pre-order, starting above the free variables, so the
//! output is byte-for-byte reproducible.
//!
//! [`export_equation_smt2`] and [`export_equation_tptp`] emit proof
//! obligations for `lhs = rhs` over structures with at least `min_size`
//! elements:
//!
//! ```text
//! (set-logic UF)
//! (declare-sort U 0)
//! (declare-fun a (U U) Bool)            ; one per variable
//! (assert (exists ((d1 U) .. (dm U)) (distinct d1 .. dm)))   ; if m > 1
//! (assert (not (forall ((x0 U) (y0 U)) (= LHS RHS))))
//! (check-sat)
//! ```
//!
//! An `unsat` answer certifies the equation. The TPTP form has an axiom
//! `fof(at_least_m, axiom, ?[D1,..,Dm]: (D1 != D2 & ..))` and a conjecture
//! `fof(equation, conjecture, ![X0,Y0]: (LHS <=> RHS))`; a proof certifies
//! the equation.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::term::Term;
use crate::word::Word;

/// The two families of point variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    X,
    Y,
}

/// A point variable `x_i` or `y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FoVar {
    pub family: Family,
    pub index: u32,
}

impl FoVar {
    pub fn x(index: u32) -> FoVar {
        FoVar {
            family: Family::X,
            index,
        }
    }

    pub fn y(index: u32) -> FoVar {
        FoVar {
            family: Family::Y,
            index,
        }
    }
}

impl fmt::Display for FoVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::X => write!(f, "x{}", self.index),
            Family::Y => write!(f, "y{}", self.index),
        }
    }
}

/// First-order formulas over binary predicates and equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FoFormula {
    True,
    False,
    Atom(String, FoVar, FoVar),
    Eq(FoVar, FoVar),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Iff(Box<FoFormula>, Box<FoFormula>),
    Exists(FoVar, Box<FoFormula>),
    Forall(FoVar, Box<FoFormula>),
}

impl FoFormula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> FoFormula {
        FoFormula::Not(Box::new(self))
    }

    pub fn and(self, o: FoFormula) -> FoFormula {
        FoFormula::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: FoFormula) -> FoFormula {
        FoFormula::Or(Box::new(self), Box::new(o))
    }

    pub fn iff(self, o: FoFormula) -> FoFormula {
        FoFormula::Iff(Box::new(self), Box::new(o))
    }

    pub fn exists(v: FoVar, body: FoFormula) -> FoFormula {
        FoFormula::Exists(v, Box::new(body))
    }

    pub fn forall(v: FoVar, body: FoFormula) -> FoFormula {
        FoFormula::Forall(v, Box::new(body))
    }

    pub fn neq(u: FoVar, v: FoVar) -> FoFormula {
        FoFormula::Eq(u, v).not()
    }

    /// Free point variables.
    pub fn free_vars(&self) -> BTreeSet<FoVar> {
        fn go(f: &FoFormula, bound: &mut Vec<FoVar>, out: &mut BTreeSet<FoVar>) {
            let mut add = |v: &FoVar, bound: &Vec<FoVar>| {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            };
            match f {
                FoFormula::True | FoFormula::False => {}
                FoFormula::Atom(_, u, v) | FoFormula::Eq(u, v) => {
                    add(u, bound);
                    add(v, bound);
                }
                FoFormula::Not(a) => go(a, bound, out),
                FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                FoFormula::Exists(v, a) | FoFormula::Forall(v, a) => {
                    bound.push(*v);
                    go(a, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Predicate symbols in first-occurrence order.
    pub fn predicates(&self) -> Vec<String> {
        fn go(f: &FoFormula, out: &mut Vec<String>) {
            match f {
                FoFormula::Atom(p, ..) => {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
                FoFormula::Not(a) | FoFormula::Exists(_, a) | FoFormula::Forall(_, a) => go(a, out),
                FoFormula::And(a, b) | FoFormula::Or(a, b) | FoFormula::Iff(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoFormula::True => write!(f, "True"),
            FoFormula::False => write!(f, "False"),
            FoFormula::Atom(p, u, v) => write!(f, "{p}({u}, {v})"),
            FoFormula::Eq(u, v) => write!(f, "{u} = {v}"),
            FoFormula::Not(a) => match a.as_ref() {
                FoFormula::Eq(u, v) => write!(f, "{u} != {v}"),
                _ => write!(f, "!({a})"),
            },
            FoFormula::And(a, b) => write!(f, "({a} & {b})"),
            FoFormula::Or(a, b) => write!(f, "({a} | {b})"),
            FoFormula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            FoFormula::Exists(v, a) => write!(f, "(exists {v}, {a})"),
            FoFormula::Forall(v, a) => write!(f, "(forall {v}, {a})"),
        }
    }
}

/// Allocator of fresh point variables, one counter per family.
#[derive(Debug, Clone)]
struct Pool {
    next_x: u32,
    next_y: u32,
}

impl Pool {
    fn above(vars: &[FoVar]) -> Pool {
        let next = |fam| {
            vars.iter()
                .filter(|v| v.family == fam)
                .map(|v| v.index + 1)
                .max()
                .unwrap_or(0)
                .max(1)
        };
        Pool {
            next_x: next(Family::X),
            next_y: next(Family::Y),
        }
    }

    fn fresh(&mut self, family: Family) -> FoVar {
        let slot = match family {
            Family::X => &mut self.next_x,
            Family::Y => &mut self.next_y,
        };
        let v = FoVar {
            family,
            index: *slot,
        };
        *slot += 1;
        v
    }
}

/// The standard translation of `t` at the points `(x, y)`, simplified by
/// [`simplify`].
pub fn standard_translation(t: &Term, x: FoVar, y: FoVar) -> FoFormula {
    let mut pool = Pool::above(&[x, y]);
    simplify(&translate(t, x, y, &mut pool))
}

/// The standard translation without simplification.
pub fn raw_translation(t: &Term, x: FoVar, y: FoVar) -> FoFormula {
    let mut pool = Pool::above(&[x, y]);
    translate(t, x, y, &mut pool)
}

fn translate(t: &Term, u: FoVar, v: FoVar, pool: &mut Pool) -> FoFormula {
    match t {
        Term::Var(a) => FoFormula::Atom(a.clone(), u, v),
        Term::Top => FoFormula::True,
        Term::Bot => FoFormula::False,
        Term::Id => FoFormula::Eq(u, v),
        Term::Di => FoFormula::neq(u, v),
        Term::Union(a, b) => translate(a, u, v, pool).or(translate(b, u, v, pool)),
        Term::Inter(a, b) => translate(a, u, v, pool).and(translate(b, u, v, pool)),
        Term::Compl(a) => translate(a, u, v, pool).not(),
        Term::Comp(a, b) | Term::Dagger(a, b) => {
            let family = if a.vo() == 0 && b.vo() > 0 {
                Family::X
            } else {
                Family::Y
            };
            let z = pool.fresh(family);
            let l = translate(a, u, z, pool);
            let r = translate(b, z, v, pool);
            if matches!(t, Term::Comp(..)) {
                FoFormula::exists(z, l.and(r))
            } else {
                FoFormula::forall(z, l.or(r))
            }
        }
        Term::Proj(a, p) => {
            let pick = |i: u8| if i == 1 { u } else { v };
            let (i, j) = p.images();
            translate(a, pick(i), pick(j), pool)
        }
    }
}

/// Removes `True` and `False` from inside a formula. The result is
/// `True`, `False`, or a formula mentioning neither. Quantifiers over
/// constant bodies are dropped (domains are nonempty).
pub fn simplify(f: &FoFormula) -> FoFormula {
    use FoFormula::*;
    match f {
        True | False | Atom(..) | Eq(..) => f.clone(),
        Not(a) => match simplify(a) {
            True => False,
            False => True,
            a => a.not(),
        },
        And(a, b) => match (simplify(a), simplify(b)) {
            (False, _) | (_, False) => False,
            (True, x) | (x, True) => x,
            (a, b) => a.and(b),
        },
        Or(a, b) => match (simplify(a), simplify(b)) {
            (True, _) | (_, True) => True,
            (False, x) | (x, False) => x,
            (a, b) => a.or(b),
        },
        Iff(a, b) => match (simplify(a), simplify(b)) {
            (True, x) | (x, True) => x,
            (False, x) | (x, False) => simplify(&x.not()),
            (a, b) => a.iff(b),
        },
        Exists(v, a) => match simplify(a) {
            c @ (True | False) => c,
            a => FoFormula::exists(*v, a),
        },
        Forall(v, a) => match simplify(a) {
            c @ (True | False) => c,
            a => FoFormula::forall(*v, a),
        },
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_equivalent(f: &FoFormula, g: &FoFormula) -> bool {
    fn var_eq(a: &FoVar, b: &FoVar, env: &[(FoVar, FoVar)]) -> bool {
        // The innermost binder of either variable decides.
        for (l, r) in env.iter().rev() {
            if l == a || r == b {
                return l == a && r == b;
            }
        }
        a == b
    }
    fn go(f: &FoFormula, g: &FoFormula, env: &mut Vec<(FoVar, FoVar)>) -> bool {
        use FoFormula::*;
        match (f, g) {
            (True, True) | (False, False) => true,
            (Atom(p, u, v), Atom(q, s, t)) => p == q && var_eq(u, s, env) && var_eq(v, t, env),
            (Eq(u, v), Eq(s, t)) => var_eq(u, s, env) && var_eq(v, t, env),
            (Not(a), Not(b)) => go(a, b, env),
            (And(a, b), And(c, d)) | (Or(a, b), Or(c, d)) | (Iff(a, b), Iff(c, d)) => {
                go(a, c, env) && go(b, d, env)
            }
            (Exists(u, a), Exists(v, b)) | (Forall(u, a), Forall(v, b)) => {
                env.push((*u, *v));
                let r = go(a, b, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(f, g, &mut Vec::new())
}

const SMT_RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "=>", "ite", "let", "par", "as", "exists", "forall", "match",
    "true", "false", "distinct", "U", "Bool",
];

/// Predicate symbol names safe against the point-variable names and the
/// target language's reserved words.
fn predicate_names(preds: &[String], reserved: impl Fn(&str) -> bool) -> HashMap<String, String> {
    let clashes = |p: &str| {
        reserved(p)
            || (p.len() > 1
                && matches!(p.as_bytes()[0], b'x' | b'y' | b'd')
                && p[1..].bytes().all(|b| b.is_ascii_digit()))
    };
    let mut taken: BTreeSet<String> = preds.iter().filter(|p| !clashes(p)).cloned().collect();
    preds
        .iter()
        .map(|p| {
            if !clashes(p) {
                return (p.clone(), p.clone());
            }
            let mut name = format!("rel_{p}");
            while taken.contains(&name) {
                name.insert(0, '_');
            }
            taken.insert(name.clone());
            (p.clone(), name)
        })
        .collect()
}

fn smt(f: &FoFormula, names: &HashMap<String, String>, out: &mut String) {
    use FoFormula::*;
    match f {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Atom(p, u, v) => {
            let _ = write!(out, "({} {u} {v})", names[p]);
        }
        Eq(u, v) => {
            let _ = write!(out, "(= {u} {v})");
        }
        Not(a) => {
            out.push_str("(not ");
            smt(a, names, out);
            out.push(')');
        }
        And(a, b) | Or(a, b) | Iff(a, b) => {
            out.push_str(match f {
                And(..) => "(and ",
                Or(..) => "(or ",
                _ => "(= ",
            });
            smt(a, names, out);
            out.push(' ');
            smt(b, names, out);
            out.push(')');
        }
        Exists(v, a) | Forall(v, a) => {
            let q = if matches!(f, Exists(..)) { "exists" } else { "forall" };
            let _ = write!(out, "({q} (({v} U)) ");
            smt(a, names, out);
            out.push(')');
        }
    }
}

fn equation_formulas(lhs: &Term, rhs: &Term) -> (FoFormula, FoFormula, Vec<String>) {
    let (x0, y0) = (FoVar::x(0), FoVar::y(0));
    let l = standard_translation(lhs, x0, y0);
    let r = standard_translation(rhs, x0, y0);
    let vars: BTreeSet<String> = lhs.vars().union(&rhs.vars()).cloned().collect();
    (l, r, vars.into_iter().collect())
}

/// SMT-LIB 2 script whose unsatisfiability certifies `lhs = rhs` on all
/// structures with at least `min_size` elements.
pub fn export_equation_smt2(lhs: &Term, rhs: &Term, min_size: usize) -> String {
    let (l, r, preds) = equation_formulas(lhs, rhs);
    let names = predicate_names(&preds, |p| SMT_RESERVED.contains(&p));
    let mut out = String::new();
    let _ = writeln!(out, "; {lhs} = {rhs} over structures with at least {min_size} element(s)");
    out.push_str("(set-logic UF)\n(declare-sort U 0)\n");
    for p in &preds {
        let _ = writeln!(out, "(declare-fun {} (U U) Bool)", names[p]);
    }
    if min_size > 1 {
        let ds: Vec<String> = (1..=min_size).map(|i| format!("d{i}")).collect();
        let binders: Vec<String> = ds.iter().map(|d| format!("({d} U)")).collect();
        let _ = writeln!(
            out,
            "(assert (exists ({}) (distinct {})))",
            binders.join(" "),
            ds.join(" ")
        );
    }
    let mut goal = String::new();
    smt(&l.iff(r), &names, &mut goal);
    let _ = writeln!(out, "(assert (not (forall ((x0 U) (y0 U)) {goal})))");
    out.push_str("(check-sat)\n");
    out
}

fn tptp_var(v: &FoVar) -> String {
    v.to_string().to_uppercase()
}

fn tptp(f: &FoFormula, names: &HashMap<String, String>, out: &mut String) {
    use FoFormula::*;
    match f {
        True => out.push_str("$true"),
        False => out.push_str("$false"),
        Atom(p, u, v) => {
            let _ = write!(out, "{}({}, {})", names[p], tptp_var(u), tptp_var(v));
        }
        Eq(u, v) => {
            let _ = write!(out, "{} = {}", tptp_var(u), tptp_var(v));
        }
        Not(a) => match a.as_ref() {
            Eq(u, v) => {
                let _ = write!(out, "{} != {}", tptp_var(u), tptp_var(v));
            }
            _ => {
                out.push_str("~ (");
                tptp(a, names, out);
                out.push(')');
            }
        },
        And(a, b) | Or(a, b) | Iff(a, b) => {
            let op = match f {
                And(..) => " & ",
                Or(..) => " | ",
                _ => " <=> ",
            };
            out.push('(');
            tptp(a, names, out);
            out.push_str(op);
            tptp(b, names, out);
            out.push(')');
        }
        Exists(v, a) | Forall(v, a) => {
            let q = if matches!(f, Exists(..)) { '?' } else { '!' };
            let _ = write!(out, "({q}[{}]: ", tptp_var(v));
            tptp(a, names, out);
            out.push(')');
        }
    }
}

/// TPTP FOF problem whose proof certifies `lhs = rhs` on all structures
/// with at least `min_size` elements.
pub fn export_equation_tptp(lhs: &Term, rhs: &Term, min_size: usize) -> String {
    let (l, r, preds) = equation_formulas(lhs, rhs);
    let mut names = predicate_names(&preds, |_| false);
    for name in names.values_mut() {
        if !name.starts_with(|c: char| c.is_ascii_lowercase()) {
            *name = format!("'{name}'");
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "% {lhs} = {rhs} over structures with at least {min_size} element(s)");
    if min_size > 1 {
        let ds: Vec<String> = (1..=min_size).map(|i| format!("D{i}")).collect();
        let mut neqs = Vec::new();
        for i in 0..ds.len() {
            for j in i + 1..ds.len() {
                neqs.push(format!("{} != {}", ds[i], ds[j]));
            }
        }
        let _ = writeln!(
            out,
            "fof(at_least_{min_size}, axiom, ?[{}]: ({})).",
            ds.join(","),
            neqs.join(" & ")
        );
    }
    let mut goal = String::new();
    tptp(&l.iff(r), &names, &mut goal);
    let _ = writeln!(out, "fof(equation, conjecture, ![X0,Y0]: {goal}).");
    out
}

/// Applies both words to the variable `a` and exports the equation.
pub fn export_word_equation_smt2(u: &Word, v: &Word, min_size: usize) -> String {
    export_equation_smt2(&u.apply(&Term::var("a")), &v.apply(&Term::var("a")), min_size)
}

/// Applies both words to the variable `a` and exports the equation.
pub fn export_word_equation_tptp(u: &Word, v: &Word, min_size: usize) -> String {
    export_equation_tptp(&u.apply(&Term::var("a")), &v.apply(&Term::var("a")), min_size)
}
