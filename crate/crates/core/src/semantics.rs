//! Set-theoretic semantics of terms over finite structures, together with
//! the exhaustive and randomized model checks built on top of it.
//!
//! Two representations are used. [`Rel`] stores one `u64` row per element
//! and supports universes of up to 64 elements. For universes of at most 8
//! elements, a whole relation fits in a single `u64` (row-major, stride `n`);
//! [`Packed`] provides table-driven operations on that encoding, and
//! [`Program`] evaluates a compiled term on it without allocation.
//!
//! Structures are enumerated in lexicographic order of the bit string
//! obtained by concatenating the relations of the sorted variables, each in
//! row-major order. The first counterexample reported by an exhaustive
//! check is therefore canonical and does not depend on the thread count.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Projection, Term};

/// Largest universe supported by [`Rel`].
pub const MAX_SIZE: usize = 64;
/// Largest universe supported by the packed encoding.
pub const MAX_PACKED_SIZE: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("variable `{0}` is not interpreted by the structure")]
    UnboundVariable(String),
    #[error("universe size {0} is out of range 1..={MAX_SIZE}")]
    BadSize(usize),
    #[error("relation `{name}` has size {found}, structure has size {expected}")]
    SizeMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("exhaustive check at size {size} needs {required} evaluations, budget is {budget}")]
    BudgetExceeded {
        size: usize,
        required: String,
        budget: u64,
    },
}

/// A binary relation on `{0, …, n-1}`; bit `y` of `rows[x]` is `(x, y)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rel {
    n: usize,
    rows: Vec<u64>,
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rel{{n={}, {:?}}}", self.n, self.pairs())
    }
}

fn row_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl Rel {
    pub fn empty(n: usize) -> Rel {
        assert!((1..=MAX_SIZE).contains(&n), "universe size {n} out of range");
        Rel {
            n,
            rows: vec![0; n],
        }
    }

    pub fn full(n: usize) -> Rel {
        let mut r = Rel::empty(n);
        r.rows.iter_mut().for_each(|row| *row = row_mask(n));
        r
    }

    pub fn identity(n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for x in 0..n {
            r.rows[x] = 1 << x;
        }
        r
    }

    pub fn diversity(n: usize) -> Rel {
        Rel::identity(n).complement()
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Rel {
        let mut r = Rel::empty(n);
        for (x, y) in pairs {
            r.insert(x, y);
        }
        r
    }

    /// Decodes the row-major packed encoding (`n ≤ 8`).
    pub fn from_packed(n: usize, bits: u64) -> Rel {
        assert!(n <= MAX_PACKED_SIZE);
        let mut r = Rel::empty(n);
        for x in 0..n {
            r.rows[x] = (bits >> (x * n)) & row_mask(n);
        }
        r
    }

    /// Row-major packed encoding (`n ≤ 8`).
    pub fn to_packed(&self) -> u64 {
        assert!(self.n <= MAX_PACKED_SIZE);
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (x, row)| acc | (row << (x * self.n)))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.rows[x] >> y) & 1 == 1
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        assert!(x < self.n && y < self.n, "pair ({x},{y}) out of range");
        self.rows[x] |= 1 << y;
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| *r == 0)
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|x| (0..self.n).filter(move |&y| self.contains(x, y)).map(move |y| (x, y)))
            .collect()
    }

    fn zip(&self, other: &Rel, f: impl Fn(u64, u64) -> u64) -> Rel {
        assert_eq!(self.n, other.n);
        Rel {
            n: self.n,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn union(&self, other: &Rel) -> Rel {
        self.zip(other, |a, b| a | b)
    }

    pub fn inter(&self, other: &Rel) -> Rel {
        self.zip(other, |a, b| a & b)
    }

    pub fn complement(&self) -> Rel {
        let m = row_mask(self.n);
        Rel {
            n: self.n,
            rows: self.rows.iter().map(|r| !r & m).collect(),
        }
    }

    pub fn compose(&self, other: &Rel) -> Rel {
        assert_eq!(self.n, other.n);
        let rows = self
            .rows
            .iter()
            .map(|&row| {
                let mut acc = 0;
                let mut bits = row;
                while bits != 0 {
                    acc |= other.rows[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                acc
            })
            .collect();
        Rel { n: self.n, rows }
    }

    pub fn dagger(&self, other: &Rel) -> Rel {
        self.complement().compose(&other.complement()).complement()
    }

    pub fn converse(&self) -> Rel {
        let mut r = Rel::empty(self.n);
        for (x, y) in self.pairs() {
            r.insert(y, x);
        }
        r
    }

    pub fn project(&self, p: Projection) -> Rel {
        match p {
            Projection::Identity => self.clone(),
            Projection::Swap => self.converse(),
            Projection::First => {
                let mut r = Rel::empty(self.n);
                for x in 0..self.n {
                    if self.contains(x, x) {
                        r.rows[x] = row_mask(self.n);
                    }
                }
                r
            }
            Projection::Second => {
                let diag = (0..self.n)
                    .filter(|&y| self.contains(y, y))
                    .fold(0u64, |acc, y| acc | (1 << y));
                Rel {
                    n: self.n,
                    rows: vec![diag; self.n],
                }
            }
        }
    }
}

/// A finite structure: a universe `{0, …, size-1}` and an interpretation
/// of finitely many relation variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub size: usize,
    pub relations: BTreeMap<String, Rel>,
}

impl Structure {
    pub fn new(size: usize) -> Structure {
        Structure {
            size,
            relations: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: impl Into<String>, rel: Rel) -> Structure {
        assert_eq!(rel.size(), self.size);
        self.relations.insert(name.into(), rel);
        self
    }

    /// Position of this structure in the enumeration order over `vars`,
    /// as a big-endian bit string packed in a `u128` (`vars·n² ≤ 128`).
    pub fn enumeration_key(&self, vars: &[String]) -> u128 {
        let n = self.size;
        let total = vars.len() * n * n;
        assert!(total <= 128);
        let mut key = 0u128;
        for (j, v) in vars.iter().enumerate() {
            if let Some(r) = self.relations.get(v) {
                for (x, y) in r.pairs() {
                    let k = j * n * n + x * n + y;
                    key |= 1u128 << (total - 1 - k);
                }
            }
        }
        key
    }
}

#[derive(Serialize, Deserialize)]
struct StructureJson {
    size: usize,
    relations: BTreeMap<String, Vec<[usize; 2]>>,
}

/// Errors reading a structure from JSON.
#[derive(Debug, Error)]
pub enum StructureFormatError {
    #[error("malformed structure JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("universe size {0} is out of range 1..={MAX_SIZE}")]
    BadSize(usize),
    #[error("relation `{name}`: pair ({x},{y}) is out of range for size {size}")]
    OutOfRange {
        name: String,
        x: usize,
        y: usize,
        size: usize,
    },
    #[error("relation `{name}`: duplicate pair ({x},{y})")]
    Duplicate { name: String, x: usize, y: usize },
}

impl Structure {
    pub fn to_json_value(&self) -> serde_json::Value {
        let js = StructureJson {
            size: self.size,
            relations: self
                .relations
                .iter()
                .map(|(k, r)| (k.clone(), r.pairs().into_iter().map(|(x, y)| [x, y]).collect()))
                .collect(),
        };
        serde_json::to_value(js).expect("structure serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json(src: &str) -> Result<Structure, StructureFormatError> {
        let js: StructureJson = serde_json::from_str(src)?;
        if !(1..=MAX_SIZE).contains(&js.size) {
            return Err(StructureFormatError::BadSize(js.size));
        }
        let mut s = Structure::new(js.size);
        for (name, pairs) in js.relations {
            let mut r = Rel::empty(js.size);
            for [x, y] in pairs {
                if x >= js.size || y >= js.size {
                    return Err(StructureFormatError::OutOfRange {
                        name,
                        x,
                        y,
                        size: js.size,
                    });
                }
                if r.contains(x, y) {
                    return Err(StructureFormatError::Duplicate { name, x, y });
                }
                r.insert(x, y);
            }
            s.relations.insert(name, r);
        }
        Ok(s)
    }
}

/// Evaluates a term in a structure.
pub fn eval(t: &Term, m: &Structure) -> Result<Rel, SemanticsError> {
    let n = m.size;
    if !(1..=MAX_SIZE).contains(&n) {
        return Err(SemanticsError::BadSize(n));
    }
    Ok(match t {
        Term::Var(v) => {
            let r = m
                .relations
                .get(v)
                .ok_or_else(|| SemanticsError::UnboundVariable(v.clone()))?;
            if r.size() != n {
                return Err(SemanticsError::SizeMismatch {
                    name: v.clone(),
                    expected: n,
                    found: r.size(),
                });
            }
            r.clone()
        }
        Term::Bot => Rel::empty(n),
        Term::Top => Rel::full(n),
        Term::Id => Rel::identity(n),
        Term::Di => Rel::diversity(n),
        Term::Union(a, b) => eval(a, m)?.union(&eval(b, m)?),
        Term::Inter(a, b) => eval(a, m)?.inter(&eval(b, m)?),
        Term::Compl(a) => eval(a, m)?.complement(),
        Term::Comp(a, b) => eval(a, m)?.compose(&eval(b, m)?),
        Term::Dagger(a, b) => eval(a, m)?.dagger(&eval(b, m)?),
        Term::Proj(a, p) => eval(a, m)?.project(*p),
    })
}

// ---------------------------------------------------------------------------
// Packed relations (n ≤ 8)

/// Lookup tables for relations on `n ≤ 8` elements packed row-major in a
/// `u64` (bit `x·n + y` is the pair `(x, y)`).
#[derive(Debug, Clone)]
pub struct Packed {
    pub n: usize,
    pub row_mask: u64,
    pub full: u64,
    pub diag: u64,
    /// One bit per row start; multiplying a row by this replicates it.
    rep: u64,
    /// Row of `R·D` given the row of `R`.
    dot_d_row: Vec<u64>,
    /// `spread[x·2^n + r]`: the transpose contribution of row `x` with bits `r`.
    spread: Vec<u64>,
}

impl Packed {
    pub fn new(n: usize) -> Packed {
        assert!((1..=MAX_PACKED_SIZE).contains(&n), "packed size {n} out of range");
        let row_mask = row_mask(n);
        let full = if n * n == 64 { u64::MAX } else { (1u64 << (n * n)) - 1 };
        let diag = (0..n).fold(0, |acc, x| acc | (1u64 << (x * n + x)));
        let rep = (0..n).fold(0, |acc, x| acc | (1u64 << (x * n)));
        let dot_d_row = (0..1u64 << n)
            .map(|r| match r.count_ones() {
                0 => 0,
                1 => row_mask & !r,
                _ => row_mask,
            })
            .collect();
        let mut spread = vec![0u64; n << n];
        for x in 0..n {
            for r in 0..1usize << n {
                spread[(x << n) | r] = (0..n)
                    .filter(|y| (r >> y) & 1 == 1)
                    .fold(0, |acc, y| acc | (1u64 << (y * n + x)));
            }
        }
        Packed {
            n,
            row_mask,
            full,
            diag,
            rep,
            dot_d_row,
            spread,
        }
    }

    #[inline]
    pub fn row(&self, r: u64, x: usize) -> u64 {
        (r >> (x * self.n)) & self.row_mask
    }

    #[inline]
    pub fn compl(&self, r: u64) -> u64 {
        !r & self.full
    }

    #[inline]
    pub fn compose(&self, r: u64, s: u64) -> u64 {
        let mut out = 0;
        for x in 0..self.n {
            let mut bits = self.row(r, x);
            let mut acc = 0;
            while bits != 0 {
                acc |= self.row(s, bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
            out |= acc << (x * self.n);
        }
        out
    }

    #[inline]
    pub fn dagger(&self, r: u64, s: u64) -> u64 {
        self.compl(self.compose(self.compl(r), self.compl(s)))
    }

    #[inline]
    pub fn transpose(&self, r: u64) -> u64 {
        let mut out = 0;
        for x in 0..self.n {
            out |= self.spread[(x << self.n) | self.row(r, x) as usize];
        }
        out
    }

    /// `R·D`, row by row.
    #[inline]
    pub fn dot_d(&self, r: u64) -> u64 {
        let mut out = 0;
        for x in 0..self.n {
            out |= self.dot_d_row[self.row(r, x) as usize] << (x * self.n);
        }
        out
    }

    #[inline]
    pub fn cap_i(&self, r: u64) -> u64 {
        r & self.diag
    }

    #[inline]
    pub fn cap_d(&self, r: u64) -> u64 {
        r & !self.diag & self.full
    }

    pub fn project(&self, r: u64, p: Projection) -> u64 {
        match p {
            Projection::Identity => r,
            Projection::Swap => self.transpose(r),
            Projection::First => {
                let mut out = 0;
                for x in 0..self.n {
                    if (r >> (x * self.n + x)) & 1 == 1 {
                        out |= self.row_mask << (x * self.n);
                    }
                }
                out
            }
            Projection::Second => {
                let d = (0..self.n).fold(0u64, |acc, y| acc | (((r >> (y * self.n + y)) & 1) << y));
                d * self.rep
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Var(usize),
    Const(u64),
    Union(usize, usize),
    Inter(usize, usize),
    Compl(usize),
    Comp(usize, usize),
    Dagger(usize, usize),
    Proj(usize, Projection),
}

/// A term compiled for evaluation on packed relations. Variables are
/// referred to by their index in the variable list given at compile time.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
}

impl Program {
    pub fn compile(t: &Term, vars: &[String], p: &Packed) -> Result<Program, SemanticsError> {
        let mut ops = Vec::with_capacity(t.size());
        compile_into(t, vars, p, &mut ops)?;
        Ok(Program { ops })
    }

    /// Evaluates with `regs` as scratch space (resized as needed).
    #[inline]
    pub fn eval(&self, p: &Packed, vars: &[u64], regs: &mut Vec<u64>) -> u64 {
        regs.resize(self.ops.len(), 0);
        for (i, op) in self.ops.iter().enumerate() {
            regs[i] = match *op {
                Op::Var(j) => vars[j],
                Op::Const(c) => c,
                Op::Union(a, b) => regs[a] | regs[b],
                Op::Inter(a, b) => regs[a] & regs[b],
                Op::Compl(a) => p.compl(regs[a]),
                Op::Comp(a, b) => p.compose(regs[a], regs[b]),
                Op::Dagger(a, b) => p.dagger(regs[a], regs[b]),
                Op::Proj(a, q) => p.project(regs[a], q),
            };
        }
        regs[self.ops.len() - 1]
    }

    /// For each output pair, the set of input bits it depends on. Input bit
    /// `j·n² + x·n + y` is pair `(x,y)` of variable `j`.
    fn dependencies(&self, n: usize) -> Vec<u128> {
        let mut deps: Vec<Vec<u128>> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let d = match *op {
                Op::Var(j) => (0..n * n).map(|k| 1u128 << (j * n * n + k)).collect(),
                Op::Const(_) => vec![0; n * n],
                Op::Union(a, b) | Op::Inter(a, b) => {
                    deps[a].iter().zip(&deps[b]).map(|(x, y)| x | y).collect()
                }
                Op::Compl(a) => deps[a].clone(),
                Op::Comp(a, b) | Op::Dagger(a, b) => {
                    let mut d = vec![0u128; n * n];
                    for x in 0..n {
                        for y in 0..n {
                            for z in 0..n {
                                d[x * n + y] |= deps[a][x * n + z] | deps[b][z * n + y];
                            }
                        }
                    }
                    d
                }
                Op::Proj(a, q) => {
                    let mut d = vec![0u128; n * n];
                    for x in 0..n {
                        for y in 0..n {
                            let pick = |i: u8| if i == 1 { x } else { y };
                            let (i, j) = q.images();
                            d[x * n + y] = deps[a][pick(i) * n + pick(j)];
                        }
                    }
                    d
                }
            };
            deps.push(d);
        }
        deps.pop().unwrap()
    }
}

fn compile_into(
    t: &Term,
    vars: &[String],
    p: &Packed,
    ops: &mut Vec<Op>,
) -> Result<usize, SemanticsError> {
    let op = match t {
        Term::Var(v) => Op::Var(
            vars.iter()
                .position(|x| x == v)
                .ok_or_else(|| SemanticsError::UnboundVariable(v.clone()))?,
        ),
        Term::Bot => Op::Const(0),
        Term::Top => Op::Const(p.full),
        Term::Id => Op::Const(p.diag),
        Term::Di => Op::Const(p.full & !p.diag),
        Term::Union(a, b) => Op::Union(compile_into(a, vars, p, ops)?, compile_into(b, vars, p, ops)?),
        Term::Inter(a, b) => Op::Inter(compile_into(a, vars, p, ops)?, compile_into(b, vars, p, ops)?),
        Term::Comp(a, b) => Op::Comp(compile_into(a, vars, p, ops)?, compile_into(b, vars, p, ops)?),
        Term::Dagger(a, b) => {
            Op::Dagger(compile_into(a, vars, p, ops)?, compile_into(b, vars, p, ops)?)
        }
        Term::Compl(a) => Op::Compl(compile_into(a, vars, p, ops)?),
        Term::Proj(a, q) => Op::Proj(compile_into(a, vars, p, ops)?, *q),
    };
    ops.push(op);
    Ok(ops.len() - 1)
}

// ---------------------------------------------------------------------------
// Enumeration

/// The sorted union of the variables of both terms.
pub fn joint_vars(t1: &Term, t2: &Term) -> Vec<String> {
    let mut v = t1.vars();
    v.extend(t2.vars());
    v.into_iter().collect()
}

fn structure_count(vars: usize, size: usize) -> Option<u64> {
    let bits = vars.checked_mul(size * size)?;
    if bits >= 64 {
        None
    } else {
        Some(1u64 << bits)
    }
}

/// Decodes the structure with the given enumeration index.
pub fn structure_at(vars: &[String], size: usize, index: u128) -> Structure {
    let total = vars.len() * size * size;
    let mut s = Structure::new(size);
    for (j, v) in vars.iter().enumerate() {
        let mut r = Rel::empty(size);
        for x in 0..size {
            for y in 0..size {
                let k = j * size * size + x * size + y;
                if (index >> (total - 1 - k)) & 1 == 1 {
                    r.insert(x, y);
                }
            }
        }
        s.relations.insert(v.clone(), r);
    }
    s
}

/// All structures of the given size interpreting `vars`, in enumeration
/// order. Fails if there are more than `budget` of them.
pub fn enumerate_structures(
    vars: &[String],
    size: usize,
    budget: u64,
) -> Result<impl Iterator<Item = Structure> + '_, SemanticsError> {
    if !(1..=MAX_SIZE).contains(&size) {
        return Err(SemanticsError::BadSize(size));
    }
    let count = structure_count(vars.len(), size)
        .filter(|c| *c <= budget)
        .ok_or_else(|| SemanticsError::BudgetExceeded {
            size,
            required: format!("2^{}", vars.len() * size * size),
            budget,
        })?;
    Ok((0..count).map(move |i| structure_at(vars, size, i as u128)))
}

/// How an exhaustive check covered the structures of one size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coverage {
    /// Every structure was evaluated.
    Plain,
    /// For every output pair, every assignment of the input bits that pair
    /// depends on was evaluated (all other bits zero). This decides the
    /// same question as the plain scan.
    Cones,
}

/// Outcome of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveReport {
    pub counterexample: Option<Structure>,
    /// Sizes completely decided, with the coverage strategy used.
    pub sizes: Vec<(usize, Coverage)>,
    pub evaluations: u64,
}

/// Default evaluation budget for exhaustive checks.
pub const DEFAULT_BUDGET: u64 = 1 << 30;

/// Searches every structure of each size in `sizes` for one separating the
/// terms. Returns the first counterexample in enumeration order, or `None`.
pub fn exhaustive_check(
    t1: &Term,
    t2: &Term,
    sizes: &[usize],
    budget: u64,
) -> Result<Option<Structure>, SemanticsError> {
    Ok(exhaustive_report(t1, t2, sizes, budget)?.counterexample)
}

/// Like [`exhaustive_check`], with coverage statistics.
pub fn exhaustive_report(
    t1: &Term,
    t2: &Term,
    sizes: &[usize],
    budget: u64,
) -> Result<ExhaustiveReport, SemanticsError> {
    let vars = joint_vars(t1, t2);
    let mut report = ExhaustiveReport {
        counterexample: None,
        sizes: Vec::new(),
        evaluations: 0,
    };
    for &size in sizes {
        let remaining = budget.saturating_sub(report.evaluations);
        let (found, coverage, cost) = if size <= MAX_PACKED_SIZE {
            packed_exhaustive(t1, t2, &vars, size, remaining)?
        } else {
            let mut cost = 0;
            let mut found = None;
            for s in enumerate_structures(&vars, size, remaining)? {
                cost += 1;
                if eval(t1, &s)? != eval(t2, &s)? {
                    found = Some(s);
                    break;
                }
            }
            (found, Coverage::Plain, cost)
        };
        report.evaluations += cost;
        report.sizes.push((size, coverage));
        if found.is_some() {
            report.counterexample = found;
            return Ok(report);
        }
    }
    Ok(report)
}

const CHUNK: u64 = 1 << 14;

fn packed_exhaustive(
    t1: &Term,
    t2: &Term,
    vars: &[String],
    size: usize,
    budget: u64,
) -> Result<(Option<Structure>, Coverage, u64), SemanticsError> {
    let p = Packed::new(size);
    let prog1 = Program::compile(t1, vars, &p)?;
    let prog2 = Program::compile(t2, vars, &p)?;
    let total_bits = vars.len() * size * size;
    let plain = structure_count(vars.len(), size);

    let cones = if total_bits <= 128 {
        let d1 = prog1.dependencies(size);
        let d2 = prog2.dependencies(size);
        let cones: Vec<u128> = d1.iter().zip(&d2).map(|(a, b)| a | b).collect();
        let cost = cones
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(1u64.checked_shl(c.count_ones())?));
        cost.map(|c| (cones, c))
    } else {
        None
    };

    match (plain, &cones) {
        (Some(count), cones) if count <= budget && cones.as_ref().is_none_or(|(_, c)| count <= *c) => {
            let found = (0..count.div_ceil(CHUNK))
                .into_par_iter()
                .find_map_first(|chunk| {
                    let mut regs = Vec::new();
                    let mut words = vec![0u64; vars.len()];
                    let start = chunk * CHUNK;
                    let end = (start + CHUNK).min(count);
                    (start..end).find(|&i| {
                        decode_packed(i as u128, vars.len(), size, &mut words);
                        prog1.eval(&p, &words, &mut regs) != prog2.eval(&p, &words, &mut regs)
                    })
                });
            Ok((
                found.map(|i| structure_at(vars, size, i as u128)),
                Coverage::Plain,
                count,
            ))
        }
        (_, Some((cones, cost))) if *cost <= budget => {
            let found = cone_scan(&p, &prog1, &prog2, vars.len(), size, cones);
            Ok((
                found.map(|k| structure_at(vars, size, k)),
                Coverage::Cones,
                *cost,
            ))
        }
        _ => {
            let required = match &cones {
                Some((_, c)) => format!("{c}"),
                None => format!("2^{total_bits}"),
            };
            Err(SemanticsError::BudgetExceeded {
                size,
                required,
                budget,
            })
        }
    }
}

/// Splits an enumeration index into packed relations.
fn decode_packed(index: u128, nvars: usize, size: usize, out: &mut [u64]) {
    let nn = size * size;
    for (j, w) in out.iter_mut().enumerate().take(nvars) {
        let shift = (nvars - 1 - j) * nn;
        let chunk = ((index >> shift) as u64) & if nn == 64 { u64::MAX } else { (1 << nn) - 1 };
        // The enumeration string is big-endian: pair (0,0) is the most
        // significant bit of the chunk, while the packed encoding keeps it
        // in bit 0.
        *w = chunk.reverse_bits() >> (64 - nn);
    }
}

/// Scans, for every output pair, all assignments of the input bits in its
/// dependency cone; returns the least counterexample key.
fn cone_scan(
    p: &Packed,
    prog1: &Program,
    prog2: &Program,
    nvars: usize,
    size: usize,
    cones: &[u128],
) -> Option<u128> {
    let nn = size * size;
    let total = nvars * nn;
    let results: Vec<Option<u128>> = cones
        .par_iter()
        .map(|&cone| {
            // Cone positions in enumeration order (most significant first).
            let positions: Vec<usize> = (0..total).filter(|k| (cone >> k) & 1 == 1).collect();
            let m = positions.len();
            // Bit i of the counter (LSB first) drives positions[m-1-i].
            let toggles: Vec<(usize, u64, u128)> = (0..m)
                .map(|i| {
                    let k = positions[m - 1 - i];
                    (k / nn, 1u64 << (k % nn), 1u128 << (total - 1 - k))
                })
                .collect();
            let mut words = vec![0u64; nvars];
            let mut key = 0u128;
            let mut regs = Vec::new();
            let limit = 1u64 << m;
            let mut c = 0u64;
            loop {
                if prog1.eval(p, &words, &mut regs) != prog2.eval(p, &words, &mut regs) {
                    return Some(key);
                }
                c += 1;
                if c == limit {
                    return None;
                }
                for &(j, bit, kbit) in toggles.iter().take(c.trailing_zeros() as usize + 1) {
                    words[j] ^= bit;
                    key ^= kbit;
                }
            }
        })
        .collect();
    results.into_iter().flatten().min()
}

// ---------------------------------------------------------------------------
// Random checks

/// A uniformly random structure (each pair present with probability 1/2).
pub fn random_structure(vars: &[String], size: usize, rng: &mut impl Rng) -> Structure {
    let mut s = Structure::new(size);
    for v in vars {
        let mut r = Rel::empty(size);
        for x in 0..size {
            r.rows[x] = rng.gen::<u64>() & row_mask(size);
        }
        s.relations.insert(v.clone(), r);
    }
    s
}

/// The structures interpreting every variable by the same extreme relation
/// (empty, full, identity, diversity). Random checks always include them.
pub fn extreme_structures(vars: &[String], size: usize) -> Vec<Structure> {
    [Rel::empty(size), Rel::full(size), Rel::identity(size), Rel::diversity(size)]
        .into_iter()
        .map(|r| {
            let mut s = Structure::new(size);
            for v in vars {
                s.relations.insert(v.clone(), r.clone());
            }
            s
        })
        .collect()
}

/// Evaluates both terms on the four extreme structures followed by
/// `samples` random ones drawn from a ChaCha8 stream seeded with `seed`.
/// Returns the first separating structure.
pub fn random_check(
    t1: &Term,
    t2: &Term,
    size: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<Structure>, SemanticsError> {
    if !(1..=MAX_SIZE).contains(&size) {
        return Err(SemanticsError::BadSize(size));
    }
    let vars = joint_vars(t1, t2);
    let differs = |s: &Structure| -> Result<bool, SemanticsError> { Ok(eval(t1, s)? != eval(t2, s)?) };
    for s in extreme_structures(&vars, size) {
        if differs(&s)? {
            return Ok(Some(s));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let s = random_structure(&vars, size, &mut rng);
        if differs(&s)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
