//! Readers for hand-written first-order formulas and grammar checkers for
//! the SMT-LIB 2 and TPTP exports.

use std::collections::HashMap;

use relfrag::fo::{FoFormula, FoVar};

/// Reads formulas written as `exists y1, a(x0, y1) & x0 != y1 <-> ...`.
/// A quantifier body extends as far as possible; `&` is left-associative.
pub struct FoParser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> FoParser<'a> {
    pub fn parse(src: &'a str) -> FoFormula {
        let spaced: &'static str = Box::leak(
            src.replace('(', " ( ").replace(')', " ) ").replace(',', " , ").into_boxed_str(),
        );
        let mut p = FoParser { toks: spaced.split_whitespace().collect(), pos: 0 };
        let f = p.formula();
        assert_eq!(p.pos, p.toks.len(), "trailing input in {src}");
        f
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> &'a str {
        let t = self.toks[self.pos];
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: &str) {
        assert_eq!(self.next(), tok);
    }

    fn var(&mut self) -> FoVar {
        let t = self.next();
        let index = t[1..].parse().unwrap();
        match &t[..1] {
            "x" => FoVar::x(index),
            "y" => FoVar::y(index),
            _ => panic!("not a variable: {t}"),
        }
    }

    fn formula(&mut self) -> FoFormula {
        let l = self.conj();
        if self.peek() == Some("<->") {
            self.next();
            return l.iff(self.conj());
        }
        l
    }

    fn conj(&mut self) -> FoFormula {
        let mut l = self.unary();
        while self.peek() == Some("&") {
            self.next();
            l = l.and(self.unary());
        }
        l
    }

    fn unary(&mut self) -> FoFormula {
        match self.peek().unwrap() {
            "(" => {
                self.next();
                let f = self.formula();
                self.expect(")");
                f
            }
            "exists" => {
                self.next();
                let mut vs = vec![self.var()];
                while self.peek() != Some(",") {
                    vs.push(self.var());
                }
                self.expect(",");
                let body = self.formula();
                vs.into_iter().rev().fold(body, |b, v| FoFormula::exists(v, b))
            }
            "True" => {
                self.next();
                FoFormula::True
            }
            "False" => {
                self.next();
                FoFormula::False
            }
            t if t.starts_with('x') || t.starts_with('y') => {
                let u = self.var();
                let op = self.next();
                let v = self.var();
                match op {
                    "=" => FoFormula::Eq(u, v),
                    "!=" => FoFormula::neq(u, v),
                    _ => panic!("bad relation {op}"),
                }
            }
            _ => {
                let p = self.next().to_string();
                self.expect("(");
                let u = self.var();
                self.expect(",");
                let v = self.var();
                self.expect(")");
                FoFormula::Atom(p, u, v)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// SMT-LIB 2: s-expressions, declarations and a sort check.

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(src: &str) -> Result<Vec<Sexp>, String> {
    let mut toks = Vec::new();
    for line in src.lines() {
        let line = line.split(';').next().unwrap();
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        toks.extend(spaced.split_whitespace().map(str::to_string));
    }
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().ok_or("unbalanced )")?;
                stack.last_mut().ok_or("unbalanced )")?.push(Sexp::List(done));
            }
            _ => stack.last_mut().unwrap().push(Sexp::Atom(t)),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced (".into());
    }
    Ok(stack.pop().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sort {
    U,
    Bool,
}

fn sort_of(e: &Sexp, funs: &HashMap<String, usize>, bound: &mut Vec<String>) -> Result<Sort, String> {
    match e {
        Sexp::Atom(a) => match a.as_str() {
            "true" | "false" => Ok(Sort::Bool),
            _ if bound.contains(a) => Ok(Sort::U),
            _ => Err(format!("unbound symbol {a}")),
        },
        Sexp::List(items) => {
            let Some(Sexp::Atom(head)) = items.first() else {
                return Err("application without a head symbol".into());
            };
            let args = &items[1..];
            match head.as_str() {
                "exists" | "forall" => {
                    let [Sexp::List(binders), body] = args else {
                        return Err("malformed quantifier".into());
                    };
                    let mut names = Vec::new();
                    for b in binders {
                        match b {
                            Sexp::List(pair) if pair.len() == 2 && pair[1] == Sexp::Atom("U".into()) => {
                                let Sexp::Atom(v) = &pair[0] else { return Err("bad binder".into()) };
                                names.push(v.clone());
                            }
                            _ => return Err("bad binder".into()),
                        }
                    }
                    if names.is_empty() {
                        return Err("empty binder list".into());
                    }
                    let depth = bound.len();
                    bound.extend(names);
                    let s = sort_of(body, funs, bound);
                    bound.truncate(depth);
                    (s? == Sort::Bool).then_some(Sort::Bool).ok_or("quantified body is not Bool".into())
                }
                "and" | "or" | "not" => {
                    if (head == "not") != (args.len() == 1) || args.is_empty() {
                        return Err(format!("bad arity for {head}"));
                    }
                    for a in args {
                        if sort_of(a, funs, bound)? != Sort::Bool {
                            return Err(format!("non-Bool argument to {head}"));
                        }
                    }
                    Ok(Sort::Bool)
                }
                "=" | "distinct" => {
                    if args.len() < 2 {
                        return Err(format!("bad arity for {head}"));
                    }
                    let first = sort_of(&args[0], funs, bound)?;
                    for a in &args[1..] {
                        if sort_of(a, funs, bound)? != first {
                            return Err(format!("mixed sorts in {head}"));
                        }
                    }
                    Ok(Sort::Bool)
                }
                f => match funs.get(f) {
                    Some(&arity) if arity == args.len() => {
                        for a in args {
                            if sort_of(a, funs, bound)? != Sort::U {
                                return Err(format!("non-U argument to {f}"));
                            }
                        }
                        Ok(Sort::Bool)
                    }
                    _ => Err(format!("undeclared or misapplied function {f}")),
                },
            }
        }
    }
}

/// Checks the command sequence, declarations and sorts of a script.
pub fn check_smt2(script: &str) -> Result<(), String> {
    let cmds = parse_sexps(script)?;
    let mut funs = HashMap::new();
    let mut sort_declared = false;
    let mut saw_check = false;
    for (i, c) in cmds.iter().enumerate() {
        let Sexp::List(items) = c else { return Err("top-level atom".into()) };
        let Some(Sexp::Atom(cmd)) = items.first() else { return Err("empty command".into()) };
        if saw_check {
            return Err("command after check-sat".into());
        }
        match (cmd.as_str(), &items[1..]) {
            ("set-logic", [Sexp::Atom(l)]) if i == 0 && l == "UF" => {}
            ("declare-sort", [Sexp::Atom(s), Sexp::Atom(k)]) if s == "U" && k == "0" => sort_declared = true,
            ("declare-fun", [Sexp::Atom(f), Sexp::List(dom), Sexp::Atom(cod)]) if sort_declared && cod == "Bool" => {
                if dom.iter().any(|d| *d != Sexp::Atom("U".into())) {
                    return Err(format!("bad domain for {f}"));
                }
                if funs.insert(f.clone(), dom.len()).is_some() {
                    return Err(format!("{f} declared twice"));
                }
            }
            ("assert", [body]) => {
                if sort_of(body, &funs, &mut Vec::new())? != Sort::Bool {
                    return Err("assertion is not Bool".into());
                }
            }
            ("check-sat", []) => saw_check = true,
            _ => return Err(format!("unexpected command {c:?}")),
        }
    }
    saw_check.then_some(()).ok_or("missing check-sat".into())
}

// ---------------------------------------------------------------------------
// TPTP first-order form.

struct Tptp<'a> {
    toks: Vec<&'a str>,
    pos: usize,
    bound: Vec<String>,
}

fn tptp_tokens(src: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let b = src.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with("<=>") {
            out.push(&src[i..i + 3]);
            i += 3;
        } else if src[i..].starts_with("!=") {
            out.push(&src[i..i + 2]);
            i += 2;
        } else if c == b'\'' {
            let end = src[i + 1..].find('\'').map(|e| i + e + 2).unwrap_or(b.len());
            out.push(&src[i..end]);
            i = end;
        } else if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$') {
                i += 1;
            }
            out.push(&src[start..i]);
        } else {
            out.push(&src[i..i + 1]);
            i += 1;
        }
    }
    out
}

impl<'a> Tptp<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Result<&'a str, String> {
        let t = self.peek().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: &str) -> Result<(), String> {
        let got = self.next()?;
        (got == t).then_some(()).ok_or(format!("expected {t}, got {got}"))
    }

    /// A binary formula: one connective kind per parenthesis level; `&` and
    /// `|` may chain, `<=>` may not.
    fn formula(&mut self) -> Result<(), String> {
        self.unary()?;
        let mut op: Option<&str> = None;
        while let Some(t @ ("&" | "|" | "<=>")) = self.peek() {
            if op.is_some_and(|o| o != t || o == "<=>") {
                return Err(format!("mixed or chained connective {t}"));
            }
            op = Some(t);
            self.next()?;
            self.unary()?;
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<(), String> {
        match self.next()? {
            "(" => {
                self.formula()?;
                self.expect(")")
            }
            "~" => self.unary(),
            q @ ("!" | "?") => {
                let _ = q;
                self.expect("[")?;
                let depth = self.bound.len();
                loop {
                    let v = self.next()?;
                    if !v.starts_with(|c: char| c.is_ascii_uppercase()) {
                        return Err(format!("bad variable {v}"));
                    }
                    self.bound.push(v.to_string());
                    match self.next()? {
                        "," => continue,
                        "]" => break,
                        t => return Err(format!("unexpected {t} in binder")),
                    }
                }
                self.expect(":")?;
                self.unary()?;
                self.bound.truncate(depth);
                Ok(())
            }
            "$true" | "$false" => Ok(()),
            t if t.starts_with(|c: char| c.is_ascii_uppercase()) => {
                self.variable(t)?;
                match self.next()? {
                    "=" | "!=" => {
                        let v = self.next()?;
                        self.variable(v)
                    }
                    o => Err(format!("expected equality, got {o}")),
                }
            }
            p if p.starts_with(|c: char| c.is_ascii_lowercase()) || p.starts_with('\'') => {
                self.expect("(")?;
                let u = self.next()?;
                self.variable(u)?;
                self.expect(",")?;
                let v = self.next()?;
                self.variable(v)?;
                self.expect(")")
            }
            t => Err(format!("unexpected token {t}")),
        }
    }

    fn variable(&self, v: &str) -> Result<(), String> {
        self.bound.iter().any(|b| b == v).then_some(()).ok_or(format!("free variable {v}"))
    }
}

/// Checks `fof` lines: roles, connective grouping and variable binding.
pub fn check_tptp(src: &str) -> Result<(), String> {
    let mut conjectures = 0;
    for line in src.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('%')) {
        let toks = tptp_tokens(line);
        let mut p = Tptp { toks, pos: 0, bound: Vec::new() };
        p.expect("fof")?;
        p.expect("(")?;
        let name = p.next()?;
        if !name.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(format!("bad formula name {name}"));
        }
        p.expect(",")?;
        match p.next()? {
            "axiom" => {}
            "conjecture" => conjectures += 1,
            r => return Err(format!("unexpected role {r}")),
        }
        p.expect(",")?;
        p.formula()?;
        p.expect(")")?;
        p.expect(".")?;
        if p.pos != p.toks.len() {
            return Err("trailing tokens".into());
        }
    }
    (conjectures == 1).then_some(()).ok_or(format!("{conjectures} conjectures"))
}

