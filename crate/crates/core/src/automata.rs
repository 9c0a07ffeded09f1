//! Finite automata over the four-letter word alphabet.
//!
//! [`PatternMatcher`] is an Aho–Corasick machine: a trie of the patterns
//! with failure links, completed into a total transition function. It
//! reports every occurrence of every pattern in one left-to-right scan.
//! [`build_pattern_dfa`] turns it into a DFA for the words containing some
//! pattern as a factor; complementing and trimming that DFA yields the
//! language of words avoiding all patterns, whose finiteness, size and
//! longest word are read off by [`is_finite_language`].

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{Letter, Word};

const SIGMA: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("pattern {0} is the empty word")]
    EmptyPattern(usize),
}

/// Aho–Corasick automaton over the four-letter alphabet.
#[derive(Debug, Clone)]
pub struct PatternMatcher {
    goto: Vec<[u32; SIGMA]>,
    /// Patterns ending at each state: those of the state itself and, via
    /// `dict_link`, of its proper suffixes.
    own: Vec<Vec<u32>>,
    dict_link: Vec<Option<u32>>,
    depth: Vec<u32>,
    patterns: Vec<Word>,
}

impl PatternMatcher {
    pub fn new(patterns: &[Word]) -> Result<PatternMatcher, AutomatonError> {
        if let Some(i) = patterns.iter().position(Word::is_empty) {
            return Err(AutomatonError::EmptyPattern(i));
        }
        const NONE: u32 = u32::MAX;
        let mut goto: Vec<[u32; SIGMA]> = vec![[NONE; SIGMA]];
        let mut own: Vec<Vec<u32>> = vec![Vec::new()];
        let mut depth = vec![0u32];
        for (pi, p) in patterns.iter().enumerate() {
            let mut s = 0usize;
            for l in p.letters() {
                let c = l.index();
                if goto[s][c] == NONE {
                    goto.push([NONE; SIGMA]);
                    own.push(Vec::new());
                    depth.push(depth[s] + 1);
                    goto[s][c] = (goto.len() - 1) as u32;
                }
                s = goto[s][c] as usize;
            }
            own[s].push(pi as u32);
        }
        let n = goto.len();
        let mut fail = vec![0u32; n];
        let mut dict_link = vec![None; n];
        let mut queue = VecDeque::new();
        for c in 0..SIGMA {
            match goto[0][c] {
                NONE => goto[0][c] = 0,
                s => {
                    fail[s as usize] = 0;
                    queue.push_back(s as usize);
                }
            }
        }
        while let Some(s) = queue.pop_front() {
            let f = fail[s] as usize;
            dict_link[s] = if !own[f].is_empty() { Some(f as u32) } else { dict_link[f] };
            for c in 0..SIGMA {
                let t = goto[s][c];
                if t == NONE {
                    goto[s][c] = goto[f][c];
                } else {
                    fail[t as usize] = goto[f][c];
                    queue.push_back(t as usize);
                }
            }
        }
        Ok(PatternMatcher {
            goto,
            own,
            dict_link,
            depth,
            patterns: patterns.to_vec(),
        })
    }

    pub fn state_count(&self) -> usize {
        self.goto.len()
    }

    pub fn patterns(&self) -> &[Word] {
        &self.patterns
    }

    #[inline]
    pub fn step(&self, state: u32, l: Letter) -> u32 {
        self.goto[state as usize][l.index()]
    }

    /// Whether some pattern ends in this state.
    pub fn is_match_state(&self, state: u32) -> bool {
        !self.own[state as usize].is_empty() || self.dict_link[state as usize].is_some()
    }

    /// Patterns ending at `state`.
    pub fn outputs(&self, state: u32) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(state), |&s| self.dict_link[s as usize])
            .flat_map(|s| self.own[s as usize].iter().map(|&p| p as usize))
    }

    /// All occurrences as `(start, pattern)`, in order of end position.
    pub fn find_all(&self, w: &[Letter]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut s = 0u32;
        for (i, &l) in w.iter().enumerate() {
            s = self.step(s, l);
            for p in self.outputs(s) {
                out.push((i + 1 - self.patterns[p].len(), p));
            }
        }
        out
    }

    /// The occurrence with the least start position; ties are broken by
    /// the least pattern index.
    pub fn leftmost(&self, w: &[Letter]) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut s = 0u32;
        for (i, &l) in w.iter().enumerate() {
            // No occurrence ending at or after i can start before
            // i + 1 - depth(s) for the current state s.
            if let Some((start, _)) = best {
                if start + (self.depth[s as usize] as usize) < i {
                    break;
                }
            }
            s = self.step(s, l);
            for p in self.outputs(s) {
                let cand = (i + 1 - self.patterns[p].len(), p);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}

/// A complete deterministic automaton over the four-letter alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    pub trans: Vec<[u32; SIGMA]>,
    pub start: u32,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.trans.len()
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        let s = w
            .iter()
            .fold(self.start, |s, l| self.trans[s as usize][l.index()]);
        self.accepting[s as usize]
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.trans.len()];
        let mut stack = vec![self.start as usize];
        seen[self.start as usize] = true;
        while let Some(s) = stack.pop() {
            for &t in &self.trans[s] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t as usize);
                }
            }
        }
        seen
    }

    fn co_reachable(&self) -> Vec<bool> {
        let n = self.trans.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, row) in self.trans.iter().enumerate() {
            for &t in row {
                rev[t as usize].push(s);
            }
        }
        let mut seen = self.accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// States that are both reachable and co-reachable.
    pub fn useful_states(&self) -> Vec<bool> {
        let r = self.reachable();
        let c = self.co_reachable();
        r.iter().zip(&c).map(|(a, b)| *a && *b).collect()
    }
}

/// DFA accepting exactly the words that contain some pattern as a factor.
/// Every accepting state is merged into one absorbing accepting sink.
pub fn build_pattern_dfa(patterns: &[Word]) -> Result<Dfa, AutomatonError> {
    let m = PatternMatcher::new(patterns)?;
    // State ids: non-matching trie states keep their relative order; one
    // sink is appended.
    let n = m.state_count();
    let mut id = vec![u32::MAX; n];
    let mut next = 0u32;
    for s in 0..n {
        if !m.is_match_state(s as u32) {
            id[s] = next;
            next += 1;
        }
    }
    let sink = next;
    let mut trans = Vec::with_capacity(next as usize + 1);
    let mut accepting = Vec::with_capacity(next as usize + 1);
    for s in 0..n {
        if id[s] == u32::MAX {
            continue;
        }
        let mut row = [0u32; SIGMA];
        for (c, slot) in row.iter_mut().enumerate() {
            let t = m.goto[s][c] as usize;
            *slot = if id[t] == u32::MAX { sink } else { id[t] };
        }
        trans.push(row);
        accepting.push(false);
    }
    trans.push([sink; SIGMA]);
    accepting.push(true);
    // The root is never a match state since no pattern is empty.
    Ok(Dfa {
        trans,
        start: id[0],
        accepting,
    })
}

/// Complements the language and keeps only useful states, plus one
/// explicit non-accepting dead state that absorbs every missing
/// transition. The dead state is the last state. If no state is useful the
/// result is the one-state automaton of the empty language.
pub fn complement_and_trim(d: &Dfa) -> Dfa {
    let comp = Dfa {
        trans: d.trans.clone(),
        start: d.start,
        accepting: d.accepting.iter().map(|a| !a).collect(),
    };
    let useful = comp.useful_states();
    if !useful[comp.start as usize] {
        return Dfa {
            trans: vec![[0; SIGMA]],
            start: 0,
            accepting: vec![false],
        };
    }
    // Renumber useful states in breadth-first order from the start.
    let n = comp.trans.len();
    let mut id = vec![u32::MAX; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([comp.start as usize]);
    id[comp.start as usize] = 0;
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &t in &comp.trans[s] {
            let t = t as usize;
            if useful[t] && id[t] == u32::MAX {
                id[t] = order.len() as u32 + queue.len() as u32;
                queue.push_back(t);
            }
        }
    }
    let dead = order.len() as u32;
    let mut trans: Vec<[u32; SIGMA]> = order
        .iter()
        .map(|&s| {
            let mut row = [dead; SIGMA];
            for (c, slot) in row.iter_mut().enumerate() {
                let t = comp.trans[s][c] as usize;
                if useful[t] {
                    *slot = id[t];
                }
            }
            row
        })
        .collect();
    let mut accepting: Vec<bool> = order.iter().map(|&s| comp.accepting[s]).collect();
    trans.push([dead; SIGMA]);
    accepting.push(false);
    Dfa {
        trans,
        start: 0,
        accepting,
    }
}

/// Finiteness report for the language of a DFA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitenessReport {
    pub finite: bool,
    /// Length of the longest accepted word (finite, nonempty languages).
    pub max_length: Option<usize>,
    /// Number of accepted words (finite languages; saturates at `u128::MAX`).
    pub count: Option<u128>,
}

/// Decides finiteness of the accepted language. Only useful states are
/// considered, so dead and unreachable states may be present.
pub fn is_finite_language(d: &Dfa) -> FinitenessReport {
    let useful = d.useful_states();
    let n = d.trans.len();
    if !useful[d.start as usize] {
        return FinitenessReport {
            finite: true,
            max_length: None,
            count: Some(0),
        };
    }
    // Iterative DFS for a topological order of the useful subgraph; a back
    // edge means a cycle and hence an infinite language.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    let mut post = Vec::new();
    let mut stack: Vec<(usize, usize)> = vec![(d.start as usize, 0)];
    mark[d.start as usize] = Mark::Active;
    while let Some(&mut (s, ref mut c)) = stack.last_mut() {
        if *c == SIGMA {
            mark[s] = Mark::Done;
            post.push(s);
            stack.pop();
            continue;
        }
        let t = d.trans[s][*c] as usize;
        *c += 1;
        if !useful[t] {
            continue;
        }
        match mark[t] {
            Mark::Active => {
                return FinitenessReport {
                    finite: false,
                    max_length: None,
                    count: None,
                }
            }
            Mark::New => {
                mark[t] = Mark::Active;
                stack.push((t, 0));
            }
            Mark::Done => {}
        }
    }
    // `post` lists successors before predecessors.
    let mut count = vec![0u128; n];
    let mut longest: Vec<Option<usize>> = vec![None; n];
    for &s in &post {
        let mut c: u128 = u128::from(d.accepting[s]);
        let mut l = if d.accepting[s] { Some(0) } else { None };
        for &t in &d.trans[s] {
            let t = t as usize;
            if useful[t] {
                c = c.saturating_add(count[t]);
                if let Some(lt) = longest[t] {
                    l = Some(l.map_or(lt + 1, |x: usize| x.max(lt + 1)));
                }
            }
        }
        count[s] = c;
        longest[s] = l;
    }
    let st = d.start as usize;
    FinitenessReport {
        finite: true,
        max_length: longest[st],
        count: Some(count[st]),
    }
}

/// Minimal complete DFA for the same language (Moore partition
/// refinement on the reachable states). States are numbered in
/// breadth-first order from the start state.
pub fn minimize(d: &Dfa) -> Dfa {
    let reach = d.reachable();
    let states: Vec<usize> = (0..d.trans.len()).filter(|&s| reach[s]).collect();
    let mut class = vec![0u32; d.trans.len()];
    for &s in &states {
        class[s] = u32::from(d.accepting[s]);
    }
    let mut nclasses = states
        .iter()
        .map(|&s| class[s])
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    loop {
        let mut sig: std::collections::HashMap<(u32, [u32; SIGMA]), u32> = Default::default();
        let mut next = vec![0u32; d.trans.len()];
        for &s in &states {
            let mut row = [0u32; SIGMA];
            for c in 0..SIGMA {
                row[c] = class[d.trans[s][c] as usize];
            }
            let k = sig.len() as u32;
            next[s] = *sig.entry((class[s], row)).or_insert(k);
        }
        let count = sig.len();
        class = next;
        if count == nclasses {
            break;
        }
        nclasses = count;
    }
    // Renumber classes in BFS order.
    let mut id = vec![u32::MAX; nclasses];
    let mut rep = vec![0usize; nclasses];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([d.start as usize]);
    id[class[d.start as usize] as usize] = 0;
    while let Some(s) = queue.pop_front() {
        rep[order.len()] = s;
        order.push(class[s]);
        for &t in &d.trans[s] {
            let k = class[t as usize] as usize;
            if id[k] == u32::MAX {
                id[k] = (order.len() + queue.len()) as u32;
                queue.push_back(t as usize);
            }
        }
    }
    let trans = (0..order.len())
        .map(|i| {
            let s = rep[i];
            let mut row = [0u32; SIGMA];
            for c in 0..SIGMA {
                row[c] = id[class[d.trans[s][c] as usize] as usize];
            }
            row
        })
        .collect();
    let accepting = (0..order.len()).map(|i| d.accepting[rep[i]]).collect();
    Dfa {
        trans,
        start: 0,
        accepting,
    }
}

/// Graphviz rendering: one node per state, one labelled edge per
/// transition, accepting states drawn as double circles.
pub fn export_dot(d: &Dfa) -> String {
    let mut s = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
    for (i, acc) in d.accepting.iter().enumerate() {
        let shape = if *acc { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  q{i} [shape={shape}];");
    }
    let _ = writeln!(s, "  __start -> q{};", d.start);
    for (i, row) in d.trans.iter().enumerate() {
        for (c, t) in row.iter().enumerate() {
            let _ = writeln!(s, "  q{i} -> q{t} [label=\"{}\"];", Letter::from_index(c).token());
        }
    }
    s.push_str("}\n");
    s
}

/// Cofiniteness of a set of patterns: whether only finitely many words
/// avoid all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CofinitenessReport {
    pub cofinite: bool,
    /// Longest pattern-avoiding word.
    pub max_complement_length: Option<usize>,
    /// Number of pattern-avoiding words.
    pub complement_count: Option<u128>,
}

pub fn is_cofinite(patterns: &[Word]) -> Result<CofinitenessReport, AutomatonError> {
    let d = build_pattern_dfa(patterns)?;
    let r = is_finite_language(&complement_and_trim(&d));
    Ok(CofinitenessReport {
        cofinite: r.finite,
        max_complement_length: r.max_length,
        complement_count: r.count,
    })
}
