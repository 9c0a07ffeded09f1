//! Discovery of a complete rewriting system for words.
//!
//! Words are generated by length in shortlex order, each as a one-letter
//! left extension of an irreducible word of the previous length. A word
//! that is still irreducible is compared with the irreducible words seen so
//! far that share its fingerprint (its values on a fixed panel of
//! relations). The first one the equivalence oracle accepts becomes the
//! small side of a new rule; if none does, the word becomes a new
//! representative. The search stops as soon as the large sides make the
//! set of irreducible words finite.
//!
//! The oracle is bounded: it checks every relation on a universe of
//! `exhaustive_size` elements and a fixed sample of relations on larger
//! universes. Since every letter commutes with renaming the elements, it
//! suffices to check one relation per isomorphism class at the exhaustive
//! size, which is what `orbit_reduction` does.

use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{is_cofinite, AutomatonError};
use crate::rewrite::Rule;
use crate::semantics::{Packed, Rel, Structure, MAX_PACKED_SIZE};
use crate::word::{Letter, Word};

/// Parameters of the bounded word-equivalence oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Every relation on a universe of this size is checked.
    pub exhaustive_size: usize,
    /// Universe sizes checked by sampling.
    pub sample_sizes: Vec<usize>,
    /// Random relations per sampled size (the four extreme relations are
    /// always added).
    pub samples_per_size: usize,
    pub seed: u64,
    /// Check one relation per isomorphism class at the exhaustive size
    /// (sizes up to 5 only).
    pub orbit_reduction: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            exhaustive_size: 5,
            sample_sizes: vec![6, 7],
            samples_per_size: 2_000,
            seed: 0x5eed,
            orbit_reduction: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("exhaustive size {0} is out of range 1..=8")]
    ExhaustiveSize(usize),
    #[error("sample size {0} is out of range 1..=8")]
    SampleSize(usize),
    #[error("seed rule {index} ({rule}) is not oriented")]
    NotOriented { index: usize, rule: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Relabels a packed relation: `(x,y) ↦ (σ(x), σ(y))`.
pub fn permute_packed(n: usize, r: u64, sigma: &[usize]) -> u64 {
    let mut out = 0u64;
    for x in 0..n {
        let mut row = (r >> (x * n)) & ((1 << n) - 1);
        while row != 0 {
            let y = row.trailing_zeros() as usize;
            out |= 1 << (sigma[x] * n + sigma[y]);
            row &= row - 1;
        }
    }
    out
}

/// The least packed encoding in each isomorphism class of relations on
/// `n ≤ 5` elements, in increasing order.
pub fn orbit_representatives(n: usize) -> Vec<u64> {
    assert!((1..=5).contains(&n), "orbit enumeration supports n <= 5");
    let perms = permutations(n);
    // Per permutation and per row: the row's bits relabelled into columns.
    let cols: Vec<Vec<u64>> = perms
        .iter()
        .map(|s| {
            (0..1u64 << n)
                .map(|b| (0..n).filter(|y| (b >> y) & 1 == 1).fold(0, |acc, y| acc | (1 << s[y])))
                .collect()
        })
        .collect();
    let total = 1u64 << (n * n);
    let mut seen = vec![0u64; (total as usize).div_ceil(64)];
    let mut reps = Vec::new();
    let mask = (1u64 << n) - 1;
    for r in 0..total {
        if (seen[(r >> 6) as usize] >> (r & 63)) & 1 == 1 {
            continue;
        }
        reps.push(r);
        for (s, col) in perms.iter().zip(&cols) {
            let mut img = 0u64;
            for x in 0..n {
                img |= col[((r >> (x * n)) & mask) as usize] << (s[x] * n);
            }
            seen[(img >> 6) as usize] |= 1 << (img & 63);
        }
    }
    reps
}

fn cached_orbits(n: usize) -> &'static [u64] {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static [u64]>>> = OnceLock::new();
    let m = CACHE.get_or_init(Default::default);
    let mut g = m.lock().unwrap();
    g.entry(n)
        .or_insert_with(|| Box::leak(orbit_representatives(n).into_boxed_slice()))
}

/// A relation that separates two words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordWitness {
    pub size: usize,
    pub relation: u64,
}

impl WordWitness {
    pub fn to_structure(&self) -> Structure {
        Structure::new(self.size).with("a", Rel::from_packed(self.size, self.relation))
    }
}

struct SampleSet {
    packed: Packed,
    relations: Vec<u64>,
}

/// Precomputed tables for repeated word-equivalence queries.
pub struct WordOracle {
    cfg: OracleConfig,
    exhaustive: Packed,
    /// `None` means every relation (labelled enumeration).
    exhaustive_set: Option<&'static [u64]>,
    samples: Vec<SampleSet>,
    /// (sample set index or usize::MAX for the exhaustive size, relation).
    panel: Vec<(usize, u64)>,
}

const PANEL_EXHAUSTIVE: usize = 48;
const PANEL_PER_SAMPLE_SIZE: usize = 8;
const PAR_CHUNK: usize = 1 << 14;

impl WordOracle {
    pub fn new(cfg: OracleConfig) -> Result<WordOracle, SearchError> {
        if !(1..=MAX_PACKED_SIZE).contains(&cfg.exhaustive_size) {
            return Err(SearchError::ExhaustiveSize(cfg.exhaustive_size));
        }
        if let Some(&s) = cfg
            .sample_sizes
            .iter()
            .find(|s| !(1..=MAX_PACKED_SIZE).contains(*s))
        {
            return Err(SearchError::SampleSize(s));
        }
        let n = cfg.exhaustive_size;
        let exhaustive = Packed::new(n);
        let exhaustive_set = (cfg.orbit_reduction && n <= 5).then(|| cached_orbits(n));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let samples: Vec<SampleSet> = cfg
            .sample_sizes
            .iter()
            .map(|&s| {
                let p = Packed::new(s);
                let mut relations = vec![0, p.full, p.diag, p.full & !p.diag];
                relations.extend((0..cfg.samples_per_size).map(|_| rng.gen::<u64>() & p.full));
                SampleSet { packed: p, relations }
            })
            .collect();
        // Relations of varied density discriminate better than uniform ones:
        // most words send dense relations to the full relation.
        let mut panel: Vec<(usize, u64)> = (0..PANEL_EXHAUSTIVE)
            .map(|i| {
                let r = match i % 3 {
                    0 => rng.gen::<u64>() & rng.gen::<u64>() & rng.gen::<u64>(),
                    1 => rng.gen::<u64>() & rng.gen::<u64>(),
                    _ => rng.gen::<u64>(),
                };
                (usize::MAX, r & exhaustive.full)
            })
            .collect();
        for (i, s) in samples.iter().enumerate() {
            panel.extend(
                s.relations
                    .iter()
                    .skip(4)
                    .take(PANEL_PER_SAMPLE_SIZE)
                    .map(|&r| (i, r)),
            );
        }
        Ok(WordOracle {
            cfg,
            exhaustive,
            exhaustive_set,
            samples,
            panel,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    fn packed_for(&self, set: usize) -> &Packed {
        if set == usize::MAX {
            &self.exhaustive
        } else {
            &self.samples[set].packed
        }
    }

    /// Values of `w` on the panel relations.
    pub fn panel_values(&self, w: &Word) -> Vec<u64> {
        self.panel
            .iter()
            .map(|&(set, r)| w.apply_packed(self.packed_for(set), r))
            .collect()
    }

    /// Panel values of `l·w` from those of `w`.
    pub fn extend_panel_values(&self, l: Letter, vals: &[u64]) -> Vec<u64> {
        self.panel
            .iter()
            .zip(vals)
            .map(|(&(set, _), &v)| l.apply_packed(self.packed_for(set), v))
            .collect()
    }

    /// Stable 64-bit fingerprint of a word: FNV-1a over its panel values.
    pub fn fingerprint(&self, w: &Word) -> u64 {
        fingerprint_values(&self.panel_values(w))
    }

    /// Number of relations checked per query at the exhaustive size.
    pub fn exhaustive_count(&self) -> u64 {
        match self.exhaustive_set {
            Some(s) => s.len() as u64,
            None => 1u64 << (self.cfg.exhaustive_size * self.cfg.exhaustive_size),
        }
    }

    /// A relation separating the words, or `None` if the oracle accepts.
    pub fn counterexample(&self, u: &Word, v: &Word) -> Option<WordWitness> {
        let differs = |p: &Packed, r: u64| u.apply_packed(p, r) != v.apply_packed(p, r);
        for &(set, r) in &self.panel {
            if differs(self.packed_for(set), r) {
                return Some(WordWitness {
                    size: self.packed_for(set).n,
                    relation: r,
                });
            }
        }
        let p = &self.exhaustive;
        let found = match self.exhaustive_set {
            Some(reps) => reps
                .par_chunks(PAR_CHUNK)
                .find_map_first(|chunk| chunk.iter().copied().find(|&r| differs(p, r))),
            None => {
                let total = 1u64 << (p.n * p.n);
                (0..total.div_ceil(PAR_CHUNK as u64))
                    .into_par_iter()
                    .find_map_first(|c| {
                        let lo = c * PAR_CHUNK as u64;
                        (lo..(lo + PAR_CHUNK as u64).min(total)).find(|&r| differs(p, r))
                    })
            }
        };
        if let Some(r) = found {
            return Some(WordWitness {
                size: p.n,
                relation: r,
            });
        }
        for s in &self.samples {
            if let Some(&r) = s.relations.iter().find(|&&r| differs(&s.packed, r)) {
                return Some(WordWitness {
                    size: s.packed.n,
                    relation: r,
                });
            }
        }
        None
    }

    pub fn equivalent(&self, u: &Word, v: &Word) -> bool {
        self.counterexample(u, v).is_none()
    }
}

fn fingerprint_values(vals: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in vals {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Fingerprint of a word under a fresh oracle built from `cfg`.
pub fn word_fingerprint(w: &Word, cfg: &OracleConfig) -> Result<u64, SearchError> {
    Ok(WordOracle::new(cfg.clone())?.fingerprint(w))
}

/// Whether the bounded oracle built from `cfg` accepts `w1 ≐ w2`.
pub fn word_equiv_oracle(w1: &Word, w2: &Word, cfg: &OracleConfig) -> Result<bool, SearchError> {
    Ok(WordOracle::new(cfg.clone())?.equivalent(w1, w2))
}

/// Why the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The large sides leave finitely many irreducible words.
    Cofinite,
    /// The candidate budget was exhausted.
    Budget,
    /// All words up to the maximum length were processed.
    MaxLength,
}

/// Result of [`run_search`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    /// Seed rules followed by admitted rules, in admission order.
    pub rules: Vec<Rule>,
    pub admitted: usize,
    pub cofinite: bool,
    /// Irreducible candidate words examined (the quantity the budget caps).
    pub candidates_examined: u64,
    /// Pairs sent to the oracle after a fingerprint match.
    pub oracle_calls: u64,
    /// Representatives found (irreducible words with no accepted match).
    pub representatives: usize,
    pub stop: StopReason,
}

struct Entry {
    word: Word,
    vals: Vec<u64>,
}

/// Searches for rules until the irreducible words are finitely many, the
/// candidate budget is spent, or all words of length `max_len` are done.
pub fn run_search(
    cfg: &OracleConfig,
    max_len: usize,
    budget: u64,
    seed_rules: &[Rule],
) -> Result<SearchReport, SearchError> {
    for (i, r) in seed_rules.iter().enumerate() {
        if r.small >= r.large {
            return Err(SearchError::NotOriented {
                index: i + 1,
                rule: r.to_string(),
            });
        }
    }
    let oracle = WordOracle::new(cfg.clone())?;
    let mut rules: Vec<Rule> = seed_rules.to_vec();
    let mut large: HashSet<Vec<Letter>> = rules.iter().map(|r| r.large.0.clone()).collect();
    let cofinite_now = |rules: &[Rule]| -> Result<bool, SearchError> {
        let ls: Vec<Word> = rules.iter().map(|r| r.large.clone()).collect();
        Ok(is_cofinite(&ls)?.cofinite)
    };
    let mut report = SearchReport {
        rules: Vec::new(),
        admitted: 0,
        cofinite: false,
        candidates_examined: 0,
        oracle_calls: 0,
        representatives: 0,
        stop: StopReason::MaxLength,
    };
    let finish = |mut report: SearchReport, rules: Vec<Rule>, stop, cofinite| {
        report.admitted = rules.len() - seed_rules.len();
        report.rules = rules;
        report.stop = stop;
        report.cofinite = cofinite;
        report
    };
    if cofinite_now(&rules)? {
        return Ok(finish(report, rules, StopReason::Cofinite, true));
    }

    let mut reps: Vec<Entry> = Vec::new();
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let eps = Entry {
        word: Word::empty(),
        vals: oracle.panel_values(&Word::empty()),
    };
    buckets.entry(fingerprint_values(&eps.vals)).or_default().push(0);
    reps.push(eps);
    let mut layer: Vec<usize> = vec![0];

    for _len in 1..=max_len {
        let mut next = Vec::new();
        for l in Letter::ALL {
            for &wi in &layer {
                let mut letters = Vec::with_capacity(reps[wi].word.len() + 1);
                letters.push(l);
                letters.extend_from_slice(reps[wi].word.letters());
                // Factors not starting at 0 lie in the irreducible suffix.
                if (1..=letters.len()).any(|k| large.contains(&letters[..k])) {
                    continue;
                }
                if report.candidates_examined >= budget {
                    return Ok(finish(report, rules, StopReason::Budget, false));
                }
                report.candidates_examined += 1;
                let v = Word(letters);
                let vals = oracle.extend_panel_values(l, &reps[wi].vals);
                let fp = fingerprint_values(&vals);
                let mut admitted = false;
                if let Some(bucket) = buckets.get(&fp) {
                    for &ui in bucket {
                        if reps[ui].vals != vals {
                            continue;
                        }
                        report.oracle_calls += 1;
                        if oracle.equivalent(&reps[ui].word, &v) {
                            large.insert(v.0.clone());
                            rules.push(Rule::new(reps[ui].word.clone(), v.clone()));
                            admitted = true;
                            break;
                        }
                    }
                }
                if admitted {
                    if cofinite_now(&rules)? {
                        report.representatives = reps.len();
                        return Ok(finish(report, rules, StopReason::Cofinite, true));
                    }
                } else {
                    buckets.entry(fp).or_default().push(reps.len());
                    next.push(reps.len());
                    reps.push(Entry { word: v, vals });
                }
            }
        }
        report.representatives = reps.len();
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    report.representatives = reps.len();
    let cof = cofinite_now(&rules)?;
    let stop = if cof {
        StopReason::Cofinite
    } else {
        StopReason::MaxLength
    };
    Ok(finish(report, rules, stop, cof))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_counts_match_known_digraph_counts() {
        // Isomorphism classes of relations (digraphs with loops allowed).
        assert_eq!(orbit_representatives(1).len(), 2);
        assert_eq!(orbit_representatives(2).len(), 10);
        assert_eq!(orbit_representatives(3).len(), 104);
        assert_eq!(orbit_representatives(4).len(), 3044);
    }

    #[test]
    fn permutation_preserves_size() {
        let r = 0b1_0110_0011u64;
        for s in permutations(3) {
            assert_eq!(permute_packed(3, r, &s).count_ones(), r.count_ones());
        }
    }

    #[test]
    fn oracle_rejects_and_accepts() {
        let cfg = OracleConfig {
            exhaustive_size: 3,
            sample_sizes: vec![4],
            samples_per_size: 50,
            ..OracleConfig::default()
        };
        let o = WordOracle::new(cfg).unwrap();
        let w = |s: &str| Word::parse(s).unwrap();
        assert!(o.equivalent(&w("eps"), &w("cv cv")));
        assert!(!o.equivalent(&w("cD"), &w("cv cD")));
    }
}
