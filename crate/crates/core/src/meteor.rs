//! Unigram METEOR between a review (candidate) and a manuscript (reference).
//!
//! Two matching stages: exact surface form, then Porter-stem equality over the
//! tokens left unmatched. The alignment maximises exact matches, then total
//! matches, then minimises the number of chunks. Stem equality partitions
//! both sides into classes, so the total is fixed at the sum over classes of
//! the smaller side; only the chunk count depends on the choice of pairs.
//!
//! Chunk minimisation runs a bounded branch-and-bound seeded with a greedy
//! contiguity-extending alignment. Small inputs are solved exactly; large
//! ones fall back to the best alignment found within the node budget.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::textproc::{stem, TokenSeq};

/// Fragmentation penalty weight.
pub const GAMMA: f64 = 0.5;
/// Fragmentation penalty exponent.
pub const BETA: f64 = 3.0;
/// Recall weight in the harmonic mean, `fmean = PR / (alpha P + (1 - alpha) R)`.
pub const ALPHA: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStage {
    Exact,
    Stem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub candidate: usize,
    pub reference: usize,
    pub stage: MatchStage,
}

/// One-to-one unigram alignment, sorted by candidate index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub pairs: Vec<MatchedPair>,
    pub chunks: usize,
    /// False when the exact search ran out of budget and the result may
    /// carry more chunks than the optimum.
    pub exact: bool,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// Number of chunks in a set of `(candidate, reference)` pairs sorted by candidate.
pub fn count_chunks(pairs: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for (i, j) in pairs {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeteorStats<T> {
    pub matches: usize,
    pub chunks: usize,
    pub precision: T,
    pub recall: T,
    pub fmean: T,
    pub penalty: T,
    pub score: T,
}

impl<T: Scalar> MeteorStats<T> {
    fn zero() -> Self {
        Self {
            matches: 0,
            chunks: 0,
            precision: T::zero(),
            recall: T::zero(),
            fmean: T::zero(),
            penalty: T::zero(),
            score: T::zero(),
        }
    }

    /// Applies the scoring formulas to raw counts.
    pub fn from_counts(matches: usize, chunks: usize, candidate_len: usize, reference_len: usize) -> Self {
        if matches == 0 {
            return Self::zero();
        }
        let m = T::from_count(matches);
        let precision = m / T::from_count(candidate_len);
        let recall = m / T::from_count(reference_len);
        let alpha = T::lit(ALPHA);
        let fmean = precision * recall / (alpha * precision + (T::one() - alpha) * recall);
        let frag = T::from_count(chunks) / m;
        let penalty = T::lit(GAMMA) * frag.powf(T::lit(BETA));
        Self {
            matches,
            chunks,
            precision,
            recall,
            fmean,
            penalty,
            score: fmean * (T::one() - penalty),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AlignOptions {
    /// Branch-and-bound node budget for chunk minimisation.
    pub search_budget: usize,
    /// Candidates longer than this skip the search and keep the greedy alignment.
    pub max_search_len: usize,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self { search_budget: 20_000, max_search_len: 48 }
    }
}

pub fn align(candidate: &TokenSeq, reference: &TokenSeq) -> Alignment {
    align_with(candidate, reference, AlignOptions::default())
}

pub fn meteor_score<T: Scalar>(review: &TokenSeq, manuscript: &TokenSeq) -> MeteorStats<T> {
    let alignment = align(review, manuscript);
    MeteorStats::from_counts(alignment.matches(), alignment.chunks, review.len(), manuscript.len())
}

/// Eligible reference positions for every candidate token.
struct Candidates {
    /// Same surface form.
    exact: Vec<Vec<usize>>,
    /// Same stem, different surface form.
    stem: Vec<Vec<usize>>,
    cand_class: Vec<usize>,
    ref_class: Vec<usize>,
    target_exact: usize,
    target_total: usize,
    ref_len: usize,
}

impl Candidates {
    fn build(candidate: &TokenSeq, reference: &TokenSeq) -> Self {
        let mut classes: HashMap<String, usize> = HashMap::new();
        let mut intern = |s: String| {
            let next = classes.len();
            *classes.entry(s).or_insert(next)
        };
        let ref_class: Vec<usize> = reference.iter().map(|t| intern(stem(t))).collect();
        let cand_class: Vec<usize> = candidate.iter().map(|t| intern(stem(t))).collect();

        let mut by_surface: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut by_class: HashMap<usize, Vec<usize>> = HashMap::new();
        for (j, tok) in reference.iter().enumerate() {
            by_surface.entry(tok).or_default().push(j);
            by_class.entry(ref_class[j]).or_default().push(j);
        }

        let mut exact = Vec::with_capacity(candidate.len());
        let mut stem_refs = Vec::with_capacity(candidate.len());
        let mut cand_surface: HashMap<&str, usize> = HashMap::new();
        let mut cand_per_class: HashMap<usize, usize> = HashMap::new();
        for (tok, &class) in candidate.iter().zip(&cand_class) {
            exact.push(by_surface.get(tok).cloned().unwrap_or_default());
            let others = by_class
                .get(&class)
                .map(|js| js.iter().copied().filter(|&j| reference.tokens()[j] != tok).collect())
                .unwrap_or_default();
            stem_refs.push(others);
            *cand_surface.entry(tok).or_default() += 1;
            *cand_per_class.entry(class).or_default() += 1;
        }

        let target_exact = cand_surface
            .iter()
            .map(|(tok, &n)| n.min(by_surface.get(tok).map_or(0, Vec::len)))
            .sum();
        let target_total = cand_per_class
            .iter()
            .map(|(class, &n)| n.min(by_class.get(class).map_or(0, Vec::len)))
            .sum();

        Self {
            exact,
            stem: stem_refs,
            cand_class,
            ref_class,
            target_exact,
            target_total,
            ref_len: reference.len(),
        }
    }

    fn len(&self) -> usize {
        self.exact.len()
    }

    fn eligible(&self, i: usize, j: usize) -> bool {
        self.cand_class[i] == self.ref_class[j]
    }
}

pub fn align_with(candidate: &TokenSeq, reference: &TokenSeq, opts: AlignOptions) -> Alignment {
    let cands = Candidates::build(candidate, reference);
    if cands.target_total == 0 {
        return Alignment { pairs: Vec::new(), chunks: 0, exact: true };
    }

    let greedy = greedy_assignment(&cands);
    let mut search = Search::new(&cands, greedy, opts.search_budget);
    if cands.len() <= opts.max_search_len {
        search.run();
    } else {
        search.exhausted = search.best_links + 1 != cands.target_total;
    }

    let pairs: Vec<MatchedPair> = search
        .best
        .iter()
        .enumerate()
        .filter_map(|(i, slot)| {
            slot.map(|(j, stage)| MatchedPair { candidate: i, reference: j, stage })
        })
        .collect();
    let chunks = count_chunks(pairs.iter().map(|p| (p.candidate, p.reference)));
    Alignment { pairs, chunks, exact: !search.exhausted }
}

type Assignment = Vec<Option<(usize, MatchStage)>>;

/// Two-stage greedy: exact pairs first, then stem pairs, each time preferring
/// the reference position that continues the previous pair, then the one that
/// opens the longest run of further matches.
fn greedy_assignment(c: &Candidates) -> Assignment {
    let mut assigned: Assignment = vec![None; c.len()];
    let mut used = vec![false; c.ref_len];
    for stage in [MatchStage::Exact, MatchStage::Stem] {
        for i in 0..c.len() {
            if assigned[i].is_some() {
                continue;
            }
            let options = match stage {
                MatchStage::Exact => &c.exact[i],
                MatchStage::Stem => &c.stem[i],
            };
            let follows = i
                .checked_sub(1)
                .and_then(|p| assigned[p])
                .map(|(pj, _)| pj + 1);
            let mut best: Option<(usize, usize, bool)> = None;
            for &j in options.iter().filter(|&&j| !used[j]) {
                let cont = follows == Some(j);
                let run = run_length(c, &assigned, &used, i, j);
                let better = match best {
                    None => true,
                    Some((_, brun, bcont)) => (cont, run) > (bcont, brun),
                };
                if better {
                    best = Some((j, run, cont));
                }
            }
            if let Some((j, _, _)) = best {
                used[j] = true;
                assigned[i] = Some((j, stage));
            }
        }
    }
    assigned
}

/// How many consecutive candidate positions starting at `i` could pair with
/// consecutive free reference positions starting at `j`.
fn run_length(c: &Candidates, assigned: &Assignment, used: &[bool], i: usize, j: usize) -> usize {
    let mut n = 0;
    while i + n < c.len() && j + n < c.ref_len {
        let (ci, rj) = (i + n, j + n);
        let free = n == 0 || (assigned[ci].is_none() && !used[rj]);
        if !free || !c.eligible(ci, rj) {
            break;
        }
        n += 1;
    }
    n
}

struct Search<'a> {
    c: &'a Candidates,
    /// Suffix counts of candidates with any exact / any eligible reference.
    exact_left: Vec<usize>,
    any_left: Vec<usize>,
    /// Suffix counts of positions `i` that could continue a run from `i - 1`.
    link_left: Vec<usize>,
    used: Vec<bool>,
    current: Assignment,
    best: Assignment,
    best_links: usize,
    nodes: usize,
    budget: usize,
    exhausted: bool,
}

fn links_of(a: &Assignment) -> usize {
    a.windows(2)
        .filter(|w| matches!((w[0], w[1]), (Some((j0, _)), Some((j1, _))) if j1 == j0 + 1))
        .count()
}

impl<'a> Search<'a> {
    fn new(c: &'a Candidates, incumbent: Assignment, budget: usize) -> Self {
        let n = c.len();
        let mut exact_left = vec![0; n + 1];
        let mut any_left = vec![0; n + 1];
        for i in (0..n).rev() {
            exact_left[i] = exact_left[i + 1] + usize::from(!c.exact[i].is_empty());
            any_left[i] = any_left[i + 1] + usize::from(!c.exact[i].is_empty() || !c.stem[i].is_empty());
        }
        let mut link_left = vec![0; n + 1];
        for i in (1..n).rev() {
            let linkable = c.exact[i].iter().chain(&c.stem[i]).any(|&j| j > 0 && c.eligible(i - 1, j - 1));
            link_left[i] = link_left[i + 1] + usize::from(linkable);
        }
        link_left[0] = link_left.get(1).copied().unwrap_or(0);
        let best_links = links_of(&incumbent);
        Self {
            c,
            exact_left,
            any_left,
            link_left,
            used: vec![false; c.ref_len],
            current: vec![None; n],
            best: incumbent,
            best_links,
            nodes: 0,
            budget,
            exhausted: false,
        }
    }

    fn run(&mut self) {
        // A single chunk cannot be improved on.
        if self.best_links + 1 == self.c.target_total {
            return;
        }
        self.descend(0, 0, 0, 0);
    }

    fn descend(&mut self, i: usize, exact: usize, total: usize, links: usize) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if exact + self.exact_left[i] < self.c.target_exact
            || total + self.any_left[i] < self.c.target_total
        {
            return;
        }
        // Every remaining match could at best extend the current run.
        let room = (self.c.target_total - total).min(self.link_left[i]);
        if links + room <= self.best_links {
            return;
        }
        if i == self.c.len() {
            if exact == self.c.target_exact && total == self.c.target_total && links > self.best_links {
                self.best_links = links;
                self.best = self.current.clone();
            }
            return;
        }
        if total == self.c.target_total {
            self.descend(i + 1, exact, total, links);
            return;
        }

        let follows = i
            .checked_sub(1)
            .and_then(|p| self.current[p])
            .map(|(pj, _)| pj + 1);
        let mut options: Vec<(usize, MatchStage)> = self.c.exact[i]
            .iter()
            .map(|&j| (j, MatchStage::Exact))
            .chain(self.c.stem[i].iter().map(|&j| (j, MatchStage::Stem)))
            .filter(|&(j, _)| !self.used[j])
            .collect();
        if let Some(f) = follows {
            if let Some(pos) = options.iter().position(|&(j, _)| j == f) {
                options.swap(0, pos);
            }
        }

        for (j, stage) in options {
            let extends = usize::from(follows == Some(j));
            self.used[j] = true;
            self.current[i] = Some((j, stage));
            self.descend(
                i + 1,
                exact + usize::from(stage == MatchStage::Exact),
                total + 1,
                links + extends,
            );
            self.current[i] = None;
            self.used[j] = false;
            if self.exhausted || self.best_links + 1 == self.c.target_total {
                return;
            }
        }
        self.descend(i + 1, exact, total, links);
    }
}
