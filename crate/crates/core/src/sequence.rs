//! Sequence selection by direct concatenation.
//!
//! [`dfs_best_sequences`] enumerates ordered selections of distinct objects
//! depth first, concatenating one leg matrix per level, and cuts a branch as
//! soon as the minimum of the partial concatenation plus the cheapest
//! possible remaining legs exceeds the retained `top_k`-th total by more than
//! the prune margin. Because `min(A ⊕ B) ≥ min(A) + min(B)`, the cut never
//! removes a sequence that belongs to the output.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dvmatrix::{concat_into, concat_min_values, direct_concat, matrix_min, min_value, DvMatrix, MatrixError, INF};
use crate::pipeline::MatrixSet;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("sequence length {need} needs at least {need} allowed objects, got {have}")]
    TooFewObjects { need: usize, have: usize },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Objects per sequence.
    pub n: usize,
    /// Slack (m/s) added to the retained threshold before pruning.
    pub prune_margin: f64,
    pub top_k: usize,
    /// Allowed objects; empty means every object of the matrix set.
    pub objects: Vec<String>,
}

impl SearchConfig {
    pub fn new(n: usize, prune_margin: f64, top_k: usize) -> Self {
        Self {
            n,
            prune_margin,
            top_k,
            objects: Vec::new(),
        }
    }

    pub fn with_objects<S: AsRef<str>>(mut self, objects: &[S]) -> Self {
        self.objects = objects.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.n < 2 {
            return Err(SearchError::InvalidConfig("N must be at least 2".into()));
        }
        if self.prune_margin.is_nan() || self.prune_margin < 0.0 {
            return Err(SearchError::InvalidConfig("prune_margin must be >= 0".into()));
        }
        if self.top_k == 0 {
            return Err(SearchError::InvalidConfig("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegSchedule {
    pub from: String,
    pub to: String,
    pub departure_epoch: f64,
    /// Transfer duration in days.
    pub duration: f64,
    /// Entry of the leg matrix used by the winning cell (m/s).
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceResult {
    pub labels: Vec<String>,
    pub total_dv: f64,
    /// First departure, `None` when no finite schedule exists.
    pub departure_epoch: Option<f64>,
    pub arrival_epoch: Option<f64>,
    pub legs: Vec<LegSchedule>,
}

impl SequenceResult {
    /// `a → b → c`
    pub fn path(&self) -> String {
        self.labels.join("→")
    }
}

/// Ranking order: total ΔV, then label sequence.
pub fn rank_order(a: &SequenceResult, b: &SequenceResult) -> Ordering {
    a.total_dv.total_cmp(&b.total_dv).then_with(|| a.labels.cmp(&b.labels))
}

/// Concatenates the leg matrices of `labels` and recovers the schedule of
/// the minimising cell by backtracking through every concatenation level.
pub fn evaluate_sequence<S: AsRef<str>>(set: &MatrixSet, labels: &[S]) -> Result<SequenceResult, SearchError> {
    let idx: Vec<usize> = labels
        .iter()
        .map(|s| set.index_of(s.as_ref()).ok_or_else(|| SearchError::UnknownObject(s.as_ref().to_string())))
        .collect::<Result<_, _>>()?;
    let names: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
    if idx.len() < 2 {
        return Ok(SequenceResult {
            labels: names,
            total_dv: 0.0,
            departure_epoch: None,
            arrival_epoch: None,
            legs: Vec::new(),
        });
    }
    let legs: Vec<DvMatrix> = idx.windows(2).map(|w| set.get_or_infinite(w[0], w[1])).collect();
    let mut levels = vec![legs[0].clone()];
    for leg in &legs[1..] {
        let next = direct_concat(levels.last().expect("non-empty"), leg)?;
        levels.push(next);
    }
    let (total, mut i, j) = matrix_min(levels.last().expect("non-empty"));
    if !total.is_finite() {
        return Ok(SequenceResult {
            labels: names,
            total_dv: INF,
            departure_epoch: None,
            arrival_epoch: None,
            legs: Vec::new(),
        });
    }
    let spec = *set.spec();
    let (h, total_rows) = (spec.h, i);
    // (departure column, duration rows, dv) per leg, last leg first
    let mut sched = Vec::with_capacity(legs.len());
    for f in (1..legs.len()).rev() {
        let target = levels[f].get(i, j);
        let k = (1..=(h - j).min(i - 1))
            .find(|&k| levels[f - 1].get(k, j) + legs[f].get(i - k, j + k) == target)
            .expect("a minimising cell always has a witness");
        sched.push((j + k, i - k, legs[f].get(i - k, j + k)));
        i = k;
    }
    sched.push((j, i, legs[0].get(i, j)));
    sched.reverse();
    let legs = sched
        .iter()
        .zip(names.windows(2))
        .map(|(&(col, rows, dv), w)| LegSchedule {
            from: w[0].clone(),
            to: w[1].clone(),
            departure_epoch: spec.departure(col),
            duration: rows as f64 * spec.dt_step,
            dv,
        })
        .collect();
    let departure = spec.departure(j);
    Ok(SequenceResult {
        labels: names,
        total_dv: total,
        departure_epoch: Some(departure),
        arrival_epoch: Some(departure + spec.duration(total_rows)),
        legs,
    })
}

// Dense view of the allowed objects' matrices.
struct Problem<'a> {
    set: &'a MatrixSet,
    // allowed object -> set index
    objects: Vec<usize>,
    names: Vec<&'a str>,
    d: usize,
    h: usize,
    legs: Vec<Option<&'a [f64]>>,
    inf: Vec<f64>,
    pair_min: Vec<f64>,
    // per departure object, arrival objects by increasing pair minimum
    order: Vec<Vec<usize>>,
}

impl<'a> Problem<'a> {
    fn new<S: AsRef<str>>(set: &'a MatrixSet, objects: &[S]) -> Result<Self, SearchError> {
        set.spec().is_uniform().then_some(()).ok_or(MatrixError::NonUniformGrid)?;
        let objects: Vec<usize> = if objects.is_empty() {
            (0..set.len()).collect()
        } else {
            let mut seen = Vec::new();
            for s in objects {
                let k = set.index_of(s.as_ref()).ok_or_else(|| SearchError::UnknownObject(s.as_ref().to_string()))?;
                if seen.contains(&k) {
                    return Err(SearchError::InvalidConfig(format!("object `{}` listed twice", s.as_ref())));
                }
                seen.push(k);
            }
            seen
        };
        let m = objects.len();
        let spec = set.spec();
        let names: Vec<&str> = objects.iter().map(|&k| set.ids()[k].as_str()).collect();
        let mut legs = vec![None; m * m];
        let mut pair_min = vec![INF; m * m];
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    if let Some(mat) = set.get(objects[a], objects[b]) {
                        legs[a * m + b] = Some(mat.values());
                        pair_min[a * m + b] = min_value(mat.values());
                    }
                }
            }
        }
        let order = (0..m)
            .map(|a| {
                let mut to: Vec<usize> = (0..m).filter(|&b| b != a).collect();
                to.sort_by(|&x, &y| pair_min[a * m + x].total_cmp(&pair_min[a * m + y]).then(names[x].cmp(names[y])));
                to
            })
            .collect();
        Ok(Self {
            set,
            objects,
            names,
            d: spec.d,
            h: spec.h,
            legs,
            inf: vec![INF; spec.cells()],
            pair_min,
            order,
        })
    }

    fn m(&self) -> usize {
        self.objects.len()
    }

    fn leg(&self, a: usize, b: usize) -> &[f64] {
        self.legs[a * self.m() + b].unwrap_or(&self.inf)
    }

    fn pmin(&self, a: usize, b: usize) -> f64 {
        self.pair_min[a * self.m() + b]
    }

    fn cmp_labels(&self, x: &[usize], y: &[usize]) -> Ordering {
        x.iter().map(|&k| self.names[k]).cmp(y.iter().map(|&k| self.names[k]))
    }

    fn result(&self, seq: &[usize]) -> Result<SequenceResult, SearchError> {
        let labels: Vec<&str> = seq.iter().map(|&k| self.names[k]).collect();
        evaluate_sequence(self.set, &labels)
    }
}

// `bound` exceeds `limit`, with an allowance for summation order so that
// rounding never cuts a sequence whose exact total ties the limit.
fn exceeds(bound: f64, limit: f64) -> bool {
    bound - limit > 1e-12 * limit.abs()
}

struct Candidate {
    total: f64,
    seq: Vec<usize>,
}

// Bounded best list shared by the workers. `threshold` mirrors the k-th
// retained total (or +∞ while the list is short) and only ever decreases.
struct BestList<'p, 'a> {
    problem: &'p Problem<'a>,
    k: usize,
    list: Mutex<Vec<Candidate>>,
    threshold: AtomicU64,
}

impl<'p, 'a> BestList<'p, 'a> {
    fn new(problem: &'p Problem<'a>, k: usize) -> Self {
        Self {
            problem,
            k,
            list: Mutex::new(Vec::with_capacity(k + 1)),
            threshold: AtomicU64::new(INF.to_bits()),
        }
    }

    fn threshold(&self) -> f64 {
        f64::from_bits(self.threshold.load(AtomicOrdering::Acquire))
    }

    fn cmp(&self, a: &Candidate, b: &Candidate) -> Ordering {
        a.total.total_cmp(&b.total).then_with(|| self.problem.cmp_labels(&a.seq, &b.seq))
    }

    fn offer(&self, total: f64, seq: &[usize]) {
        if total > self.threshold() {
            return;
        }
        let cand = Candidate {
            total,
            seq: seq.to_vec(),
        };
        let mut list = self.list.lock().expect("best list lock");
        if list.len() == self.k && self.cmp(&cand, list.last().expect("full list")) != Ordering::Less {
            return;
        }
        let pos = list.partition_point(|c| self.cmp(c, &cand) == Ordering::Less);
        list.insert(pos, cand);
        list.truncate(self.k);
        if list.len() == self.k {
            // non-negative f64 bit patterns order like the values
            let kth = list.last().expect("full list").total;
            self.threshold.fetch_min(kth.to_bits(), AtomicOrdering::AcqRel);
        }
    }

    fn into_sorted(self) -> Vec<Candidate> {
        self.list.into_inner().expect("best list lock")
    }
}

struct Worker<'b, 'p, 'a> {
    p: &'p Problem<'a>,
    best: &'b BestList<'p, 'a>,
    margin: f64,
    n: usize,
    // lb[r]: sum of the r smallest single-leg minima
    lb: &'b [f64],
    levels: Vec<Vec<f64>>,
    prefix: Vec<f64>,
    seq: Vec<usize>,
    used: Vec<bool>,
}

impl Worker<'_, '_, '_> {
    fn limit(&self) -> f64 {
        self.best.threshold() + self.margin
    }

    // `self.levels[f - 1]` holds the concatenation of the first `f` legs.
    fn descend(&mut self, f: usize, cur_min: f64) {
        let last = *self.seq.last().expect("prefix");
        let remaining = self.n - 1 - (f + 1);
        let order = &self.p.order[last];
        for &c in order {
            if self.used[c] {
                continue;
            }
            let bound = cur_min + self.p.pmin(last, c) + self.lb[remaining];
            if exceeds(bound, self.limit()) {
                // candidates come by increasing pair minimum
                break;
            }
            let (done, rest) = self.levels.split_at_mut(f);
            let cur = &done[f - 1];
            let leg = self.p.leg(last, c);
            self.seq.push(c);
            if remaining == 0 {
                let total = concat_min_values(cur, leg, self.p.d, self.p.h, &mut self.prefix);
                self.best.offer(total, &self.seq);
            } else {
                let next = &mut rest[0];
                concat_into(cur, leg, self.p.d, self.p.h, next);
                let next_min = min_value(next);
                if !exceeds(next_min + self.lb[remaining], self.limit()) {
                    self.used[c] = true;
                    self.descend(f + 1, next_min);
                    self.used[c] = false;
                }
            }
            self.seq.pop();
        }
    }
}

/// The `top_k` cheapest sequences of `cfg.n` distinct objects, ranked by
/// total ΔV and then by labels. Equal to exhaustive enumeration of all
/// permutations. First pairs are distributed over the current rayon pool;
/// the ranking does not depend on the number of threads.
pub fn dfs_best_sequences(set: &MatrixSet, cfg: &SearchConfig) -> Result<Vec<SequenceResult>, SearchError> {
    cfg.validate()?;
    let p = Problem::new(set, &cfg.objects)?;
    let m = p.m();
    if m < cfg.n {
        return Err(SearchError::TooFewObjects { need: cfg.n, have: m });
    }
    let mut minima: Vec<f64> = (0..m)
        .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| p.pmin(a, b))
        .collect();
    minima.sort_by(f64::total_cmp);
    let mut lb = vec![0.0];
    for &v in minima.iter().take(cfg.n) {
        lb.push(lb.last().expect("seeded") + v);
    }

    let mut firsts: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    firsts.sort_by(|x, y| {
        p.pmin(x.0, x.1)
            .total_cmp(&p.pmin(y.0, y.1))
            .then_with(|| p.cmp_labels(&[x.0, x.1], &[y.0, y.1]))
    });

    let best = BestList::new(&p, cfg.top_k);
    firsts.par_iter().for_each(|&(a, b)| {
        let first_min = p.pmin(a, b);
        if exceeds(first_min + lb[cfg.n - 2], best.threshold() + cfg.prune_margin) {
            return;
        }
        if cfg.n == 2 {
            best.offer(first_min, &[a, b]);
            return;
        }
        let mut levels = vec![vec![INF; p.d * p.h]; cfg.n - 1];
        levels[0].copy_from_slice(p.leg(a, b));
        let mut used = vec![false; m];
        used[a] = true;
        used[b] = true;
        let mut w = Worker {
            p: &p,
            best: &best,
            margin: cfg.prune_margin,
            n: cfg.n,
            lb: &lb,
            levels,
            prefix: Vec::new(),
            seq: vec![a, b],
            used,
        };
        w.descend(1, first_min);
    });

    best.into_sorted()
        .into_iter()
        .map(|c| {
            let r = p.result(&c.seq)?;
            debug_assert!(r.total_dv == c.total || (r.total_dv.is_infinite() && c.total.is_infinite()));
            Ok(r)
        })
        .collect()
}

/// Longest sequences of distinct objects whose concatenated minimum ΔV is
/// finite and within `budget` (inclusive), ranked by total ΔV and labels.
///
/// Every feasible sequence is grown one leg at a time and a branch stops as
/// soon as its partial minimum exceeds the budget, so the cost grows with the
/// number of feasible sequences, not with the number of permutations.
pub fn budget_max_objects<S: AsRef<str>>(
    set: &MatrixSet,
    objects: &[S],
    budget: f64,
) -> Result<Vec<SequenceResult>, SearchError> {
    if budget.is_nan() || budget <= 0.0 {
        return Err(SearchError::InvalidConfig("budget must be > 0".into()));
    }
    let p = Problem::new(set, objects)?;
    let m = p.m();
    if m == 0 {
        return Err(SearchError::TooFewObjects { need: 1, have: 0 });
    }

    struct Grow<'p, 'a> {
        p: &'p Problem<'a>,
        budget: f64,
        levels: Vec<Vec<f64>>,
        seq: Vec<usize>,
        used: Vec<bool>,
        found: Vec<(f64, Vec<usize>)>,
        longest: usize,
    }

    impl Grow<'_, '_> {
        fn record(&mut self, total: f64) {
            let len = self.seq.len();
            if len > self.longest {
                self.longest = len;
                self.found.clear();
            }
            if len == self.longest {
                self.found.push((total, self.seq.clone()));
            }
        }

        // `f` legs flown so far; their concatenation is `levels[f - 1]`.
        fn grow(&mut self, f: usize, cur_min: f64) {
            let last = *self.seq.last().expect("prefix");
            for &c in &self.p.order[last] {
                if self.used[c] {
                    continue;
                }
                let bound = cur_min + self.p.pmin(last, c);
                if bound > self.budget || bound.is_infinite() {
                    break;
                }
                if self.levels.len() <= f {
                    self.levels.push(vec![INF; self.p.d * self.p.h]);
                }
                let leg = self.p.leg(last, c);
                let next_min = if f == 0 {
                    self.levels[0].copy_from_slice(leg);
                    min_value(leg)
                } else {
                    let (done, rest) = self.levels.split_at_mut(f);
                    concat_into(&done[f - 1], leg, self.p.d, self.p.h, &mut rest[0]);
                    min_value(&rest[0])
                };
                if next_min > self.budget || next_min.is_infinite() {
                    continue;
                }
                self.seq.push(c);
                self.used[c] = true;
                self.record(next_min);
                self.grow(f + 1, next_min);
                self.used[c] = false;
                self.seq.pop();
            }
        }
    }

    // (longest length, its sequences as (total, object indices)) per start
    type Found = (usize, Vec<(f64, Vec<usize>)>);
    let per_start: Vec<Found> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut used = vec![false; m];
            used[a] = true;
            let mut g = Grow {
                p: &p,
                budget,
                levels: Vec::new(),
                seq: vec![a],
                used,
                found: Vec::new(),
                longest: 0,
            };
            g.record(0.0);
            g.grow(0, 0.0);
            (g.longest, g.found)
        })
        .collect();

    let longest = per_start.iter().map(|(l, _)| *l).max().unwrap_or(0);
    let mut all: Vec<(f64, Vec<usize>)> = per_start
        .into_iter()
        .filter(|(l, _)| *l == longest)
        .flat_map(|(_, f)| f)
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| p.cmp_labels(&x.1, &y.1)));
    all.iter().map(|(_, seq)| p.result(seq)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvmatrix::GridSpec;
    use proptest::prelude::*;

    fn set_of(entries: &[(&str, &str, Vec<Vec<f64>>)]) -> MatrixSet {
        MatrixSet::from_matrices(
            entries
                .iter()
                .map(|(a, b, rows)| DvMatrix::from_rows(rows, &[*a, *b]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn permutations(m: usize, n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(m, n - 1) {
            for x in 0..m {
                if !p.contains(&x) {
                    let mut q = p.clone();
                    q.push(x);
                    out.push(q);
                }
            }
        }
        out
    }

    // Brute force over all permutations, ⊕ evaluated cell by cell.
    fn brute(set: &MatrixSet, n: usize) -> Vec<(f64, Vec<String>)> {
        let spec = *set.spec();
        let (d, h) = (spec.d, spec.h);
        let mut out: Vec<(f64, Vec<String>)> = permutations(set.len(), n)
            .into_iter()
            .map(|perm| {
                let leg = |x: usize, y: usize, i: usize, j: usize| set.get(perm[x], perm[y]).map_or(INF, |m| m.get(i, j));
                // cost[i][j] over the legs flown so far
                let mut cost: Vec<Vec<f64>> = (1..=d).map(|i| (1..=h).map(|j| leg(0, 1, i, j)).collect()).collect();
                for f in 1..n - 1 {
                    let mut next = vec![vec![INF; h]; d];
                    for i in 1..=d {
                        for j in 1..=h {
                            for k in 1..i {
                                if j + k <= h {
                                    let v = cost[k - 1][j - 1] + leg(f, f + 1, i - k, j + k);
                                    if v < next[i - 1][j - 1] {
                                        next[i - 1][j - 1] = v;
                                    }
                                }
                            }
                        }
                    }
                    cost = next;
                }
                let total = cost.iter().flatten().copied().fold(INF, f64::min);
                (total, perm.iter().map(|&k| set.ids()[k].clone()).collect())
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        out
    }

    #[test]
    fn three_objects_pairs_match_brute_force() {
        let set = set_of(&[
            ("A", "B", vec![vec![5.0, 3.0, INF], vec![4.0, 8.0, 2.5], vec![INF, INF, 9.0]]),
            ("B", "A", vec![vec![1.5; 3]; 3]),
            ("A", "C", vec![vec![7.0, INF, INF], vec![INF; 3], vec![INF; 3]]),
            ("C", "A", vec![vec![INF; 3]; 3]),
            ("B", "C", vec![vec![2.5, 6.0, 1.0], vec![0.5, 0.5, 0.5], vec![3.0; 3]]),
            ("C", "B", vec![vec![4.0, 4.0, 4.0], vec![1.0, INF, INF], vec![INF; 3]]),
        ]);
        let got = dfs_best_sequences(&set, &SearchConfig::new(2, 0.0, 6)).unwrap();
        let want = brute(&set, 2);
        assert_eq!(got.len(), 6);
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.labels, w.1);
            assert_eq!(g.total_dv, w.0);
        }
        assert_eq!(got[0].path(), "B→C");
        assert_eq!(got[0].total_dv, 0.5);
        assert_eq!(got[5].path(), "C→A");
    }

    #[test]
    fn all_infinite_matrices_give_infinite_totals() {
        let spec = GridSpec::unit(3, 3);
        let ids = ["A", "B", "C"];
        let mut set = MatrixSet::new(spec, &ids).unwrap();
        set.insert(DvMatrix::infinite(spec, &["A", "B"]).unwrap()).unwrap();
        let got = dfs_best_sequences(&set, &SearchConfig::new(3, 0.0, 10)).unwrap();
        assert_eq!(got.len(), 6);
        assert!(got.iter().all(|r| r.total_dv == INF && r.legs.is_empty() && r.departure_epoch.is_none()));
        assert_eq!(got[0].path(), "A→B→C");
    }

    #[test]
    fn too_few_objects_and_bad_configs() {
        let set = set_of(&[("A", "B", vec![vec![1.0]])]);
        assert!(matches!(
            dfs_best_sequences(&set, &SearchConfig::new(3, 0.0, 1)),
            Err(SearchError::TooFewObjects { need: 3, have: 2 })
        ));
        assert!(dfs_best_sequences(&set, &SearchConfig::new(1, 0.0, 1)).is_err());
        assert!(dfs_best_sequences(&set, &SearchConfig::new(2, -1.0, 1)).is_err());
        assert!(dfs_best_sequences(&set, &SearchConfig::new(2, 0.0, 0)).is_err());
        assert!(matches!(
            dfs_best_sequences(&set, &SearchConfig::new(2, 0.0, 1).with_objects(&["A", "Q"])),
            Err(SearchError::UnknownObject(id)) if id == "Q"
        ));
    }

    #[test]
    fn schedule_is_recovered_leg_by_leg() {
        let inf = INF;
        let set = set_of(&[
            ("A", "B", vec![vec![9.0, 1.0, 9.0, 9.0], vec![2.0, 9.0, 9.0, 9.0], vec![inf; 4], vec![inf; 4]]),
            ("B", "C", vec![vec![9.0, 9.0, 9.0, 9.0], vec![9.0, 9.0, 9.0, 9.0], vec![9.0, 9.0, 0.5, 9.0], vec![inf; 4]]),
        ]);
        let r = evaluate_sequence(&set, &["A", "B", "C"]).unwrap();
        // A leaves at epoch 2 for 1 step, B leaves on arrival and flies 3 steps
        assert_eq!(r.total_dv, 1.5);
        assert_eq!(r.departure_epoch, Some(2.0));
        assert_eq!(r.legs.len(), 2);
        assert_eq!((r.legs[0].departure_epoch, r.legs[0].duration, r.legs[0].dv), (2.0, 1.0, 1.0));
        assert_eq!((r.legs[1].departure_epoch, r.legs[1].duration, r.legs[1].dv), (3.0, 3.0, 0.5));
        assert_eq!(r.arrival_epoch, Some(6.0));
        let sum: f64 = r.legs.iter().map(|l| l.dv).sum();
        assert_eq!(sum, r.total_dv);
    }

    #[test]
    fn budget_boundary_is_inclusive() {
        let set = set_of(&[("A", "B", vec![vec![3.0, 4.0]]), ("B", "A", vec![vec![5.0, 6.0]])]);
        let got = budget_max_objects(&set, &["A", "B"], 3.0).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].path(), "A→B");
        assert_eq!(got[0].total_dv, 3.0);
        assert!(budget_max_objects(&set, &["A", "B"], 0.0).is_err());
        assert!(budget_max_objects(&set, &["A", "B"], -1.0).is_err());
    }

    #[test]
    fn budget_below_every_leg_leaves_single_objects() {
        let set = set_of(&[("A", "B", vec![vec![3.0, 4.0]]), ("B", "A", vec![vec![5.0, 6.0]])]);
        let got = budget_max_objects(&set, &[] as &[&str], 2.9).unwrap();
        assert_eq!(got.len(), 2);
        assert!(got.iter().all(|r| r.labels.len() == 1 && r.total_dv == 0.0));
    }

    #[test]
    fn unlimited_budget_is_bounded_by_the_grid() {
        // f legs leave f-1 infinite leading rows, so a 2×2 grid fits 2 legs
        let ids = ["A", "B", "C", "D"];
        let spec = GridSpec::unit(2, 2);
        let mut set = MatrixSet::new(spec, &ids).unwrap();
        for a in ids {
            for b in ids {
                if a != b {
                    set.insert(DvMatrix::filled(spec, 1.0, &[a, b]).unwrap()).unwrap();
                }
            }
        }
        let got = budget_max_objects(&set, &ids, INF).unwrap();
        assert!(got.iter().all(|r| r.labels.len() == 3 && r.total_dv == 2.0));
        assert_eq!(got.len(), 4 * 3 * 2);

        // a wider grid lets all four objects in
        let spec = GridSpec::unit(8, 8);
        let mut set = MatrixSet::new(spec, &ids).unwrap();
        for a in ids {
            for b in ids {
                if a != b {
                    set.insert(DvMatrix::filled(spec, 1.0, &[a, b]).unwrap()).unwrap();
                }
            }
        }
        let got = budget_max_objects(&set, &ids, INF).unwrap();
        assert!(got.iter().all(|r| r.labels.len() == 4 && r.total_dv == 3.0));
    }

    fn dyadic_set(seed: &[u16], m: usize, d: usize, h: usize) -> MatrixSet {
        let spec = GridSpec::unit(d, h);
        let ids: Vec<String> = (0..m).map(|k| format!("o{k}")).collect();
        let mut set = MatrixSet::new(spec, &ids).unwrap();
        let mut it = seed.iter().cycle();
        for a in 0..m {
            for b in 0..m {
                if a == b {
                    continue;
                }
                let vals: Vec<f64> = (0..d * h)
                    .map(|_| {
                        let s = *it.next().unwrap();
                        if s.is_multiple_of(5) {
                            INF
                        } else {
                            f64::from(s % 1024) / 8.0
                        }
                    })
                    .collect();
                set.insert(DvMatrix::new(spec, vals, vec![ids[a].clone(), ids[b].clone()]).unwrap())
                    .unwrap();
            }
        }
        set
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pruning_is_sound(
            m in 2usize..=6,
            n in 2usize..=4,
            d in 1usize..=6,
            h in 1usize..=6,
            k in 1usize..=5,
            seed in proptest::collection::vec(any::<u16>(), 97),
        ) {
            prop_assume!(n <= m);
            let set = dyadic_set(&seed, m, d, h);
            let got = dfs_best_sequences(&set, &SearchConfig::new(n, 0.0, k)).unwrap();
            let want = brute(&set, n);
            prop_assert_eq!(got.len(), k.min(want.len()));
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!(&g.labels, &w.1);
                prop_assert_eq!(g.total_dv, w.0);
            }
        }

        #[test]
        fn concat_minimum_is_superadditive(
            d in 1usize..=8,
            h in 1usize..=8,
            seed in proptest::collection::vec(any::<u16>(), 64),
        ) {
            let set = dyadic_set(&seed, 3, d, h);
            let a = set.get(0, 1).unwrap();
            let b = set.get(1, 2).unwrap();
            let c = direct_concat(a, b).unwrap();
            prop_assert!(matrix_min(&c).0 >= matrix_min(a).0 + matrix_min(b).0);
        }
    }
}
