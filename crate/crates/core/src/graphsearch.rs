//! Sequence selection as a label-constrained shortest path.
//!
//! Nodes of the time-expanded graph are pairs `(X, j)`: object `X` at grid
//! column `j`. An edge `(X, a) → (Y, b)` is the transfer leaving `X` at
//! column `a` and reaching `Y` after `b - a` steps, weighted by
//! `ΔV_XY(b - a, a)` and labelled `Y`. A start node `s` reaches every `(X, j)`
//! under label `X`, and every `(X, j)` reaches the end node `t` under the
//! empty label.
//!
//! A sequence automaton restricts which label words (object sequences) may
//! be spelled by a path. Searches run on the product of both, generated
//! state by state as the search reaches it.

use std::cmp::{Ordering, Reverse};
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::dvmatrix::{GridSpec, MatrixError};
use crate::pipeline::MatrixSet;
use crate::sequence::{LegSchedule, SequenceResult};

/// Default limit on the number of power-set automaton states.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

const NONE: u32 = u32::MAX;
const SOURCE: u32 = 0;
const SINK: u32 = 1;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("power-set automaton needs {states} states, more than the cap of {cap}; use the counter variant")]
    Capacity { states: u128, cap: usize },
    #[error("power-set automaton supports at most 64 objects, got {0}; use the counter variant")]
    AlphabetTooLarge(usize),
    #[error("k-shortest enumeration needs the counter automaton")]
    WrongVariant,
    #[error("no path with distinct objects among the first {examined} paths")]
    NotFound {
        examined: usize,
        best_repeated: Option<Box<SequenceResult>>,
    },
    #[error("invalid automaton: {0}")]
    InvalidDfa(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("start weights for `{id}` need {expected} entries, got {found}")]
    StartWeights { id: String, expected: usize, found: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Which columns exist in the time-expanded graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeHorizon {
    /// Nodes only for grid columns `1..=h`; arrivals past the last departure
    /// column are dropped and the total duration is unlimited.
    GridColumns,
    /// Departures from columns `1..=h`, arrival-only nodes up to `h + d`, and
    /// a total duration of at most `d` steps from the first departure. Paths
    /// then correspond one to one with the cells of concatenated matrices.
    #[default]
    MatchConcatenation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Arrival object, also the edge label.
    pub to: u32,
    /// Arrival column (1-based).
    pub column: u32,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct TimeExpandedGraph {
    spec: GridSpec,
    ids: Vec<String>,
    horizon: TimeHorizon,
    columns: usize,
    // per object node x·columns + (j-1)
    edges: Vec<Vec<Edge>>,
    start: Vec<f64>,
}

/// Time-expanded graph over `objects` (all objects of the set when empty).
/// Infinite entries are not stored.
pub fn build_time_expanded_graph<S: AsRef<str>>(
    set: &MatrixSet,
    objects: &[S],
    horizon: TimeHorizon,
) -> Result<TimeExpandedGraph, GraphError> {
    let spec = *set.spec();
    if !spec.is_uniform() {
        return Err(MatrixError::NonUniformGrid.into());
    }
    let idx: Vec<usize> = if objects.is_empty() {
        (0..set.len()).collect()
    } else {
        objects
            .iter()
            .map(|s| set.index_of(s.as_ref()).ok_or_else(|| GraphError::UnknownObject(s.as_ref().to_string())))
            .collect::<Result<_, _>>()?
    };
    let ids: Vec<String> = idx.iter().map(|&k| set.ids()[k].clone()).collect();
    let columns = match horizon {
        TimeHorizon::GridColumns => spec.h,
        TimeHorizon::MatchConcatenation => spec.h + spec.d,
    };
    let m = ids.len();
    let mut edges = vec![Vec::new(); m * columns];
    let mut start = vec![f64::INFINITY; m * columns];
    for x in 0..m {
        for a in 1..=spec.h {
            start[x * columns + a - 1] = 0.0;
            let out = &mut edges[x * columns + a - 1];
            for (y, &ky) in idx.iter().enumerate() {
                if y == x {
                    continue;
                }
                let Some(mat) = set.get(idx[x], ky) else { continue };
                for r in 1..=spec.d {
                    let b = a + r;
                    if b > columns {
                        break;
                    }
                    let w = mat.get(r, a);
                    if w.is_finite() {
                        out.push(Edge {
                            to: y as u32,
                            column: b as u32,
                            weight: w,
                        });
                    }
                }
            }
        }
    }
    Ok(TimeExpandedGraph {
        spec,
        ids,
        horizon,
        columns,
        edges,
        start,
    })
}

impl TimeExpandedGraph {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn horizon(&self) -> TimeHorizon {
        self.horizon
    }

    /// Columns per object.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn node_count(&self) -> usize {
        self.ids.len() * self.columns + 2
    }

    pub fn out_edges(&self, object: usize, column: usize) -> &[Edge] {
        &self.edges[object * self.columns + column - 1]
    }

    /// Object-to-object edges as `(from, a, to, b, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        self.edges.iter().enumerate().flat_map(move |(n, out)| {
            let (x, a) = (n / self.columns, n % self.columns + 1);
            out.iter().map(move |e| (x, a, e.to as usize, e.column as usize, e.weight))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn start_edge_count(&self) -> usize {
        self.start.iter().filter(|w| w.is_finite()).count()
    }

    pub fn end_edge_count(&self) -> usize {
        self.ids.len() * self.columns
    }

    /// Weights of the start edges into `id` for departure columns `1..=h`,
    /// e.g. the cost of reaching the first object. `+∞` removes the edge.
    pub fn set_start_weights(&mut self, id: &str, weights: &[f64]) -> Result<(), GraphError> {
        let x = self
            .ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| GraphError::UnknownObject(id.to_string()))?;
        if weights.len() != self.spec.h {
            return Err(GraphError::StartWeights {
                id: id.to_string(),
                expected: self.spec.h,
                found: weights.len(),
            });
        }
        if let Some((j, &w)) = weights.iter().enumerate().find(|(_, w)| w.is_nan() || **w < 0.0) {
            return Err(MatrixError::InvalidEntry { row: 1, col: j + 1, value: w }.into());
        }
        self.start[x * self.columns..x * self.columns + self.spec.h].copy_from_slice(weights);
        Ok(())
    }

    fn node(&self, x: usize, j: usize) -> u32 {
        (2 + x * self.columns + j - 1) as u32
    }

    fn unpack(&self, node: u32) -> (usize, usize) {
        let n = node as usize - 2;
        (n / self.columns, n % self.columns + 1)
    }

    fn name(&self, x: usize, j: usize) -> String {
        format!("{}@{}", self.ids[x], j)
    }

    /// Whitespace-separated edge list, one `from to weight label` line per
    /// stored edge; `s` and `t` are the terminal nodes, `eps` the empty label.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("# from to weight label\n");
        for (n, &w) in self.start.iter().enumerate() {
            if w.is_finite() {
                let (x, j) = (n / self.columns, n % self.columns + 1);
                let _ = writeln!(out, "s {} {} {}", self.name(x, j), w, self.ids[x]);
            }
        }
        for (x, a, y, b, w) in self.edges() {
            let _ = writeln!(out, "{} {} {} {}", self.name(x, a), self.name(y, b), w, self.ids[y]);
        }
        for x in 0..self.ids.len() {
            for j in 1..=self.columns {
                let _ = writeln!(out, "{} t 0 eps", self.name(x, j));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfaVariant {
    /// One state per visited subset; accepts exactly the words of `N`
    /// distinct objects.
    PowerSet,
    /// Counts visited objects; accepts every word of length `N`.
    Counter,
}

#[derive(Debug, Clone)]
pub struct SequenceDfa {
    variant: DfaVariant,
    n: usize,
    alphabet: Vec<String>,
    // power-set states as object bit masks; empty for the counter variant
    masks: Vec<u64>,
    // state × symbol → state, NONE when undefined
    next: Vec<u32>,
    finals: Vec<bool>,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Automaton over `alphabet` for words of `n` objects, with the default cap
/// on power-set states.
pub fn build_sequence_dfa<S: AsRef<str>>(alphabet: &[S], n: usize, variant: DfaVariant) -> Result<SequenceDfa, GraphError> {
    build_sequence_dfa_with_cap(alphabet, n, variant, DEFAULT_STATE_CAP)
}

pub fn build_sequence_dfa_with_cap<S: AsRef<str>>(
    alphabet: &[S],
    n: usize,
    variant: DfaVariant,
    cap: usize,
) -> Result<SequenceDfa, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidDfa("N must be at least 1".into()));
    }
    let alphabet: Vec<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
    for (k, s) in alphabet.iter().enumerate() {
        if alphabet[..k].contains(s) {
            return Err(GraphError::InvalidDfa(format!("label `{s}` listed twice")));
        }
    }
    let m = alphabet.len();
    match variant {
        DfaVariant::Counter => {
            let mut next = vec![NONE; (n + 1) * m];
            for c in 0..n {
                next[c * m..(c + 1) * m].fill(c as u32 + 1);
            }
            let mut finals = vec![false; n + 1];
            finals[n] = true;
            Ok(SequenceDfa {
                variant,
                n,
                alphabet,
                masks: Vec::new(),
                next,
                finals,
            })
        }
        DfaVariant::PowerSet => {
            if m > 64 {
                return Err(GraphError::AlphabetTooLarge(m));
            }
            let states = 1 + (1..=n.min(m) as u128).map(|k| binomial(m as u128, k)).fold(0u128, u128::saturating_add);
            if states > cap as u128 {
                return Err(GraphError::Capacity { states, cap });
            }
            let mut masks = vec![0u64];
            let mut index: HashMap<u64, u32> = HashMap::from([(0, 0)]);
            let mut next = Vec::with_capacity(states as usize * m);
            let mut q = 0;
            while q < masks.len() {
                let mask = masks[q];
                let full = mask.count_ones() as usize == n;
                for y in 0..m {
                    let bit = 1u64 << y;
                    if full || mask & bit != 0 {
                        next.push(NONE);
                        continue;
                    }
                    let target = mask | bit;
                    let id = *index.entry(target).or_insert_with(|| {
                        masks.push(target);
                        (masks.len() - 1) as u32
                    });
                    next.push(id);
                }
                q += 1;
            }
            let finals = masks.iter().map(|mk| mk.count_ones() as usize == n).collect();
            Ok(SequenceDfa {
                variant,
                n,
                alphabet,
                masks,
                next,
                finals,
            })
        }
    }
}

impl SequenceDfa {
    pub fn variant(&self) -> DfaVariant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn start(&self) -> u32 {
        0
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    /// Successor of `q` on alphabet symbol `symbol`.
    pub fn step(&self, q: u32, symbol: usize) -> Option<u32> {
        let s = self.next[q as usize * self.alphabet.len() + symbol];
        (s != NONE).then_some(s)
    }

    /// Objects of a power-set state, `None` for counter states.
    pub fn subset(&self, q: u32) -> Option<Vec<&str>> {
        let mask = *self.masks.get(q as usize)?;
        Some(
            (0..self.alphabet.len())
                .filter(|y| mask & (1 << y) != 0)
                .map(|y| self.alphabet[y].as_str())
                .collect(),
        )
    }

    /// Transition relation as `(from, label, to)`; the counter variant has one
    /// wildcard (`None`) transition per non-final state.
    pub fn transitions(&self) -> Vec<(u32, Option<&str>, u32)> {
        let m = self.alphabet.len();
        let mut out = Vec::new();
        for q in 0..self.state_count() {
            match self.variant {
                DfaVariant::Counter => {
                    if q < self.n {
                        out.push((q as u32, None, q as u32 + 1));
                    }
                }
                DfaVariant::PowerSet => {
                    for y in 0..m {
                        if let Some(t) = self.step(q as u32, y) {
                            out.push((q as u32, Some(self.alphabet[y].as_str()), t));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Product state: graph node, automaton state and, for
/// [`TimeHorizon::MatchConcatenation`], the first departure column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    node: u32,
    q: u32,
    origin: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Product<'a> {
    g: &'a TimeExpandedGraph,
    dfa: &'a SequenceDfa,
    // graph object → automaton symbol
    symbol: Vec<Option<usize>>,
}

impl<'a> Product<'a> {
    fn new(g: &'a TimeExpandedGraph, dfa: &'a SequenceDfa) -> Self {
        let symbol = g.ids.iter().map(|id| dfa.alphabet.iter().position(|s| s == id)).collect();
        Self { g, dfa, symbol }
    }

    fn source(&self) -> Key {
        Key {
            node: SOURCE,
            q: self.dfa.start(),
            origin: 0,
        }
    }

    fn successors(&self, key: Key, out: &mut Vec<(Key, f64)>) {
        out.clear();
        let g = self.g;
        match key.node {
            SINK => {}
            SOURCE => {
                for x in 0..g.ids.len() {
                    let Some(q) = self.symbol[x].and_then(|s| self.dfa.step(key.q, s)) else { continue };
                    for j in 1..=g.spec.h {
                        let w = g.start[x * g.columns + j - 1];
                        if w.is_finite() {
                            let origin = match g.horizon {
                                TimeHorizon::GridColumns => 0,
                                TimeHorizon::MatchConcatenation => j as u32,
                            };
                            out.push((Key { node: g.node(x, j), q, origin }, w));
                        }
                    }
                }
            }
            node => {
                if self.dfa.is_final(key.q) {
                    out.push((
                        Key {
                            node: SINK,
                            q: key.q,
                            origin: key.origin,
                        },
                        0.0,
                    ));
                }
                let (x, a) = g.unpack(node);
                if a > g.spec.h {
                    return;
                }
                let limit = match g.horizon {
                    TimeHorizon::GridColumns => u32::MAX,
                    TimeHorizon::MatchConcatenation => key.origin + g.spec.d as u32,
                };
                for e in g.out_edges(x, a) {
                    if e.column > limit {
                        continue;
                    }
                    let Some(q) = self.symbol[e.to as usize].and_then(|s| self.dfa.step(key.q, s)) else { continue };
                    out.push((
                        Key {
                            node: g.node(e.to as usize, e.column as usize),
                            q,
                            origin: key.origin,
                        },
                        e.weight,
                    ));
                }
            }
        }
    }

    // `path`: product states from the source to the sink with the weight of
    // the edge entering each.
    fn decode(&self, path: &[(Key, f64)], total: f64) -> SequenceResult {
        let g = self.g;
        let stops: Vec<(usize, usize, f64)> = path
            .iter()
            .filter(|(k, _)| k.node >= 2)
            .map(|(k, w)| {
                let (x, j) = g.unpack(k.node);
                (x, j, *w)
            })
            .collect();
        let labels = stops.iter().map(|&(x, _, _)| g.ids[x].clone()).collect();
        let legs = stops
            .windows(2)
            .map(|w| LegSchedule {
                from: g.ids[w[0].0].clone(),
                to: g.ids[w[1].0].clone(),
                departure_epoch: g.spec.departure(w[0].1),
                duration: (w[1].1 - w[0].1) as f64 * g.spec.dt_step,
                dv: w[1].2,
            })
            .collect();
        SequenceResult {
            labels,
            total_dv: total,
            departure_epoch: stops.first().map(|s| g.spec.departure(s.1)),
            arrival_epoch: stops.last().map(|s| g.spec.departure(s.1)),
            legs,
        }
    }
}

fn unreachable_result() -> SequenceResult {
    SequenceResult {
        labels: Vec::new(),
        total_dv: f64::INFINITY,
        departure_epoch: None,
        arrival_epoch: None,
        legs: Vec::new(),
    }
}

/// Cheapest path from `(s, q0)` to `(t, f)` over all final states `f`.
/// Dijkstra on the product, expanded on demand. An unreachable end yields
/// an empty sequence with infinite cost.
pub fn shortest_path_product(g: &TimeExpandedGraph, dfa: &SequenceDfa) -> SequenceResult {
    let p = Product::new(g, dfa);
    // state → (distance, predecessor, entering weight, settled)
    let mut label: HashMap<Key, (f64, Option<Key>, f64, bool)> = HashMap::new();
    let mut heap = BinaryHeap::new();
    let src = p.source();
    label.insert(src, (0.0, None, 0.0, false));
    heap.push(Reverse((Cost(0.0), src)));
    let mut succ = Vec::new();
    while let Some(Reverse((Cost(dist), key))) = heap.pop() {
        let entry = label.get_mut(&key).expect("queued states are labelled");
        if entry.3 || entry.0 < dist {
            continue;
        }
        entry.3 = true;
        if key.node == SINK {
            let mut path = Vec::new();
            let mut cur = Some(key);
            while let Some(k) = cur {
                let (_, pred, w, _) = label[&k];
                path.push((k, w));
                cur = pred;
            }
            path.reverse();
            return p.decode(&path, dist);
        }
        p.successors(key, &mut succ);
        for &(next, w) in &succ {
            let nd = dist + w;
            match label.entry(next) {
                Entry::Vacant(v) => {
                    v.insert((nd, Some(key), w, false));
                    heap.push(Reverse((Cost(nd), next)));
                }
                Entry::Occupied(mut o) => {
                    let l = o.get_mut();
                    if !l.3 && nd < l.0 {
                        *l = (nd, Some(key), w, false);
                        heap.push(Reverse((Cost(nd), next)));
                    }
                }
            }
        }
    }
    unreachable_result()
}

struct PartialPath {
    key: Key,
    parent: Option<usize>,
    cost: f64,
    weight: f64,
}

/// Product paths from `(s, q0)` to `(t, f)` in nondecreasing cost, each one
/// computed when requested.
///
/// Best-first search over partial paths ordered by cost so far plus the
/// exact remaining cost, which is obtained by memoised recursion over the
/// acyclic product. With an exact estimate every popped partial path extends
/// to a complete one of the same cost, so complete paths leave the queue in
/// cost order and the work per path is bounded by its length times the
/// out-degree.
pub struct PathEnumerator<'a> {
    p: Product<'a>,
    to_sink: HashMap<Key, f64>,
    arena: Vec<PartialPath>,
    heap: BinaryHeap<Reverse<(Cost, u64, usize)>>,
    pushed: u64,
}

impl<'a> PathEnumerator<'a> {
    pub fn new(g: &'a TimeExpandedGraph, dfa: &'a SequenceDfa) -> Self {
        let mut e = Self {
            p: Product::new(g, dfa),
            to_sink: HashMap::new(),
            arena: Vec::new(),
            heap: BinaryHeap::new(),
            pushed: 0,
        };
        let src = e.p.source();
        let rest = e.remaining(src);
        if rest.is_finite() {
            e.push(src, None, 0.0, 0.0, rest);
        }
        e
    }

    fn push(&mut self, key: Key, parent: Option<usize>, cost: f64, weight: f64, rest: f64) {
        self.arena.push(PartialPath {
            key,
            parent,
            cost,
            weight,
        });
        self.heap.push(Reverse((Cost(cost + rest), self.pushed, self.arena.len() - 1)));
        self.pushed += 1;
    }

    // Exact cost from `key` to the sink; depth is bounded by N + 2.
    fn remaining(&mut self, key: Key) -> f64 {
        if key.node == SINK {
            return 0.0;
        }
        if let Some(&v) = self.to_sink.get(&key) {
            return v;
        }
        let mut succ = Vec::new();
        self.p.successors(key, &mut succ);
        let mut best = f64::INFINITY;
        for (next, w) in succ {
            let v = w + self.remaining(next);
            if v < best {
                best = v;
            }
        }
        self.to_sink.insert(key, best);
        best
    }
}

impl Iterator for PathEnumerator<'_> {
    type Item = SequenceResult;

    fn next(&mut self) -> Option<SequenceResult> {
        let mut succ = Vec::new();
        while let Some(Reverse((_, _, idx))) = self.heap.pop() {
            let (key, cost) = (self.arena[idx].key, self.arena[idx].cost);
            if key.node == SINK {
                let mut path = Vec::new();
                let mut cur = Some(idx);
                while let Some(i) = cur {
                    path.push((self.arena[i].key, self.arena[i].weight));
                    cur = self.arena[i].parent;
                }
                path.reverse();
                return Some(self.p.decode(&path, cost));
            }
            self.p.successors(key, &mut succ);
            for &(next, w) in &succ.clone() {
                let rest = self.remaining(next);
                if rest.is_finite() {
                    self.push(next, Some(idx), cost + w, w, rest);
                }
            }
        }
        None
    }
}

/// First path, in nondecreasing cost order, whose objects are all distinct,
/// among at most `max_k` paths of the counter automaton's product.
pub fn k_shortest_unique(g: &TimeExpandedGraph, dfa: &SequenceDfa, max_k: usize) -> Result<SequenceResult, GraphError> {
    if dfa.variant() != DfaVariant::Counter {
        return Err(GraphError::WrongVariant);
    }
    let mut best_repeated = None;
    let mut examined = 0;
    for path in PathEnumerator::new(g, dfa).take(max_k) {
        examined += 1;
        let mut sorted = path.labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == path.labels.len() {
            return Ok(path);
        }
        best_repeated.get_or_insert_with(|| Box::new(path));
    }
    Err(GraphError::NotFound { examined, best_repeated })
}
