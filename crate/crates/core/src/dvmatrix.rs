//! ΔV matrices and the operators defined on them.
//!
//! A matrix is a `d × h` grid: row `i` is the transfer duration
//! `dur_min + (i-1)·δt`, column `j` the departure epoch `t_start + (j-1)·δt`.
//! Entries are non-negative ΔV values in m/s, or `+∞` where the transfer is
//! unknown or infeasible. `+∞` is `f64::INFINITY`, so `∞ + x = ∞` holds
//! without special cases.
//!
//! All public accessors and operator contracts use 1-based `(i, j)` indices.
//! The only place where they are mapped onto storage is [`DvMatrix::offset`]:
//! values are kept row-major, `values[(i-1)·h + (j-1)]`.

mod document;
mod export;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ephemeris::{propagate_to_epoch, Catalog, EphemerisError};
use crate::lambert::{rendezvous_dv, LambertConfig};

pub use document::{deserialize, serialize, FORMAT_TAG};
pub use export::{to_csv, to_pgm, PGM_DEFAULT_CAP};

pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("grid specifications differ")]
    SpecMismatch,
    #[error("operation needs a grid with dur_min equal to dt_step")]
    NonUniformGrid,
    #[error("label chain broken: `{left}` does not continue with `{right}`")]
    LabelMismatch { left: String, right: String },
    #[error("a matrix needs at least two labels (one leg), got {0}")]
    TooFewLabels(usize),
    #[error("entry ({row}, {col}) = {value} is not a ΔV (must be >= 0 or +inf)")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("departure and arrival object are both `{0}`")]
    SameObject(String),
    #[error("document field `{field}`: {msg}")]
    Document { field: String, msg: String },
    #[error(transparent)]
    Ephemeris(#[from] EphemerisError),
}

/// Discretization shared by every matrix of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Epoch of the first departure column (MJD2000 days).
    pub t_start: f64,
    /// Step δt for both departure epochs and durations (days).
    pub dt_step: f64,
    /// Number of departure columns.
    pub h: usize,
    /// Number of duration rows.
    pub d: usize,
    /// Duration of the first row (days).
    pub dur_min: f64,
}

impl GridSpec {
    /// A grid whose first duration equals the step, as the operators require.
    pub fn new(t_start: f64, dt_step: f64, d: usize, h: usize) -> Result<Self, MatrixError> {
        let spec = Self {
            t_start,
            dt_step,
            h,
            d,
            dur_min: dt_step,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit grid (`t_start = 1`, `δt = 1`), convenient for hand-built matrices.
    pub fn unit(d: usize, h: usize) -> Self {
        Self {
            t_start: 1.0,
            dt_step: 1.0,
            h,
            d,
            dur_min: 1.0,
        }
    }

    /// Grid covering departures in `[dep_first, dep_last]` and durations in
    /// `[step, dur_last]`, both sampled every `step` days.
    pub fn from_ranges(dep_first: f64, dep_last: f64, dur_last: f64, step: f64) -> Result<Self, MatrixError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(MatrixError::InvalidSpec("dt_step must be positive".into()));
        }
        let count = |span: f64| -> Result<usize, MatrixError> {
            if !(span.is_finite() && span >= 0.0) {
                return Err(MatrixError::InvalidSpec("empty range".into()));
            }
            Ok((span / step + 1e-9).floor() as usize + 1)
        };
        let h = count(dep_last - dep_first)?;
        let d = count(dur_last - step)?;
        Self::new(dep_first, step, d, h)
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        if !(self.dt_step.is_finite() && self.dt_step > 0.0) {
            return Err(MatrixError::InvalidSpec("dt_step must be positive".into()));
        }
        if self.d == 0 || self.h == 0 {
            return Err(MatrixError::InvalidSpec("d and h must be at least 1".into()));
        }
        if !self.t_start.is_finite() || !(self.dur_min.is_finite() && self.dur_min > 0.0) {
            return Err(MatrixError::InvalidSpec("t_start and dur_min must be finite, dur_min > 0".into()));
        }
        Ok(())
    }

    /// `dur_min == dt_step` (within rounding).
    pub fn is_uniform(&self) -> bool {
        (self.dur_min - self.dt_step).abs() <= 1e-12 * self.dt_step
    }

    fn require_uniform(&self) -> Result<(), MatrixError> {
        if self.is_uniform() {
            Ok(())
        } else {
            Err(MatrixError::NonUniformGrid)
        }
    }

    /// Departure epoch of column `j` (1-based).
    pub fn departure(&self, j: usize) -> f64 {
        self.t_start + (j - 1) as f64 * self.dt_step
    }

    /// Transfer duration of row `i` (1-based).
    pub fn duration(&self, i: usize) -> f64 {
        self.dur_min + (i - 1) as f64 * self.dt_step
    }

    pub fn cells(&self) -> usize {
        self.d * self.h
    }
}

/// Minimum ΔV over a grid of departure epochs and durations for a chain of
/// `leg_count` transfers through `labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct DvMatrix {
    spec: GridSpec,
    values: Vec<f64>,
    labels: Vec<String>,
}

impl DvMatrix {
    /// Builds a matrix from row-major values (row 1 = shortest duration).
    pub fn new(spec: GridSpec, values: Vec<f64>, labels: Vec<String>) -> Result<Self, MatrixError> {
        spec.validate()?;
        if labels.len() < 2 {
            return Err(MatrixError::TooFewLabels(labels.len()));
        }
        if values.len() != spec.cells() {
            return Err(MatrixError::ShapeMismatch {
                expected: spec.cells(),
                found: values.len(),
            });
        }
        for (idx, &v) in values.iter().enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(MatrixError::InvalidEntry {
                    row: idx / spec.h + 1,
                    col: idx % spec.h + 1,
                    value: v,
                });
            }
        }
        Ok(Self { spec, values, labels })
    }

    /// Matrix on a [`GridSpec::unit`] grid from nested rows.
    pub fn from_rows<S: AsRef<str>>(rows: &[Vec<f64>], labels: &[S]) -> Result<Self, MatrixError> {
        let d = rows.len();
        let h = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != h) {
            return Err(MatrixError::InvalidSpec("ragged rows".into()));
        }
        Self::new(
            GridSpec::unit(d, h),
            rows.concat(),
            labels.iter().map(|s| s.as_ref().to_string()).collect(),
        )
    }

    pub fn filled<S: AsRef<str>>(spec: GridSpec, value: f64, labels: &[S]) -> Result<Self, MatrixError> {
        Self::new(
            spec,
            vec![value; spec.cells()],
            labels.iter().map(|s| s.as_ref().to_string()).collect(),
        )
    }

    pub fn infinite<S: AsRef<str>>(spec: GridSpec, labels: &[S]) -> Result<Self, MatrixError> {
        Self::filled(spec, INF, labels)
    }

    // Unchecked constructor for operator outputs that preserve the invariants.
    fn from_parts(spec: GridSpec, values: Vec<f64>, labels: Vec<String>) -> Self {
        debug_assert_eq!(values.len(), spec.cells());
        Self { spec, values, labels }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!((1..=self.spec.d).contains(&i) && (1..=self.spec.h).contains(&j));
        (i - 1) * self.spec.h + (j - 1)
    }

    /// Entry at duration row `i`, departure column `j` (both 1-based).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.offset(i, j)]
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn h(&self) -> usize {
        self.spec.h
    }

    /// Row-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row `i` (1-based) as a slice over departure columns.
    pub fn row(&self, i: usize) -> &[f64] {
        let h = self.spec.h;
        &self.values[(i - 1) * h..i * h]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leg_count(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    /// Finite entries in ascending order.
    pub fn finite_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn relabel<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Self, MatrixError> {
        if labels.len() < 2 {
            return Err(MatrixError::TooFewLabels(labels.len()));
        }
        self.labels = labels.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(self)
    }
}

/// Rendezvous ΔV matrix (m/s) between two catalog objects.
pub fn build_porkchop(
    catalog: &Catalog,
    from_id: &str,
    to_id: &str,
    spec: &GridSpec,
    config: &LambertConfig,
) -> Result<DvMatrix, MatrixError> {
    spec.validate()?;
    if from_id == to_id {
        return Err(MatrixError::SameObject(from_id.to_string()));
    }
    let from = catalog.get(from_id)?;
    let to = catalog.get(to_id)?;
    let mu = catalog.mu;

    let columns: Vec<Vec<f64>> = (1..=spec.h)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>, EphemerisError> {
            let t_dep = spec.departure(j);
            let dep = propagate_to_epoch(from, t_dep, mu)?;
            (1..=spec.d)
                .map(|i| {
                    let tof = spec.duration(i);
                    let arr = propagate_to_epoch(to, t_dep + tof, mu)?;
                    Ok(rendezvous_dv(&dep, &arr, tof, mu, config.max_revolutions))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let mut values = vec![INF; spec.cells()];
    for (jj, col) in columns.iter().enumerate() {
        for (ii, &v) in col.iter().enumerate() {
            values[ii * spec.h + jj] = v;
        }
    }
    Ok(DvMatrix::from_parts(*spec, values, vec![from_id.to_string(), to_id.to_string()]))
}

/// Folds a stay of `t_s` steps at the departure object into the matrix:
/// `out(i, j) = m(i - t_s, j + t_s)`, `+∞` where that falls off the grid.
/// Arrival epochs of the surviving entries are unchanged.
pub fn stay_adjust(m: &DvMatrix, t_s: usize) -> DvMatrix {
    let (d, h) = (m.d(), m.h());
    let mut values = vec![INF; d * h];
    for i in (t_s + 1)..=d {
        for j in 1..=h.saturating_sub(t_s) {
            values[(i - 1) * h + (j - 1)] = m.get(i - t_s, j + t_s);
        }
    }
    DvMatrix::from_parts(m.spec, values, m.labels.clone())
}

/// Pads a matrix so that [`stay_adjust`] by `t_s` loses no finite entry:
/// `t_s` columns of `+∞` are added before the first departure (the grid start
/// moves back by `t_s·δt`) and `t_s` rows of `+∞` after the longest duration.
pub fn augment_for_stay(m: &DvMatrix, t_s: usize) -> DvMatrix {
    if t_s == 0 {
        return m.clone();
    }
    let (d, h) = (m.d(), m.h());
    let spec = GridSpec {
        t_start: m.spec.t_start - t_s as f64 * m.spec.dt_step,
        h: h + t_s,
        d: d + t_s,
        ..m.spec
    };
    let h2 = spec.h;
    let mut values = vec![INF; spec.cells()];
    for i in 1..=d {
        values[(i - 1) * h2 + t_s..(i - 1) * h2 + t_s + h].copy_from_slice(m.row(i));
    }
    DvMatrix::from_parts(spec, values, m.labels.clone())
}

/// Wait-adjusted matrix: every cell takes the cheapest entry reachable by
/// waiting `t_w` steps before a transfer `t_w` steps shorter,
/// `out(i, j) = min_{t_w} m(i - t_w, j + t_w)`.
///
/// One pass in order of increasing duration; each cell inherits the running
/// minimum of its anti-diagonal.
pub fn wait_adjust(m: &DvMatrix) -> Result<DvMatrix, MatrixError> {
    m.spec.require_uniform()?;
    let (d, h) = (m.d(), m.h());
    let mut values = m.values.clone();
    for i in 2..=d {
        let (above, rest) = values.split_at_mut((i - 1) * h);
        let prev = &above[(i - 2) * h..];
        let cur = &mut rest[..h];
        for jj in 0..h - 1 {
            if prev[jj + 1] < cur[jj] {
                cur[jj] = prev[jj + 1];
            }
        }
    }
    Ok(DvMatrix::from_parts(m.spec, values, m.labels.clone()))
}

fn check_concat(a: &DvMatrix, b: &DvMatrix) -> Result<(), MatrixError> {
    if a.spec != b.spec {
        return Err(MatrixError::SpecMismatch);
    }
    a.spec.require_uniform()?;
    let left = a.labels.last().expect("at least two labels");
    let right = &b.labels[0];
    if left != right {
        return Err(MatrixError::LabelMismatch {
            left: left.clone(),
            right: right.clone(),
        });
    }
    Ok(())
}

fn row_has_finite(values: &[f64], d: usize, h: usize) -> Vec<bool> {
    (0..d).map(|r| values[r * h..(r + 1) * h].iter().any(|v| v.is_finite())).collect()
}

/// `a ⊕ b` on raw row-major `d × h` storage; `out` is overwritten.
pub(crate) fn concat_into(a: &[f64], b: &[f64], d: usize, h: usize, out: &mut [f64]) {
    out.fill(INF);
    let a_rows = row_has_finite(a, d, h);
    let b_rows = row_has_finite(b, d, h);
    for k in 1..d.min(h) {
        if !a_rows[k - 1] {
            continue;
        }
        let arow = &a[(k - 1) * h..(k - 1) * h + (h - k)];
        for i in (k + 1)..=d {
            let r = i - k;
            if !b_rows[r - 1] {
                continue;
            }
            let brow = &b[(r - 1) * h + k..r * h];
            let crow = &mut out[(i - 1) * h..(i - 1) * h + (h - k)];
            for ((c, &x), &y) in crow.iter_mut().zip(arow).zip(brow) {
                let s = x + y;
                if s < *c {
                    *c = s;
                }
            }
        }
    }
}

/// Minimum of `a ⊕ b` on raw storage; `prefix` is scratch space.
pub(crate) fn concat_min_values(a: &[f64], b: &[f64], d: usize, h: usize, prefix: &mut Vec<f64>) -> f64 {
    // prefix[(r-1)·h + c] = min_{r' <= r} b(r', c)
    prefix.clear();
    prefix.extend_from_slice(b);
    for r in 2..=d {
        let (above, rest) = prefix.split_at_mut((r - 1) * h);
        let prev = &above[(r - 2) * h..];
        for (c, &p) in rest[..h].iter_mut().zip(prev) {
            if p < *c {
                *c = p;
            }
        }
    }
    let mut best = INF;
    for k in 1..d.min(h) {
        let arow = &a[(k - 1) * h..(k - 1) * h + (h - k)];
        let brow = &prefix[(d - k - 1) * h + k..(d - k) * h];
        for (&x, &y) in arow.iter().zip(brow) {
            let s = x + y;
            if s < best {
                best = s;
            }
        }
    }
    best
}

pub(crate) fn min_value(values: &[f64]) -> f64 {
    values.iter().copied().fold(INF, f64::min)
}

/// Direct concatenation `a ⊕ b`:
/// `out(i, j) = min_{1 ≤ k ≤ min(h-j, i-1)} a(k, j) + b(i-k, j+k)`,
/// `+∞` when the range is empty.
pub fn direct_concat(a: &DvMatrix, b: &DvMatrix) -> Result<DvMatrix, MatrixError> {
    check_concat(a, b)?;
    let mut out = vec![INF; a.spec.cells()];
    concat_into(&a.values, &b.values, a.d(), a.h(), &mut out);
    let mut labels = a.labels.clone();
    labels.extend_from_slice(&b.labels[1..]);
    Ok(DvMatrix::from_parts(a.spec, out, labels))
}

/// `matrix_min(a ⊕ b).0` without building the product: for a first leg of
/// `k` steps departing at `j`, the cheapest continuation is the smallest
/// entry of column `j + k` of `b` within the first `d - k` rows.
pub fn concat_min(a: &DvMatrix, b: &DvMatrix) -> Result<f64, MatrixError> {
    check_concat(a, b)?;
    Ok(concat_min_values(&a.values, &b.values, a.d(), a.h(), &mut Vec::new()))
}

/// Smallest entry with its 1-based position; ties go to the smallest row,
/// then column. `(+∞, 1, 1)` when nothing is finite.
pub fn matrix_min(m: &DvMatrix) -> (f64, usize, usize) {
    let mut best = (INF, 1, 1);
    for (idx, &v) in m.values.iter().enumerate() {
        if v < best.0 {
            best = (v, idx / m.h() + 1, idx % m.h() + 1);
        }
    }
    best
}

/// Whether `m(i, j) ≤ m(i-1, j+1)` for all `2 ≤ i ≤ d`, `1 ≤ j ≤ h-1`.
pub fn check_time_adjusted(m: &DvMatrix) -> bool {
    (2..=m.d()).all(|i| {
        let prev = m.row(i - 1);
        let cur = m.row(i);
        (0..m.h().saturating_sub(1)).all(|jj| cur[jj] <= prev[jj + 1])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DvMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        DvMatrix::from_rows(&rows, &["A", "B"]).unwrap()
    }

    fn rows_of(m: &DvMatrix) -> Vec<Vec<f64>> {
        (1..=m.d()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn grid_indexing_is_one_based() {
        let spec = GridSpec::new(40.0, 40.0, 25, 250).unwrap();
        assert_eq!(spec.departure(1), 40.0);
        assert_eq!(spec.departure(250), 10000.0);
        assert_eq!(spec.duration(1), 40.0);
        assert_eq!(spec.duration(25), 1000.0);
        assert_eq!(GridSpec::from_ranges(40.0, 10000.0, 1000.0, 40.0).unwrap(), spec);
        let coarse = GridSpec::from_ranges(80.0, 10000.0, 1000.0, 80.0).unwrap();
        assert_eq!((coarse.d, coarse.h), (12, 125));
    }

    #[test]
    fn invalid_specs() {
        assert!(GridSpec::new(0.0, 0.0, 1, 1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0, 1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn entries_must_be_dv() {
        let err = DvMatrix::from_rows(&[vec![1.0, -2.0]], &["A", "B"]).unwrap_err();
        assert!(matches!(err, MatrixError::InvalidEntry { row: 1, col: 2, .. }));
        assert!(DvMatrix::from_rows(&[vec![f64::NAN]], &["A", "B"]).is_err());
        assert!(matches!(
            DvMatrix::from_rows(&[vec![1.0]], &["A"]),
            Err(MatrixError::TooFewLabels(1))
        ));
    }

    #[test]
    fn stay_shift_example() {
        let m = mat(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        assert_eq!(stay_adjust(&m, 0), m);
        let s = stay_adjust(&m, 1);
        assert_eq!(
            rows_of(&s),
            vec![vec![INF, INF, INF], vec![2.0, 3.0, INF], vec![5.0, 6.0, INF]]
        );
        assert_eq!(stay_adjust(&m, 3).finite_count(), 0);
        let wide = mat(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0], &[7.0, 8.0]]);
        assert_eq!(stay_adjust(&wide, 2).finite_count(), 0);
    }

    #[test]
    fn augmentation_keeps_every_entry() {
        let m = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(augment_for_stay(&m, 0), m);
        let aug = augment_for_stay(&m, 1);
        assert_eq!((aug.d(), aug.h()), (3, 3));
        assert_eq!(aug.spec().t_start, 0.0);
        assert_eq!(aug.spec().dur_min, 1.0);
        let shifted = stay_adjust(&aug, 1);
        assert_eq!(shifted.finite_count(), 4);
        assert_eq!(shifted.finite_sorted(), m.finite_sorted());
        // the entry departing at epoch 1 with duration 1 arrives at epoch 2;
        // after the stay shift it sits at column epoch 0 with duration 2
        assert_eq!(shifted.get(2, 1), 1.0);
    }

    #[test]
    fn wait_adjust_example() {
        let m = mat(&[&[5.0, 3.0], &[4.0, 9.0]]);
        let w = wait_adjust(&m).unwrap();
        assert_eq!(rows_of(&w), vec![vec![5.0, 3.0], vec![3.0, 9.0]]);
        assert!(check_time_adjusted(&w));
        assert!(!check_time_adjusted(&m));
        let inf = DvMatrix::infinite(GridSpec::unit(3, 4), &["A", "B"]).unwrap();
        assert_eq!(wait_adjust(&inf).unwrap(), inf);
    }

    #[test]
    fn wait_adjust_needs_uniform_grid() {
        let spec = GridSpec {
            dur_min: 2.0,
            ..GridSpec::unit(2, 2)
        };
        let m = DvMatrix::filled(spec, 1.0, &["A", "B"]).unwrap();
        assert!(matches!(wait_adjust(&m), Err(MatrixError::NonUniformGrid)));
    }

    #[test]
    fn already_adjusted_is_unchanged() {
        let m = mat(&[&[5.0, 3.0, 8.0], &[2.0, 7.0, 1.0], &[1.0, 1.0, 0.5]]);
        assert!(check_time_adjusted(&m));
        assert_eq!(wait_adjust(&m).unwrap(), m);
    }

    #[test]
    fn concat_examples() {
        let ones = DvMatrix::filled(GridSpec::unit(3, 3), 1.0, &["A", "B"]).unwrap();
        let ones_bc = ones.clone().relabel(&["B", "C"]).unwrap();
        let c = direct_concat(&ones, &ones_bc).unwrap();
        assert_eq!(
            rows_of(&c),
            vec![vec![INF, INF, INF], vec![2.0, 2.0, INF], vec![2.0, 2.0, INF]]
        );
        assert_eq!(c.leg_count(), 2);
        assert_eq!(c.labels(), ["A", "B", "C"]);

        let a = mat(&[&[3.0, 2.0], &[5.0, 4.0]]);
        let b = DvMatrix::from_rows(&[vec![7.0, 1.0], vec![6.0, 8.0]], &["B", "C"]).unwrap();
        let c = direct_concat(&a, &b).unwrap();
        assert_eq!(rows_of(&c), vec![vec![INF, INF], vec![4.0, INF]]);
        assert_eq!(concat_min(&a, &b).unwrap(), 4.0);
    }

    #[test]
    fn concat_rejects_mismatches() {
        let a = DvMatrix::filled(GridSpec::unit(2, 2), 1.0, &["A", "B"]).unwrap();
        let b = DvMatrix::filled(GridSpec::unit(2, 2), 1.0, &["C", "D"]).unwrap();
        assert!(matches!(direct_concat(&a, &b), Err(MatrixError::LabelMismatch { .. })));
        let c = DvMatrix::filled(GridSpec::unit(2, 3), 1.0, &["B", "D"]).unwrap();
        assert!(matches!(direct_concat(&a, &c), Err(MatrixError::SpecMismatch)));
    }

    #[test]
    fn f_legs_pad_f_minus_one_rows_and_columns() {
        // Concatenation leaves rows 1..f-1 and columns h-f+2..h empty for f legs.
        let spec = GridSpec::unit(7, 9);
        let labels = ["O0", "O1", "O2", "O3", "O4", "O5"];
        let mut acc = DvMatrix::filled(spec, 1.0, &labels[..2]).unwrap();
        for f in 2..=5 {
            let leg = DvMatrix::filled(spec, 1.0, &labels[f - 1..=f]).unwrap();
            acc = direct_concat(&acc, &leg).unwrap();
            for i in 1..=7 {
                for j in 1..=9 {
                    let padded = i < f || j > 9 - (f - 1);
                    assert_eq!(acc.get(i, j).is_infinite(), padded, "f={f} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn matrix_min_ties_and_empty() {
        assert_eq!(matrix_min(&mat(&[&[5.0, 3.0], &[4.0, 9.0]])), (3.0, 1, 2));
        assert_eq!(matrix_min(&mat(&[&[2.0, 2.0], &[9.0, 9.0]])), (2.0, 1, 1));
        let inf = DvMatrix::infinite(GridSpec::unit(2, 2), &["A", "B"]).unwrap();
        assert_eq!(matrix_min(&inf), (INF, 1, 1));
    }

    #[test]
    fn time_adjusted_vacuous_and_infinity_rules() {
        assert!(check_time_adjusted(&mat(&[&[9.0, 1.0, 5.0]])));
        assert!(check_time_adjusted(&mat(&[&[1.0], &[9.0], &[3.0]])));
        assert!(check_time_adjusted(&mat(&[&[1.0, INF], &[7.0, 2.0]])));
        assert!(!check_time_adjusted(&mat(&[&[1.0, 3.0], &[INF, 2.0]])));
        assert!(check_time_adjusted(&mat(&[&[INF, INF], &[INF, 2.0]])));
    }

    #[test]
    fn concat_min_matches_full_product() {
        let a = mat(&[&[3.0, 1.0, 4.0, 1.0], &[5.0, 9.0, 2.0, 6.0], &[5.0, 3.0, 5.0, INF]]);
        let b = DvMatrix::from_rows(
            &[vec![2.0, 7.0, 1.0, 8.0], vec![2.0, 8.0, 1.0, 8.0], vec![2.0, 8.0, 4.0, 5.0]],
            &["B", "C"],
        )
        .unwrap();
        let full = direct_concat(&a, &b).unwrap();
        assert_eq!(concat_min(&a, &b).unwrap(), matrix_min(&full).0);
    }
}
