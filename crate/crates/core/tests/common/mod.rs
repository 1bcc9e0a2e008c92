//! Test-side oracles, written from the definitions and sharing no code with
//! the library's operators.

#![allow(dead_code)]

use dvchain_core::{DvMatrix, GridSpec, MatrixSet};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vec3 = Vector3<f64>;
pub const INF: f64 = f64::INFINITY;

/// Seed from `DVCHAIN_SEED` (decimal) or the fixed default.
pub fn seed() -> u64 {
    std::env::var("DVCHAIN_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed_2019)
}

pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed());
    r.set_stream(stream);
    r
}

/// Entry with eighths resolution below 1024 m/s, or +∞ with probability
/// `p_inf`. Sums of such values are exact in f64.
pub fn dyadic(rng: &mut impl Rng, p_inf: f64) -> f64 {
    if rng.gen_bool(p_inf) {
        INF
    } else {
        f64::from(rng.gen_range(0u32..8192)) / 8.0
    }
}

pub fn random_rows(rng: &mut impl Rng, d: usize, h: usize, p_inf: f64) -> Vec<Vec<f64>> {
    (0..d).map(|_| (0..h).map(|_| dyadic(rng, p_inf)).collect()).collect()
}

pub fn matrix(rows: &[Vec<f64>], from: &str, to: &str) -> DvMatrix {
    DvMatrix::from_rows(rows, &[from, to]).unwrap()
}

pub fn rows_of(m: &DvMatrix) -> Vec<Vec<f64>> {
    (1..=m.d()).map(|i| m.row(i).to_vec()).collect()
}

/// Wait adjustment straight from its definition:
/// `out(i, j) = min over t_w of m(i - t_w, j + t_w)`.
pub fn brute_wait(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (d, h) = (m.len(), m[0].len());
    let mut out = vec![vec![INF; h]; d];
    for i in 1..=d {
        for j in 1..=h {
            let mut best = INF;
            for tw in 0..i {
                if j + tw <= h {
                    best = best.min(m[i - tw - 1][j + tw - 1]);
                }
            }
            out[i - 1][j - 1] = best;
        }
    }
    out
}

/// Concatenation straight from its definition:
/// `c(i, j) = min over 1 ≤ k ≤ min(h-j, i-1) of a(k, j) + b(i-k, j+k)`.
pub fn brute_concat(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (d, h) = (a.len(), a[0].len());
    let mut out = vec![vec![INF; h]; d];
    for i in 1..=d {
        for j in 1..=h {
            let mut best = INF;
            for k in 1..=(h - j).min(i - 1) {
                best = best.min(a[k - 1][j - 1] + b[i - k - 1][j + k - 1]);
            }
            out[i - 1][j - 1] = best;
        }
    }
    out
}

pub fn min_of(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().copied().fold(INF, f64::min)
}

fn words(m: usize, n: usize, allow: &dyn Fn(&[usize], usize) -> bool) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for x in 0..m {
                if allow(p, x) {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// All ordered selections of `n` distinct indices below `m`.
pub fn permutations(m: usize, n: usize) -> Vec<Vec<usize>> {
    words(m, n, &|p, x| !p.contains(&x))
}

/// Every sequence of `n` objects ranked by (total, labels), totals from
/// repeated brute-force concatenation. Missing pairs count as all-infinite.
pub fn enumerate(set: &MatrixSet, n: usize, distinct: bool) -> Vec<(f64, Vec<String>)> {
    let spec = *set.spec();
    let m = set.len();
    let leg = |a: usize, b: usize| -> Vec<Vec<f64>> {
        match set.get(a, b) {
            Some(mat) => rows_of(mat),
            None => vec![vec![INF; spec.h]; spec.d],
        }
    };
    let words = if distinct {
        permutations(m, n)
    } else {
        words(m, n, &|p, x| p.last() != Some(&x))
    };
    let mut out: Vec<(f64, Vec<String>)> = words
        .into_iter()
        .map(|w| {
            let mut acc = leg(w[0], w[1]);
            for p in w[1..].windows(2) {
                acc = brute_concat(&acc, &leg(p[0], p[1]));
            }
            (min_of(&acc), w.iter().map(|&k| set.ids()[k].clone()).collect())
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

/// Random instance: `m` objects, `d × h` unit grid, every ordered pair
/// present with probability `p_pair`, entries dyadic with `p_inf` infinities,
/// wait-adjusted by the brute-force oracle.
pub fn random_set(rng: &mut impl Rng, m: usize, d: usize, h: usize, p_pair: f64, p_inf: f64) -> MatrixSet {
    let ids: Vec<String> = (0..m).map(|k| format!("o{k}")).collect();
    let mut set = MatrixSet::new(GridSpec::unit(d, h), &ids).unwrap();
    for a in 0..m {
        for b in 0..m {
            if a != b && rng.gen_bool(p_pair) {
                let rows = brute_wait(&random_rows(rng, d, h, p_inf));
                set.insert(matrix(&rows, &ids[a], &ids[b])).unwrap();
            }
        }
    }
    set
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn accel(r: &Vec3, mu: f64) -> Vec3 {
    -mu * r / r.norm().powi(3)
}

/// Two-body propagation by classical RK4 with `steps` fixed steps.
pub fn rk4(r0: &Vec3, v0: &Vec3, dt: f64, mu: f64, steps: usize) -> (Vec3, Vec3) {
    let (mut r, mut v) = (*r0, *v0);
    let hstep = dt / steps as f64;
    for _ in 0..steps {
        let k1r = v;
        let k1v = accel(&r, mu);
        let k2r = v + 0.5 * hstep * k1v;
        let k2v = accel(&(r + 0.5 * hstep * k1r), mu);
        let k3r = v + 0.5 * hstep * k2v;
        let k3v = accel(&(r + 0.5 * hstep * k2r), mu);
        let k4r = v + hstep * k3v;
        let k4v = accel(&(r + hstep * k3r), mu);
        r += hstep / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        v += hstep / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (r, v)
}

/// Elliptic two-body propagation through the eccentric anomaly, with
/// Kepler's equation solved by bisection. `None` for unbound orbits.
pub fn kepler_propagate(r0: &Vec3, v0: &Vec3, dt: f64, mu: f64) -> Option<(Vec3, Vec3)> {
    let r = r0.norm();
    let energy = v0.norm_squared() / 2.0 - mu / r;
    if energy >= 0.0 {
        return None;
    }
    let a = -mu / (2.0 * energy);
    let n = (mu / a.powi(3)).sqrt();
    let rv = r0.dot(v0);
    // e cos E0 and e sin E0
    let ecos = 1.0 - r / a;
    let esin = rv / (mu * a).sqrt();
    let e = (ecos * ecos + esin * esin).sqrt();
    let e0 = esin.atan2(ecos);
    let m0 = e0 - esin;
    let m = m0 + n * dt;
    // solve E - e sin E = M on a bracket of width 2π around M
    let (mut lo, mut hi) = (m - 1.0 - e, m + 1.0 + e);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - e * mid.sin() < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let big_e = 0.5 * (lo + hi);
    let de = big_e - e0;
    let f = 1.0 - a / r * (1.0 - de.cos());
    let g = dt - (de - de.sin()) / n;
    let r1 = f * r0 + g * v0;
    let r1n = r1.norm();
    let fdot = -(mu * a).sqrt() / (r1n * r) * de.sin();
    let gdot = 1.0 - a / r1n * (1.0 - de.cos());
    Some((r1, fdot * r0 + gdot * v0))
}
