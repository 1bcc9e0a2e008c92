//! Seeded fixtures for the benchmarks in `benches/`.

use dvchain_core::dvmatrix::wait_adjust;
use dvchain_core::{DvMatrix, GridSpec, MatrixSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `d × h` matrix of ΔV-like values (m/s) with a fraction `p_inf` of
/// infeasible cells.
pub fn random_matrix(rng: &mut impl Rng, d: usize, h: usize, p_inf: f64, from: &str, to: &str) -> DvMatrix {
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            (0..h)
                .map(|_| if rng.gen_bool(p_inf) { f64::INFINITY } else { rng.gen_range(500.0..20_000.0) })
                .collect()
        })
        .collect();
    DvMatrix::from_rows(&rows, &[from, to]).expect("well-formed rows")
}

/// Wait-adjusted matrices for every ordered pair of `m` objects.
pub fn random_set(rng: &mut impl Rng, m: usize, d: usize, h: usize) -> MatrixSet {
    let ids: Vec<String> = (0..m).map(|k| format!("o{k}")).collect();
    let mut set = MatrixSet::new(GridSpec::unit(d, h), &ids).expect("valid grid");
    for a in &ids {
        for b in &ids {
            if a != b {
                let raw = random_matrix(rng, d, h, 0.1, a, b);
                set.insert(wait_adjust(&raw).expect("single leg")).expect("same grid");
            }
        }
    }
    set
}
