//! Pork-chop exports: CSV triples and 8-bit grayscale PGM images.

use std::fmt::Write as _;

use super::DvMatrix;

/// Default PGM saturation cap (m/s).
pub const PGM_DEFAULT_CAP: f64 = 30_000.0;

/// One `departure_epoch,duration,dv` row per cell, row-major from the
/// shortest duration. `+∞` is written as `inf`.
pub fn to_csv(m: &DvMatrix) -> String {
    let spec = m.spec();
    let mut out = String::from("departure_epoch,duration,dv\n");
    for i in 1..=m.d() {
        for j in 1..=m.h() {
            let v = m.get(i, j);
            let _ = if v.is_finite() {
                writeln!(out, "{:?},{:?},{:?}", spec.departure(j), spec.duration(i), v)
            } else {
                writeln!(out, "{:?},{:?},inf", spec.departure(j), spec.duration(i))
            };
        }
    }
    out
}

/// Binary PGM (P5), `h` pixels wide and `d` high, departure epoch growing to
/// the right and duration growing upwards.
///
/// Grey level is `255·ln(1 + ΔV)/ln(1 + cap)`: black is free, white is at or
/// above `cap`. Infinite entries are white.
pub fn to_pgm(m: &DvMatrix, cap: f64) -> Vec<u8> {
    let cap = if cap.is_finite() && cap > 0.0 { cap } else { PGM_DEFAULT_CAP };
    let scale = (1.0 + cap).ln();
    let mut out = format!("P5\n{} {}\n255\n", m.h(), m.d()).into_bytes();
    for i in (1..=m.d()).rev() {
        out.extend(m.row(i).iter().map(|&v| {
            if v >= cap {
                255
            } else {
                (255.0 * (1.0 + v).ln() / scale).round().clamp(0.0, 255.0) as u8
            }
        }));
    }
    out
}
