//! Keplerian catalogs and two-body propagation.
//!
//! Catalog files are delimited text (comma or whitespace), one object per row:
//!
//! ```text
//! # angles: deg
//! # mu: 2.9591220828559093e-4
//! id,a,e,i,raan,argp,M0,epoch
//! 97,2.6,0.12,5.5,10.8,56.7,281.1,2955.0
//! ```
//!
//! `a` is in AU, `epoch` in MJD2000 days. Lines starting with `#` are
//! comments, except the `angles:` and `mu:` directives which override the
//! caller's defaults. The header row is optional.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::BufRead;

use nalgebra::Vector3;
use thiserror::Error;

use crate::consts::{MU_SUN, TWO_PI};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error)]
pub enum EphemerisError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("object `{id}`: eccentricity {e} is not supported (elliptic orbits only)")]
    UnsupportedOrbit { id: String, e: f64 },
    #[error("object `{id}`: {msg}")]
    InvalidElements { id: String, msg: String },
    #[error("Kepler equation did not converge for M = {mean_anomaly}, e = {e}")]
    NoConvergence { mean_anomaly: f64, e: f64 },
    #[error("unknown object id `{0}`")]
    UnknownId(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

impl std::str::FromStr for AngleUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deg" | "degrees" => Ok(AngleUnit::Degrees),
            "rad" | "radians" => Ok(AngleUnit::Radians),
            other => Err(format!("unknown angle unit `{other}` (expected deg or rad)")),
        }
    }
}

/// Classical elements of an elliptic heliocentric orbit.
///
/// Angles are in radians; `raan`, `argp` and `mean_anomaly` are kept in
/// `[0, 2π)`, the inclination in `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalElements {
    pub id: String,
    /// Semi-major axis (AU).
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    /// Mean anomaly at `epoch`.
    pub mean_anomaly: f64,
    /// Reference epoch (MJD2000 days).
    pub epoch: f64,
}

impl OrbitalElements {
    /// Validates the invariants and normalizes the angles.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        a: f64,
        e: f64,
        i: f64,
        raan: f64,
        argp: f64,
        mean_anomaly: f64,
        epoch: f64,
    ) -> Result<Self, EphemerisError> {
        let id = id.into();
        let invalid = |msg: &str| EphemerisError::InvalidElements {
            id: id.clone(),
            msg: msg.to_string(),
        };
        let all = [a, e, i, raan, argp, mean_anomaly, epoch];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite element"));
        }
        if a <= 0.0 {
            return Err(invalid("semi-major axis must be positive"));
        }
        if e < 0.0 {
            return Err(invalid("eccentricity must be non-negative"));
        }
        if e >= 1.0 {
            return Err(EphemerisError::UnsupportedOrbit { id, e });
        }
        if !(0.0..=std::f64::consts::PI).contains(&i) {
            return Err(invalid("inclination must lie in [0, pi]"));
        }
        Ok(Self {
            a,
            e,
            i,
            raan: normalize_angle(raan),
            argp: normalize_angle(argp),
            mean_anomaly: normalize_angle(mean_anomaly),
            epoch,
            id,
        })
    }

    pub fn mean_motion(&self, mu: f64) -> f64 {
        (mu / (self.a * self.a * self.a)).sqrt()
    }

    pub fn period(&self, mu: f64) -> f64 {
        TWO_PI / self.mean_motion(mu)
    }
}

pub fn normalize_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Cartesian heliocentric state (AU, AU/day) at an epoch (MJD2000 days).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub r: Vec3,
    pub v: Vec3,
    pub epoch: f64,
}

impl StateVector {
    pub fn energy(&self, mu: f64) -> f64 {
        0.5 * self.v.norm_squared() - mu / self.r.norm()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.r.cross(&self.v)
    }
}

/// An ordered set of candidate objects around one central body.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub objects: Vec<OrbitalElements>,
    /// Gravitational parameter of the central body (AU³/day²).
    pub mu: f64,
}

impl Catalog {
    pub fn new(objects: Vec<OrbitalElements>, mu: f64) -> Result<Self, EphemerisError> {
        let mut seen = HashSet::new();
        for o in &objects {
            if !seen.insert(o.id.as_str()) {
                return Err(EphemerisError::DuplicateId(o.id.clone()));
            }
        }
        Ok(Self { objects, mu })
    }

    pub fn get(&self, id: &str) -> Result<&OrbitalElements, EphemerisError> {
        self.objects
            .iter()
            .find(|o| o.id == id)
            .ok_or_else(|| EphemerisError::UnknownId(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Restricts the catalog to `ids`, in the given order.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Catalog, EphemerisError> {
        let objects = ids
            .iter()
            .map(|id| self.get(id.as_ref()).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        Catalog::new(objects, self.mu)
    }
}

fn parse_directive(body: &str) -> Option<(&str, &str)> {
    let (key, value) = body.split_once(':')?;
    Some((key.trim(), value.trim()))
}

/// Parses a catalog. `angles` is used unless the file declares its own unit.
pub fn parse_catalog<R: BufRead>(source: R, angles: AngleUnit) -> Result<Catalog, EphemerisError> {
    let mut angles = angles;
    let mut mu = MU_SUN;
    let mut objects = Vec::new();
    let mut seen_data = false;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(body) = trimmed.strip_prefix('#') {
            match parse_directive(body) {
                Some(("angles", v)) => {
                    angles = v.parse().map_err(|msg| EphemerisError::Parse { line: line_no, msg })?;
                }
                Some(("mu", v)) => {
                    mu = v.parse().map_err(|_| EphemerisError::Parse {
                        line: line_no,
                        msg: format!("bad mu value `{v}`"),
                    })?;
                    if !(mu.is_finite() && mu > 0.0) {
                        return Err(EphemerisError::Parse {
                            line: line_no,
                            msg: "mu must be positive".into(),
                        });
                    }
                }
                _ => {}
            }
            continue;
        }

        let fields: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        if !seen_data && fields.len() > 1 && fields[1].parse::<f64>().is_err() {
            // header row
            seen_data = true;
            continue;
        }
        seen_data = true;
        if fields.len() != 8 {
            return Err(EphemerisError::Parse {
                line: line_no,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0f64; 7];
        const NAMES: [&str; 7] = ["a", "e", "i", "raan", "argp", "M0", "epoch"];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = fields[k + 1].parse().map_err(|_| EphemerisError::Parse {
                line: line_no,
                msg: format!("field `{}`: cannot parse `{}`", NAMES[k], fields[k + 1]),
            })?;
        }
        let [a, e, mut i, mut raan, mut argp, mut m0, epoch] = nums;
        if angles == AngleUnit::Degrees {
            i = i.to_radians();
            raan = raan.to_radians();
            argp = argp.to_radians();
            m0 = m0.to_radians();
        }
        let el = OrbitalElements::new(fields[0], a, e, i, raan, argp, m0, epoch).map_err(|err| match err {
            EphemerisError::InvalidElements { id, msg } => EphemerisError::Parse {
                line: line_no,
                msg: format!("object `{id}`: {msg}"),
            },
            other => other,
        })?;
        objects.push(el);
    }
    Catalog::new(objects, mu)
}

/// Writes a catalog in radians with shortest round-trip float formatting, so
/// that [`parse_catalog`] restores every element bit for bit.
pub fn write_catalog(catalog: &Catalog) -> String {
    let mut out = String::new();
    out.push_str("# angles: rad\n");
    let _ = writeln!(out, "# mu: {:e}", catalog.mu);
    out.push_str("id,a,e,i,raan,argp,M0,epoch\n");
    for o in &catalog.objects {
        let _ = writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
            o.id, o.a, o.e, o.i, o.raan, o.argp, o.mean_anomaly, o.epoch
        );
    }
    out
}

const KEPLER_TOL: f64 = 1e-12;
const KEPLER_MAX_ITER: usize = 50;

/// Solves Kepler's equation `E - e sin E = M` for the eccentric anomaly.
///
/// Newton iteration seeded at `E = M` (or `E = π` for `e ≥ 0.8`), kept inside
/// the bracket `[0, 2π]` of the reduced anomaly.
pub fn solve_kepler(mean_anomaly: f64, e: f64) -> Result<f64, EphemerisError> {
    let fail = EphemerisError::NoConvergence { mean_anomaly, e };
    if !mean_anomaly.is_finite() || !(0.0..1.0).contains(&e) {
        return Err(fail);
    }
    let m = mean_anomaly.rem_euclid(TWO_PI);
    let turns = ((mean_anomaly - m) / TWO_PI).round();

    let (mut lo, mut hi) = (0.0, TWO_PI);
    let mut ecc = if e < 0.8 { m } else { std::f64::consts::PI };
    let mut converged = false;
    for _ in 0..KEPLER_MAX_ITER {
        let f = ecc - e * ecc.sin() - m;
        if f < 0.0 {
            lo = ecc;
        } else {
            hi = ecc;
        }
        let step = f / (1.0 - e * ecc.cos());
        let mut next = ecc - step;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - ecc).abs();
        ecc = next;
        if moved <= 4.0 * f64::EPSILON * ecc.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let residual = (ecc - e * ecc.sin() - m).abs();
    if residual < KEPLER_TOL || (converged && residual < 10.0 * KEPLER_TOL) {
        Ok(ecc + turns * TWO_PI)
    } else {
        Err(fail)
    }
}

/// Cartesian state of the conic described by `el` at `epoch`.
pub fn propagate_to_epoch(el: &OrbitalElements, epoch: f64, mu: f64) -> Result<StateVector, EphemerisError> {
    let n = el.mean_motion(mu);
    let m = el.mean_anomaly + n * (epoch - el.epoch);
    let ecc_anom = solve_kepler(m, el.e)?;
    let (sin_e, cos_e) = ecc_anom.sin_cos();
    let b_over_a = (1.0 - el.e * el.e).sqrt();

    let x = el.a * (cos_e - el.e);
    let y = el.a * b_over_a * sin_e;
    let rate = n * el.a / (1.0 - el.e * cos_e);
    let vx = -sin_e * rate;
    let vy = b_over_a * cos_e * rate;

    let (so, co) = el.raan.sin_cos();
    let (sw, cw) = el.argp.sin_cos();
    let (si, ci) = el.i.sin_cos();
    // columns of the perifocal-to-inertial rotation
    let p = Vec3::new(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
    let q = Vec3::new(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);

    Ok(StateVector {
        r: p * x + q * y,
        v: p * vx + q * vy,
        epoch,
    })
}

pub(crate) fn stumpff_c(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..10 {
            term *= -z / (((2 * k + 1) * (2 * k + 2)) as f64);
            sum += term;
        }
        sum
    } else if z > 0.0 {
        (1.0 - z.sqrt().cos()) / z
    } else {
        ((-z).sqrt().cosh() - 1.0) / (-z)
    }
}

pub(crate) fn stumpff_s(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = 1.0 / 6.0;
        let mut sum = term;
        for k in 1..10 {
            term *= -z / (((2 * k + 2) * (2 * k + 3)) as f64);
            sum += term;
        }
        sum
    } else if z > 0.0 {
        let s = z.sqrt();
        (s - s.sin()) / (s * s * s)
    } else {
        let s = (-z).sqrt();
        (s.sinh() - s) / (s * s * s)
    }
}

/// Propagates a Cartesian state along its conic (any eccentricity) for `dt`
/// using the universal-variable formulation.
pub fn propagate_state(r0: &Vec3, v0: &Vec3, dt: f64, mu: f64) -> Option<(Vec3, Vec3)> {
    if dt == 0.0 {
        return Some((*r0, *v0));
    }
    let sqrt_mu = mu.sqrt();
    let r0n = r0.norm();
    let sigma0 = r0.dot(v0) / sqrt_mu;
    let alpha = 2.0 / r0n - v0.norm_squared() / mu;

    // time of flight as a function of the universal anomaly; strictly increasing
    let tof = |chi: f64| {
        let z = alpha * chi * chi;
        let c = stumpff_c(z);
        let s = stumpff_s(z);
        let chi2 = chi * chi;
        let t = (sigma0 * chi2 * c + (1.0 - alpha * r0n) * chi2 * chi * s + r0n * chi) / sqrt_mu;
        let r = chi2 * c + sigma0 * chi * (1.0 - z * s) + r0n * (1.0 - z * c);
        (t, r)
    };

    let sign = dt.signum();
    let target = dt.abs();
    let f_signed = |chi: f64| {
        let (t, r) = tof(sign * chi);
        (t * sign - target, r)
    };

    let mut lo = 0.0;
    let mut hi = (sqrt_mu * target / r0n).max(1e-6);
    let mut grow = 0;
    while f_signed(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return None;
        }
    }
    let mut chi = if alpha > 0.0 {
        (sqrt_mu * alpha * target).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..200 {
        let (f, r) = f_signed(chi);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = chi;
        } else {
            hi = chi;
        }
        let mut next = chi - f * sqrt_mu / r;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - chi).abs();
        chi = next;
        if moved <= 1e-15 * chi.abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let chi = sign * chi;
    let z = alpha * chi * chi;
    let c = stumpff_c(z);
    let s = stumpff_s(z);
    let f = 1.0 - chi * chi / r0n * c;
    let g = dt - chi * chi * chi * s / sqrt_mu;
    let r = r0 * f + v0 * g;
    let rn = r.norm();
    let fdot = sqrt_mu / (rn * r0n) * (z * s - 1.0) * chi;
    let gdot = 1.0 - chi * chi / rn * c;
    let v = r0 * fdot + v0 * gdot;
    if r.iter().chain(v.iter()).all(|x| x.is_finite()) {
        Some((r, v))
    } else {
        None
    }
}
