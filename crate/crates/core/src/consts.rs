//! Units and physical constants. Internal units are AU, days and AU³/day².

/// Astronomical unit in metres (IAU 2012, exact).
pub const AU_M: f64 = 149_597_870_700.0;

/// Seconds per day.
pub const DAY_S: f64 = 86_400.0;

/// Conversion factor from AU/day to m/s (≈ 1.7314568e6).
pub const AU_PER_DAY_TO_M_PER_S: f64 = AU_M / DAY_S;

/// Heliocentric gravitational parameter in AU³/day² (Gaussian constant squared).
pub const MU_SUN: f64 = 2.959_122_082_855_909_3e-4;

pub const TWO_PI: f64 = std::f64::consts::TAU;
