//! Run settings: command-line flags over a TOML file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use dvchain_core::{GridSpec, SearchConfig, TimeHorizon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dfs,
    Graph,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    /// Nodes for grid columns only.
    Grid,
    /// Arrival nodes past the grid, total duration capped at d steps.
    Concat,
}

impl From<Horizon> for TimeHorizon {
    fn from(h: Horizon) -> Self {
        match h {
            Horizon::Grid => TimeHorizon::GridColumns,
            Horizon::Concat => TimeHorizon::MatchConcatenation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angles {
    Deg,
    Rad,
}

/// Every setting is optional here; the same struct is read from flags and
/// from the `--config` file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file with default values for any of these settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Keplerian catalog (id,a,e,i,raan,argp,M0,epoch).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Directory of single-leg matrix documents, used instead of a catalog.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    /// Angle unit of catalogs without an `# angles:` line.
    #[arg(long, value_enum)]
    pub angles: Option<Angles>,
    /// Comma-separated object ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub objects: Option<Vec<String>>,
    /// Epoch of the first departure column (MJD2000).
    #[arg(long, allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    /// Grid step in days, for departures and durations alike.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Duration rows.
    #[arg(long)]
    pub d: Option<usize>,
    /// Departure columns.
    #[arg(long)]
    pub h: Option<usize>,
    /// Stay time at each object, in grid steps.
    #[arg(long)]
    pub stay: Option<usize>,
    /// Pad the grid before the stay shift so no entry is lost.
    #[arg(long)]
    pub augment: Option<bool>,
    /// Highest Lambert revolution count.
    #[arg(long)]
    pub max_revs: Option<u32>,
    /// Objects per sequence.
    #[arg(long)]
    pub n: Option<usize>,
    /// Pruning slack in m/s.
    #[arg(long)]
    pub prune_margin: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// ΔV budget in m/s.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    /// Paths examined by the counter-automaton fallback.
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long, value_enum)]
    pub horizon: Option<Horizon>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Fully resolved settings, echoed to the output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<PathBuf>,
    pub angles: Angles,
    pub objects: Vec<String>,
    pub t_start: f64,
    pub dt: f64,
    pub d: usize,
    pub h: usize,
    pub stay: usize,
    pub augment: bool,
    pub max_revs: u32,
    pub n: usize,
    pub prune_margin: f64,
    pub top_k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    pub solver: Solver,
    pub max_k: usize,
    pub horizon: Horizon,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

pub fn read_file(path: &Path) -> Result<Settings, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {}", path.display(), e.message()))
}

impl RunConfig {
    /// `flags` win over `file`, which wins over the built-in defaults
    /// (the desk-scale grid: δt = 40 days, departures 40..10000, durations
    /// up to 1000 days).
    pub fn resolve(flags: Settings, file: Settings) -> Self {
        macro_rules! pick {
            ($f:ident) => {
                flags.$f.clone().or_else(|| file.$f.clone())
            };
        }
        let dt = pick!(dt).unwrap_or(40.0);
        Self {
            catalog: pick!(catalog),
            matrices: pick!(matrices),
            angles: pick!(angles).unwrap_or(Angles::Deg),
            objects: pick!(objects).unwrap_or_default(),
            t_start: pick!(t_start).unwrap_or(dt),
            dt,
            d: pick!(d).unwrap_or(25),
            h: pick!(h).unwrap_or(250),
            stay: pick!(stay).unwrap_or(0),
            augment: pick!(augment).unwrap_or(true),
            max_revs: pick!(max_revs).unwrap_or(0),
            n: pick!(n).unwrap_or(5),
            prune_margin: pick!(prune_margin).unwrap_or(10_000.0),
            top_k: pick!(top_k).unwrap_or(10),
            budget: pick!(budget),
            solver: pick!(solver).unwrap_or(Solver::Dfs),
            max_k: pick!(max_k).unwrap_or(100_000),
            horizon: pick!(horizon).unwrap_or(Horizon::Concat),
            out: pick!(out).unwrap_or_else(|| PathBuf::from("dvchain-out")),
            threads: pick!(threads),
        }
    }

    pub fn grid(&self) -> Result<GridSpec, String> {
        GridSpec::new(self.t_start, self.dt, self.d, self.h).map_err(|e| e.to_string())
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig::new(self.n, self.prune_margin, self.top_k).with_objects(&self.objects)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: Settings = toml::from_str("n = 3\ntop_k = 4\ndt = 80.0\nobjects = [\"a\", \"b\"]\n").unwrap();
        let flags = Settings {
            n: Some(2),
            ..Settings::default()
        };
        let cfg = RunConfig::resolve(flags, file);
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.top_k, 4);
        assert_eq!(cfg.dt, 80.0);
        assert_eq!(cfg.t_start, 80.0);
        assert_eq!(cfg.objects, ["a", "b"]);
        assert_eq!(cfg.d, 25);
        assert!(cfg.to_toml().contains("top_k = 4"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Settings>("nn = 3\n").is_err());
    }
}
