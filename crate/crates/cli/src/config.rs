//! Run configuration: command-line flags, an optional JSON config file and
//! built-in defaults, merged in that order of precedence.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Subcommand};
use lossy_walk::{EdgeCriteria64, EvolveConfig64, Params64};
use serde::Deserialize;

use crate::error::CliError;
use crate::table::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Per-cell decay probabilities P_m for one v.
    Simulate,
    /// Open-boundary eigenvalues with edge flags, for one v or a v grid.
    Spectrum,
    /// Bloch and non-Bloch winding numbers, for one v or a v grid.
    Winding,
    /// Imbalance, edge-state count and windings over a v grid.
    Sweep,
    /// Every figure data set into one directory.
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Winding => "winding",
            Command::Sweep => "sweep",
            Command::Figures => "figures",
        }
    }
}

/// Inclusive grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for VGrid {
    fn default() -> Self {
        Self { start: -1.0, stop: 1.0, step: 0.01 }
    }
}

impl VGrid {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(format!("step must be positive, got {}", self.step));
        }
        if !(self.start <= self.stop) {
            return Err(format!("start {} exceeds stop {}", self.start, self.stop));
        }
        Ok(())
    }

    /// Grid points, snapped to 12 significant digits of the grid's scale so
    /// floating-point dust never shifts a point off a round value (the
    /// midpoint of `-1:1:0.01` is exactly 0, not 1e-16).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        let scale = self.start.abs().max(self.stop.abs()).max(self.step);
        let quantum = 10f64.powi(scale.log10().floor() as i32 - 11);
        (0..n)
            .map(|i| {
                let v = ((self.start + i as f64 * self.step) / quantum).round() * quantum;
                crate::table::format_g12(v).parse::<f64>().expect("formatted float parses") + 0.0
            })
            .collect()
    }
}

impl FromStr for VGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got {s:?}"));
        }
        let mut vals = [0.0; 3];
        let mut offset = 0;
        for (i, (part, name)) in parts.iter().zip(["start", "stop", "step"]).enumerate() {
            vals[i] = part
                .trim()
                .parse()
                .map_err(|_| format!("{name} {part:?} at column {} is not a number", offset + 1))?;
            offset += part.len() + 1;
        }
        let g = VGrid { start: vals[0], stop: vals[1], step: vals[2] };
        g.validate()?;
        Ok(g)
    }
}

impl<'de> Deserialize<'de> for VGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Settings accepted both as flags and as config-file keys. Every field is
/// optional so the sources can be layered.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Number of unit cells.
    #[arg(long = "L", global = true)]
    #[serde(rename = "L")]
    pub cells: Option<usize>,
    /// Intracell hopping.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Intercell hopping.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Loss rate on B sites.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Starting unit cell (1-based); defaults to the center cell.
    #[arg(long, global = true)]
    pub origin: Option<usize>,
    /// Stop once the remaining norm^2 falls below this.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub stop_norm: Option<f64>,
    /// Time step of the integrator.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Grid as start:stop:step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v_grid: Option<VGrid>,
    /// Output file (directory for `figures`); stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Concurrent evaluations for grid commands.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

impl Settings {
    /// `self` where set, otherwise `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            cells: self.cells.or(fallback.cells),
            v: self.v.or(fallback.v),
            r: self.r.or(fallback.r),
            gamma: self.gamma.or(fallback.gamma),
            origin: self.origin.or(fallback.origin),
            stop_norm: self.stop_norm.or(fallback.stop_norm),
            dt: self.dt.or(fallback.dt),
            v_grid: self.v_grid.or(fallback.v_grid),
            output: self.output.or(fallback.output),
            format: self.format.or(fallback.format),
            workers: self.workers.or(fallback.workers),
        }
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Settings, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::config(format!("{}:{}:{}", path.display(), e.line(), e.column()), e.to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params64,
    pub evolve: EvolveConfig64,
    pub edge: EdgeCriteria64,
    /// Set only when given explicitly; grid commands fall back to
    /// [`VGrid::default`].
    pub v_grid: Option<VGrid>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

/// Default worker count: available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl RunConfig {
    /// Merges flags over config-file settings over defaults and validates.
    pub fn resolve(command: Command, flags: Settings, file: Option<Settings>) -> Result<RunConfig, CliError> {
        let s = flags.or(file.unwrap_or_default());
        let base = Params64::default();
        let cells = s.cells.unwrap_or(base.cells);
        let origin = s.origin.unwrap_or_else(|| cells.div_ceil(2));
        let params = Params64::new(
            cells,
            s.v.unwrap_or(base.v),
            s.r.unwrap_or(base.r),
            s.gamma.unwrap_or(base.gamma),
            origin,
        )
        .map_err(|e| CliError::config("parameters", e.to_string()))?;

        let mut evolve = EvolveConfig64::default();
        evolve.stop_norm = s.stop_norm.unwrap_or(evolve.stop_norm);
        evolve.dt = s.dt.unwrap_or(evolve.dt);
        evolve.validate().map_err(|e| CliError::config("--stop-norm/--dt", e.to_string()))?;

        if let Some(g) = &s.v_grid {
            g.validate().map_err(|m| CliError::config("--v-grid", m))?;
        }
        let workers = s.workers.unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(CliError::config("--workers", "must be at least 1"));
        }
        Ok(RunConfig {
            command,
            params,
            evolve,
            edge: EdgeCriteria64::default(),
            v_grid: s.v_grid,
            output: s.output,
            format: s.format.unwrap_or_default(),
            workers,
        })
    }

    pub fn grid(&self) -> Vec<f64> {
        self.v_grid.unwrap_or_default().values()
    }
}
