//! Command execution. Each command builds [`Table`]s; grid commands evaluate
//! points on a worker pool and collect per-point failures instead of
//! aborting.

use std::path::{Path, PathBuf};

use lossy_walk::dynamics::{decay_distribution, imbalance};
use lossy_walk::spectrum::{lattice_spectrum, EdgeSide};
use lossy_walk::topology::{bloch_winding, gbz_radius, nonbloch_winding, DEFAULT_SAMPLES};
use lossy_walk::{DecayRecord64, EdgeCriteria64, EvolveConfig64, Params64, Spectrum64};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::table::{Cell, Format, Table};

/// A computation that failed at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointError {
    pub v: f64,
    pub stage: &'static str,
    pub error: lossy_walk::Error,
}

impl PointError {
    fn new(v: f64, stage: &'static str, error: lossy_walk::Error) -> Self {
        Self { v, stage, error: error.root().clone() }
    }
}

pub fn errors_table(errors: &[PointError]) -> Table {
    let mut t = Table::new(["v", "stage", "error", "message"]);
    for e in errors {
        t.push(vec![e.v.into(), e.stage.into(), e.error.kind().into(), Cell::Text(e.error.to_string())]);
    }
    t
}

/// One named output of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File stem, e.g. `fig2a`.
    pub name: String,
    pub table: Table,
    pub errors: Vec<PointError>,
}

/// Fields of one `sweep` row; `None` marks a stage that failed at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub v: f64,
    pub p_imb: Option<f64>,
    pub p_1: Option<f64>,
    pub p_l: Option<f64>,
    pub residual: Option<f64>,
    pub edge_state_count: Option<usize>,
    pub bloch_w: Option<f64>,
    pub nonbloch_w: Option<i32>,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 8] =
        ["v", "P_imb", "P_1", "P_L", "residual", "edge_state_count", "bloch_w", "nonbloch_w"];

    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.v.into(),
            self.p_imb.into(),
            self.p_1.into(),
            self.p_l.into(),
            self.residual.into(),
            self.edge_state_count.into(),
            self.bloch_w.into(),
            self.nonbloch_w.into(),
        ]
    }

    pub fn from_cells(cells: &[Cell]) -> Option<SweepRow> {
        if cells.len() != Self::COLUMNS.len() {
            return None;
        }
        let int = |c: &Cell| c.as_i64().or_else(|| c.as_f64().filter(|x| x.fract() == 0.0).map(|x| x as i64));
        Some(SweepRow {
            v: cells[0].as_f64()?,
            p_imb: cells[1].as_f64(),
            p_1: cells[2].as_f64(),
            p_l: cells[3].as_f64(),
            residual: cells[4].as_f64(),
            edge_state_count: int(&cells[5]).and_then(|n| usize::try_from(n).ok()),
            bloch_w: cells[6].as_f64(),
            nonbloch_w: int(&cells[7]).and_then(|n| i32::try_from(n).ok()),
        })
    }

    pub fn table(rows: &[SweepRow]) -> Table {
        let mut t = Table::new(Self::COLUMNS);
        for r in rows {
            t.push(r.cells());
        }
        t
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Pool(e.to_string()))
}

/// Evaluates `f` on every item with `workers` threads, preserving order.
fn par_map<I: Sync, O: Send>(workers: usize, items: &[I], f: impl Fn(&I) -> O + Sync + Send) -> Result<Vec<O>, CliError> {
    Ok(pool(workers)?.install(|| items.par_iter().map(f).collect()))
}

pub fn decay_table(rec: &DecayRecord64) -> Table {
    let mut t = Table::new(["m", "P_m"]);
    for (i, &p) in rec.p.iter().enumerate() {
        t.push(vec![(i + 1).into(), p.into()]);
    }
    t
}

fn side_name(side: Option<EdgeSide>) -> &'static str {
    match side {
        None => "none",
        Some(EdgeSide::Left) => "left",
        Some(EdgeSide::Right) => "right",
        Some(EdgeSide::Both) => "both",
    }
}

fn edge_side_of(spec: &Spectrum64, index: usize) -> Option<EdgeSide> {
    spec.edge_states.iter().find(|e| e.index == index).map(|e| e.side)
}

/// Eigenvalue columns requested from a spectrum scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumColumns {
    All,
    Real,
    Imag,
    Abs,
}

pub fn spectrum_table(points: &[(f64, Spectrum64)], cols: SpectrumColumns) -> Table {
    let value_cols: &[&str] = match cols {
        SpectrumColumns::All => &["re_E", "im_E", "abs_E"],
        SpectrumColumns::Real => &["re_E"],
        SpectrumColumns::Imag => &["im_E"],
        SpectrumColumns::Abs => &["abs_E"],
    };
    let mut t = Table::new(["v"].iter().chain(value_cols).chain(&["edge_flag"]).copied());
    for (v, spec) in points {
        for (i, e) in spec.eigenvalues.iter().enumerate() {
            let mut row = vec![Cell::Float(*v)];
            match cols {
                SpectrumColumns::All => row.extend([e.re.into(), e.im.into(), e.norm().into()]),
                SpectrumColumns::Real => row.push(e.re.into()),
                SpectrumColumns::Imag => row.push(e.im.into()),
                SpectrumColumns::Abs => row.push(e.norm().into()),
            }
            row.push(side_name(edge_side_of(spec, i)).into());
            t.push(row);
        }
    }
    t
}

/// Per-cell population of every edge state at one `v`.
pub fn edge_profile_table(spec: &Spectrum64) -> Table {
    let cells = spec.dim() / 2;
    let mut t = Table::new(
        std::iter::once("m".to_string())
            .chain(spec.edge_states.iter().enumerate().map(|(k, e)| format!("edge_{}_{}", k + 1, side_name(Some(e.side))))),
    );
    for m in 0..cells {
        let mut row = vec![Cell::from(m + 1)];
        row.extend(spec.edge_states.iter().map(|e| Cell::Float(e.population[m])));
        t.push(row);
    }
    t
}

fn spectra(cfg: &RunConfig, vs: &[f64]) -> Result<(Vec<(f64, Spectrum64)>, Vec<PointError>), CliError> {
    let results = par_map(cfg.workers, vs, |&v| lattice_spectrum(&cfg.params.with_v(v), &cfg.edge))?;
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for (&v, r) in vs.iter().zip(results) {
        match r {
            Ok(s) => ok.push((v, s)),
            Err(e) => errors.push(PointError::new(v, "spectrum", e)),
        }
    }
    Ok((ok, errors))
}

pub const WINDING_COLUMNS: [&str; 5] = ["v", "bloch_w", "nonbloch_w", "gbz_radius", "n_samples"];

fn winding_row(params: &Params64, errors: &mut Vec<PointError>) -> Vec<Cell> {
    let v = params.v;
    let bloch = bloch_winding(params, DEFAULT_SAMPLES).map_err(|e| errors.push(PointError::new(v, "bloch_winding", e))).ok();
    let nonbloch =
        nonbloch_winding(params, DEFAULT_SAMPLES).map_err(|e| errors.push(PointError::new(v, "nonbloch_winding", e))).ok();
    vec![v.into(), bloch.into(), nonbloch.into(), gbz_radius(params).ok().into(), DEFAULT_SAMPLES.into()]
}

pub fn winding_artifact(cfg: &RunConfig, vs: &[f64], name: &str) -> Result<Artifact, CliError> {
    let rows = par_map(cfg.workers, vs, |&v| {
        let mut errs = Vec::new();
        let row = winding_row(&cfg.params.with_v(v), &mut errs);
        (row, errs)
    })?;
    let mut table = Table::new(WINDING_COLUMNS);
    let mut errors = Vec::new();
    for (row, errs) in rows {
        table.push(row);
        errors.extend(errs);
    }
    Ok(Artifact { name: name.into(), table, errors })
}

/// All sweep quantities at one `v`.
pub fn sweep_point(params: &Params64, evolve: &EvolveConfig64, edge: &EdgeCriteria64) -> (SweepRow, Vec<PointError>) {
    let v = params.v;
    let mut errors = Vec::new();
    let mut row =
        SweepRow { v, p_imb: None, p_1: None, p_l: None, residual: None, edge_state_count: None, bloch_w: None, nonbloch_w: None };
    match decay_distribution(params, evolve) {
        Ok(rec) => {
            row.p_imb = Some(imbalance(&rec));
            row.p_1 = rec.p.first().copied();
            row.p_l = rec.p.last().copied();
            row.residual = Some(rec.residual);
        }
        Err(e) => errors.push(PointError::new(v, "decay", e)),
    }
    match lattice_spectrum(params, edge) {
        Ok(s) => row.edge_state_count = Some(s.edge_count()),
        Err(e) => errors.push(PointError::new(v, "spectrum", e)),
    }
    match bloch_winding(params, DEFAULT_SAMPLES) {
        Ok(w) => row.bloch_w = Some(w),
        Err(e) => errors.push(PointError::new(v, "bloch_winding", e)),
    }
    match nonbloch_winding(params, DEFAULT_SAMPLES) {
        Ok(w) => row.nonbloch_w = Some(w),
        Err(e) => errors.push(PointError::new(v, "nonbloch_winding", e)),
    }
    (row, errors)
}

pub fn sweep_rows(cfg: &RunConfig, vs: &[f64]) -> Result<(Vec<SweepRow>, Vec<PointError>), CliError> {
    let results = par_map(cfg.workers, vs, |&v| sweep_point(&cfg.params.with_v(v), &cfg.evolve, &cfg.edge))?;
    let mut rows = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (row, errs) in results {
        rows.push(row);
        errors.extend(errs);
    }
    Ok((rows, errors))
}

/// Intracell hoppings of the decay-distribution panels.
pub const DECAY_PANELS: [(&str, f64); 9] = [
    ("fig2a", 0.3),
    ("fig2b", 0.5),
    ("fig2c", 0.7),
    ("fig2d", 0.9),
    ("fig3a", -0.3),
    ("fig3b", -0.5),
    ("fig3c", -0.7),
    ("fig3d", -0.9),
    ("fig4", 0.0),
];

/// Intracell hoppings of the edge-state profile panels.
pub const PROFILE_PANELS: [(&str, f64); 3] = [("fig5a", -0.3), ("fig5b", 0.0), ("fig5c", 0.3)];

/// Every figure data set. Panels with a fixed `v` use the lattice settings of
/// `cfg`; scans use its grid (default `-1:1:0.01`).
pub fn figures(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let mut out = Vec::new();

    let decays = par_map(cfg.workers, &DECAY_PANELS, |&(_, v)| decay_distribution(&cfg.params.with_v(v), &cfg.evolve))?;
    for (&(name, v), rec) in DECAY_PANELS.iter().zip(decays) {
        let rec = rec.map_err(|e| e.at(v))?;
        out.push(Artifact { name: name.into(), table: decay_table(&rec), errors: Vec::new() });
    }

    for (name, v) in PROFILE_PANELS {
        let spec = lattice_spectrum(&cfg.params.with_v(v), &cfg.edge).map_err(|e| e.at(v))?;
        out.push(Artifact { name: name.into(), table: edge_profile_table(&spec), errors: Vec::new() });
    }

    let grid = cfg.grid();
    let (points, errors) = spectra(cfg, &grid)?;
    for (name, cols) in [("fig5d", SpectrumColumns::Real), ("fig6a", SpectrumColumns::Imag), ("fig6b", SpectrumColumns::Abs)] {
        out.push(Artifact { name: name.into(), table: spectrum_table(&points, cols), errors: errors.clone() });
    }

    out.push(winding_artifact(cfg, &grid, "fig7")?);

    let (rows, errors) = sweep_rows(cfg, &grid)?;
    out.push(Artifact { name: "fig8".into(), table: SweepRow::table(&rows), errors });
    Ok(out)
}

/// Path of the error sidecar belonging to `path`: `out.csv` -> `out.errors.csv`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.errors.csv"))
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Writes `art` to `path` plus its sidecar (removing a stale one when the
/// run had no errors).
pub fn write_artifact(art: &Artifact, path: &Path, format: Format) -> Result<(), CliError> {
    art.table.write_to(path, format)?;
    let side = sidecar_path(path);
    if art.errors.is_empty() {
        match std::fs::remove_file(&side) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(CliError::io(&side, e)),
            _ => {}
        }
        Ok(())
    } else {
        errors_table(&art.errors).write_to(&side, Format::Csv)
    }
}

/// Result of a completed command, for the caller's summary line.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Extra run information (e.g. integrator residual) for stderr.
    pub summary: Option<String>,
}

/// Computes the artifacts of `cfg.command` without writing anything.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let single = |name: &str, table: Table, errors: Vec<PointError>| Outcome {
        artifacts: vec![Artifact { name: name.into(), table, errors }],
        summary: None,
    };
    let vs = || cfg.v_grid.map_or_else(|| vec![cfg.params.v], |g| g.values());
    Ok(match cfg.command {
        Command::Simulate => {
            let rec = decay_distribution(&cfg.params, &cfg.evolve)?;
            let summary = serde_json::json!({
                "method": rec.method.as_str(),
                "residual": rec.residual,
                "t_stop": if rec.t_stop.is_finite() { serde_json::json!(rec.t_stop) } else { serde_json::Value::Null },
                "sum_P": rec.p.iter().sum::<f64>(),
                "P_imb": imbalance(&rec),
            });
            let mut o = single("simulate", decay_table(&rec), Vec::new());
            o.summary = Some(summary.to_string());
            o
        }
        Command::Spectrum => {
            let (points, errors) = spectra(cfg, &vs())?;
            single("spectrum", spectrum_table(&points, SpectrumColumns::All), errors)
        }
        Command::Winding => {
            let art = winding_artifact(cfg, &vs(), "winding")?;
            Outcome { artifacts: vec![art], summary: None }
        }
        Command::Sweep => {
            let (rows, errors) = sweep_rows(cfg, &cfg.grid())?;
            single("sweep", SweepRow::table(&rows), errors)
        }
        Command::Figures => Outcome { artifacts: figures(cfg)?, summary: None },
    })
}

/// Default directory of the `figures` command.
pub const FIGURES_DIR: &str = "figures";

/// Executes `cfg` and writes its outputs. Single-table commands go to
/// `cfg.output` or stdout (errors then go to stderr as JSON lines);
/// `figures` writes `<dir>/fig<N><panel>.<ext>`.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let outcome = execute(cfg)?;
    if cfg.command == Command::Figures {
        let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from(FIGURES_DIR));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        for art in &outcome.artifacts {
            write_artifact(art, &dir.join(format!("{}.{}", art.name, extension(cfg.format))), cfg.format)?;
        }
        return Ok(outcome);
    }
    let art = &outcome.artifacts[0];
    match &cfg.output {
        Some(path) => write_artifact(art, path, cfg.format)?,
        None => {
            art.table.write_stdout(cfg.format)?;
            for e in &art.errors {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": e.error.kind(), "stage": e.stage, "v": e.v, "message": e.error.to_string() })
                );
            }
        }
    }
    Ok(outcome)
}
