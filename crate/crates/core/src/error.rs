use thiserror::Error;

/// Failures raised by the lattice, dynamics, spectrum and topology routines.
///
/// Numeric context is reported in `f64` regardless of the scalar type used.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("beta = 0 is a pole of the non-Bloch Hamiltonian")]
    ZeroBeta,

    #[error("matrix dimensions do not agree: {0}")]
    Shape(String),

    #[error("eigenvalue with |Im E| = {im:e} is below the dark-state threshold; use time stepping")]
    NearDarkState { im: f64 },

    #[error("eigenvector matrix condition number {condition:e} exceeds {limit:e}")]
    DegenerateSpectrum { condition: f64, limit: f64 },

    #[error("stopped at t = {t} with residual norm^2 = {residual:e} above the stop threshold")]
    NotConverged { residual: f64, t: f64 },

    #[error("probability not conserved: sum P_m + residual = {total}")]
    Conservation { total: f64 },

    #[error("time step too large: {0}")]
    DtTooLarge(String),

    #[error("eigendecomposition failed to converge: {0}")]
    SolverFailure(String),

    #[error("singular matrix in linear solve")]
    Singular,

    #[error("generalized Brillouin zone is degenerate at v = {v} (v = +-gamma/4)")]
    DegenerateGbz { v: f64 },

    #[error("gap closes on the winding contour (min |q| = {min_abs:e})")]
    GapClosed { min_abs: f64 },

    #[error("at v = {v}: {source}")]
    AtPoint { v: f64, source: Box<Error> },

    #[error("biorthogonal normalization breaks down (|<uL|uR>| = {overlap:e}); exceptional point on contour")]
    BiorthogonalBreakdown { overlap: f64 },
}

impl Error {
    /// Attaches the scan coordinate `v` to an error.
    pub fn at(self, v: f64) -> Self {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint { v, source: Box::new(e) },
        }
    }

    /// Stable snake-case name of the innermost variant, for machine-readable
    /// error records.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidConfig(_) => "invalid_config",
            Error::ZeroBeta => "zero_beta",
            Error::Shape(_) => "shape",
            Error::NearDarkState { .. } => "near_dark_state",
            Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
            Error::NotConverged { .. } => "not_converged",
            Error::Conservation { .. } => "conservation",
            Error::DtTooLarge(_) => "dt_too_large",
            Error::SolverFailure(_) => "solver_failure",
            Error::Singular => "singular",
            Error::DegenerateGbz { .. } => "degenerate_gbz",
            Error::GapClosed { .. } => "gap_closed",
            Error::BiorthogonalBreakdown { .. } => "biorthogonal_breakdown",
            Error::AtPoint { .. } => unreachable!("root() strips scan context"),
        }
    }

    /// Scan coordinate attached by [`Error::at`], if any.
    pub fn point(&self) -> Option<f64> {
        match self {
            Error::AtPoint { v, .. } => Some(*v),
            _ => None,
        }
    }

    /// The innermost error, with any scan-point context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
