//! Lattice parameters and Hamiltonian constructors.
//!
//! Conventions used throughout the crate:
//!
//! * Basis ordering is interleaved, `(1A, 1B, 2A, 2B, ...)`, so the flat index
//!   of site `(m, s)` is `2 (m - 1) + s` with `s = 0` for A and `1` for B.
//!   Cells are numbered from 1.
//! * The intercell A-A hop carries `+i r/2` to the right,
//!   `H[(m+1)A, mA] = +i r/2`, and the B-B hop carries the opposite sign.
//!   With this choice positive `v` pushes the walker, and the edge states, to
//!   the left edge. The conjugate convention mirrors every result.
//! * `hbar = 1`; all energies and rates are dimensionless.

use num_traits::Zero;

use crate::matrix::ComplexMatrix;
use crate::scalar::{c, ci, cr, Real, C};
use crate::{Error, Result};

/// Model constants of the lossy bipartite chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams<T: Real> {
    /// Number of unit cells `L`.
    pub cells: usize,
    /// Intracell hopping.
    pub v: T,
    /// Intercell hopping amplitude.
    pub r: T,
    /// Loss rate on every B site.
    pub gamma: T,
    /// Unit cell (1-based) holding the walker at `t = 0`.
    pub origin: usize,
}

impl<T: Real> Default for LatticeParams<T> {
    /// `L = 51`, `v = 0.5`, `r = 0.5`, `gamma = 1`, walker in the center cell 26.
    fn default() -> Self {
        Self { cells: 51, v: T::lit(0.5), r: T::lit(0.5), gamma: T::one(), origin: 26 }
    }
}

impl<T: Real> LatticeParams<T> {
    pub fn new(cells: usize, v: T, r: T, gamma: T, origin: usize) -> Result<Self> {
        let p = Self { cells, v, r, gamma, origin };
        p.validate()?;
        Ok(p)
    }

    /// Default lattice with the walker in the center cell.
    pub fn centered(cells: usize, v: T, r: T, gamma: T) -> Result<Self> {
        Self::new(cells, v, r, gamma, cells.div_ceil(2))
    }

    pub fn with_v(self, v: T) -> Self {
        Self { v, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 1 {
            return Err(Error::InvalidParams("L must be at least 1".into()));
        }
        if !(self.v.is_finite() && self.r.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("v, r and gamma must be finite".into()));
        }
        if self.gamma < T::zero() {
            return Err(Error::InvalidParams(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.origin < 1 || self.origin > self.cells {
            return Err(Error::InvalidParams(format!(
                "origin must lie in [1, {}], got {}",
                self.cells, self.origin
            )));
        }
        Ok(())
    }

    /// Hilbert-space dimension `2L`.
    pub fn dim(&self) -> usize {
        2 * self.cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sublattice {
    A,
    B,
}

/// A site label `(cell, sublattice)` with 1-based cell numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub cell: usize,
    pub sublattice: Sublattice,
}

impl BasisIndex {
    pub const fn a(cell: usize) -> Self {
        Self { cell, sublattice: Sublattice::A }
    }

    pub const fn b(cell: usize) -> Self {
        Self { cell, sublattice: Sublattice::B }
    }

    #[inline]
    pub const fn flat(self) -> usize {
        2 * (self.cell - 1)
            + match self.sublattice {
                Sublattice::A => 0,
                Sublattice::B => 1,
            }
    }

    pub const fn from_flat(i: usize) -> Self {
        let cell = i / 2 + 1;
        if i.is_multiple_of(2) {
            Self::a(cell)
        } else {
            Self::b(cell)
        }
    }
}

/// Open-boundary real-space Hamiltonian, `2L x 2L`.
pub fn build_real_space_hamiltonian<T: Real>(params: &LatticeParams<T>) -> Result<ComplexMatrix<T>> {
    params.validate()?;
    let LatticeParams { cells, v, r, gamma, .. } = *params;
    let half = T::lit(0.5);
    let hop = r * half;
    let mut h = ComplexMatrix::zeros(params.dim());
    let mut put = |i: BasisIndex, j: BasisIndex, z: C<T>| h[(i.flat(), j.flat())] = z;
    for m in 1..=cells {
        let (a, b) = (BasisIndex::a(m), BasisIndex::b(m));
        put(b, b, ci(-gamma * half));
        put(a, b, cr(v));
        put(b, a, cr(v));
        if m < cells {
            let (a1, b1) = (BasisIndex::a(m + 1), BasisIndex::b(m + 1));
            put(a1, a, ci(hop));
            put(a, a1, ci(-hop));
            put(b1, b, ci(-hop));
            put(b, b1, ci(hop));
            put(a1, b, cr(hop));
            put(b, a1, cr(hop));
            put(b1, a, cr(hop));
            put(a, b1, cr(hop));
        }
    }
    Ok(h)
}

fn mat2<T: Real>(a: C<T>, b: C<T>, c_: C<T>, d: C<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_rows(&[vec![a, b], vec![c_, d]])
}

/// Momentum-space Hamiltonian
/// `h_x sx + (h_z + i gamma/4) sz - (i gamma/4) I` with
/// `h_x = v + r cos k`, `h_z = r sin k`, in the `(A, B)` basis.
pub fn bloch_hamiltonian<T: Real>(params: &LatticeParams<T>, k: T) -> ComplexMatrix<T> {
    let q = params.gamma / T::lit(4.0);
    let hx = params.v + params.r * k.cos();
    let hz = params.r * k.sin();
    mat2(c(hz, T::zero()), cr(hx), cr(hx), c(-hz, -q - q))
}

/// The gain-compensated Bloch matrix after the static rotation `sz -> sy`:
/// off-diagonal with `q+(k) = v + gamma/4 + r e^{-ik}` above the diagonal and
/// `q-(k) = v - gamma/4 + r e^{ik}` below.
pub fn rotated_bloch_hamiltonian<T: Real>(params: &LatticeParams<T>, k: T) -> ComplexMatrix<T> {
    let (upper, lower) = rotated_off_diagonals(params, k);
    mat2(C::zero(), upper, lower, C::zero())
}

/// `(q+(k), q-(k))` of the rotated Bloch matrix.
pub fn rotated_off_diagonals<T: Real>(params: &LatticeParams<T>, k: T) -> (C<T>, C<T>) {
    let q = params.gamma / T::lit(4.0);
    let e = C::from_polar(params.r, k);
    (cr(params.v + q) + e.conj(), cr(params.v - q) + e)
}

/// Non-Bloch Hamiltonian `(v + gamma/4 + r/beta) s+ + (v - gamma/4 + r beta) s-`.
pub fn nonbloch_hamiltonian<T: Real>(params: &LatticeParams<T>, beta: C<T>) -> Result<ComplexMatrix<T>> {
    if beta.is_zero() {
        return Err(Error::ZeroBeta);
    }
    let q = params.gamma / T::lit(4.0);
    let upper = cr(params.v + q) + cr(params.r) / beta;
    let lower = cr(params.v - q) + beta * params.r;
    Ok(mat2(C::zero(), upper, lower, C::zero()))
}
