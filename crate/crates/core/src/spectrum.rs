//! Open-boundary spectra and edge-state classification.
//!
//! Edge states are located relative to the chiral center of the spectrum.
//! For the lossy chain the center is `-i gamma/4`, which equals `tr(H) / 2L`,
//! so it is read off the eigenvalues instead of being passed in. Measured from
//! there the two edge modes sit at (exponentially) zero energy while the bulk
//! is gapped; measured from the origin both would sit at `|E| = gamma/4`,
//! inside the bulk range of `|E|`.

use num_traits::Zero;

use crate::eigen::{eig, EigenDecomposition};
use crate::matrix::{dot_conj, norm2, ComplexMatrix};
use crate::model::{build_real_space_hamiltonian, LatticeParams};
use crate::scalar::{Real, C};
use crate::{Error, Result};

/// Which boundary carries an edge state's weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeSide {
    Left,
    Right,
    Both,
}

/// Thresholds for classifying an eigenstate as an edge state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCriteria<T: Real> {
    /// Number of unit cells at each end counted as "the edge".
    pub edge_cells: usize,
    /// Minimum probability weight inside the edge cells.
    pub weight_threshold: T,
    /// Required ratio between the smallest bulk energy and the edge energy,
    /// both measured from the chiral center.
    pub gap_factor: T,
}

impl<T: Real> Default for EdgeCriteria<T> {
    fn default() -> Self {
        Self { edge_cells: 3, weight_threshold: T::lit(0.6), gap_factor: T::lit(3.0) }
    }
}

impl<T: Real> EdgeCriteria<T> {
    pub fn validate(&self) -> Result<()> {
        if self.edge_cells == 0 {
            return Err(Error::InvalidConfig("edge_cells must be positive".into()));
        }
        if !(self.weight_threshold > T::zero() && self.weight_threshold < T::one()) {
            return Err(Error::InvalidConfig("weight_threshold must lie in (0, 1)".into()));
        }
        if !(self.gap_factor > T::one()) {
            return Err(Error::InvalidConfig("gap_factor must exceed 1".into()));
        }
        Ok(())
    }
}

/// A classified edge state.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState<T: Real> {
    /// Position in [`SpectrumResult::eigenvalues`].
    pub index: usize,
    pub side: EdgeSide,
    pub left_weight: T,
    pub right_weight: T,
    /// Per-cell population `|psi_A|^2 + |psi_B|^2` of the (unit-norm) profile
    /// used for classification.
    pub population: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Real> {
    /// Scan coordinate, when the spectrum came from a parameter set.
    pub v: Option<T>,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C<T>>,
    /// Unit-2-norm right eigenvectors, aligned with `eigenvalues`.
    pub right_eigenvectors: Vec<Vec<C<T>>>,
    pub left_eigenvectors: Option<Vec<Vec<C<T>>>>,
    /// Mean eigenvalue `tr(H) / dim`.
    pub center: C<T>,
    pub edge_flags: Vec<bool>,
    pub edge_states: Vec<EdgeState<T>>,
}

impl<T: Real> SpectrumResult<T> {
    fn from_decomposition(d: EigenDecomposition<T>) -> Self {
        let n = d.values.len();
        let center = if n == 0 {
            C::zero()
        } else {
            d.values.iter().fold(C::zero(), |a: C<T>, &b| a + b) / T::from_count(n)
        };
        Self {
            v: None,
            eigenvalues: d.values,
            right_eigenvectors: d.right,
            left_eigenvectors: d.left,
            center,
            edge_flags: vec![false; n],
            edge_states: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_states.len()
    }

    pub fn count_on(&self, side: EdgeSide) -> usize {
        self.edge_states.iter().filter(|e| e.side == side).count()
    }

    pub fn max_imag(&self) -> T {
        self.eigenvalues.iter().map(|e| e.im).fold(T::neg_infinity(), T::max)
    }

    /// Largest pointwise difference between the population curves of the
    /// first two edge states, if there are two.
    pub fn edge_population_mismatch(&self) -> Option<T> {
        match self.edge_states.as_slice() {
            [a, b, ..] => Some(
                a.population
                    .iter()
                    .zip(&b.population)
                    .map(|(x, y)| (*x - *y).abs())
                    .fold(T::zero(), T::max),
            ),
            _ => None,
        }
    }
}

/// Full eigendecomposition with unit-norm right eigenvectors.
pub fn eigensystem<T: Real>(h: &ComplexMatrix<T>) -> Result<SpectrumResult<T>> {
    Ok(SpectrumResult::from_decomposition(eig(h, false)?))
}

/// As [`eigensystem`], also returning left eigenvectors normalized so that
/// `<u_L|u_R> = 1`.
pub fn eigensystem_with_left<T: Real>(h: &ComplexMatrix<T>) -> Result<SpectrumResult<T>> {
    Ok(SpectrumResult::from_decomposition(eig(h, true)?))
}

/// Diagonalizes the open-boundary Hamiltonian for `params` and classifies its
/// edge states.
pub fn lattice_spectrum<T: Real>(params: &LatticeParams<T>, crit: &EdgeCriteria<T>) -> Result<SpectrumResult<T>> {
    let h = build_real_space_hamiltonian(params)?;
    let mut res = eigensystem(&h)?;
    res.v = Some(params.v);
    classify_edge_states(res, crit)
}

/// Smallest singular value of the normalized candidate vectors above which
/// they are treated as spanning independent edge modes.
const SPAN_CONDITION: f64 = 0.25;

fn cell_population<T: Real>(u: &[C<T>]) -> Vec<T> {
    let nrm = norm2(u);
    let scale = if nrm > T::zero() { T::one() / (nrm * nrm) } else { T::zero() };
    u.chunks(2).map(|cell| cell.iter().map(|z| z.norm_sqr()).sum::<T>() * scale).collect()
}

fn side_weights<T: Real>(pop: &[T], edge_cells: usize) -> (T, T) {
    let k = edge_cells.min(pop.len());
    let left = pop[..k].iter().copied().sum::<T>();
    let right = pop[pop.len() - k..].iter().copied().sum::<T>();
    (left, right)
}

/// Orthonormalizes `vs` (modified Gram-Schmidt) and returns the basis together
/// with the smallest singular value of the unit-normalized input.
fn orthonormal_span<T: Real>(vs: &[Vec<C<T>>]) -> Result<(Vec<Vec<C<T>>>, T)> {
    let k = vs.len();
    let units: Vec<Vec<C<T>>> = vs
        .iter()
        .map(|v| {
            let n = norm2(v);
            v.iter().map(|z| *z / n).collect()
        })
        .collect();
    let gram = ComplexMatrix::from_fn(k, |i, j| dot_conj(&units[i], &units[j]));
    let smallest = eig(&gram, false)?
        .values
        .iter()
        .map(|z| z.re.max(T::zero()))
        .fold(T::infinity(), T::min)
        .sqrt();

    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(k);
    for u in &units {
        let mut w = u.clone();
        for q in &basis {
            let p = dot_conj(q, &w);
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= *b * p);
        }
        let n = norm2(&w);
        w.iter_mut().for_each(|z| *z /= n);
        basis.push(w);
    }
    Ok((basis, smallest))
}

/// Flags eigenstates that are gapped away from the bulk and concentrated on
/// the first or last `edge_cells` unit cells.
///
/// Energies are measured from the chiral center. The candidate set is the
/// low-energy prefix that ends at the largest ratio between consecutive sorted
/// energies; it qualifies only if that ratio exceeds `gap_factor`.
///
/// Near-degenerate edge pairs may come out of the eigensolver as arbitrary
/// combinations of the two boundary modes. When the candidate vectors span a
/// well-conditioned subspace, the classification uses the basis of that span
/// that diagonalizes the left-minus-right edge projector. When they are nearly
/// parallel (the pair is close to an exceptional point) the raw eigenvectors
/// are used as they are.
pub fn classify_edge_states<T: Real>(mut result: SpectrumResult<T>, crit: &EdgeCriteria<T>) -> Result<SpectrumResult<T>> {
    crit.validate()?;
    let n = result.dim();
    result.edge_flags = vec![false; n];
    result.edge_states.clear();
    if n < 2 {
        return Ok(result);
    }

    let eps: Vec<T> = result.eigenvalues.iter().map(|e| (*e - result.center).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eps[a].partial_cmp(&eps[b]).unwrap_or(core::cmp::Ordering::Equal));
    let top = eps.iter().copied().fold(T::zero(), T::max);
    let floor = T::tolerance(1e-12) * top.max(T::one());

    let (mut best_k, mut best_ratio) = (0, T::zero());
    for k in 1..n {
        let ratio = (eps[order[k]] + floor) / (eps[order[k - 1]] + floor);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_k = k;
        }
    }
    if best_ratio <= crit.gap_factor {
        return Ok(result);
    }
    let candidates = &order[..best_k];

    let raw: Vec<Vec<C<T>>> = candidates.iter().map(|&i| result.right_eigenvectors[i].clone()).collect();
    let profiles = if candidates.len() > 1 {
        let (basis, smin) = orthonormal_span(&raw)?;
        if smin > T::lit(SPAN_CONDITION) {
            localized_profiles(&basis, &raw, crit.edge_cells)?
        } else {
            raw
        }
    } else {
        raw
    };

    for (&index, profile) in candidates.iter().zip(&profiles) {
        let population = cell_population(profile);
        let (left_weight, right_weight) = side_weights(&population, crit.edge_cells);
        let side = match (left_weight > crit.weight_threshold, right_weight > crit.weight_threshold) {
            (true, true) => EdgeSide::Both,
            (true, false) => EdgeSide::Left,
            (false, true) => EdgeSide::Right,
            (false, false) => continue,
        };
        result.edge_flags[index] = true;
        result.edge_states.push(EdgeState { index, side, left_weight, right_weight, population });
    }
    Ok(result)
}

/// Rotates an orthonormal basis so each vector is an eigenvector of
/// `P_left - P_right` restricted to the span, then pairs the rotated vectors
/// with the original states by largest overlap.
fn localized_profiles<T: Real>(basis: &[Vec<C<T>>], raw: &[Vec<C<T>>], edge_cells: usize) -> Result<Vec<Vec<C<T>>>> {
    let k = basis.len();
    let dim = basis[0].len();
    let ec = (2 * edge_cells).min(dim);
    let weight = |i: usize| -> T {
        let mut w = T::zero();
        if i < ec {
            w += T::one();
        }
        if i >= dim - ec {
            w -= T::one();
        }
        w
    };
    let m = ComplexMatrix::from_fn(k, |a, b| {
        (0..dim).fold(C::zero(), |acc: C<T>, i| acc + basis[a][i].conj() * basis[b][i] * weight(i))
    });
    let rot = eig(&m, false)?;
    let rotated: Vec<Vec<C<T>>> = rot
        .right
        .iter()
        .map(|x| (0..dim).map(|i| (0..k).fold(C::zero(), |acc: C<T>, j| acc + basis[j][i] * x[j])).collect())
        .collect();

    let mut taken = vec![false; k];
    let mut out = Vec::with_capacity(k);
    for r in raw {
        let best = (0..k)
            .filter(|&j| !taken[j])
            .max_by(|&a, &b| {
                let oa = dot_conj(&rotated[a], r).norm();
                let ob = dot_conj(&rotated[b], r).norm();
                oa.partial_cmp(&ob).unwrap_or(core::cmp::Ordering::Equal)
            })
            .expect("as many rotated vectors as raw vectors");
        taken[best] = true;
        out.push(rotated[best].clone());
    }
    Ok(out)
}

/// One classified spectrum per `v`, all other parameters from `template`.
pub fn spectrum_scan<T: Real>(
    template: &LatticeParams<T>,
    v_values: &[T],
    crit: &EdgeCriteria<T>,
) -> Result<Vec<SpectrumResult<T>>> {
    if v_values.is_empty() {
        return Err(Error::InvalidConfig("spectrum scan needs at least one v".into()));
    }
    v_values
        .iter()
        .map(|&v| lattice_spectrum(&template.with_v(v), crit).map_err(|e| e.at(v.to_f64_lossy())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn paper(v: f64) -> LatticeParams<f64> {
        LatticeParams::centered(51, v, 0.5, 1.0).unwrap()
    }

    #[test]
    fn single_cell_eigenvalues() {
        let h = build_real_space_hamiltonian(&LatticeParams::new(1, 0.5, 0.5, 1.0, 1).unwrap()).unwrap();
        let s = eigensystem(&h).unwrap();
        let root = (0.25f64 - 1.0 / 16.0).sqrt();
        assert!((s.eigenvalues[0] - c(-root, -0.25)).norm() < 1e-14);
        assert!((s.eigenvalues[1] - c(root, -0.25)).norm() < 1e-14);
        assert!((root - 0.4330).abs() < 1e-4);
    }

    #[test]
    fn lossless_spectrum_is_real() {
        let h = build_real_space_hamiltonian(&LatticeParams::<f64>::new(10, 0.3, 0.5, 0.0, 1).unwrap()).unwrap();
        let s = eigensystem(&h).unwrap();
        assert!(s.eigenvalues.iter().all(|e| e.im.abs() < 1e-10));
    }

    #[test]
    fn eigenpair_residuals_are_small() {
        for v in [-0.9, -0.3, 0.0, 0.3, 0.5] {
            let h = build_real_space_hamiltonian(&paper(v)).unwrap();
            let s = eigensystem(&h).unwrap();
            let hn = h.norm_frobenius();
            for (e, u) in s.eigenvalues.iter().zip(&s.right_eigenvectors) {
                assert!((norm2(u) - 1.0).abs() < 1e-12);
                let hu = h.matvec(u);
                let r = hu.iter().zip(u).map(|(a, b)| (a - e * b).norm_sqr()).sum::<f64>().sqrt();
                assert!(r <= 1e-8 * hn, "v = {v}: residual {r}");
            }
        }
    }

    #[test]
    fn spectrum_sorted_and_in_lower_half_plane() {
        let s = lattice_spectrum(&paper(0.3), &EdgeCriteria::default()).unwrap();
        assert!(s.max_imag() <= 1e-10);
        for w in s.eigenvalues.windows(2) {
            assert!(w[0].re < w[1].re || (w[0].re == w[1].re && w[0].im <= w[1].im));
        }
        assert!((s.center - c(0.0, -0.25)).norm() < 1e-12);
    }

    #[test]
    fn chiral_pairing_about_center() {
        // At L = 51 the skin effect makes eigenvalues for |v| ~ 0.2..0.6
        // exponentially ill-conditioned; the pairing is checked where the
        // problem is well posed in double precision.
        let cases = [(51, 0.0), (51, 0.9), (51, -0.9), (12, -0.6), (12, 0.3), (12, 0.5)];
        for (cells, v) in cases {
            let params = LatticeParams::centered(cells, v, 0.5, 1.0).unwrap();
            let s = lattice_spectrum(&params, &EdgeCriteria::default()).unwrap();
            for e in &s.eigenvalues {
                let mirror = s.center * 2.0 - e;
                let d = s.eigenvalues.iter().map(|x| (x - mirror).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-8, "v = {v}: {e} has no partner ({d})");
            }
        }
    }

    #[test]
    fn edge_census_matches_localization_pattern() {
        let crit = EdgeCriteria::default();
        let s = lattice_spectrum(&paper(0.3), &crit).unwrap();
        assert_eq!((s.edge_count(), s.count_on(EdgeSide::Left)), (2, 2));
        let s = lattice_spectrum(&paper(-0.3), &crit).unwrap();
        assert_eq!((s.edge_count(), s.count_on(EdgeSide::Right)), (2, 2));
        let s = lattice_spectrum(&paper(0.0), &crit).unwrap();
        assert_eq!(s.edge_count(), 2);
        assert_eq!((s.count_on(EdgeSide::Left), s.count_on(EdgeSide::Right)), (1, 1));
        for v in [0.9, -0.9] {
            assert_eq!(lattice_spectrum(&paper(v), &crit).unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn edge_flags_follow_edge_states() {
        let s = lattice_spectrum(&paper(0.3), &EdgeCriteria::default()).unwrap();
        assert_eq!(s.edge_flags.iter().filter(|&&f| f).count(), 2);
        for e in &s.edge_states {
            assert!(s.edge_flags[e.index]);
            assert!((s.eigenvalues[e.index] - s.center).norm() < 1e-6);
            assert_eq!(e.population.len(), 51);
        }
        // the two left-localized profiles nearly coincide
        assert!(s.edge_population_mismatch().unwrap() < 1e-3);
    }

    #[test]
    fn criteria_validation() {
        let bad = EdgeCriteria { edge_cells: 0, ..EdgeCriteria::<f64>::default() };
        assert!(bad.validate().is_err());
        let bad = EdgeCriteria { gap_factor: 1.0, ..EdgeCriteria::<f64>::default() };
        assert!(bad.validate().is_err());
        let bad = EdgeCriteria { weight_threshold: 1.5, ..EdgeCriteria::<f64>::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn scan_attaches_v_to_errors() {
        let template = paper(0.0);
        assert!(spectrum_scan(&template, &[], &EdgeCriteria::default()).is_err());
        let bad = EdgeCriteria { edge_cells: 0, ..EdgeCriteria::default() };
        match spectrum_scan(&template, &[0.25], &bad) {
            Err(Error::AtPoint { v, .. }) => assert_eq!(v, 0.25),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lossless_edge_region_is_ssh_condition() {
        let crit = EdgeCriteria::default();
        let lossless = |v: f64| LatticeParams::centered(40, v, 0.5, 0.0).unwrap();
        assert_eq!(lattice_spectrum(&lossless(0.2), &crit).unwrap().edge_count(), 2);
        assert_eq!(lattice_spectrum(&lossless(-0.3), &crit).unwrap().edge_count(), 2);
        assert_eq!(lattice_spectrum(&lossless(0.8), &crit).unwrap().edge_count(), 0);
        assert!(lattice_spectrum(&lossless(0.3), &crit).unwrap().max_imag().abs() < 1e-10);
    }
}
