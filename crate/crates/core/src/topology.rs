//! Bloch and non-Bloch winding numbers.
//!
//! Both invariants are reported with the orientation that makes the Hermitian
//! SSH topological phase (`gamma = 0`, `|v| < r`) equal to `+1`.
//!
//! *Bloch:* the rotated Bloch matrix is off-diagonal with
//! `q+(k) = v + gamma/4 + r e^{-ik}` and `q-(k) = v - gamma/4 + r e^{ik}`;
//! the invariant is the half-sum of their windings and so takes the values
//! `0`, `1/2`, `1`.
//!
//! *Non-Bloch:* bulk states of the open chain live on the circle
//! `|beta| = sqrt(|(v - gamma/4) / (v + gamma/4)|)`. Along it we follow one
//! band continuously, build `Q = |sz uR><uL sz| - |uR><uL|` from the
//! biorthogonal pair and wind its off-diagonal entry `q`.
//!
//! The non-Bloch matrix is evaluated in the balanced gauge
//! `D H(beta) D^-1`, `D = diag(rho^{1/2}, rho^{-1/2})`, i.e.
//! `[[0, sgn(b) s + r e^{-i theta}], [sgn(a) s + r e^{i theta}, 0]]` with
//! `a = v - gamma/4`, `b = v + gamma/4`, `s = sqrt(|ab|)`. `D` is constant on
//! the contour, so `q` is only rescaled and its winding is unchanged, but the
//! entries stay O(1) even when `rho` goes to 0 or infinity. At `v = +-gamma/4`
//! the radius is undefined while the balanced matrix has a regular limit,
//! which is what [`nonbloch_winding`] evaluates there.

use num_traits::Zero;

use crate::model::LatticeParams;
use crate::scalar::{cr, Real, C};
use crate::{Error, Result};

pub const MIN_BLOCH_SAMPLES: usize = 256;
pub const MIN_NONBLOCH_SAMPLES: usize = 512;
/// Contour discretization used by [`winding_scan`].
pub const DEFAULT_SAMPLES: usize = 1024;

/// `|q|` below this on the contour means the gap is closed.
pub const GAP_TOLERANCE: f64 = 1e-12;
/// Normalized `|<uL|uR>|` below this means an exceptional point.
pub const BIORTHOGONAL_TOLERANCE: f64 = 1e-12;
/// Largest distance from an integer (or half-integer) accepted when rounding.
pub const ROUNDING_GUARD: f64 = 0.01;

/// Unwrapped phase increments larger than this trigger contour refinement.
const MAX_PHASE_STEP: f64 = core::f64::consts::FRAC_PI_4;
const MAX_REFINEMENT_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult<T: Real> {
    pub v: T,
    /// Multiple of 1/2.
    pub bloch_w: T,
    pub nonbloch_w: i32,
    /// `None` at `v = +-gamma/4`, where the radius degenerates.
    pub gbz_radius: Option<T>,
    pub n_samples: usize,
}

/// Samples of the off-diagonal `Q` factor along the generalized Brillouin zone.
#[derive(Debug, Clone, PartialEq)]
pub struct QFactor<T: Real> {
    pub theta: Vec<T>,
    pub q: Vec<C<T>>,
    /// Tracked band energy, measured from the loss center `-i gamma/4`.
    pub energy: Vec<C<T>>,
}

impl<T: Real> QFactor<T> {
    /// `(i / 2 pi) * closed integral of dq / q`, orientation-normalized.
    pub fn winding(&self) -> T {
        let mut total = T::zero();
        for w in self.q.windows(2) {
            total += (w[1] / w[0]).arg();
        }
        if let (Some(&last), Some(&first)) = (self.q.last(), self.q.first()) {
            total += (first / last).arg();
        }
        -total / T::TAU()
    }

    pub fn min_abs(&self) -> T {
        self.q.iter().map(|z| z.norm()).fold(T::infinity(), T::min)
    }
}

fn coefficients<T: Real>(p: &LatticeParams<T>) -> (T, T) {
    let quarter = p.gamma / T::lit(4.0);
    (p.v - quarter, p.v + quarter)
}

fn degenerate<T: Real>(x: T) -> bool {
    x.abs() < T::tolerance(GAP_TOLERANCE)
}

/// Radius `sqrt(|(v - gamma/4) / (v + gamma/4)|)` of the generalized
/// Brillouin zone.
pub fn gbz_radius<T: Real>(params: &LatticeParams<T>) -> Result<T> {
    let (a, b) = coefficients(params);
    if degenerate(a) || degenerate(b) {
        return Err(Error::DegenerateGbz { v: params.v.to_f64_lossy() });
    }
    Ok((a / b).abs().sqrt())
}

/// Unwrapped phase of `f` around `theta in [0, 2 pi]` divided by `2 pi`.
/// Intervals whose phase step exceeds pi/4 are bisected.
fn contour_winding<T: Real>(f: impl Fn(T) -> C<T>, n: usize) -> Result<T> {
    let tol = T::tolerance(GAP_TOLERANCE);
    let step = T::TAU() / T::from_count(n);
    let mut min_abs = T::infinity();
    let mut total = T::zero();

    fn refine<T: Real>(
        f: &impl Fn(T) -> C<T>,
        (t0, z0): (T, C<T>),
        (t1, z1): (T, C<T>),
        depth: u32,
        min_abs: &mut T,
    ) -> Option<T> {
        let d = (z1 / z0).arg();
        if d.abs() <= T::lit(MAX_PHASE_STEP) {
            return Some(d);
        }
        if depth == MAX_REFINEMENT_DEPTH {
            return None;
        }
        let tm = (t0 + t1) * T::lit(0.5);
        let zm = f(tm);
        *min_abs = min_abs.min(zm.norm());
        Some(refine(f, (t0, z0), (tm, zm), depth + 1, min_abs)? + refine(f, (tm, zm), (t1, z1), depth + 1, min_abs)?)
    }

    let mut prev = (T::zero(), f(T::zero()));
    min_abs = min_abs.min(prev.1.norm());
    for j in 1..=n {
        let t = if j == n { T::TAU() } else { step * T::from_count(j) };
        let next = (t, f(t));
        min_abs = min_abs.min(next.1.norm());
        if min_abs < tol {
            return Err(Error::GapClosed { min_abs: min_abs.to_f64_lossy() });
        }
        total += refine(&f, prev, next, 0, &mut min_abs)
            .ok_or(Error::GapClosed { min_abs: min_abs.to_f64_lossy() })?;
        prev = next;
    }
    if min_abs < tol {
        return Err(Error::GapClosed { min_abs: min_abs.to_f64_lossy() });
    }
    Ok(total / T::TAU())
}

fn round_guarded<T: Real>(x: T, unit: T) -> Result<T> {
    let r = (x / unit).round() * unit;
    if (x - r).abs() >= T::lit(ROUNDING_GUARD) {
        return Err(Error::SolverFailure(format!("winding {} is not within {ROUNDING_GUARD} of a multiple of {}", x, unit)));
    }
    Ok(r)
}

fn check_samples(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidConfig(format!("n_samples must be at least {min}, got {n}")));
    }
    Ok(())
}

/// Half-sum of the windings of `q+` and `q-` over the Brillouin zone.
pub fn bloch_winding<T: Real>(params: &LatticeParams<T>, n_samples: usize) -> Result<T> {
    check_samples(n_samples, MIN_BLOCH_SAMPLES)?;
    let (a, b) = coefficients(params);
    let r = params.r;
    let plus = contour_winding(|k: T| cr(b) + C::from_polar(r, -k), n_samples)?;
    let minus = contour_winding(|k: T| cr(a) + C::from_polar(r, k), n_samples)?;
    let w = (round_guarded(-plus, T::one())? + round_guarded(minus, T::one())?) * T::lit(0.5);
    Ok(w)
}

/// Biorthogonal eigenpair of a 2x2 matrix: `M u = E u`, `w M = E w`, `w u = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair2<T: Real> {
    pub value: C<T>,
    pub right: [C<T>; 2],
    pub left: [C<T>; 2],
}

/// Both eigenpairs of `[[m00, m01], [m10, m11]]` in closed form.
pub fn eigenpairs_2x2<T: Real>(m: [[C<T>; 2]; 2]) -> Result<[Eigenpair2<T>; 2]> {
    let [[a, b], [cc, d]] = m;
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * cc).sqrt();
    let pair = |e: C<T>| -> Result<Eigenpair2<T>> {
        let pick = |x: [C<T>; 2], y: [C<T>; 2]| {
            if x[0].norm_sqr() + x[1].norm_sqr() >= y[0].norm_sqr() + y[1].norm_sqr() {
                x
            } else {
                y
            }
        };
        let u = pick([b, e - a], [e - d, cc]);
        let w = pick([cc, e - a], [e - d, b]);
        let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        let overlap = w[0] * u[0] + w[1] * u[1];
        let normalized = if nu > T::zero() && nw > T::zero() { overlap.norm() / (nu * nw) } else { T::zero() };
        if !(normalized >= T::tolerance(BIORTHOGONAL_TOLERANCE)) {
            return Err(Error::BiorthogonalBreakdown { overlap: normalized.to_f64_lossy() });
        }
        let u = [u[0] / cr(nu), u[1] / cr(nu)];
        let s = w[0] * u[0] + w[1] * u[1];
        Ok(Eigenpair2 { value: e, right: u, left: [w[0] / s, w[1] / s] })
    };
    Ok([pair(mean + disc)?, pair(mean - disc)?])
}

/// Off-diagonal entry of `Q = sz |uR><uL| sz - |uR><uL|`.
pub fn q_entry<T: Real>(pair: &Eigenpair2<T>) -> C<T> {
    -(pair.right[0] * pair.left[1]) * T::lit(2.0)
}

/// Balanced non-Bloch matrix at angle `theta` on the generalized Brillouin
/// zone, chiral center removed.
pub fn balanced_nonbloch_matrix<T: Real>(params: &LatticeParams<T>, theta: T) -> [[C<T>; 2]; 2] {
    let (a, b) = coefficients(params);
    let s = (a * b).abs().sqrt();
    let sgn = |x: T| if x < T::zero() { -T::one() } else { T::one() };
    let upper = cr(sgn(b) * s) + C::from_polar(params.r, -theta);
    let lower = cr(sgn(a) * s) + C::from_polar(params.r, theta);
    [[C::zero(), upper], [lower, C::zero()]]
}

fn initial_band<T: Real>(pairs: &[Eigenpair2<T>; 2]) -> usize {
    let tie = T::tolerance(1e-12);
    let key = |p: &Eigenpair2<T>| (p.value.re, -p.value.im);
    let (k0, k1) = (key(&pairs[0]), key(&pairs[1]));
    if (k0.0 - k1.0).abs() > tie {
        usize::from(k1.0 > k0.0)
    } else {
        usize::from(k1.1 > k0.1)
    }
}

fn nearest<T: Real>(pairs: [Eigenpair2<T>; 2], e: C<T>) -> Eigenpair2<T> {
    if (pairs[0].value - e).norm() <= (pairs[1].value - e).norm() {
        pairs[0]
    } else {
        pairs[1]
    }
}

/// `Q`-factor samples on the generalized Brillouin zone, following the band
/// with `Re E > 0` at `theta = 0` continuously around the contour. Samples
/// are added wherever the phase of `q` jumps by more than pi/4 or band
/// tracking is ambiguous, so the result is refined beyond `n_samples` near
/// transitions.
pub fn q_factor<T: Real>(params: &LatticeParams<T>, n_samples: usize) -> Result<QFactor<T>> {
    check_samples(n_samples, 1)?;
    let tol = T::tolerance(GAP_TOLERANCE);
    let eval = |theta: T| -> Result<[Eigenpair2<T>; 2]> {
        let m = balanced_nonbloch_matrix(params, theta);
        let gap = m[0][1].norm().min(m[1][0].norm());
        if gap < tol {
            return Err(Error::GapClosed { min_abs: gap.to_f64_lossy() });
        }
        eigenpairs_2x2(m)
    };

    let start = eval(T::zero())?;
    let first = start[initial_band(&start)];
    let mut out = QFactor { theta: vec![T::zero()], q: vec![q_entry(&first)], energy: vec![first.value] };

    let ambiguous = |prev: &Eigenpair2<T>, next: &Eigenpair2<T>| {
        // the step must stay closer to the tracked band than to its partner
        let jump = (next.value - prev.value).norm();
        jump * T::lit(2.0) > (next.value + prev.value).norm()
            || (q_entry(next) / q_entry(prev)).arg().abs() > T::lit(MAX_PHASE_STEP)
    };

    fn walk<T: Real>(
        eval: &impl Fn(T) -> Result<[Eigenpair2<T>; 2]>,
        ambiguous: &impl Fn(&Eigenpair2<T>, &Eigenpair2<T>) -> bool,
        (t0, p0): (T, Eigenpair2<T>),
        t1: T,
        depth: u32,
        out: &mut QFactor<T>,
    ) -> Result<Eigenpair2<T>> {
        let p1 = nearest(eval(t1)?, p0.value);
        if !ambiguous(&p0, &p1) {
            out.theta.push(t1);
            out.q.push(q_entry(&p1));
            out.energy.push(p1.value);
            return Ok(p1);
        }
        if depth == MAX_REFINEMENT_DEPTH {
            return Err(Error::GapClosed { min_abs: p0.value.norm().min(p1.value.norm()).to_f64_lossy() });
        }
        let tm = (t0 + t1) * T::lit(0.5);
        let pm = walk(eval, ambiguous, (t0, p0), tm, depth + 1, out)?;
        walk(eval, ambiguous, (tm, pm), t1, depth + 1, out)
    }

    let step = T::TAU() / T::from_count(n_samples);
    let mut cur = (T::zero(), first);
    for j in 1..n_samples {
        let t = step * T::from_count(j);
        let p = walk(&eval, &ambiguous, cur, t, 0, &mut out)?;
        cur = (t, p);
    }
    // closing segment back to theta = 2 pi, which must land on the start band
    let closing = walk(&eval, &ambiguous, cur, T::TAU(), 0, &mut out)?;
    out.theta.pop();
    out.q.pop();
    out.energy.pop();
    if (closing.value - first.value).norm() > (closing.value + first.value).norm() {
        return Err(Error::SolverFailure("tracked band does not close on itself around the contour".into()));
    }
    Ok(out)
}

/// Integer winding of the `Q`-matrix factor on the generalized Brillouin zone.
pub fn nonbloch_winding<T: Real>(params: &LatticeParams<T>, n_samples: usize) -> Result<i32> {
    check_samples(n_samples, MIN_NONBLOCH_SAMPLES)?;
    params.validate()?;
    let w = round_guarded(q_factor(params, n_samples)?.winding(), T::one())?;
    w.to_i32().ok_or_else(|| Error::SolverFailure(format!("winding {w} out of range")))
}

/// Bloch and non-Bloch invariants at one parameter point.
pub fn winding<T: Real>(params: &LatticeParams<T>, n_samples: usize) -> Result<WindingResult<T>> {
    let at = |e: Error| e.at(params.v.to_f64_lossy());
    Ok(WindingResult {
        v: params.v,
        bloch_w: bloch_winding(params, n_samples).map_err(at)?,
        nonbloch_w: nonbloch_winding(params, n_samples).map_err(at)?,
        gbz_radius: gbz_radius(params).ok(),
        n_samples,
    })
}

/// Invariants per `v`; a failing point yields its error and the scan goes on.
pub fn winding_scan<T: Real>(template: &LatticeParams<T>, v_values: &[T]) -> Vec<Result<WindingResult<T>>> {
    v_values.iter().map(|&v| winding(&template.with_v(v), DEFAULT_SAMPLES)).collect()
}

/// Bisects the change of the non-Bloch invariant between `lo` and `hi`
/// (which must carry different windings) down to an interval of width `tol`.
/// Points where the invariant is undefined are treated as lying on the `hi`
/// side.
pub fn nonbloch_transition<T: Real>(template: &LatticeParams<T>, lo: T, hi: T, tol: T) -> Result<T> {
    let w = |v: T| nonbloch_winding(&template.with_v(v), MIN_NONBLOCH_SAMPLES);
    let w_lo = w(lo)?;
    match w(hi) {
        Ok(w_hi) if w_hi == w_lo => {
            return Err(Error::InvalidConfig(format!("no change of the winding between {lo} and {hi}")));
        }
        _ => {}
    }
    let (mut lo, mut hi) = (lo, hi);
    while (hi - lo).abs() > tol {
        let mid = (lo + hi) * T::lit(0.5);
        match w(mid) {
            Ok(x) if x == w_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// `(v^2 - gamma^2/16 < r^2)` boundary `sqrt(r^2 + gamma^2/16)`.
pub fn analytic_transition<T: Real>(params: &LatticeParams<T>) -> T {
    let q = params.gamma / T::lit(4.0);
    (params.r * params.r + q * q).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::nonbloch_hamiltonian;
    use crate::scalar::c;
    use proptest::prelude::*;

    fn p(v: f64, r: f64, gamma: f64) -> LatticeParams<f64> {
        LatticeParams::centered(51, v, r, gamma).unwrap()
    }

    #[test]
    fn radius_examples() {
        assert!((gbz_radius(&p(0.0, 0.5, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((gbz_radius(&p(0.3, 0.5, 1.0)).unwrap() - (0.05f64 / 0.55).sqrt()).abs() < 1e-15);
        assert!((gbz_radius(&p(0.5, 0.5, 1.0)).unwrap() - 0.577_350_269_189_625_8).abs() < 1e-14);
        assert!(matches!(gbz_radius(&p(0.25, 0.5, 1.0)), Err(Error::DegenerateGbz { .. })));
        assert!(matches!(gbz_radius(&p(-0.25, 0.5, 1.0)), Err(Error::DegenerateGbz { .. })));
    }

    #[test]
    fn radius_equalizes_characteristic_roots() {
        // (v + g/4) r beta^2 + [(v^2 - g^2/16) + r^2 - E^2] beta + (v - g/4) r = 0
        for (v, e) in [(0.3, c(0.2, -0.1)), (-0.7, c(1.1, 0.3)), (0.5, c(0.0, 0.4))] {
            let prm = p(v, 0.5, 1.0);
            let (a, b) = (v - 0.25, v + 0.25);
            let qa = cr(b * 0.5);
            let qb = cr(v * v - 1.0 / 16.0 + 0.25) - e * e;
            let qc = cr(a * 0.5);
            let disc = (qb * qb - qa * qc * 4.0).sqrt();
            let r1 = (-qb + disc) / (qa * 2.0);
            let r2 = (-qb - disc) / (qa * 2.0);
            let rho = gbz_radius(&prm).unwrap();
            assert!(((r1 * r2).norm().sqrt() - rho).abs() < 1e-12);
        }
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch_winding(&p(0.0, 0.5, 1.0), 256).unwrap(), 1.0);
        assert_eq!(bloch_winding(&p(0.5, 0.5, 1.0), 256).unwrap(), 0.5);
        assert_eq!(bloch_winding(&p(-0.5, 0.5, 1.0), 256).unwrap(), 0.5);
        assert_eq!(bloch_winding(&p(0.9, 0.5, 1.0), 256).unwrap(), 0.0);
        assert!(matches!(bloch_winding(&p(0.25, 0.5, 1.0), 256), Err(Error::GapClosed { .. })));
        assert!(bloch_winding(&p(0.0, 0.5, 1.0), 128).is_err());
    }

    #[test]
    fn nonbloch_examples() {
        assert_eq!(nonbloch_winding(&p(0.3, 0.5, 1.0), 512).unwrap(), 1);
        assert_eq!(nonbloch_winding(&p(0.0, 0.5, 1.0), 512).unwrap(), 1);
        assert_eq!(nonbloch_winding(&p(0.9, 0.5, 1.0), 512).unwrap(), 0);
        assert_eq!(nonbloch_winding(&p(-0.9, 0.5, 1.0), 512).unwrap(), 0);
        // regular limit at the degenerate radius
        assert_eq!(nonbloch_winding(&p(0.25, 0.5, 1.0), 512).unwrap(), 1);
        assert!(nonbloch_winding(&p(0.3, 0.5, 1.0), 64).is_err());
    }

    #[test]
    fn hermitian_limit() {
        for v in [-0.9, -0.6, -0.3, 0.0, 0.2, 0.45, 0.55, 0.8] {
            let prm = p(v, 0.5, 0.0);
            let want = if v.abs() < 0.5 { 1 } else { 0 };
            assert_eq!(nonbloch_winding(&prm, 512).unwrap(), want, "v = {v}");
            assert_eq!(bloch_winding(&prm, 512).unwrap(), want as f64, "v = {v}");
        }
    }

    #[test]
    fn transition_by_bisection() {
        let template = p(0.0, 0.5, 1.0);
        let vc = nonbloch_transition(&template, 0.3, 0.9, 1e-5).unwrap();
        assert!((vc - 0.559_016_994).abs() < 1e-4, "{vc}");
        assert!((analytic_transition(&template) - 0.559_016_994).abs() < 1e-8);
    }

    #[test]
    fn q_matrix_is_off_diagonal_inverse_pair() {
        // Q = [[0, q], [1/q, 0]] for the chiral 2x2 block
        let m = balanced_nonbloch_matrix(&p(0.3, 0.5, 1.0), 0.7);
        for pair in eigenpairs_2x2(m).unwrap() {
            let (u, w) = (pair.right, pair.left);
            let outer = |i: usize, j: usize| u[i] * w[j];
            let sz = [1.0, -1.0];
            let q = |i: usize, j: usize| outer(i, j) * (sz[i] * sz[j]) - outer(i, j);
            assert!(q(0, 0).norm() < 1e-14 && q(1, 1).norm() < 1e-14);
            assert!((q(0, 1) * q(1, 0) - 1.0).norm() < 1e-12);
            assert!((q(0, 1) - q_entry(&pair)).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenpairs_match_definition() {
        let m = [[c(0.3, -0.2), c(1.0, 0.5)], [c(-0.4, 0.1), c(-0.7, 0.0)]];
        for pair in eigenpairs_2x2(m).unwrap() {
            let e = pair.value;
            let (u, w) = (pair.right, pair.left);
            assert!((m[0][0] * u[0] + m[0][1] * u[1] - e * u[0]).norm() < 1e-14);
            assert!((m[1][0] * u[0] + m[1][1] * u[1] - e * u[1]).norm() < 1e-14);
            assert!((w[0] * m[0][0] + w[1] * m[1][0] - e * w[0]).norm() < 1e-13);
            assert!((w[0] * u[0] + w[1] * u[1] - 1.0).norm() < 1e-14);
        }
        let jordan = [[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        assert!(matches!(eigenpairs_2x2::<f64>(jordan), Err(Error::BiorthogonalBreakdown { .. })));
    }

    #[test]
    fn balanced_gauge_preserves_winding() {
        // winding computed directly from H(beta) on the GBZ circle
        for v in [-0.8, -0.5, -0.1, 0.1, 0.4, 0.55, 0.57, 0.7] {
            let prm = p(v, 0.5, 1.0);
            let rho = gbz_radius(&prm).unwrap();
            let n = 4096;
            let mut qs = Vec::new();
            let mut prev: Option<C<f64>> = None;
            for j in 0..n {
                let th = std::f64::consts::TAU * j as f64 / n as f64;
                let h = nonbloch_hamiltonian(&prm, C::from_polar(rho, th)).unwrap();
                let pairs = eigenpairs_2x2([[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]]).unwrap();
                let pick = match prev {
                    None => pairs[initial_band(&pairs)],
                    Some(e) => nearest(pairs, e),
                };
                prev = Some(pick.value);
                qs.push(q_entry(&pick));
            }
            let direct = QFactor { theta: vec![], q: qs, energy: vec![] }.winding().round() as i32;
            assert_eq!(direct, nonbloch_winding(&prm, 512).unwrap(), "v = {v}");
        }
    }

    #[test]
    fn scan_records_per_point_errors() {
        let out = winding_scan(&p(0.0, 0.5, 1.0), &[0.0, 0.25, 0.5, 0.9]);
        assert_eq!(out.len(), 4);
        assert_eq!(out[0].as_ref().unwrap().bloch_w, 1.0);
        assert!(out[1].is_err());
        let r = out[2].as_ref().unwrap();
        assert_eq!((r.bloch_w, r.nonbloch_w), (0.5, 1));
        assert!(r.gbz_radius.unwrap() > 0.0);
        assert_eq!(out[3].as_ref().unwrap().nonbloch_w, 0);
    }

    #[test]
    fn single_precision_windings() {
        let prm = LatticeParams::<f32>::centered(51, 0.3, 0.5, 1.0).unwrap();
        assert_eq!(bloch_winding(&prm, 256).unwrap(), 0.5);
        assert_eq!(nonbloch_winding(&prm, 512).unwrap(), 1);
    }

    fn winding_of(f: impl Fn(f64) -> C<f64>) -> i32 {
        contour_winding(f, 2048).unwrap().round() as i32
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn contour_consistency(v in -1.0f64..1.0, r in 0.1f64..1.0, gamma in 0.0f64..2.0) {
            let prm = p(v, r, gamma);
            let (a, b) = (v - gamma / 4.0, v + gamma / 4.0);
            prop_assume!(a.abs() > 1e-3 && b.abs() > 1e-3);
            prop_assume!(((v * v - gamma * gamma / 16.0).abs() - r * r).abs() > 1e-3);
            let rho = gbz_radius(&prm).unwrap();
            let wr = winding_of(|t| cr(b) + C::from_polar(r / rho, -t));
            let ws = winding_of(|t| cr(a) + C::from_polar(r * rho, t));
            let expected = (ws - wr) / 2;
            prop_assert_eq!(nonbloch_winding(&prm, 512).unwrap(), expected);
            let analytic = i32::from((v * v - gamma * gamma / 16.0).abs() < r * r);
            prop_assert_eq!(expected, analytic);
        }

        #[test]
        fn sample_doubling_is_stable(v in -1.0f64..1.0) {
            let prm = p(v, 0.5, 1.0);
            if let (Ok(x), Ok(y)) = (nonbloch_winding(&prm, 512), nonbloch_winding(&prm, 1024)) {
                prop_assert_eq!(x, y);
            }
            if let (Ok(x), Ok(y)) = (bloch_winding(&prm, 256), bloch_winding(&prm, 512)) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn nonbloch_is_even_in_v(v in 0.0f64..1.0) {
            let a = nonbloch_winding(&p(v, 0.5, 1.0), 512);
            let b = nonbloch_winding(&p(-v, 0.5, 1.0), 512);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
