//! Eigendecomposition of general (non-normal) dense complex matrices.
//!
//! The pipeline is diagonal balancing, Householder reduction to upper
//! Hessenberg form, single-shift complex QR iteration to Schur form
//! `A = Z T Z^H`, and triangular back substitution for the eigenvectors.
//! Balancing matters for this crate: the open-boundary lattice Hamiltonians
//! are exponentially non-normal (skin effect) and the diagonal similarity
//! undoes most of that before QR runs.

use num_traits::{One, Zero};

use crate::matrix::{norm2, ComplexMatrix};
use crate::scalar::{cr, Real, C};
use crate::{Error, Result};

/// Eigenvalues with unit-2-norm right eigenvectors and optionally left
/// eigenvectors, sorted by real part then imaginary part.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<C<T>>,
    /// `right[n]` satisfies `A u = values[n] u` and has unit 2-norm.
    pub right: Vec<Vec<C<T>>>,
    /// `left[n]` is a row vector with `w A = values[n] w`, scaled so that
    /// `w . right[n] = 1` (plain bilinear product, no conjugation).
    pub left: Option<Vec<Vec<C<T>>>>,
}

impl<T: Real> EigenDecomposition<T> {
    /// Matrix whose columns are the right eigenvectors.
    pub fn right_matrix(&self) -> ComplexMatrix<T> {
        let n = self.values.len();
        ComplexMatrix::from_fn(n, |i, j| self.right[j][i])
    }
}

/// Full eigendecomposition of `a`.
pub fn eig<T: Real>(a: &ComplexMatrix<T>, want_left: bool) -> Result<EigenDecomposition<T>> {
    let n = a.dim();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], right: vec![], left: want_left.then(Vec::new) });
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SolverFailure("matrix has non-finite entries".into()));
    }

    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;

    let values: Vec<C<T>> = (0..n).map(|k| h[(k, k)]).collect();
    let tnorm = h.norm_frobenius().max(T::min_positive_value());
    let smin = (T::epsilon() * tnorm).max(T::min_positive_value());

    let mut right = Vec::with_capacity(n);
    for k in 0..n {
        let x = triangular_right(&h, k, smin);
        let mut v = vec![C::zero(); n];
        for (i, vi) in v.iter_mut().enumerate() {
            let mut s: C<T> = C::zero();
            for (j, &xj) in x.iter().enumerate().take(k + 1) {
                s += z[(i, j)] * xj;
            }
            *vi = s * scale[i];
        }
        normalize(&mut v);
        right.push(v);
    }

    let left = if want_left {
        let mut out = Vec::with_capacity(n);
        for (k, u) in right.iter().enumerate() {
            let w = triangular_left(&h, k, smin);
            let mut y = vec![C::zero(); n];
            for (i, yi) in y.iter_mut().enumerate() {
                let mut s: C<T> = C::zero();
                for (j, &wj) in w.iter().enumerate().skip(k) {
                    s += wj * z[(i, j)].conj();
                }
                *yi = s / scale[i];
            }
            normalize(&mut y);
            let overlap: C<T> = y.iter().zip(u).fold(C::zero(), |acc, (&a, &b)| acc + a * b);
            if overlap.norm() > T::zero() {
                let inv: C<T> = C::<T>::one() / overlap;
                y.iter_mut().for_each(|c| *c *= inv);
            }
            out.push(y);
        }
        Some(out)
    } else {
        None
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        a.re.partial_cmp(&b.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(core::cmp::Ordering::Equal))
    });

    Ok(EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        right: order.iter().map(|&i| right[i].clone()).collect(),
        left: left.map(|l| order.iter().map(|&i| l[i].clone()).collect()),
    })
}

fn l1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

fn normalize<T: Real>(v: &mut [C<T>]) {
    let big = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    if big == T::zero() || !big.is_finite() {
        return;
    }
    v.iter_mut().for_each(|z| *z /= big);
    let nrm = norm2(v);
    v.iter_mut().for_each(|z| *z /= nrm);
}

/// Radix-2 diagonal balancing in place; returns `d` with `A = D B D^-1`.
fn balance<T: Real>(a: &mut ComplexMatrix<T>) -> Vec<T> {
    let n = a.dim();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut scale = vec![T::one(); n];
    let limit = T::max_value().sqrt().sqrt();
    for _sweep in 0..200 {
        let mut done = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += l1(a[(j, i)]);
                    r += l1(a[(i, j)]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            let next = scale[i] * f;
            if (c + r) / f < T::lit(0.95) * s && next < limit && next > T::one() / limit {
                done = false;
                let ginv = T::one() / f;
                scale[i] = next;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form; returns the accumulated
/// unitary `Q` with `A_in = Q H Q^H`.
fn hessenberg<T: Real>(a: &mut ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = a.dim();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return q;
    }
    let mut v = vec![C::zero(); n];
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if alpha_norm == T::zero() {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { C::one() };
        let alpha = -phase * alpha_norm;
        for i in 0..n {
            v[i] = if i <= k { C::zero() } else { a[(i, k)] };
        }
        v[k + 1] -= alpha;
        let vn = norm2(&v[k + 1..]);
        if vn == T::zero() {
            continue;
        }
        v[k + 1..].iter_mut().for_each(|z| *z /= vn);

        // A <- (I - 2 v v^H) A
        for j in 0..n {
            let mut s: C<T> = C::zero();
            for i in k + 1..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= T::lit(2.0);
            for i in k + 1..n {
                a[(i, j)] -= v[i] * s;
            }
        }
        // A <- A (I - 2 v v^H), Q <- Q (I - 2 v v^H)
        for m in [&mut *a, &mut q] {
            for i in 0..n {
                let mut s: C<T> = C::zero();
                for j in k + 1..n {
                    s += m[(i, j)] * v[j];
                }
                s *= T::lit(2.0);
                for j in k + 1..n {
                    m[(i, j)] -= s * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = C::zero();
        }
    }
    q
}

/// Shifted complex QR iteration on a Hessenberg matrix, producing the upper
/// triangular Schur factor in place and accumulating into `z`.
fn schur<T: Real>(h: &mut ComplexMatrix<T>, z: &mut ComplexMatrix<T>) -> Result<()> {
    let n = h.dim();
    let eps = T::epsilon();
    let hnorm = h.norm_frobenius().max(T::min_positive_value());
    let max_iter = 60 * n.max(10);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rot: Vec<(C<T>, C<T>)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = l1(h[(l - 1, l - 1)]) + l1(h[(l, l)]);
            if s == T::zero() {
                s = hnorm;
            }
            if l1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = C::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::SolverFailure(format!("QR iteration did not converge in {max_iter} sweeps")));
        }

        let mu = if iter.is_multiple_of(10) {
            // exceptional shift
            let sub = h[(hi, hi - 1)].re.abs() + if hi >= 2 { h[(hi - 1, hi - 2)].re.abs() } else { T::zero() };
            h[(hi, hi)] + cr(sub)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        rot.clear();
        for k in l..hi {
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == T::zero() { (C::one(), C::zero()) } else { (a / r, b / r) };
            rot.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c.conj() * x + s.conj() * y;
                h[(k + 1, j)] = -s * x + c * y;
            }
            h[(k + 1, k)] = C::zero();
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rot[idx];
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s;
                h[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s;
                z[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C::zero();
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::lit(0.5);
    let m = (a + d) * half;
    let delta = (a - d) * half;
    let disc = (delta * delta + b * c).sqrt();
    let e1 = m + disc;
    let e2 = m - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn guard<T: Real>(d: C<T>, smin: T) -> C<T> {
    if d.norm() < smin {
        cr(smin)
    } else {
        d
    }
}

/// Solves `(T - t_kk) x = 0` with `x_k = 1`, `x_j = 0` for `j > k`.
fn triangular_right<T: Real>(t: &ComplexMatrix<T>, k: usize, smin: T) -> Vec<C<T>> {
    let lambda = t[(k, k)];
    let big = T::max_value().sqrt();
    let mut x = vec![C::zero(); k + 1];
    x[k] = C::one();
    for j in (0..k).rev() {
        let mut s: C<T> = C::zero();
        for l in j + 1..=k {
            s += t[(j, l)] * x[l];
        }
        x[j] = -s / guard(t[(j, j)] - lambda, smin);
        let m = x[j].norm();
        if m > big {
            x.iter_mut().for_each(|z| *z /= m);
        }
    }
    x
}

/// Solves `w (T - t_kk) = 0` with `w_k = 1`, `w_j = 0` for `j < k`.
fn triangular_left<T: Real>(t: &ComplexMatrix<T>, k: usize, smin: T) -> Vec<C<T>> {
    let n = t.dim();
    let lambda = t[(k, k)];
    let big = T::max_value().sqrt();
    let mut w = vec![C::zero(); n];
    w[k] = C::one();
    for j in k + 1..n {
        let mut s: C<T> = C::zero();
        for l in k..j {
            s += w[l] * t[(l, j)];
        }
        w[j] = -s / guard(t[(j, j)] - lambda, smin);
        let m = w[j].norm();
        if m > big {
            w.iter_mut().for_each(|z| *z /= m);
        }
    }
    w
}
