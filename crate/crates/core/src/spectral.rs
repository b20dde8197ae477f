//! Eigenvalue and singular-value summaries.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tfm::{CMatrix, RMatrix};

/// Relative imaginary-part threshold for asserting a real spectrum.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub sigma_min: f64,
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &RMatrix) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 {
        return vec![Complex64::new(m[(0, 0)], 0.0)];
    }
    let n = m.nrows();
    if m.iter().any(|v| !v.is_finite()) {
        return vec![Complex64::new(f64::NAN, f64::NAN); n];
    }
    // Balance first, as LAPACK does. nalgebra's unbounded QR iteration can
    // cycle, so it is capped and retried on rotated copies.
    let max_iter = 200 * n;
    let attempt = |a: &RMatrix| {
        a.clone()
            .try_schur(f64::EPSILON, max_iter)
            .map(|s| s.complex_eigenvalues().iter().copied().collect::<Vec<_>>())
    };
    let b = balance(m);
    if let Some(e) = attempt(&b) {
        return e;
    }
    for k in 1..=8 {
        let q = rotation(n, 0.37 * k as f64);
        if let Some(e) = attempt(&(q.transpose() * &b * &q)) {
            return e;
        }
    }
    b.try_schur(1e4 * f64::EPSILON, 50 * max_iter)
        .map(|s| s.complex_eigenvalues().iter().copied().collect())
        .unwrap_or_else(|| vec![Complex64::new(f64::NAN, f64::NAN); n])
}

/// Diagonal similarity equalizing row and column norms.
fn balance(m: &RMatrix) -> RMatrix {
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..50 {
        let mut done = true;
        for i in 0..n {
            let c: f64 = (0..n).filter(|&k| k != i).map(|k| a[(k, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&k| k != i).map(|k| a[(i, k)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            // Powers of two keep the scaling exact.
            let f = (r / c).sqrt().log2().round().clamp(-30.0, 30.0).exp2();
            if f != 1.0 {
                done = false;
                a.column_mut(i).scale_mut(f);
                a.row_mut(i).scale_mut(1.0 / f);
            }
        }
        if done {
            break;
        }
    }
    a
}

/// Product of Givens rotations in consecutive planes.
fn rotation(n: usize, angle: f64) -> RMatrix {
    let mut q = RMatrix::identity(n, n);
    for i in 0..n - 1 {
        let (s, c) = (angle * (i + 1) as f64).sin_cos();
        let mut g = RMatrix::identity(n, n);
        g[(i, i)] = c;
        g[(i + 1, i + 1)] = c;
        g[(i, i + 1)] = -s;
        g[(i + 1, i)] = s;
        q = q * g;
    }
    q
}

pub fn sigma_min(m: &RMatrix) -> f64 {
    sigma_min_c(&to_complex(m))
}

pub fn sigma_min_c(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    jacobi_svd(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value of `m` and a unit `t` with `|t^* m| = sigma_min`.
pub fn min_left_singular(m: &CMatrix) -> (f64, DVector<Complex64>) {
    let (sv, v) = jacobi_svd(&m.adjoint());
    let k = (0..sv.len()).min_by(|&a, &b| sv[a].total_cmp(&sv[b])).expect("non-empty");
    (sv[k], v.column(k).into_owned())
}

/// One-sided Jacobi SVD: singular values (unordered) and the matching right
/// singular vectors. Used instead of nalgebra's bidiagonal SVD, which loses
/// accuracy on some matrices with exact zero rows.
pub fn jacobi_svd(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMatrix::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Unit phase making the (p, q) inner product real.
                let e = (gamma / g).conj();
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * e;
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    ((0..n).map(|j| w.column(j).norm()).collect(), v)
}

/// `(lambda_max, lambda_min, sigma_min)` for a matrix whose eigenvalues the
/// caller asserts are real.
pub fn spectral(m: &RMatrix) -> Result<SpectralSummary> {
    let eig = eigenvalues(m);
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in &eig {
        if z.im.abs() > REAL_SPECTRUM_TOL * radius.max(f64::MIN_POSITIVE) {
            return Err(Error::ComplexSpectrum(*z));
        }
    }
    let lambda_max = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    Ok(SpectralSummary {
        lambda_max,
        lambda_min,
        sigma_min: sigma_min(m),
    })
}

/// Largest real part over the spectrum.
pub fn max_real_eig(m: &RMatrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

pub fn symmetrize(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Symmetric eigendecomposition, eigenvalues sorted in descending order:
/// `m = U diag(d) U^T`.
pub fn sym_eig_desc(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), RMatrix::zeros(0, 0));
    }
    let e = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let d = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let u = RMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (d, u)
}

/// Extreme eigenvalues of a symmetric real matrix.
pub fn sym_extremes(m: &RMatrix) -> (f64, f64) {
    let (d, _) = sym_eig_desc(m);
    if d.is_empty() {
        return (0.0, 0.0);
    }
    (d[0], d[d.len() - 1])
}

/// Smallest eigenvalue of a Hermitian matrix with a unit eigenvector.
pub fn hermitian_min(h: &CMatrix) -> (f64, DVector<Complex64>) {
    let n = h.nrows();
    if n == 1 {
        return (h[(0, 0)].re, DVector::from_element(1, Complex64::new(1.0, 0.0)));
    }
    let e = hermitian_part(h).symmetric_eigen();
    let (k, v) = e
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k, *v))
        .expect("non-empty matrix");
    (v, e.eigenvectors.column(k).into_owned())
}

/// Largest eigenvalue of a Hermitian matrix with a unit eigenvector.
pub fn hermitian_max(h: &CMatrix) -> (f64, DVector<Complex64>) {
    let (v, x) = hermitian_min(&(-h));
    (-v, x)
}

/// Scales to unit norm and rotates the phase so that the first entry with
/// non-negligible modulus is positive real.
pub fn normalize_phase(x: &DVector<Complex64>) -> DVector<Complex64> {
    let norm = x.norm();
    if norm == 0.0 {
        return x.clone();
    }
    let mut y = x / Complex64::new(norm, 0.0);
    if let Some(first) = y.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / first.norm();
        y *= phase;
        // Remove rounding residue so the anchor entry is exactly real.
        if let Some(k) = y.iter().position(|z| z.norm() > 1e-12) {
            y[k] = Complex64::new(y[k].norm(), 0.0);
        }
    }
    y
}

/// `x^* M x`
pub fn quad_form(x: &DVector<Complex64>, m: &CMatrix) -> Complex64 {
    (x.adjoint() * m * x)[(0, 0)]
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_summary() {
        let s = spectral(&RMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -1.0])).unwrap();
        assert_eq!((s.lambda_max, s.lambda_min), (2.0, -1.0));
        assert!((s.sigma_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_nilpotent() {
        let s = spectral(&RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(s.sigma_min.abs() < 1e-15);
    }

    #[test]
    fn symmetric_two_by_two() {
        let s = spectral(&RMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!((s.lambda_max - 3.0).abs() < 1e-10 * 3.0);
        assert!((s.lambda_min + 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_has_complex_spectrum() {
        let r = RMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(matches!(spectral(&r), Err(Error::ComplexSpectrum(_))));
    }

    #[test]
    fn phase_normalization() {
        let x = DVector::from_vec(vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)]);
        let y = normalize_phase(&x);
        assert!((y.norm() - 1.0).abs() < 1e-15);
        assert_eq!(y[0].im, 0.0);
        assert!(y[0].re > 0.0);
    }

    #[test]
    fn jacobi_svd_zero_rows() {
        let a = RMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.19585341919810287, -133.35803239366487, -2.8935439919750867, 0.0, //
                0.0, 0.0, -159.32425049906786, -4.010698254605919,
            ],
        );
        let (mut sv, _) = jacobi_svd(&to_complex(&a));
        sv.sort_by(|x, y| y.total_cmp(x));
        // Independent reference: eigenvalues of A^T A.
        let mut ev: Vec<f64> = (a.transpose() * &a).symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        for k in 0..2 {
            assert!((sv[k] - ev[k].sqrt()).abs() < 1e-10 * ev[0].sqrt(), "{sv:?} vs {ev:?}");
        }
        assert!(sv[2] < 1e-12 && sv[3] < 1e-12);
    }

    #[test]
    fn left_null_vector() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 1.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(0.5, 0.5),
                Complex64::new(1.0, 0.0),
            ],
        );
        let (s, t) = min_left_singular(&m);
        assert!(s < 1e-12);
        assert!((t.adjoint() * &m).norm() < 1e-12);
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }
}
