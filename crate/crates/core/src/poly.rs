//! Real polynomials in `s` with ascending coefficient storage.
//!
//! Sums snap to an exact zero when the terms cancel to within
//! [`CANCEL_TOL`] of their magnitude. Low-order zeros produced by
//! cancellation are therefore exact, which is what makes valuations
//! (the order of vanishing at `s = 0`) reliable in floating point.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Relative cancellation threshold applied to every coefficient sum.
pub const CANCEL_TOL: f64 = 1e-12;

#[inline]
fn snap(sum: f64, magnitude: f64) -> f64 {
    if sum.abs() <= CANCEL_TOL * magnitude {
        0.0
    } else {
        sum
    }
}

#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c * s^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The polynomial `s`.
    pub fn s() -> Self {
        Self::monomial(1.0, 1)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `s^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Order of vanishing at the origin. The zero polynomial reports `usize::MAX`.
    pub fn valuation(&self) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        self.coeffs.iter().take_while(|c| **c == 0.0).count()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `sum |c_k| |z|^k`, the natural scale for deciding whether `p(z)` vanishes.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `p(-s)`
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { *c })
                .collect(),
        )
    }

    /// Divides by `s^k`, dropping the `k` lowest coefficients (which the caller
    /// guarantees are zero).
    pub fn shift_down(&self, k: usize) -> Self {
        if k >= self.coeffs.len() {
            return Self::zero();
        }
        Self::new(self.coeffs[k..].to_vec())
    }

    /// Multiplies by `s^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        let l = self.leading();
        if l == 0.0 {
            return self.clone();
        }
        self.scale(1.0 / l)
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree() as usize;
        let dl = d.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![0.0; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / dl;
            quot[k] = q;
            for (i, dc) in d.coeffs.iter().enumerate() {
                let term = q * dc;
                let mag = rem[k + i].abs() + term.abs();
                rem[k + i] = snap(rem[k + i] - term, mag);
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Taylor coefficients of `p` about `z`: `p(s) = sum t_k (s - z)^k`.
    pub fn taylor_at(&self, z: Complex64) -> Vec<Complex64> {
        let mut work: Vec<Complex64> = self.coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            // Horner pass on work[k..]: synthetic division by (s - z).
            for i in (k..n - 1).rev() {
                let carry = work[i + 1] * z;
                work[i] += carry;
            }
            out.push(work[k]);
        }
        out
    }

    /// Roots as eigenvalues of the companion matrix (with multiplicity).
    pub fn roots(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d < 1 {
            return Vec::new();
        }
        let d = d as usize;
        let lead = self.leading();
        let mut c = nalgebra::DMatrix::zeros(d, d);
        for k in 1..d {
            c[(k, k - 1)] = 1.0;
        }
        for k in 0..d {
            c[(k, d - 1)] = -self.coeffs[k] / lead;
        }
        crate::spectral::eigenvalues(&c)
    }

    /// Multiplicity of `z` as a root, each Taylor coefficient judged against the
    /// matching derivative scale with relative tolerance `tol`.
    pub fn root_multiplicity(&self, z: Complex64, tol: f64) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let taylor = self.taylor_at(z);
        let abs = Polynomial::new(self.coeffs.iter().map(|c| c.abs()).collect());
        let abs_taylor = abs.taylor_at(Complex64::new(z.norm(), 0.0));
        taylor
            .iter()
            .zip(abs_taylor.iter())
            .take_while(|(t, a)| t.norm() <= tol * a.norm().max(f64::MIN_POSITIVE))
            .count()
    }

    /// Monic greatest common divisor, computed by the Euclidean algorithm with
    /// remainders below `tol` (relative) treated as zero.
    pub fn gcd(&self, other: &Polynomial, tol: f64) -> Polynomial {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.clone(), other.clone())
        } else {
            (other.clone(), self.clone())
        };
        a = a.scale(1.0 / a.max_abs());
        b = b.scale(1.0 / b.max_abs());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            let r = if r.max_abs() <= tol * a.max_abs().max(b.max_abs()) {
                Polynomial::zero()
            } else {
                r.scale(1.0 / r.max_abs())
            };
            a = b;
            b = r;
        }
        a.monic()
    }
}

fn add_coeffs(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = sign * b.get(k).copied().unwrap_or(0.0);
            snap(x + y, x.abs() + y.abs())
        })
        .collect()
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::new(add_coeffs(&self.coeffs, &rhs.coeffs, 1.0))
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::new(add_coeffs(&self.coeffs, &rhs.coeffs, -1.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut out = vec![0.0; n];
        let mut mag = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let t = a * b;
                out[i + j] += t;
                mag[i + j] += t.abs();
            }
        }
        Polynomial::new(out.into_iter().zip(mag).map(|(s, m)| snap(s, m)).collect())
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({:?})", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*s")?,
                _ => write!(f, "{a}*s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_sentinel_for_zero() {
        assert_eq!(Polynomial::zero().degree(), -1);
        assert_eq!(Polynomial::new(vec![0.0, 0.0]).degree(), -1);
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0]).degree(), 1);
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Polynomial::new(vec![0.1 + 0.2, 1.0]);
        let b = Polynomial::new(vec![0.3, 1.0]);
        let d = &a - &b;
        assert!(d.is_zero());
    }

    #[test]
    fn div_rem_reconstructs() {
        let p = Polynomial::new(vec![1.0, 3.0, 3.0, 1.0]);
        let d = Polynomial::new(vec![1.0, 1.0]);
        let (q, r) = p.div_rem(&d);
        assert!(r.is_zero());
        assert_eq!(q.coeffs(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn gcd_of_shared_factor() {
        // (s+1)(s+2) and (s+1)(s+3)
        let a = Polynomial::new(vec![2.0, 3.0, 1.0]);
        let b = Polynomial::new(vec![3.0, 4.0, 1.0]);
        let g = a.gcd(&b, 1e-10);
        assert_eq!(g.degree(), 1);
        assert!((g.coeff(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coprime_gcd_is_constant() {
        let a = Polynomial::new(vec![1.0, 1.0]);
        let b = Polynomial::new(vec![2.0, 1.0]);
        assert_eq!(a.gcd(&b, 1e-10).degree(), 0);
    }

    #[test]
    fn root_multiplicity_on_axis() {
        // (s^2 + 4)^2
        let q = Polynomial::new(vec![4.0, 0.0, 1.0]);
        let p = &q * &q;
        let z = Complex64::new(0.0, 2.0);
        assert_eq!(p.root_multiplicity(z, 1e-9), 2);
        assert_eq!(q.root_multiplicity(z, 1e-9), 1);
        assert_eq!(q.root_multiplicity(Complex64::new(0.0, 1.0), 1e-9), 0);
    }

    #[test]
    fn valuation_and_shift() {
        let p = Polynomial::new(vec![0.0, 0.0, 2.0, 1.0]);
        assert_eq!(p.valuation(), 2);
        assert_eq!(p.shift_down(2).coeffs(), &[2.0, 1.0]);
        assert_eq!(p.reflect().coeffs(), &[0.0, 0.0, 2.0, -1.0]);
    }
}
