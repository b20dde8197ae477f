//! Square matrices of proper real-rational functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;

pub type RMatrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::json::SystemJson", into = "crate::json::SystemJson")]
pub struct TransferMatrix {
    n: usize,
    entries: Vec<RationalFunction>,
}

/// `G(0)` or the marker that `G` has a pole at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StaticGain {
    Finite(RMatrix),
    PoleAtOrigin,
}

impl StaticGain {
    pub fn finite(&self) -> Option<&RMatrix> {
        match self {
            StaticGain::Finite(m) => Some(m),
            StaticGain::PoleAtOrigin => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainData {
    pub static_gain: StaticGain,
    pub instantaneous_gain: RMatrix,
}

impl TransferMatrix {
    /// Row-major entries; every entry must be proper.
    pub fn new(n: usize, entries: Vec<RationalFunction>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.is_proper() {
                return Err(Error::Improper {
                    row: k / n,
                    col: k % n,
                    num_deg: e.num().degree(),
                    den_deg: e.den().degree(),
                });
            }
        }
        Ok(TransferMatrix { n, entries })
    }

    /// Intermediate results of matrix algebra may be improper (inverses).
    pub(crate) fn from_entries_unchecked(n: usize, entries: Vec<RationalFunction>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        TransferMatrix { n, entries }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> RationalFunction) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self::new(n, entries)
    }

    pub fn scalar(g: RationalFunction) -> Result<Self> {
        Self::new(1, vec![g])
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_entries_unchecked(n, vec![RationalFunction::zero(); n * n])
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(&RMatrix::identity(n, n))
    }

    pub fn constant(m: &RMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "constant transfer matrix must be square");
        let n = m.nrows();
        let entries = (0..n * n)
            .map(|k| RationalFunction::constant(m[(k / n, k % n)]))
            .collect();
        Self::from_entries_unchecked(n, entries)
    }

    /// `g(s) * M` for a scalar rational `g` and a constant matrix `M`.
    pub fn scalar_times(g: &RationalFunction, m: &RMatrix) -> Result<Self> {
        let n = m.nrows();
        Self::from_fn(n, |i, j| g.scale(m[(i, j)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.entries
    }

    pub fn is_proper(&self) -> bool {
        self.entries.iter().all(|e| e.is_proper())
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.entries.iter().all(|e| e.is_strictly_proper())
    }

    pub fn map(&self, f: impl Fn(&RationalFunction) -> RationalFunction) -> Self {
        Self::from_entries_unchecked(self.n, self.entries.iter().map(f).collect())
    }

    pub fn reduced(&self) -> Self {
        self.map(|e| e.reduced())
    }

    pub fn eval_at(&self, s: Complex64) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self.entry(i, j).eval(s)?;
            }
        }
        Ok(out)
    }

    /// `G(j omega)`
    pub fn eval_jw(&self, omega: f64) -> Result<CMatrix> {
        self.eval_at(Complex64::new(0.0, omega))
    }

    pub fn instantaneous_gain(&self) -> RMatrix {
        RMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).at_infinity())
    }

    pub fn origin_pole_order(&self) -> usize {
        self.entries.iter().map(|e| e.origin_pole_order()).max().unwrap_or(0)
    }

    pub fn static_gain(&self) -> Option<RMatrix> {
        self.scaled_origin_limit(0).ok()
    }

    pub fn gains(&self) -> GainData {
        GainData {
            static_gain: match self.static_gain() {
                Some(m) => StaticGain::Finite(m),
                None => StaticGain::PoleAtOrigin,
            },
            instantaneous_gain: self.instantaneous_gain(),
        }
    }

    /// `lim_{s->0} s^k G(s)`, evaluated from exact origin valuations.
    pub fn scaled_origin_limit(&self, k: usize) -> Result<RMatrix> {
        let mut out = RMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self.entry(i, j).scaled_origin_limit(k)?;
            }
        }
        Ok(out)
    }

    /// `G'(0)` for `G` analytic at the origin.
    pub fn derivative_at_zero(&self) -> Result<RMatrix> {
        let mut out = RMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self.entry(i, j).derivative().limit_at_zero()?;
            }
        }
        Ok(out)
    }

    pub fn strictly_proper_part(&self) -> Self {
        self.map(|e| e.strictly_proper_part())
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.entry(k % n, k / n).clone()).collect();
        Self::from_entries_unchecked(n, entries)
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|e| e.scale(k))
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self::from_entries_unchecked(self.n, entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(Self::from_entries_unchecked(self.n, entries))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = RationalFunction::zero();
                for k in 0..n {
                    let t = self.entry(i, k) * other.entry(k, j);
                    if !t.is_zero() {
                        acc = &acc + &t;
                    }
                }
                entries.push(acc);
            }
        }
        Ok(Self::from_entries_unchecked(n, entries))
    }

    pub fn determinant(&self) -> RationalFunction {
        let idx: Vec<usize> = (0..self.n).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> RationalFunction {
        match rows.len() {
            0 => RationalFunction::constant(1.0),
            1 => self.entry(rows[0], cols[0]).clone(),
            2 => {
                let a = self.entry(rows[0], cols[0]) * self.entry(rows[1], cols[1]);
                let b = self.entry(rows[0], cols[1]) * self.entry(rows[1], cols[0]);
                &a - &b
            }
            _ => {
                let mut acc = RationalFunction::zero();
                let sub_rows = &rows[1..];
                for (c, &col) in cols.iter().enumerate() {
                    let e = self.entry(rows[0], col);
                    if e.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != col).collect();
                    let t = e * &self.minor_det(sub_rows, &sub_cols);
                    acc = if c % 2 == 0 { &acc + &t } else { &acc - &t };
                }
                acc
            }
        }
    }

    /// Inverse by adjugate over the determinant.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let det = self.determinant();
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let inv_det = det.inv()?;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // adj[i][j] = (-1)^(i+j) * minor(j, i)
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let m = self.minor_det(&rows, &cols);
                let cof = if (i + j) % 2 == 0 { m } else { -&m };
                entries.push(&cof * &inv_det);
            }
        }
        Ok(Self::from_entries_unchecked(n, entries))
    }

    /// Entrywise limit at the origin; fails if any entry has an origin pole.
    pub fn limit_at_zero(&self) -> Result<RMatrix> {
        self.scaled_origin_limit(0)
    }

    /// `max over entries of max(|coeff|)`, used for tolerance scaling.
    pub fn coefficient_scale(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.num().max_abs() / e.den().max_abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// Polynomial helper: `(a s + b)`.
pub fn affine(a: f64, b: f64) -> Polynomial {
    Polynomial::new(vec![b, a])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: &[f64], d: &[f64]) -> RationalFunction {
        RationalFunction::from_coeffs(n, d).unwrap()
    }

    #[test]
    fn eval_lag() {
        let g = TransferMatrix::scalar(rf(&[1.0], &[1.0, 1.0])).unwrap();
        let v = g.eval_at(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v[(0, 0)], Complex64::new(1.0, 0.0));
        let v = g.eval_jw(1.0).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn eval_at_pole_errors() {
        let g = TransferMatrix::scalar(rf(&[1.0], &[0.0, 1.0])).unwrap();
        assert!(matches!(
            g.eval_at(Complex64::new(0.0, 0.0)),
            Err(Error::EvalAtPole(_))
        ));
    }

    #[test]
    fn gains_examples() {
        let g = TransferMatrix::scalar(rf(&[1.0], &[1.0, 1.0])).unwrap().gains();
        assert_eq!(g.static_gain, StaticGain::Finite(RMatrix::from_element(1, 1, 1.0)));
        assert_eq!(g.instantaneous_gain[(0, 0)], 0.0);

        let g = TransferMatrix::scalar(rf(&[2.0, 1.0], &[1.0, 1.0])).unwrap().gains();
        assert_eq!(g.static_gain.finite().unwrap()[(0, 0)], 2.0);
        assert_eq!(g.instantaneous_gain[(0, 0)], 1.0);

        let g = TransferMatrix::scalar(rf(&[1.0], &[0.0, 1.0])).unwrap().gains();
        assert_eq!(g.static_gain, StaticGain::PoleAtOrigin);
        assert_eq!(g.instantaneous_gain[(0, 0)], 0.0);
    }

    #[test]
    fn improper_rejected() {
        let e = TransferMatrix::scalar(rf(&[0.0, 0.0, 1.0], &[1.0, 1.0]));
        assert!(matches!(e, Err(Error::Improper { .. })));
    }

    #[test]
    fn inverse_of_two_by_two() {
        let g = TransferMatrix::from_fn(2, |i, j| {
            if i == j {
                rf(&[1.0], &[1.0, 1.0])
            } else {
                RationalFunction::constant(0.5)
            }
        })
        .unwrap();
        let inv = g.inverse().unwrap();
        let prod = g.mul(&inv).unwrap();
        let at = prod.eval_jw(0.7).unwrap();
        let eye = CMatrix::identity(2, 2);
        assert!((at - eye).norm() < 1e-12);
    }

    #[test]
    fn origin_limit_of_matrix_expression() {
        // (1/s) (1 + 1/s)^{-1} = 1/(s+1) -> 1
        let p = TransferMatrix::scalar(rf(&[1.0], &[0.0, 1.0])).unwrap();
        let y = TransferMatrix::identity(1).add(&p).unwrap();
        let e = p.mul(&y.inverse().unwrap()).unwrap();
        assert_eq!(e.limit_at_zero().unwrap()[(0, 0)], 1.0);
    }
}
