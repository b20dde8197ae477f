//! Scalar real-rational functions `num(s) / den(s)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Relative remainder tolerance used when extracting common factors.
pub const GCD_TOL: f64 = 1e-9;

/// `num / den` with a monic denominator and no common power of `s`.
#[derive(Clone, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Normalizes without attempting a general gcd: common `s^k` factors are
    /// stripped and the denominator is made monic.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if !num.is_finite() || !den.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return RationalFunction {
                num,
                den: Polynomial::one(),
            };
        }
        let k = num.valuation().min(den.valuation());
        let (num, den) = if k > 0 {
            (num.shift_down(k), den.shift_down(k))
        } else {
            (num, den)
        };
        // Divide rather than scale by 1/l so the leading coefficient is exactly 1
        // and renormalizing is a no-op.
        let l = den.leading();
        let div = |p: &Polynomial| Polynomial::new(p.coeffs().iter().map(|c| c / l).collect());
        RationalFunction {
            num: div(&num),
            den: div(&den),
        }
    }

    /// Builds from ascending coefficient lists and cancels common factors.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Ok(Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))?.reduced())
    }

    pub fn constant(c: f64) -> Self {
        Self::normalized(Polynomial::constant(c), Polynomial::one())
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self::normalized(p, Polynomial::one())
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.degree() < self.den.degree()
    }

    /// Cancels the numerically detected gcd of numerator and denominator.
    /// A candidate factor is accepted only if it divides both with a
    /// remainder below [`GCD_TOL`].
    pub fn reduced(&self) -> Self {
        if self.num.is_zero() || self.den.degree() < 1 || self.num.degree() < 1 {
            return self.clone();
        }
        let g = self.num.gcd(&self.den, GCD_TOL);
        if g.degree() < 1 {
            return self.clone();
        }
        let (qn, rn) = self.num.div_rem(&g);
        let (qd, rd) = self.den.div_rem(&g);
        if rn.max_abs() > GCD_TOL * self.num.max_abs() || rd.max_abs() > GCD_TOL * self.den.max_abs() {
            return self.clone();
        }
        Self::normalized(qn, qd)
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval_c(s);
        if d.norm() <= 1e-12 * self.den.abs_eval(s) {
            return Err(Error::EvalAtPole(s));
        }
        Ok(self.num.eval_c(s) / d)
    }

    /// Value as `s -> infinity` (zero when strictly proper). Requires properness.
    pub fn at_infinity(&self) -> f64 {
        if self.num.degree() == self.den.degree() {
            self.num.leading() / self.den.leading()
        } else {
            0.0
        }
    }

    /// `G - G(inf)` for a proper `G`.
    pub fn strictly_proper_part(&self) -> Self {
        let d = self.at_infinity();
        if d == 0.0 {
            return self.clone();
        }
        Self::normalized(&self.num - &self.den.scale(d), self.den.clone())
    }

    /// Order of the pole at the origin (0 when there is none).
    pub fn origin_pole_order(&self) -> usize {
        if self.num.is_zero() {
            return 0;
        }
        self.den.valuation().saturating_sub(self.num.valuation())
    }

    /// `lim_{s->0} s^k G(s)`.
    pub fn scaled_origin_limit(&self, k: usize) -> Result<f64> {
        if self.num.is_zero() {
            return Ok(0.0);
        }
        let vn = self.num.valuation() + k;
        let vd = self.den.valuation();
        match vn.cmp(&vd) {
            std::cmp::Ordering::Greater => Ok(0.0),
            std::cmp::Ordering::Equal => Ok(self.num.coeff(self.num.valuation()) / self.den.coeff(vd)),
            std::cmp::Ordering::Less => Err(Error::LimitDiverges {
                k,
                order: vd - self.num.valuation(),
            }),
        }
    }

    /// `lim_{s->0} G(s)` for a function analytic at the origin.
    pub fn limit_at_zero(&self) -> Result<f64> {
        self.scaled_origin_limit(0)
    }

    /// `G(-s)`
    pub fn reflect(&self) -> Self {
        Self::normalized(self.num.reflect(), self.den.reflect())
    }

    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::normalized(n, &self.den * &self.den)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::normalized(self.num.scale(k), self.den.clone())
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        Self::normalized(&self.num * p, self.den.clone())
    }

    /// Pole order at `z` (non-positive values mean no pole), from root
    /// multiplicities of numerator and denominator.
    pub fn pole_order_at(&self, z: Complex64, tol: f64) -> isize {
        if self.num.is_zero() {
            return 0;
        }
        let md = self.den.root_multiplicity(z, tol) as isize;
        let mn = self.num.root_multiplicity(z, tol) as isize;
        md - mn
    }

    /// `lim_{s->z} (s - z) G(s)` for a pole of order at most one at `z`.
    pub fn residue_at(&self, z: Complex64, tol: f64) -> Complex64 {
        if self.num.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let md = self.den.root_multiplicity(z, tol);
        let mn = self.num.root_multiplicity(z, tol);
        if md != mn + 1 {
            return Complex64::new(0.0, 0.0);
        }
        let tn = self.num.taylor_at(z);
        let td = self.den.taylor_at(z);
        tn[mn] / td[md]
    }

    pub fn inv(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::Singular);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::normalized(&self.num + &rhs.num, self.den.clone());
        }
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::normalized(n, &self.den * &rhs.den)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RationalFunction {
    type Output = Result<RationalFunction>;
    fn div(self, rhs: &RationalFunction) -> Result<RationalFunction> {
        Ok(self * &rhs.inv()?)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        self.scale(-1.0)
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
