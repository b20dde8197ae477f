//! Stability tests for positive feedback interconnections `[P, C]` of an NI
//! plant and an SNI controller, plus a state-space oracle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_ni, NiVerdict};
use crate::error::{Error, Result};
use crate::realization::{close_loop, AXIS_TOL};
use crate::spectral::{eigenvalues, sigma_min, sym_extremes};
use crate::tfm::{RMatrix, TransferMatrix};

/// Margin for the strict inequalities `lambda_max(.) < 0`.
pub const MARGIN: f64 = 1e-9;
/// Closed-loop eigenvalues with real part at or above `-ORACLE_TOL` are unstable.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Stable,
    Unstable,
    IllPosed,
    /// A sufficient-only test did not apply.
    Inconclusive,
    /// A condition value fell inside the decision margin.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionValue {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub status: Status,
    pub offending_pole: Option<Complex64>,
    pub failed_condition: Option<String>,
    pub conditions: Vec<ConditionValue>,
}

impl StabilityVerdict {
    fn new(status: Status) -> Self {
        StabilityVerdict {
            status,
            offending_pole: None,
            failed_condition: None,
            conditions: Vec::new(),
        }
    }
}

/// Scaling matrix for [`lemma4_check`]: symmetric, negative definite and with
/// `lambda_max(P(inf) psi) < 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiParameter {
    pub psi: RMatrix,
}

impl PsiParameter {
    pub fn new(psi: RMatrix, p_inf: &RMatrix) -> Result<Self> {
        if psi.nrows() != p_inf.nrows() || !psi.is_square() {
            return Err(Error::PsiInvalid("dimension does not match the plant".into()));
        }
        let scale = psi.norm().max(1.0);
        if (&psi - psi.transpose()).norm() > 1e-12 * scale {
            return Err(Error::PsiInvalid("psi is not symmetric".into()));
        }
        let (hi, _) = sym_extremes(&psi);
        if hi >= 0.0 {
            return Err(Error::PsiInvalid(format!("psi is not negative definite (max eigenvalue {hi})")));
        }
        let l = lambda_bar(&(p_inf * &psi));
        if l >= 1.0 {
            return Err(Error::PsiInvalid(format!("lambda_max(P(inf) psi) = {l} is not below 1")));
        }
        Ok(PsiParameter { psi })
    }

    /// `-c I` with `c = 0.5 / (1 + max(0, -lambda_min(P(inf))))`.
    pub fn default_for(p_inf: &RMatrix) -> Self {
        let n = p_inf.nrows();
        let (_, lo) = sym_extremes(p_inf);
        let c = 0.5 / (1.0 + (-lo).max(0.0));
        PsiParameter {
            psi: RMatrix::identity(n, n) * -c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    pub tau: f64,
    /// `det(tau P(inf) C(inf) - I)`, `det(tau P(0) C(inf) - I)`, `det(tau P(0) C(0) - I)`
    pub family_b: [f64; 3],
    /// `det(tau P(inf) C(inf) - I)`, `det(tau P(inf) C(0) - I)`, `det(tau P(0) C(0) - I)`
    pub family_c: [f64; 3],
    /// Status of `[tau P, C]` under the [`lemma2_check`] conditions.
    pub status_a: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub tau_grid: Vec<f64>,
    pub points: Vec<TauPoint>,
    pub statement_a: bool,
    pub statement_b: bool,
    pub statement_c: bool,
    /// All determinants in the families are nonzero over the grid.
    pub equivalent_verdict: bool,
    pub statements_agree: bool,
}

/// Largest real part of the spectrum.
pub fn lambda_bar(m: &RMatrix) -> f64 {
    eigenvalues(m).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn identity(n: usize) -> RMatrix {
    RMatrix::identity(n, n)
}

pub fn oracle_stability(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    let cl = match close_loop(p, c) {
        Ok(cl) => cl,
        Err(Error::IllPosed) => {
            let mut v = StabilityVerdict::new(Status::IllPosed);
            v.failed_condition = Some("well-posedness".into());
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    let worst = cl
        .eigenvalues()
        .into_iter()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs()).reverse()));
    let mut v = StabilityVerdict::new(Status::Stable);
    if let Some(z) = worst {
        v.conditions.push(ConditionValue {
            label: "max_real_pole".into(),
            value: z.re,
        });
        if z.re >= -ORACLE_TOL {
            v.status = Status::Unstable;
            v.offending_pole = Some(z);
        }
    }
    Ok(v)
}

fn require_plant(p: &TransferMatrix, allow_origin: bool) -> Result<()> {
    let cls = classify_ni(p);
    if !cls.verdict.is_ni() {
        return Err(Error::PreconditionViolated(format!("P is not NI: {:?}", cls.witness)));
    }
    if !allow_origin && p.origin_pole_order() > 0 {
        return Err(Error::PreconditionViolated("P has a pole at the origin".into()));
    }
    Ok(())
}

fn require_controller(c: &TransferMatrix) -> Result<()> {
    let cls = classify_ni(c);
    if cls.verdict != NiVerdict::Sni {
        return Err(Error::PreconditionViolated(format!(
            "C is not SNI (verdict {:?}, witness {:?})",
            cls.verdict, cls.witness
        )));
    }
    Ok(())
}

fn check_dims(p: &TransferMatrix, c: &TransferMatrix) -> Result<()> {
    if p.dim() != c.dim() {
        return Err(Error::DimensionMismatch(format!("P is {}, C is {}", p.dim(), c.dim())));
    }
    Ok(())
}

/// Evaluates a list of `lambda_max(.) < 0` conditions in order; `None` marks a
/// condition whose matrix could not be formed.
fn decide(
    p: &TransferMatrix,
    c: &TransferMatrix,
    cond_a: f64,
    rest: Vec<(&str, Option<RMatrix>)>,
) -> StabilityVerdict {
    let mut v = StabilityVerdict::new(Status::Stable);
    v.conditions.push(ConditionValue {
        label: "a".into(),
        value: cond_a,
    });
    if cond_a <= crate::realization::WELL_POSED_TOL {
        v.status = Status::IllPosed;
        v.failed_condition = Some("a".into());
        return v;
    }
    for (label, m) in rest {
        let Some(m) = m else {
            v.status = Status::Boundary;
            v.failed_condition = Some(label.into());
            return v;
        };
        let l = lambda_bar(&m);
        v.conditions.push(ConditionValue {
            label: label.into(),
            value: l,
        });
        if v.status != Status::Stable {
            continue;
        }
        let margin = MARGIN * (1.0 + m.norm());
        if l >= margin {
            v.status = Status::Unstable;
            v.failed_condition = Some(label.into());
        } else if l > -margin {
            v.status = Status::Boundary;
            v.failed_condition = Some(label.into());
        }
    }
    if v.status == Status::Unstable {
        v.offending_pole = oracle_stability(p, c).ok().and_then(|o| o.offending_pole);
    }
    v
}

/// Relative well-posedness measure `sigma_min(I - P(inf) C(inf)) / (1 + |P(inf)||C(inf)|)`.
fn condition_a(p_inf: &RMatrix, c_inf: &RMatrix) -> f64 {
    let n = p_inf.nrows();
    sigma_min(&(identity(n) - p_inf * c_inf)) / (1.0 + p_inf.norm() * c_inf.norm())
}

struct Gains {
    p0: RMatrix,
    pinf: RMatrix,
    c0: RMatrix,
    cinf: RMatrix,
}

fn gains(p: &TransferMatrix, c: &TransferMatrix) -> Result<Gains> {
    let p0 = p
        .static_gain()
        .ok_or_else(|| Error::PreconditionViolated("P has a pole at the origin".into()))?;
    let c0 = c
        .static_gain()
        .ok_or_else(|| Error::PreconditionViolated("C has a pole at the origin".into()))?;
    Ok(Gains {
        p0,
        pinf: p.instantaneous_gain(),
        c0,
        cinf: c.instantaneous_gain(),
    })
}

pub fn lemma2_check(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    check_dims(p, c)?;
    require_plant(p, false)?;
    require_controller(c)?;
    Ok(lemma2_unchecked(p, c)?)
}

/// [`lemma2_check`] without the NI/SNI membership checks.
pub fn lemma2_unchecked(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    let g = gains(p, c)?;
    let i = identity(p.dim());
    let a = condition_a(&g.pinf, &g.cinf);
    let r_inf = (&i - &g.pinf * &g.cinf).try_inverse();
    let b = r_inf.map(|r| r * (&g.pinf * &g.c0 - &i));
    let cm = (&i - &g.c0 * &g.pinf)
        .try_inverse()
        .map(|r| r * (&g.c0 * &g.p0 - &i));
    Ok(decide(p, c, a, vec![("b", b), ("c", cm)]))
}

pub fn lemma3_check(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    check_dims(p, c)?;
    require_plant(p, false)?;
    require_controller(c)?;
    lemma3_unchecked(p, c)
}

pub fn lemma3_unchecked(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    let g = gains(p, c)?;
    let i = identity(p.dim());
    let a = condition_a(&g.pinf, &g.cinf);
    let b = (&i - &g.pinf * &g.cinf)
        .try_inverse()
        .map(|r| (&g.p0 * &g.cinf - &i) * r);
    let cm = (&i - &g.cinf * &g.p0)
        .try_inverse()
        .map(|r| (&g.c0 * &g.p0 - &i) * r);
    Ok(decide(p, c, a, vec![("b", b), ("c", cm)]))
}

/// `lim_{s->0} (I - psi P(inf)) (I - C(s) P(inf))^{-1} (C(s) P(s) - I) (I - psi P(s))^{-1}`,
/// evaluated by exact rational reduction.
pub fn lemma4_limit(p: &TransferMatrix, c: &TransferMatrix, psi: &PsiParameter) -> Result<RMatrix> {
    let n = p.dim();
    let i = identity(n);
    let eye = TransferMatrix::identity(n);
    let pinf = p.instantaneous_gain();
    let left = &i - &psi.psi * &pinf;
    let m1 = eye.sub(&c.mul(&TransferMatrix::constant(&pinf))?)?.inverse()?;
    let m2 = c.mul(p)?.sub(&eye)?;
    let m3 = eye.sub(&TransferMatrix::constant(&psi.psi).mul(p)?)?.inverse()?;
    let expr = TransferMatrix::constant(&left).mul(&m1)?.mul(&m2)?.mul(&m3)?;
    expr.reduced().limit_at_zero()
}

pub fn lemma4_check(p: &TransferMatrix, c: &TransferMatrix, psi: Option<&PsiParameter>) -> Result<StabilityVerdict> {
    check_dims(p, c)?;
    require_plant(p, true)?;
    require_controller(c)?;
    lemma4_unchecked(p, c, psi)
}

pub fn lemma4_unchecked(p: &TransferMatrix, c: &TransferMatrix, psi: Option<&PsiParameter>) -> Result<StabilityVerdict> {
    let n = p.dim();
    let i = identity(n);
    let pinf = p.instantaneous_gain();
    let psi = match psi {
        Some(given) => PsiParameter::new(given.psi.clone(), &pinf)?,
        None => PsiParameter::default_for(&pinf),
    };
    let cinf = c.instantaneous_gain();
    let c0 = c
        .static_gain()
        .ok_or_else(|| Error::PreconditionViolated("C has a pole at the origin".into()))?;
    let a = condition_a(&pinf, &cinf);
    let b = (&i - &pinf * &cinf).try_inverse().map(|r| r * (&pinf * &c0 - &i));
    let lim = if a > crate::realization::WELL_POSED_TOL {
        Some(lemma4_limit(p, c, &psi)?)
    } else {
        None
    };
    Ok(decide(p, c, a, vec![("b", b), ("c", lim)]))
}

/// `det(tau M - I)`
fn det_family(m: &RMatrix, tau: f64) -> f64 {
    let n = m.nrows();
    (m * tau - identity(n)).determinant()
}

/// Values of `tau` in `(0, 1]` where `det(tau M - I)` vanishes, i.e. `1 / lambda`
/// for real eigenvalues `lambda >= 1` of `M`.
fn crossings(m: &RMatrix) -> Vec<f64> {
    eigenvalues(m)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.norm()) && z.re >= 1.0 - 1e-12)
        .map(|z| (1.0 / z.re).min(1.0))
        .collect()
}

pub fn theorem1_check(p: &TransferMatrix, c: &TransferMatrix) -> Result<HomotopyReport> {
    check_dims(p, c)?;
    require_plant(p, false)?;
    require_controller(c)?;
    theorem1_unchecked(p, c)
}

pub fn theorem1_unchecked(p: &TransferMatrix, c: &TransferMatrix) -> Result<HomotopyReport> {
    let g = gains(p, c)?;
    let fam_b = [&g.pinf * &g.cinf, &g.p0 * &g.cinf, &g.p0 * &g.c0];
    let fam_c = [&g.pinf * &g.cinf, &g.pinf * &g.c0, &g.p0 * &g.c0];

    let mut taus: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let mut hits_b = false;
    let mut hits_c = false;
    for m in &fam_b {
        let r = crossings(m);
        hits_b |= !r.is_empty();
        taus.extend(r);
    }
    for m in &fam_c {
        let r = crossings(m);
        hits_c |= !r.is_empty();
        taus.extend(r);
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let points: Vec<TauPoint> = taus
        .par_iter()
        .map(|&tau| {
            let tp = p.scale(tau);
            let status_a = lemma2_unchecked(&tp, c).map_or(Status::Boundary, |v| v.status);
            TauPoint {
                tau,
                family_b: [
                    det_family(&fam_b[0], tau),
                    det_family(&fam_b[1], tau),
                    det_family(&fam_b[2], tau),
                ],
                family_c: [
                    det_family(&fam_c[0], tau),
                    det_family(&fam_c[1], tau),
                    det_family(&fam_c[2], tau),
                ],
                status_a,
            }
        })
        .collect();
    let small = |d: &f64| d.abs() < 1e-9;
    let statement_b = !hits_b && !points.iter().any(|pt| pt.family_b.iter().any(small));
    let statement_c = !hits_c && !points.iter().any(|pt| pt.family_c.iter().any(small));
    let statement_a = points.iter().all(|pt| pt.status_a == Status::Stable);
    Ok(HomotopyReport {
        tau_grid: taus,
        points,
        statement_a,
        statement_b,
        statement_c,
        equivalent_verdict: statement_b && statement_c,
        statements_agree: statement_a == statement_b && statement_b == statement_c,
    })
}

pub fn theorem2_check(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    check_dims(p, c)?;
    require_plant(p, false)?;
    require_controller(c)?;
    theorem2_unchecked(p, c)
}

pub fn theorem2_unchecked(p: &TransferMatrix, c: &TransferMatrix) -> Result<StabilityVerdict> {
    let g = gains(p, c)?;
    let psd = |m: &RMatrix| sym_extremes(m).1 >= -MARGIN * (1.0 + m.norm());
    if !psd(&g.pinf) && !psd(&g.cinf) {
        return Err(Error::PreconditionViolated(
            "neither P(inf) nor C(inf) is positive semidefinite".into(),
        ));
    }
    let l0 = lambda_bar(&(&g.p0 * &g.c0));
    let linf = lambda_bar(&(&g.pinf * &g.cinf));
    let mut v = StabilityVerdict::new(Status::Stable);
    v.conditions = vec![
        ConditionValue {
            label: "lambda_max(P(0)C(0))".into(),
            value: l0,
        },
        ConditionValue {
            label: "lambda_max(P(inf)C(inf))".into(),
            value: linf,
        },
    ];
    if l0 >= 1.0 - MARGIN {
        v.status = Status::Inconclusive;
        v.failed_condition = Some("static".into());
    } else if linf >= 1.0 - MARGIN {
        v.status = Status::Inconclusive;
        v.failed_condition = Some("instantaneous".into());
    }
    Ok(v)
}

/// True when the system has no pole with real part at or above `-AXIS_TOL`.
pub fn is_stable(g: &TransferMatrix) -> bool {
    crate::realization::poles(g)
        .iter()
        .all(|p| p.location.re < -AXIS_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    fn value(v: &StabilityVerdict, label: &str) -> f64 {
        v.conditions.iter().find(|c| c.label == label).unwrap().value
    }

    #[test]
    fn oracle_examples() {
        let v = oracle_stability(&scalar(&[1.0], &[1.0, 1.0]), &scalar(&[-1.0], &[1.0])).unwrap();
        assert_eq!(v.status, Status::Stable);
        let v = oracle_stability(&scalar(&[2.0], &[1.0, 1.0]), &scalar(&[1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(v.status, Status::Unstable);
        assert!((v.offending_pole.unwrap().re - (2f64.sqrt() - 1.0)).abs() < 1e-10);
        let v = oracle_stability(&scalar(&[1.0], &[1.0]), &scalar(&[1.0], &[1.0])).unwrap();
        assert_eq!(v.status, Status::IllPosed);
    }

    #[test]
    fn lemma_conditions_on_lag_pair() {
        let p = scalar(&[1.0], &[1.0, 1.0]);
        let c = scalar(&[-1.0, -1.0], &[2.0, 1.0]);
        let v2 = lemma2_check(&p, &c).unwrap();
        assert_eq!(v2.status, Status::Stable);
        assert!((value(&v2, "b") + 1.0).abs() < 1e-12);
        assert!((value(&v2, "c") + 1.5).abs() < 1e-12);
        let v3 = lemma3_check(&p, &c).unwrap();
        assert_eq!(v3.status, Status::Stable);
        assert!((value(&v3, "b") + 2.0).abs() < 1e-12);
        assert!((value(&v3, "c") + 0.75).abs() < 1e-12);
    }

    #[test]
    fn lemma4_symbolic_limit() {
        let p = scalar(&[1.0], &[0.0, 1.0]);
        let c = scalar(&[-1.0, -2.0], &[1.0, 1.0]);
        let psi = PsiParameter::new(RMatrix::from_element(1, 1, -1.0), &p.instantaneous_gain()).unwrap();
        let l = lemma4_limit(&p, &c, &psi).unwrap();
        assert_eq!(l[(0, 0)], -1.0);
        assert_eq!(lemma4_check(&p, &c, Some(&psi)).unwrap().status, Status::Stable);
    }

    #[test]
    fn psi_validation() {
        let pinf = RMatrix::from_element(1, 1, 0.0);
        assert!(PsiParameter::new(RMatrix::from_element(1, 1, 1.0), &pinf).is_err());
        let pinf = RMatrix::from_element(1, 1, -4.0);
        assert!(PsiParameter::new(RMatrix::from_element(1, 1, -1.0), &pinf).is_err());
        let d = PsiParameter::default_for(&pinf);
        assert!(PsiParameter::new(d.psi, &pinf).is_ok());
    }

    #[test]
    fn homotopy_detects_crossing() {
        let r = theorem1_check(&scalar(&[2.0], &[1.0, 1.0]), &scalar(&[1.0], &[1.0, 1.0])).unwrap();
        assert!(!r.equivalent_verdict);
        assert!(r.statements_agree);
        assert!(r.tau_grid.contains(&0.5));
    }

    #[test]
    fn theorem2_inconclusive_at_unit_gain() {
        let v = theorem2_check(&scalar(&[2.0], &[1.0, 1.0]), &scalar(&[1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
    }
}
