//! Independent re-check of a synthesized destabilizer.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::synth::{CounterexampleRecipe, RecipeKind};
use super::{plant_in_class, UncertaintyClass};
use crate::classify::classify_ni;
use crate::error::{Error, Result};
use crate::spectral::{sigma_min, sigma_min_c};
use crate::stability::{oracle_stability, Status};
use crate::tfm::{CMatrix, RMatrix, TransferMatrix};

/// Pinned-singularity threshold.
pub const PIN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub in_class: bool,
    pub pin_label: String,
    pub pin_value: f64,
    pub oracle_status: Status,
    pub offending_pole: Option<Complex64>,
}

fn fail(clause: &str, detail: impl std::fmt::Display) -> Error {
    Error::VerificationFailed(format!("{clause}: {detail}"))
}

fn scale(m: &CMatrix) -> f64 {
    m.norm().max(1.0)
}

fn static_pin(p: &RMatrix, c: &RMatrix) -> f64 {
    let n = p.nrows();
    sigma_min(&(RMatrix::identity(n, n) - p * c)) / (1.0 + p.norm() * c.norm())
}

fn pin(rec: &CounterexampleRecipe, c: &TransferMatrix) -> Result<(String, f64)> {
    let p = &rec.plant;
    let n = c.dim();
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| fail("pin", format!("recipe lacks {what}")));
    if rec.recipe_kind.frequency_pinned() {
        let omega0 = need(rec.omega0, "omega0")?;
        let x = rec.x.as_ref().ok_or_else(|| fail("pin", "recipe lacks x"))?;
        let (alpha, beta) = match (&rec.alpha, &rec.beta) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(fail("pin", "recipe lacks alpha/beta")),
        };
        let f = alpha.map(|a| Complex64::new(0.0, a * omega0)) + beta.map(|b| Complex64::new(b, 0.0));
        let miss = (&f - x).norm();
        if miss >= 1e-10 {
            return Err(fail("pin", format!("|f(j omega0) - x| = {miss:e}")));
        }
    }
    let cj = |w: f64| c.eval_jw(w).map_err(|e| fail("pin", e));
    Ok(match rec.recipe_kind {
        RecipeKind::CatalogSecondOrder => {
            let w = rec.omega0.unwrap_or_default();
            let m = CMatrix::identity(n, n) - p.eval_jw(w).map_err(|e| fail("pin", e))? * cj(w)?;
            ("sigma_min(I - P(jw0)C(jw0))".into(), sigma_min_c(&m))
        }
        RecipeKind::ResonantRankOneEps => {
            let w = rec.omega0.unwrap_or_default();
            let m = cj(w)?;
            let x = rec.x.as_ref().expect("checked above");
            let z = (x.adjoint() * &m * x)[(0, 0)];
            ("|x*C(jw0)x|".into(), z.norm() / scale(&m))
        }
        RecipeKind::ResonantPlusLossless => {
            let w = rec.omega0.unwrap_or_default();
            let m = cj(w)?;
            let x = rec.x.as_ref().expect("checked above");
            ("|t1*C(jw0)|".into(), (x.adjoint() * &m).norm() / scale(&m))
        }
        RecipeKind::SchurConstant | RecipeKind::SchurFirstOrder | RecipeKind::InverseStaticGain => {
            let p0 = p.static_gain().ok_or_else(|| fail("pin", "plant has an origin pole"))?;
            let c0 = c.static_gain().ok_or_else(|| fail("pin", "controller has an origin pole"))?;
            ("sigma_min(I - P(0)C(0))".into(), static_pin(&p0, &c0))
        }
        RecipeKind::InstGainLag => (
            "sigma_min(I - P(inf)C(inf))".into(),
            static_pin(&p.instantaneous_gain(), &c.instantaneous_gain()),
        ),
        RecipeKind::SchurIntegrator => {
            let m = rec.m.as_ref().ok_or_else(|| fail("pin", "recipe lacks M"))?;
            let e0 = rec.e0.as_ref().ok_or_else(|| fail("pin", "recipe lacks E0"))?;
            let me = (m * e0).norm();
            if me >= 1.0 {
                return Err(fail("pin", format!("|M E(0)| = {me} >= 1")));
            }
            let c0 = c.static_gain().ok_or_else(|| fail("pin", "controller has an origin pole"))?;
            (
                "|C(0) M| / |M|".into(),
                (&c0 * m).norm() / (m.norm() * c0.norm().max(1.0)),
            )
        }
    })
}

fn interval_ok(rec: &CounterexampleRecipe) -> std::result::Result<(), String> {
    let Some((lo, hi)) = rec.interval else { return Ok(()) };
    let v = match rec.recipe_kind {
        RecipeKind::ResonantRankOneEps => rec.epsilon,
        _ => rec.catalog_param.map(|p| p.value()),
    };
    match v {
        Some(v) if v > lo && v < hi => Ok(()),
        Some(v) => Err(format!("parameter {v} outside ({lo}, {hi})")),
        None => Ok(()),
    }
}

pub fn verify_counterexample(
    rec: &CounterexampleRecipe,
    c: &TransferMatrix,
    cls: &UncertaintyClass,
) -> Result<VerificationReport> {
    if rec.plant.dim() != c.dim() {
        return Err(fail("class membership", "dimension mismatch"));
    }
    plant_in_class(&rec.plant, cls, &classify_ni(&rec.plant)).map_err(|why| fail("class membership", why))?;
    interval_ok(rec).map_err(|why| fail("class membership", why))?;

    let (pin_label, pin_value) = pin(rec, c)?;
    if !(pin_value < PIN_TOL) {
        return Err(fail("pin", format!("{pin_label} = {pin_value:e}")));
    }

    let oracle = oracle_stability(&rec.plant, c)?;
    if oracle.status == Status::Stable {
        return Err(fail("oracle", "closed loop is stable"));
    }
    Ok(VerificationReport {
        in_class: true,
        pin_label,
        pin_value,
        oracle_status: oracle.status,
        offending_pole: oracle.offending_pole,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::converse::{necessity_check, synthesize_destabilizer, ClassKind};
    use crate::rational::RationalFunction;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    fn attack(c: &TransferMatrix, cls: &UncertaintyClass) -> CounterexampleRecipe {
        let v = necessity_check(c, cls).unwrap();
        synthesize_destabilizer(c, cls, &v).unwrap()
    }

    #[test]
    fn worked_examples_verify() {
        let cases = [
            (scalar(&[2.0], &[1.0]), UncertaintyClass::unbounded(ClassKind::SniInstNonneg)),
            (
                scalar(&[-1.0, -2.0], &[1.0, 1.0]),
                UncertaintyClass::unbounded(ClassKind::NiNoDoubleOriginPole),
            ),
            (
                scalar(&[0.0, 1.0], &[1.0, 1.0]),
                UncertaintyClass::bounded(ClassKind::N0DcBounded, 1.0).unwrap(),
            ),
            (scalar(&[0.0, 1.0], &[1.0, 1.0]), UncertaintyClass::unbounded(ClassKind::SniInstNonneg)),
        ];
        for (c, cls) in cases {
            let rec = attack(&c, &cls);
            let rep = verify_counterexample(&rec, &c, &cls).unwrap();
            assert_ne!(rep.oracle_status, Status::Stable);
        }
    }

    #[test]
    fn inverse_static_gain_pole_at_origin() {
        let c = scalar(&[-1.0, -2.0], &[1.0, 1.0]);
        let cls = UncertaintyClass::unbounded(ClassKind::NiNoDoubleOriginPole);
        let rep = verify_counterexample(&attack(&c, &cls), &c, &cls).unwrap();
        assert!(rep.offending_pole.unwrap().norm() < 1e-8);
    }

    #[test]
    fn shifted_frequency_breaks_pin() {
        let c = scalar(&[0.0, 1.0], &[1.0, 1.0]);
        let cls = UncertaintyClass::bounded(ClassKind::N0DcBounded, 1.0).unwrap();
        let mut rec = attack(&c, &cls);
        let w = rec.omega0.unwrap() * 1.1;
        rec.omega0 = Some(w);
        rec.x = Some(
            rec.alpha.as_ref().unwrap().map(|a| Complex64::new(0.0, a * w))
                + rec.beta.as_ref().unwrap().map(|b| Complex64::new(b, 0.0)),
        );
        let err = verify_counterexample(&rec, &c, &cls).unwrap_err();
        assert!(matches!(err, Error::VerificationFailed(ref m) if m.starts_with("pin")), "{err}");
    }
}
