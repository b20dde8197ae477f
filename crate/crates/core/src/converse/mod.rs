//! Controller-side conditions for robust stability against classes of NI
//! uncertainty, and construction of in-class destabilizing plants when a
//! condition fails.

mod sufficiency;
mod synth;
mod verify;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_ni, classify_ni_with, ClassifyOptions, NiClassification, NiVerdict};
use crate::error::{Error, Result};
use crate::realization::{poles, AXIS_TOL};
use crate::spectral::{hermitian_min, normalize_phase, sym_eig_desc, sym_extremes, symmetrize};
use crate::stability::MARGIN;
use crate::tfm::TransferMatrix;

pub use sufficiency::{sufficiency_check, SufficiencyReport};
pub use synth::{
    catalog_p, positive_real_term, pr_factor, resonant_plus_lossless, synthesize_destabilizer, CatalogParam,
    CounterexampleRecipe, PositiveRealFactor,
    RecipeKind,
};
pub use verify::{verify_counterexample, VerificationReport, PIN_TOL};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    /// Strictly proper NI plants.
    StrictlyProperNI,
    /// NI plants without double poles at the origin.
    #[serde(rename = "NI_noDoubleOriginPole")]
    NiNoDoubleOriginPole,
    /// NI, no origin poles, `P(0) <= gamma I`.
    #[serde(rename = "N0_dcBounded")]
    N0DcBounded,
    /// NI, no origin poles, `0 <= P(0) <= gamma I`.
    #[serde(rename = "N0_dcBoundedNonneg")]
    N0DcBoundedNonneg,
    /// NI, no origin poles, `P(inf) >= 0`, `P(0) < gamma I`.
    #[serde(rename = "N0_instNonneg_dcStrict")]
    N0InstNonnegDcStrict,
    /// SNI with `P(inf) >= 0`.
    #[serde(rename = "SNI_instNonneg")]
    SniInstNonneg,
    /// SNI with `P(inf) >= 0` and `P(0) <= gamma I`.
    #[serde(rename = "SNI_instNonneg_dcBounded")]
    SniInstNonnegDcBounded,
    /// SNI with `P(0) <= gamma I`.
    #[serde(rename = "SNI_dcBounded")]
    SniDcBounded,
    /// SNI with `0 <= P(0) <= gamma I`.
    #[serde(rename = "SNI_dcBoundedNonneg")]
    SniDcBoundedNonneg,
}

impl ClassKind {
    pub const ALL: [ClassKind; 9] = [
        ClassKind::StrictlyProperNI,
        ClassKind::NiNoDoubleOriginPole,
        ClassKind::N0DcBounded,
        ClassKind::N0DcBoundedNonneg,
        ClassKind::N0InstNonnegDcStrict,
        ClassKind::SniInstNonneg,
        ClassKind::SniInstNonnegDcBounded,
        ClassKind::SniDcBounded,
        ClassKind::SniDcBoundedNonneg,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            ClassKind::StrictlyProperNI => "strictly-proper-ni",
            ClassKind::NiNoDoubleOriginPole => "ni-no-double-origin",
            ClassKind::N0DcBounded => "n0-dc-bounded",
            ClassKind::N0DcBoundedNonneg => "n0-dc-bounded-nonneg",
            ClassKind::N0InstNonnegDcStrict => "n0-inst-nonneg-dc-strict",
            ClassKind::SniInstNonneg => "sni-inst-nonneg",
            ClassKind::SniInstNonnegDcBounded => "sni-inst-nonneg-dc-bounded",
            ClassKind::SniDcBounded => "sni-dc-bounded",
            ClassKind::SniDcBoundedNonneg => "sni-dc-bounded-nonneg",
        }
    }

    pub fn needs_gamma(self) -> bool {
        !matches!(
            self,
            ClassKind::StrictlyProperNI | ClassKind::NiNoDoubleOriginPole | ClassKind::SniInstNonneg
        )
    }

    /// Plants in the class are SNI (and hence stable).
    pub fn sni_plants(self) -> bool {
        matches!(
            self,
            ClassKind::SniInstNonneg
                | ClassKind::SniInstNonnegDcBounded
                | ClassKind::SniDcBounded
                | ClassKind::SniDcBoundedNonneg
        )
    }

    pub fn inst_nonneg(self) -> bool {
        matches!(
            self,
            ClassKind::N0InstNonnegDcStrict | ClassKind::SniInstNonneg | ClassKind::SniInstNonnegDcBounded
        )
    }

    pub fn dc_nonneg(self) -> bool {
        matches!(self, ClassKind::N0DcBoundedNonneg | ClassKind::SniDcBoundedNonneg)
    }

    /// Largest allowed origin-pole order of plants.
    pub fn max_origin_order(self) -> usize {
        match self {
            ClassKind::StrictlyProperNI => 2,
            ClassKind::NiNoDoubleOriginPole => 1,
            _ => 0,
        }
    }

    /// Destabilizers built from a frequency witness must have `P(inf) = 0`
    /// or `P(inf) >= 0`, which forces a real witness direction.
    pub fn needs_real_witness(self) -> bool {
        self.inst_nonneg() || matches!(self, ClassKind::StrictlyProperNI | ClassKind::NiNoDoubleOriginPole)
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ClassKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassKind::ALL
            .iter()
            .copied()
            .find(|k| k.cli_name() == s)
            .ok_or_else(|| Error::InvalidClass(format!("unknown class '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyClass {
    pub kind: ClassKind,
    pub gamma: Option<f64>,
}

impl UncertaintyClass {
    pub fn new(kind: ClassKind, gamma: Option<f64>) -> Result<Self> {
        match (kind.needs_gamma(), gamma) {
            (true, None) => Err(Error::InvalidClass(format!("{kind} requires gamma"))),
            (false, Some(_)) => Err(Error::InvalidClass(format!("{kind} takes no gamma"))),
            (_, Some(g)) if !(g > 0.0 && g.is_finite()) => {
                Err(Error::InvalidClass(format!("gamma must be positive, got {g}")))
            }
            _ => Ok(UncertaintyClass { kind, gamma }),
        }
    }

    pub fn unbounded(kind: ClassKind) -> Self {
        Self::new(kind, None).expect("class takes no gamma")
    }

    pub fn bounded(kind: ClassKind, gamma: f64) -> Result<Self> {
        Self::new(kind, Some(gamma))
    }

    /// Whether `p` belongs to the class; on failure, the reason.
    pub fn contains(&self, p: &TransferMatrix) -> std::result::Result<(), String> {
        plant_in_class(p, self, &classify_ni(p))
    }
}

/// Class membership given a precomputed classification of `p`.
pub fn plant_in_class(
    p: &TransferMatrix,
    cls: &UncertaintyClass,
    c: &NiClassification,
) -> std::result::Result<(), String> {
    let kind = cls.kind;
    if kind.sni_plants() {
        if c.verdict != NiVerdict::Sni {
            return Err(format!("plant is not SNI (verdict {:?})", c.verdict));
        }
    } else if !c.verdict.is_ni() {
        return Err(format!("plant is not NI: {:?}", c.witness));
    }
    if kind == ClassKind::StrictlyProperNI && !p.is_strictly_proper() {
        return Err("plant is not strictly proper".into());
    }
    let order = p.origin_pole_order();
    if order > kind.max_origin_order() {
        return Err(format!("origin pole of order {order}"));
    }
    let tol = 1e-9;
    let pinf = p.instantaneous_gain();
    if kind.inst_nonneg() {
        let (_, lo) = sym_extremes(&pinf);
        if lo < -tol * (1.0 + pinf.norm()) {
            return Err(format!("P(inf) has eigenvalue {lo} < 0"));
        }
    }
    if let Some(gamma) = cls.gamma {
        let p0 = p.static_gain().ok_or("plant has a pole at the origin")?;
        let (hi, lo) = sym_extremes(&p0);
        let strict = kind == ClassKind::N0InstNonnegDcStrict;
        if (strict && hi >= gamma) || hi > gamma * (1.0 + tol) {
            return Err(format!("lambda_max(P(0)) = {hi} exceeds gamma = {gamma}"));
        }
        if kind.dc_nonneg() && lo < -tol * (1.0 + p0.norm()) {
            return Err(format!("P(0) has eigenvalue {lo} < 0"));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NecessityStatus {
    RobustlyStabilizing,
    Violated,
    ClassImpossible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    #[serde(rename = "NotSNI")]
    NotSni,
    #[serde(rename = "NotNI")]
    NotNi,
    StaticGainBound,
    InstGainSign,
    NonexistenceClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub omega0: Option<f64>,
    pub x: Option<DVector<Complex64>>,
    /// Signed amount by which the condition fails (eigenvalue or distance to
    /// the bound).
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCondition {
    pub label: String,
    pub holds: bool,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityVerdict {
    pub status: NecessityStatus,
    pub class: UncertaintyClass,
    pub controller_conditions: Vec<LabeledCondition>,
    pub violation: Option<Violation>,
    pub classification: NiClassification,
}

/// Bound on `C(0)` demanded by a class.
#[derive(Clone, Copy, Debug, PartialEq)]
enum StaticBound {
    Negative,
    NonPositive,
    Below(f64),
    AtMost(f64),
}

struct Requirement {
    sni: bool,
    static_bound: StaticBound,
    inst_nonneg: bool,
}

fn requirement(cls: &UncertaintyClass) -> Requirement {
    let inv_gamma = cls.gamma.map_or(f64::INFINITY, |g| 1.0 / g);
    let (sni, static_bound, inst_nonneg) = match cls.kind {
        ClassKind::StrictlyProperNI | ClassKind::NiNoDoubleOriginPole => (true, StaticBound::Negative, false),
        ClassKind::N0DcBounded | ClassKind::N0DcBoundedNonneg => (true, StaticBound::Below(inv_gamma), true),
        ClassKind::N0InstNonnegDcStrict => (true, StaticBound::AtMost(inv_gamma), false),
        ClassKind::SniInstNonneg => (false, StaticBound::NonPositive, false),
        ClassKind::SniInstNonnegDcBounded => (false, StaticBound::Below(inv_gamma), false),
        ClassKind::SniDcBounded | ClassKind::SniDcBoundedNonneg => (false, StaticBound::Below(inv_gamma), true),
    };
    Requirement {
        sni,
        static_bound,
        inst_nonneg,
    }
}

pub(crate) fn require_stable_controller(c: &TransferMatrix) -> Result<()> {
    if let Some(p) = poles(c).into_iter().find(|p| p.location.re >= -AXIS_TOL) {
        return Err(Error::ControllerUnstable(p.location));
    }
    Ok(())
}

/// Frequency-domain witness for a failed NI/SNI condition: the classifier's
/// witness when it has one, otherwise the worst grid point of the certificate.
fn frequency_witness(c: &TransferMatrix, cls: &NiClassification) -> (f64, DVector<Complex64>, f64) {
    if let Some(w) = &cls.witness {
        if let crate::classify::WitnessPoint::Frequency(omega) = w.point {
            return (omega, w.x.clone(), w.defect);
        }
    }
    let omega = cls.certificate.as_ref().map_or(1.0, |g| g.argmin_omega);
    let m = c.eval_jw(omega).expect("stable controller");
    let (lam, x) = hermitian_min(&((&m - m.adjoint()) * J));
    (omega, normalize_phase(&x), lam)
}

pub fn necessity_check(c: &TransferMatrix, cls: &UncertaintyClass) -> Result<NecessityVerdict> {
    necessity_check_with(c, cls, &ClassifyOptions::default())
}

/// As [`necessity_check`] with explicit classifier tolerances and grid.
pub fn necessity_check_with(
    c: &TransferMatrix,
    cls: &UncertaintyClass,
    opts: &ClassifyOptions,
) -> Result<NecessityVerdict> {
    require_stable_controller(c)?;
    let classification = classify_ni_with(c, opts);
    let impossible = cls.kind == ClassKind::NiNoDoubleOriginPole;
    let req = requirement(cls);
    let mut conditions = Vec::new();
    let mut violation: Option<Violation> = None;

    let member = if req.sni {
        classification.verdict == NiVerdict::Sni
    } else {
        classification.verdict.is_ni()
    };
    conditions.push(LabeledCondition {
        label: if req.sni { "C is SNI" } else { "C is NI" }.into(),
        holds: member,
        value: classification.certificate.as_ref().map(|g| g.min_normalized),
    });
    if !member {
        let (omega, x, defect) = frequency_witness(c, &classification);
        violation = Some(Violation {
            kind: if req.sni { ViolationKind::NotSni } else { ViolationKind::NotNi },
            omega0: Some(omega),
            x: Some(x),
            margin: defect,
        });
    }

    let c0 = symmetrize(&c.static_gain().expect("stable controller has a finite static gain"));
    let (d, u) = sym_eig_desc(&c0);
    let lam_max = d[0];
    let margin = MARGIN * (1.0 + c0.norm());
    let (label, holds, excess) = match req.static_bound {
        StaticBound::Negative => ("C(0) < 0".to_string(), lam_max < -margin, lam_max),
        StaticBound::NonPositive => ("C(0) <= 0".to_string(), lam_max <= margin, lam_max),
        StaticBound::Below(b) => (format!("C(0) < {b} I"), lam_max < b - margin, lam_max - b),
        StaticBound::AtMost(b) => (format!("C(0) <= {b} I"), lam_max <= b + margin, lam_max - b),
    };
    conditions.push(LabeledCondition {
        label,
        holds,
        value: Some(lam_max),
    });
    if !holds && violation.is_none() {
        violation = Some(Violation {
            kind: ViolationKind::StaticGainBound,
            omega0: Some(0.0),
            x: Some(u.column(0).map(|v| Complex64::new(v, 0.0))),
            margin: excess,
        });
    }

    if req.inst_nonneg {
        let cinf = symmetrize(&c.instantaneous_gain());
        let (d, u) = sym_eig_desc(&cinf);
        let lo = d[d.len() - 1];
        let holds = lo >= -MARGIN * (1.0 + cinf.norm());
        conditions.push(LabeledCondition {
            label: "C(inf) >= 0".into(),
            holds,
            value: Some(lo),
        });
        if !holds && violation.is_none() {
            violation = Some(Violation {
                kind: ViolationKind::InstGainSign,
                omega0: None,
                x: Some(u.column(d.len() - 1).map(|v| Complex64::new(v, 0.0))),
                margin: lo,
            });
        }
    }

    let status = if impossible {
        violation = Some(Violation {
            kind: ViolationKind::NonexistenceClass,
            omega0: None,
            x: None,
            margin: 0.0,
        });
        NecessityStatus::ClassImpossible
    } else if violation.is_some() {
        NecessityStatus::Violated
    } else {
        NecessityStatus::RobustlyStabilizing
    };
    Ok(NecessityVerdict {
        status,
        class: *cls,
        controller_conditions: conditions,
        violation,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    #[test]
    fn class_names_round_trip() {
        for k in ClassKind::ALL {
            assert_eq!(k.cli_name().parse::<ClassKind>().unwrap(), k);
        }
        assert!("bogus".parse::<ClassKind>().is_err());
    }

    #[test]
    fn gamma_presence_enforced() {
        assert!(UncertaintyClass::new(ClassKind::N0DcBounded, None).is_err());
        assert!(UncertaintyClass::new(ClassKind::SniInstNonneg, Some(1.0)).is_err());
        assert!(UncertaintyClass::new(ClassKind::SniDcBounded, Some(-1.0)).is_err());
    }

    #[test]
    fn sni_controller_with_negative_dc_gain() {
        // 1/(s+1) - 2: SNI, C(0) = -1
        let c = scalar(&[-1.0, -2.0], &[1.0, 1.0]);
        let v = necessity_check(&c, &UncertaintyClass::unbounded(ClassKind::StrictlyProperNI)).unwrap();
        assert_eq!(v.status, NecessityStatus::RobustlyStabilizing);
        assert!(v.controller_conditions.iter().all(|c| c.holds));
    }

    #[test]
    fn negative_constant_for_sni_plants() {
        let c = scalar(&[-0.5], &[1.0]);
        let v = necessity_check(&c, &UncertaintyClass::unbounded(ClassKind::SniInstNonneg)).unwrap();
        assert_eq!(v.status, NecessityStatus::RobustlyStabilizing);
    }

    #[test]
    fn nonexistence_class() {
        let c = scalar(&[-1.0, -2.0], &[1.0, 1.0]);
        let v = necessity_check(&c, &UncertaintyClass::unbounded(ClassKind::NiNoDoubleOriginPole)).unwrap();
        assert_eq!(v.status, NecessityStatus::ClassImpossible);
        assert_eq!(v.violation.unwrap().kind, ViolationKind::NonexistenceClass);
    }

    #[test]
    fn unstable_controller_rejected() {
        let c = scalar(&[1.0], &[-1.0, 1.0]);
        assert!(matches!(
            necessity_check(&c, &UncertaintyClass::unbounded(ClassKind::SniInstNonneg)),
            Err(Error::ControllerUnstable(_))
        ));
    }
}
