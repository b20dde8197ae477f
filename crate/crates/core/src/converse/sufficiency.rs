//! Statistical replay of the sufficiency direction: sampled in-class plants
//! must all be stabilized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{necessity_check, ClassKind, NecessityStatus, UncertaintyClass};
use crate::error::{Error, Result};
use crate::sampler::{sample_plant_stream, SampleSpec};
use crate::spectral::symmetrize;
use crate::stability::{lemma4_check, oracle_stability, PsiParameter, Status};
use crate::tfm::TransferMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyReport {
    pub class: UncertaintyClass,
    pub seed: u64,
    pub samples: usize,
    pub oracle_stable: usize,
    /// [`lemma4_check`] verdicts with `psi = C(0)`; strictly proper NI class only.
    pub lemma4_stable: Option<usize>,
    /// Sampler family description; coverage is relative to it.
    pub family: String,
}

fn check_one(c: &TransferMatrix, cls: &UncertaintyClass, seed: u64, index: usize) -> Result<bool> {
    let spec = SampleSpec::new(*cls, c.dim(), 1 + index % 3, seed);
    let p = sample_plant_stream(&spec, index as u64)?;
    let oracle = oracle_stability(&p, c)?;
    if oracle.status != Status::Stable {
        return Err(Error::SufficiencyCounterexampleFound {
            index,
            detail: format!("oracle {:?}, pole {:?}, plant {p:?}", oracle.status, oracle.offending_pole),
        });
    }
    if cls.kind != ClassKind::StrictlyProperNI {
        return Ok(false);
    }
    let c0 = symmetrize(&c.static_gain().expect("stable controller"));
    let psi = PsiParameter::new(c0, &p.instantaneous_gain())?;
    let v = lemma4_check(&p, c, Some(&psi))?;
    if v.status != Status::Stable {
        return Err(Error::SufficiencyCounterexampleFound {
            index,
            detail: format!("lemma4_check with psi = C(0): {:?} at {:?}", v.status, v.failed_condition),
        });
    }
    Ok(true)
}

/// Samples `samples` plants from `cls` on independent streams of `seed` and
/// checks each closed loop. The result does not depend on thread scheduling.
pub fn sufficiency_check(
    c: &TransferMatrix,
    cls: &UncertaintyClass,
    samples: usize,
    seed: u64,
) -> Result<SufficiencyReport> {
    let verdict = necessity_check(c, cls)?;
    if verdict.status != NecessityStatus::RobustlyStabilizing {
        return Err(Error::PreconditionViolated(format!(
            "controller does not meet the class conditions ({:?})",
            verdict.status
        )));
    }
    let results: Vec<Result<bool>> = (0..samples).into_par_iter().map(|k| check_one(c, cls, seed, k)).collect();
    let mut lemma4 = 0;
    for r in results {
        lemma4 += r? as usize;
    }
    Ok(SufficiencyReport {
        class: *cls,
        seed,
        samples,
        oracle_stable: samples,
        lemma4_stable: (cls.kind == ClassKind::StrictlyProperNI).then_some(lemma4),
        family: "sums of 1-3 damped, lag, undamped and integrator modes (as the class allows)".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    #[test]
    fn lag_controller_strictly_proper_class() {
        let c = TransferMatrix::scalar(RationalFunction::from_coeffs(&[-1.0, -2.0], &[1.0, 1.0]).unwrap()).unwrap();
        let cls = UncertaintyClass::unbounded(ClassKind::StrictlyProperNI);
        let rep = sufficiency_check(&c, &cls, 20, 3).unwrap();
        assert_eq!(rep.oracle_stable, 20);
        assert_eq!(rep.lemma4_stable, Some(20));
    }

    #[test]
    fn zero_controller_always_stable() {
        let c = TransferMatrix::zeros(1);
        let cls = UncertaintyClass::unbounded(ClassKind::SniInstNonneg);
        assert_eq!(sufficiency_check(&c, &cls, 10, 1).unwrap().oracle_stable, 10);
    }

    #[test]
    fn refuses_violating_controller() {
        let c = TransferMatrix::scalar(RationalFunction::constant(2.0)).unwrap();
        let cls = UncertaintyClass::unbounded(ClassKind::SniInstNonneg);
        assert!(matches!(
            sufficiency_check(&c, &cls, 5, 0),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
