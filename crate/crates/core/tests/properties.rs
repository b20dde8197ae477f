use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use ni_converse::classify::classify_ni;
use ni_converse::converse::{
    catalog_p, necessity_check, plant_in_class, synthesize_destabilizer, verify_counterexample, CatalogParam,
    ClassKind, NecessityStatus, UncertaintyClass,
};
use ni_converse::json::{system_from_str, system_to_string};
use ni_converse::realization::StateSpaceRealization;
use ni_converse::sampler::{sample_plant, SampleSpec};
use ni_converse::stability::{oracle_stability, Status};
use ni_converse::{RMatrix, RationalFunction, TransferMatrix};

fn class_strategy() -> impl Strategy<Value = UncertaintyClass> {
    (0..ClassKind::ALL.len(), 0.5f64..4.0).prop_map(|(k, g)| {
        let kind = ClassKind::ALL[k];
        UncertaintyClass::new(kind, kind.needs_gamma().then_some(g)).unwrap()
    })
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_plants_lie_in_class_and_repeat(cls in class_strategy(), n in 1usize..=2, modes in 1usize..=3, seed in any::<u64>()) {
        let spec = SampleSpec::new(cls, n, modes, seed);
        let p = sample_plant(&spec).unwrap();
        prop_assert_eq!(p.dim(), n);
        prop_assert!(plant_in_class(&p, &cls, &classify_ni(&p)).is_ok());
        prop_assert_eq!(sample_plant(&spec).unwrap(), p);
    }

    #[test]
    fn system_json_round_trip(n in 1usize..=3, raw in prop::collection::vec((coeffs(3), coeffs(3)), 9)) {
        let g = TransferMatrix::from_fn(n, |i, j| {
            let (num, mut den) = raw[i * 3 + j].clone();
            den[2] = den[2].abs() + 1.0;
            RationalFunction::from_coeffs(&num, &den).unwrap()
        }).unwrap();
        prop_assert_eq!(system_from_str(&system_to_string(&g)).unwrap(), g);
    }

    #[test]
    fn catalog_entry_hits_unit_loop_gain(w0 in 0.1f64..10.0, r in 0.1f64..10.0, t in 0.01f64..0.99, case in 0usize..5) {
        // Each phase case with a parameter strictly inside its admissible range.
        let (theta, param) = match case {
            0 => (0.0, CatalogParam::A(w0 * (1.0 + t))),
            1 => (PI, CatalogParam::B(w0 * t)),
            2 => (FRAC_PI_2, CatalogParam::C(t * 3.0)),
            3 => (t * FRAC_PI_2, CatalogParam::D(w0 * (1.0 + t))),
            _ => (FRAC_PI_2 + t * FRAC_PI_2, CatalogParam::E(w0 * t)),
        };
        let f = catalog_p(param, w0, r, theta);
        let z = f.eval(Complex64::new(0.0, w0)).unwrap() * Complex64::from_polar(r, theta);
        prop_assert!((z - 1.0).norm() < 1e-9, "{:?}: {}", param, z);
        let g = TransferMatrix::scalar(f).unwrap();
        prop_assert!(classify_ni(&g).verdict.is_ni());
    }

    #[test]
    fn minimal_realization_of_modal_sum(
        poles in prop::collection::btree_set(1u32..60, 1..4),
        dirs in prop::collection::vec(coeffs(2), 3),
        s_re in -2.0f64..2.0, s_im in 0.1f64..3.0,
    ) {
        // sum_k v_k v_k^T / (s + p_k) over distinct p_k: one state per mode.
        let poles: Vec<f64> = poles.into_iter().map(|p| p as f64 / 10.0).collect();
        let vs: Vec<DVector<f64>> = dirs.iter().map(|d| DVector::from_vec(vec![d[0] + 6.0, d[1]])).collect();
        let mut g = TransferMatrix::zeros(2);
        for (p, v) in poles.iter().zip(&vs) {
            let term = TransferMatrix::scalar_times(&RationalFunction::from_coeffs(&[1.0], &[*p, 1.0]).unwrap(), &(v * v.transpose())).unwrap();
            g = g.add(&term).unwrap();
        }
        let r = StateSpaceRealization::minimal(&g);
        prop_assert_eq!(r.states(), poles.len());
        let s = Complex64::new(s_re, s_im);
        let diff = (r.transfer_at(s).unwrap() - g.eval_at(s).unwrap()).norm();
        prop_assert!(diff < 1e-8 * (1.0 + g.eval_at(s).unwrap().norm()), "mismatch {}", diff);
    }

    #[test]
    fn synthesized_destabilizers_verify(kind in 0usize..3, k in 0.05f64..5.0, a in 0.1f64..5.0, d in -1.0f64..1.0) {
        // Violating scalar controllers: positive dc gain, or a sign-flipped lag (not NI).
        let (c, cls) = match kind {
            0 => (RationalFunction::constant(k), ClassKind::SniInstNonneg),
            1 => (RationalFunction::from_coeffs(&[-k + d * a, d], &[a, 1.0]).unwrap(), ClassKind::SniInstNonneg),
            _ => (RationalFunction::from_coeffs(&[-k], &[a, 1.0]).unwrap(), ClassKind::StrictlyProperNI),
        };
        let c = TransferMatrix::scalar(c).unwrap();
        let cls = UncertaintyClass::unbounded(cls);
        let v = necessity_check(&c, &cls).unwrap();
        prop_assume!(v.status != NecessityStatus::RobustlyStabilizing);
        let rec = synthesize_destabilizer(&c, &cls, &v).unwrap();
        if let (Some((lo, hi)), Some(p)) = (rec.interval, rec.catalog_param) {
            prop_assert!(p.value() > lo && p.value() < hi);
        }
        let rep = verify_counterexample(&rec, &c, &cls).unwrap();
        prop_assert!(rep.in_class);
        prop_assert_ne!(oracle_stability(&rec.plant, &c).unwrap().status, Status::Stable);
    }

    #[test]
    fn negative_constant_controllers_stabilize_lags(alpha in -5.0f64..-1e-3, beta in 1e-3f64..100.0) {
        let p = TransferMatrix::scalar(RationalFunction::from_coeffs(&[1.0], &[beta, 1.0]).unwrap()).unwrap();
        let c = TransferMatrix::constant(&RMatrix::from_element(1, 1, alpha));
        prop_assert_eq!(oracle_stability(&p, &c).unwrap().status, Status::Stable);
    }
}
