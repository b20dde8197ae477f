//! Synthesize and verify destabilizing plants for controllers that fail
//! the robust-stability conditions.

use ni_converse::converse::{
    necessity_check, synthesize_destabilizer, verify_counterexample, ClassKind, UncertaintyClass,
};
use ni_converse::{RationalFunction, TransferMatrix};

fn main() -> Result<(), ni_converse::Error> {
    let cases = [
        ("C = 2", RationalFunction::constant(2.0), ClassKind::SniInstNonneg, None),
        ("C = -1/(s+1)", RationalFunction::from_coeffs(&[-1.0], &[1.0, 1.0])?, ClassKind::SniInstNonneg, None),
        ("C = -0.3", RationalFunction::constant(-0.3), ClassKind::SniDcBounded, Some(5.0)),
    ];
    for (name, c, kind, gamma) in cases {
        let c = TransferMatrix::scalar(c)?;
        let cls = UncertaintyClass::new(kind, gamma)?;
        let v = necessity_check(&c, &cls)?;
        let rec = synthesize_destabilizer(&c, &cls, &v)?;
        let check = verify_counterexample(&rec, &c, &cls)?;
        println!("{name} in {kind}: {:?} via {:?}", v.violation.map(|x| x.kind), rec.recipe_kind);
        println!("  plant {:?}", rec.plant.entry(0, 0));
        println!(
            "  {} = {:.2e}, loop {:?}, pole {:?}",
            check.pin_label, check.pin_value, check.oracle_status, check.offending_pole
        );
    }
    Ok(())
}
