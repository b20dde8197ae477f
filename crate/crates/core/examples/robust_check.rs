//! Check a controller against each uncertainty class it could be paired with.

use ni_converse::converse::{necessity_check, ClassKind, UncertaintyClass};
use ni_converse::{RationalFunction, TransferMatrix};

fn main() -> Result<(), ni_converse::Error> {
    // C = -0.5 + 1/(s + 2): SNI part plus a negative constant, C(0) = 0.
    let c = TransferMatrix::scalar(RationalFunction::from_coeffs(&[0.0, -0.5], &[2.0, 1.0])?)?;
    for kind in ClassKind::ALL {
        let cls = UncertaintyClass::new(kind, kind.needs_gamma().then_some(1.0))?;
        let v = necessity_check(&c, &cls)?;
        let why = v.violation.map(|x| format!("{:?}", x.kind)).unwrap_or_default();
        println!("{:28} {:?} {why}", kind.cli_name(), v.status);
    }
    Ok(())
}
