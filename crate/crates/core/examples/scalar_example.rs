//! Constant gain `alpha` against the plants `1/(s + beta)`, `beta > 0`: the
//! loop pole sits at `alpha - beta`, so only `alpha <= 0` is robust.

use ni_converse::converse::{necessity_check, ClassKind, UncertaintyClass};
use ni_converse::realization::close_loop;
use ni_converse::stability::oracle_stability;
use ni_converse::{RationalFunction, TransferMatrix};

fn main() -> Result<(), ni_converse::Error> {
    let cls = UncertaintyClass::unbounded(ClassKind::SniInstNonneg);
    for alpha in [-0.5, 0.0, 0.1] {
        let c = TransferMatrix::scalar(RationalFunction::constant(alpha))?;
        println!("alpha = {alpha:5}: {:?}", necessity_check(&c, &cls)?.status);
        for beta in [0.05, 1.0, 10.0] {
            let p = TransferMatrix::scalar(RationalFunction::from_coeffs(&[1.0], &[beta, 1.0])?)?;
            let pole = close_loop(&p, &c)?.eigenvalues()[0].re;
            println!("    beta = {beta:5}: loop pole {pole:+.4}, {:?}", oracle_stability(&p, &c)?.status);
        }
    }
    Ok(())
}
