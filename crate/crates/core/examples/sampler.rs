//! Draw plants from a bounded class and show their gains.

use ni_converse::classify::classify_ni;
use ni_converse::converse::{ClassKind, UncertaintyClass};
use ni_converse::json::system_to_string;
use ni_converse::sampler::{sample_plant, SampleSpec};

fn main() -> Result<(), ni_converse::Error> {
    let cls = UncertaintyClass::bounded(ClassKind::SniDcBoundedNonneg, 2.0)?;
    for seed in 0..3 {
        let p = sample_plant(&SampleSpec::new(cls, 2, 3, seed))?;
        let p0 = p.static_gain().expect("SNI plants have no origin poles");
        println!(
            "seed {seed}: {:?}, eig P(0) = {:.3?}",
            classify_ni(&p).verdict,
            p0.symmetric_eigenvalues().as_slice()
        );
    }
    let p = sample_plant(&SampleSpec::new(cls, 1, 1, 7))?;
    println!("{}", system_to_string(&p));
    Ok(())
}
