//! Replay the sufficiency direction: a controller meeting the class
//! conditions stabilizes every sampled plant.

use ni_converse::converse::{sufficiency_check, ClassKind, UncertaintyClass};
use ni_converse::sampler::sample_sni_controller;

fn main() -> Result<(), ni_converse::Error> {
    let cls = UncertaintyClass::unbounded(ClassKind::StrictlyProperNI);
    for stream in 0..3 {
        let c = sample_sni_controller(2, 2, 42, stream)?;
        let rep = sufficiency_check(&c, &cls, 50, stream)?;
        println!(
            "controller {stream}: {}/{} oracle stable, lemma4_check with psi = C(0): {:?}",
            rep.oracle_stable, rep.samples, rep.lemma4_stable
        );
    }
    Ok(())
}
