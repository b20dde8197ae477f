//! Decide stability of one loop with every available test.

use ni_converse::stability::{lemma2_check, lemma3_check, oracle_stability, theorem1_check, theorem2_check};
use ni_converse::{RationalFunction, TransferMatrix};

fn main() -> Result<(), ni_converse::Error> {
    // P = 2/(s^2 + s + 2) is NI, C = 1/(s + 3) - 0.6 is SNI with C(0) < 0.
    let p = TransferMatrix::scalar(RationalFunction::from_coeffs(&[2.0], &[2.0, 1.0, 1.0])?)?;
    let c = TransferMatrix::scalar(RationalFunction::from_coeffs(&[-0.8, -0.6], &[3.0, 1.0])?)?;

    let oracle = oracle_stability(&p, &c)?;
    println!("oracle   : {:?}", oracle.status);
    for (name, v) in [("lemma2", lemma2_check(&p, &c)?), ("lemma3", lemma3_check(&p, &c)?), ("thm2", theorem2_check(&p, &c)?)] {
        let conds: Vec<String> = v.conditions.iter().map(|k| format!("{} = {:.4}", k.label, k.value)).collect();
        println!("{name:9}: {:?}  [{}]", v.status, conds.join(", "));
    }
    let h = theorem1_check(&p, &c)?;
    println!(
        "homotopy : a={} b={} c={} (agree: {})",
        h.statement_a, h.statement_b, h.statement_c, h.statements_agree
    );
    Ok(())
}
