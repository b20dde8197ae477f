//! Classify a few textbook systems and print the witness for the one that fails.

use ni_converse::classify::classify_ni;
use ni_converse::{RationalFunction, TransferMatrix};

fn main() {
    let systems = [
        ("1/(s+1)", vec![1.0], vec![1.0, 1.0]),
        ("1/s", vec![1.0], vec![0.0, 1.0]),
        ("1/(s^2+4)", vec![1.0], vec![4.0, 0.0, 1.0]),
        ("s/(s+1)", vec![0.0, 1.0], vec![1.0, 1.0]),
    ];
    for (name, num, den) in systems {
        let g = TransferMatrix::scalar(RationalFunction::from_coeffs(&num, &den).unwrap()).unwrap();
        let c = classify_ni(&g);
        print!("{name:>12}: {:?}", c.verdict);
        if let Some(w) = &c.witness {
            print!("  (violates {:?} at {:?}, defect {:.3e})", w.clause, w.point, w.defect);
        }
        println!();
    }
}
