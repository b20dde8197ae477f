//! Minimal state-space realization of a 2x2 modal sum and its poles.

use nalgebra::DVector;
use ni_converse::json::RealizationJson;
use ni_converse::realization::{poles, StateSpaceRealization};
use ni_converse::{RationalFunction, TransferMatrix};

fn main() -> Result<(), ni_converse::Error> {
    // A lag, a damped resonance and an integrator, each rank one: four states.
    let modes = [(vec![1.0], vec![1.0, 1.0], [1.0, 0.5]), (vec![4.0], vec![4.0, 0.4, 1.0], [0.0, 1.0]), (vec![1.0], vec![0.0, 1.0], [1.0, 1.0])];
    let mut g = TransferMatrix::zeros(2);
    for (num, den, v) in modes {
        let v = DVector::from_row_slice(&v);
        g = g.add(&TransferMatrix::scalar_times(&RationalFunction::from_coeffs(&num, &den)?, &(&v * v.transpose()))?)?;
    }
    let r = StateSpaceRealization::minimal(&g);
    println!("{} states", r.states());
    for p in poles(&g) {
        println!("pole {:.4} multiplicity {}", p.location, p.multiplicity);
    }
    println!("{}", serde_json::to_string(&RealizationJson::from(&r)).unwrap());
    Ok(())
}
