//! Seeded random plants in each uncertainty class.
//!
//! Plants are sums of modal terms that are NI by construction, rescaled to
//! the class gain bounds and then checked with the classifier; failures are
//! redrawn.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classify::classify_ni;
use crate::converse::{plant_in_class, ClassKind, UncertaintyClass};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::spectral::sym_extremes;
use crate::tfm::{RMatrix, TransferMatrix};

pub const MAX_DIM: usize = 4;
pub const MAX_MODES: usize = 8;
pub const MAX_ATTEMPTS: usize = 100;

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub cls: UncertaintyClass,
    pub n: usize,
    pub modes: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub scale: f64,
    /// Allow integrator terms in classes that admit origin poles.
    #[serde(default = "yes")]
    pub origin_poles: bool,
}

impl SampleSpec {
    pub fn new(cls: UncertaintyClass, n: usize, modes: usize, seed: u64) -> Self {
        SampleSpec {
            cls,
            n,
            modes,
            seed,
            scale: 1.0,
            origin_poles: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_DIM {
            return Err(Error::InvalidSpec(format!("n = {} outside 1..={MAX_DIM}", self.n)));
        }
        if self.modes == 0 || self.modes > MAX_MODES {
            return Err(Error::InvalidSpec(format!("modes = {} outside 1..={MAX_MODES}", self.modes)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidSpec(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
enum Mode {
    /// `w^2 / (s^2 + 2 zeta w s + w^2)`
    Damped { w: f64, zeta: f64 },
    /// `1 / (tau s + 1)`
    Lag { tau: f64 },
    /// `w^2 / (s^2 + w^2)`
    Undamped { w: f64 },
    /// `1 / s`
    Integrator,
}

impl Mode {
    fn num_den(self) -> (Polynomial, Polynomial) {
        let p = |c: &[f64]| Polynomial::new(c.to_vec());
        match self {
            Mode::Damped { w, zeta } => (p(&[w * w]), p(&[w * w, 2.0 * zeta * w, 1.0])),
            Mode::Lag { tau } => (p(&[1.0]), p(&[1.0, tau])),
            Mode::Undamped { w } => (p(&[w * w]), p(&[w * w, 0.0, 1.0])),
            Mode::Integrator => (p(&[1.0]), p(&[0.0, 1.0])),
        }
    }

    /// Value at `s = 0`; `None` for the integrator.
    fn dc(self) -> Option<f64> {
        match self {
            Mode::Integrator => None,
            _ => Some(1.0),
        }
    }
}

struct Term {
    gain: RMatrix,
    mode: Mode,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

fn psd(rng: &mut ChaCha8Rng, n: usize) -> RMatrix {
    let a = RMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() / n as f64
}

fn draw_mode(rng: &mut ChaCha8Rng, spec: &SampleSpec) -> Mode {
    let kind = spec.cls.kind;
    let mut choices = 2;
    let undamped = !kind.sni_plants();
    let integrator = spec.origin_poles && kind.max_origin_order() >= 1;
    choices += undamped as usize + integrator as usize;
    match rng.gen_range(0..choices) {
        0 => Mode::Damped {
            w: log_uniform(rng, 1e-2, 1e2),
            zeta: log_uniform(rng, 1e-2, 1.0),
        },
        1 => Mode::Lag {
            tau: log_uniform(rng, 1e-2, 1e2),
        },
        2 if undamped => Mode::Undamped {
            w: log_uniform(rng, 1e-2, 1e2),
        },
        _ => Mode::Integrator,
    }
}

fn feedthrough(rng: &mut ChaCha8Rng, spec: &SampleSpec) -> RMatrix {
    let n = spec.n;
    let kind = spec.cls.kind;
    if kind == ClassKind::StrictlyProperNI || rng.gen_bool(1.0 / 3.0) {
        return RMatrix::zeros(n, n);
    }
    let weight = rng.gen_range(0.0..0.5) * spec.scale;
    if kind.inst_nonneg() || kind.dc_nonneg() {
        psd(rng, n) * weight
    } else {
        let a = RMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (&a + a.transpose()) * (weight / 2.0)
    }
}

fn assemble(terms: &[Term], d: &RMatrix) -> Result<TransferMatrix> {
    let n = d.nrows();
    let parts: Vec<(Polynomial, Polynomial)> = terms.iter().map(|t| t.mode.num_den()).collect();
    let common = parts.iter().fold(Polynomial::one(), |acc, (_, den)| &acc * den);
    // num_k * prod_{l != k} den_l
    let lifted: Vec<Polynomial> = (0..parts.len())
        .map(|k| {
            parts
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .fold(parts[k].0.clone(), |acc, (_, (_, den))| &acc * den)
        })
        .collect();
    TransferMatrix::from_fn(n, |i, j| {
        let mut num = common.scale(d[(i, j)]);
        for (t, l) in terms.iter().zip(&lifted) {
            num = &num + &l.scale(t.gain[(i, j)]);
        }
        RationalFunction::new(num, common.clone()).expect("monic common denominator")
    })
}

fn draw(rng: &mut ChaCha8Rng, spec: &SampleSpec) -> Result<TransferMatrix> {
    let n = spec.n;
    let mut terms = Vec::with_capacity(spec.modes + 1);
    if spec.cls.kind.sni_plants() {
        // Full-rank lag so the sum is SNI whatever the modal directions.
        let base = psd(rng, n) + RMatrix::identity(n, n) * 0.1;
        terms.push(Term {
            gain: base * spec.scale,
            mode: Mode::Lag {
                tau: log_uniform(rng, 1e-1, 1e1),
            },
        });
    }
    for _ in 0..spec.modes {
        let a = unit_vector(rng, n);
        let g = rng.gen_range(0.2..2.0) * spec.scale;
        terms.push(Term {
            gain: &a * a.transpose() * g,
            mode: draw_mode(rng, spec),
        });
    }
    let mut d = feedthrough(rng, spec);

    if let Some(gamma) = spec.cls.gamma {
        let mut p0 = d.clone();
        for t in &terms {
            p0 += &t.gain * t.mode.dc().unwrap_or(0.0);
        }
        let (top, _) = sym_extremes(&p0);
        let target = gamma * rng.gen_range(0.2..0.95);
        if top > target {
            let k = target / top;
            for t in &mut terms {
                t.gain *= k;
            }
            d *= k;
        }
    }
    assemble(&terms, &d)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a plant in `spec.cls`; identical specs give identical plants.
pub fn sample_plant(spec: &SampleSpec) -> Result<TransferMatrix> {
    sample_plant_stream(spec, 0)
}

/// As [`sample_plant`] on an independent stream of the same seed, for
/// parallel batches.
pub fn sample_plant_stream(spec: &SampleSpec, stream: u64) -> Result<TransferMatrix> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, stream);
    for _ in 0..MAX_ATTEMPTS {
        let p = draw(&mut rng, spec)?;
        if plant_in_class(&p, &spec.cls, &classify_ni(&p)).is_ok() {
            return Ok(p);
        }
    }
    Err(Error::SamplerExhausted(MAX_ATTEMPTS))
}

/// SNI controller with `C(0) < 0`: the strictly proper part of an SNI sample
/// shifted down by a constant (a constant shift keeps `j(C - C^*)` unchanged).
pub fn sample_sni_controller(n: usize, modes: usize, seed: u64, stream: u64) -> Result<TransferMatrix> {
    let cls = UncertaintyClass::unbounded(ClassKind::SniInstNonneg);
    let p = sample_plant_stream(&SampleSpec::new(cls, n, modes, seed), stream)?.strictly_proper_part();
    let mut rng = rng_for(seed ^ 0x5eed_c0de, stream);
    let (top, _) = sym_extremes(&p.static_gain().expect("stable sample"));
    let shift = top.max(0.0) + rng.gen_range(0.05..1.0);
    p.sub(&TransferMatrix::constant(&(RMatrix::identity(n, n) * shift)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::NiVerdict;

    #[test]
    fn sni_first_order() {
        let spec = SampleSpec::new(UncertaintyClass::unbounded(ClassKind::SniInstNonneg), 1, 1, 7);
        let p = sample_plant(&spec).unwrap();
        assert_eq!(classify_ni(&p).verdict, NiVerdict::Sni);
        assert!(p.instantaneous_gain()[(0, 0)] >= 0.0);
    }

    #[test]
    fn deterministic() {
        let spec = SampleSpec::new(UncertaintyClass::bounded(ClassKind::N0DcBounded, 1.0).unwrap(), 2, 3, 11);
        assert_eq!(sample_plant(&spec).unwrap(), sample_plant(&spec).unwrap());
        assert_ne!(sample_plant_stream(&spec, 1).unwrap(), sample_plant(&spec).unwrap());
    }

    #[test]
    fn dc_bound_respected() {
        for seed in 0..5 {
            let spec = SampleSpec::new(UncertaintyClass::bounded(ClassKind::N0DcBounded, 1.0).unwrap(), 2, 2, seed);
            let p0 = sample_plant(&spec).unwrap().static_gain().unwrap();
            assert!(sym_extremes(&p0).0 <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn strictly_proper_with_origin_poles() {
        let cls = UncertaintyClass::unbounded(ClassKind::StrictlyProperNI);
        for seed in 0..5 {
            let p = sample_plant(&SampleSpec::new(cls, 1, 3, seed)).unwrap();
            assert!(p.is_strictly_proper());
            assert!(classify_ni(&p).verdict.is_ni());
        }
    }

    #[test]
    fn invalid_specs() {
        let cls = UncertaintyClass::unbounded(ClassKind::SniInstNonneg);
        assert!(sample_plant(&SampleSpec::new(cls, 5, 1, 0)).is_err());
        assert!(sample_plant(&SampleSpec::new(cls, 1, 0, 0)).is_err());
        assert!(sample_plant(&SampleSpec::new(cls, 1, 9, 0)).is_err());
    }
}
