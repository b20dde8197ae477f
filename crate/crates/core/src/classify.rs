//! NI / SNI / positive-real / output-strictly-passive membership tests.
//!
//! Frequency conditions are certified on a log-spaced grid augmented with
//! decade anchors and points clustered around imaginary-axis poles, followed
//! by golden-section refinement of the deepest local minima.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realization::{poles, PoleData, AXIS_TOL};
use crate::spectral::{hermitian_min, normalize_phase, sigma_min_c, sym_eig_desc, to_complex};
use crate::tfm::{CMatrix, RMatrix, TransferMatrix};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const TINY: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Absolute tolerance on eigenvalues of unit-normalized responses.
    pub tol: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub base_points: usize,
    /// Number of local minima refined by golden-section search.
    pub refine: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol: 1e-9,
            omega_min: 1e-6,
            omega_max: 1e6,
            base_points: 400,
            refine: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NiVerdict {
    #[serde(rename = "NotNI")]
    NotNi,
    #[serde(rename = "NI")]
    Ni,
    #[serde(rename = "SNI")]
    Sni,
}

impl NiVerdict {
    pub fn is_ni(self) -> bool {
        self != NiVerdict::NotNi
    }
}

/// Which clause of the NI definition a witness violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// (i) open right-half-plane pole
    RhpPole,
    /// (ii) `j(G - G*) >= 0` on the imaginary axis
    Frequency,
    /// (iii) simple axis pole with PSD residue of `jG`
    AxisPole,
    /// (iv) origin pole of order at most two with PSD `lim s^2 G`
    OriginPole,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WitnessPoint {
    Frequency(f64),
    Origin,
    Infinity,
    Pole(Complex64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub clause: Clause,
    pub point: WitnessPoint,
    /// Unit vector, first significant entry positive real.
    pub x: DVector<Complex64>,
    /// Value of the violated quantity along `x` (negative for violations of
    /// a semidefinite condition).
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleDensity {
    pub omega0: f64,
    /// Smallest relative distance `|omega - omega0| / omega0` among evaluated points.
    pub nearest_relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCertificate {
    pub omega_min: f64,
    pub omega_max: f64,
    pub base_points: usize,
    pub evaluated_points: usize,
    pub tol: f64,
    /// Smallest normalized eigenvalue over the evaluated points.
    pub min_normalized: f64,
    pub argmin_omega: f64,
    pub pole_density: Vec<PoleDensity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NiClassification {
    pub verdict: NiVerdict,
    pub witness: Option<Witness>,
    pub marginal_poles: Vec<PoleData>,
    pub certificate: Option<GridCertificate>,
}

#[derive(Clone, Debug)]
struct Sample {
    omega: f64,
    raw: f64,
    normalized: f64,
    x: DVector<Complex64>,
}

/// Evaluates `j(G(jw) - G(jw)^*)` via the strictly proper part so that the
/// normalization is not dominated by a large symmetric feedthrough.
struct NiProbe<'a> {
    gsp: &'a TransferMatrix,
    skew: CMatrix,
    skew_norm: f64,
}

impl NiProbe<'_> {
    fn sample(&self, omega: f64) -> Option<Sample> {
        let g = self.gsp.eval_jw(omega).ok()?;
        let h = (&g - g.adjoint()) * J + &self.skew;
        let (raw, x) = hermitian_min(&h);
        let scale = g.norm().max(self.skew_norm).max(TINY);
        Some(Sample {
            omega,
            raw,
            normalized: raw / scale,
            x,
        })
    }
}

/// Log-spaced grid with decade anchors and points around axis-pole frequencies.
pub fn frequency_grid(opts: &ClassifyOptions, axis_freqs: &[f64]) -> Vec<f64> {
    let (lo, hi) = (opts.omega_min.log10(), opts.omega_max.log10());
    let n = opts.base_points.max(2);
    let mut w: Vec<f64> = (0..n)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (n - 1) as f64))
        .collect();
    let mut d = lo.ceil() as i32;
    while (d as f64) <= hi {
        w.push(10f64.powi(d));
        d += 1;
    }
    for &w0 in axis_freqs {
        if w0 <= 0.0 {
            continue;
        }
        for k in 1..=7 {
            let e = 10f64.powi(-k);
            w.push(w0 * (1.0 - e));
            w.push(w0 * (1.0 + e));
        }
    }
    w.retain(|v| v.is_finite() && *v > 0.0);
    w.sort_by(f64::total_cmp);
    w.dedup();
    w
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Indices of interior local minima of `v`, deepest first.
fn local_minima(v: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..v.len().saturating_sub(1))
        .filter(|&k| v[k] <= v[k - 1] && v[k] <= v[k + 1])
        .collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    idx.truncate(count);
    idx
}

fn closer_to_one(a: f64, b: f64) -> bool {
    a.ln().abs() < b.ln().abs()
}

fn unit(n: usize, k: usize) -> DVector<Complex64> {
    let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
    x[k] = Complex64::new(1.0, 0.0);
    x
}

pub fn classify_ni(g: &TransferMatrix) -> NiClassification {
    classify_ni_with(g, &ClassifyOptions::default())
}

pub fn classify_ni_with(g: &TransferMatrix, opts: &ClassifyOptions) -> NiClassification {
    let n = g.dim();
    let all_poles = poles(g);
    let marginal_poles: Vec<PoleData> = all_poles.iter().filter(|p| p.on_axis()).cloned().collect();

    // (i)
    if let Some(p) = all_poles
        .iter()
        .filter(|p| !p.on_axis() && p.location.re > 0.0)
        .max_by(|a, b| a.location.re.total_cmp(&b.location.re))
    {
        return NiClassification {
            verdict: NiVerdict::NotNi,
            witness: Some(Witness {
                clause: Clause::RhpPole,
                point: WitnessPoint::Pole(p.location),
                x: unit(n, 0),
                defect: -p.location.re,
            }),
            marginal_poles,
            certificate: None,
        };
    }

    // (ii)
    let axis_freqs: Vec<f64> = marginal_poles
        .iter()
        .map(|p| p.location.im)
        .filter(|w| *w > 0.0)
        .collect();
    let gsp = g.strictly_proper_part();
    let d = g.instantaneous_gain();
    let skew = to_complex(&(&d - d.transpose())) * J;
    let probe = NiProbe {
        skew_norm: skew.norm(),
        skew,
        gsp: &gsp,
    };
    let grid = frequency_grid(opts, &axis_freqs);
    let mut samples: Vec<Sample> = grid.par_iter().filter_map(|&w| probe.sample(w)).collect();
    let normalized: Vec<f64> = samples.iter().map(|s| s.normalized).collect();
    let mut refined = Vec::new();
    for k in local_minima(&normalized, opts.refine) {
        let (a, b) = (samples[k - 1].omega.ln(), samples[k + 1].omega.ln());
        let f = |t: f64| probe.sample(t.exp()).map_or(f64::INFINITY, |s| s.normalized);
        let (t, ft) = golden_min(f, a, b, 80);
        let base = samples[k].normalized;
        if ft < base - 1e-14 * base.abs().max(TINY) {
            if let Some(s) = probe.sample(t.exp()) {
                refined.push(s);
            }
        }
    }
    samples.extend(refined);
    samples.sort_by(|a, b| a.omega.total_cmp(&b.omega));

    let pole_density = axis_freqs
        .iter()
        .map(|&w0| PoleDensity {
            omega0: w0,
            nearest_relative: samples
                .iter()
                .map(|s| (s.omega - w0).abs() / w0)
                .fold(f64::INFINITY, f64::min),
        })
        .collect();
    // Near-ties go to the point closest to omega = 1 (flat responses).
    let mut worst: Option<Sample> = None;
    for s in &samples {
        let take = match &worst {
            None => true,
            Some(w) => {
                s.normalized < w.normalized - 1e-12
                    || (s.normalized <= w.normalized + 1e-12 && closer_to_one(s.omega, w.omega))
            }
        };
        if take {
            worst = Some(s.clone());
        }
    }
    let certificate = GridCertificate {
        omega_min: opts.omega_min,
        omega_max: opts.omega_max,
        base_points: opts.base_points,
        evaluated_points: samples.len(),
        tol: opts.tol,
        min_normalized: worst.as_ref().map_or(f64::INFINITY, |s| s.normalized),
        argmin_omega: worst.as_ref().map_or(f64::NAN, |s| s.omega),
        pole_density,
    };

    // Among violating points, report the one with the most negative raw
    // eigenvalue, breaking ties toward omega = 1.
    let mut witness: Option<&Sample> = None;
    for s in samples.iter().filter(|s| s.normalized < -opts.tol) {
        witness = match witness {
            None => Some(s),
            Some(w) if s.raw < w.raw || (s.raw == w.raw && closer_to_one(s.omega, w.omega)) => Some(s),
            keep => keep,
        };
    }
    if let Some(s) = witness {
        return NiClassification {
            verdict: NiVerdict::NotNi,
            witness: Some(Witness {
                clause: Clause::Frequency,
                point: WitnessPoint::Frequency(s.omega),
                x: normalize_phase(&s.x),
                defect: s.raw,
            }),
            marginal_poles,
            certificate: Some(certificate),
        };
    }

    // (iii)
    for p in marginal_poles.iter().filter(|p| p.location.im > 0.0) {
        if p.multiplicity > 1 {
            return not_ni_pole(p, n, -((p.multiplicity - 1) as f64), marginal_poles.clone(), certificate);
        }
        if let Some(r) = &p.residue_matrix {
            let k = r * J;
            let scale = k.norm().max(1.0);
            let herm_err = (&k - k.adjoint()).norm();
            let (lam, x) = hermitian_min(&k);
            if lam < -opts.tol * scale || herm_err > 1e-7 * scale {
                let defect = if lam < -opts.tol * scale { lam } else { -herm_err };
                return NiClassification {
                    verdict: NiVerdict::NotNi,
                    witness: Some(Witness {
                        clause: Clause::AxisPole,
                        point: WitnessPoint::Pole(p.location),
                        x: normalize_phase(&x),
                        defect,
                    }),
                    marginal_poles,
                    certificate: Some(certificate),
                };
            }
        }
    }

    // (iv)
    let order = g.origin_pole_order();
    if order > 2 {
        let origin = PoleData {
            location: Complex64::new(0.0, 0.0),
            multiplicity: order,
            residue_matrix: None,
        };
        return not_ni_pole(&origin, n, -((order - 2) as f64), marginal_poles, certificate);
    }
    if order > 0 {
        let l2 = g.scaled_origin_limit(2).expect("origin order at most two");
        if let Some((lam, x)) = psd_violation(&l2, opts.tol) {
            return NiClassification {
                verdict: NiVerdict::NotNi,
                witness: Some(Witness {
                    clause: Clause::OriginPole,
                    point: WitnessPoint::Origin,
                    x: normalize_phase(&x),
                    defect: lam,
                }),
                marginal_poles,
                certificate: Some(certificate),
            };
        }
    }

    let strictly_positive = certificate.min_normalized > opts.tol;
    let verdict = if marginal_poles.is_empty() && strictly_positive {
        NiVerdict::Sni
    } else {
        NiVerdict::Ni
    };
    NiClassification {
        verdict,
        witness: None,
        marginal_poles,
        certificate: Some(certificate),
    }
}

fn not_ni_pole(
    p: &PoleData,
    n: usize,
    defect: f64,
    marginal_poles: Vec<PoleData>,
    certificate: GridCertificate,
) -> NiClassification {
    let (clause, point) = if p.location.norm() == 0.0 {
        (Clause::OriginPole, WitnessPoint::Origin)
    } else {
        (Clause::AxisPole, WitnessPoint::Pole(p.location))
    };
    NiClassification {
        verdict: NiVerdict::NotNi,
        witness: Some(Witness {
            clause,
            point,
            x: unit(n, 0),
            defect,
        }),
        marginal_poles,
        certificate: Some(certificate),
    }
}

/// Returns the most negative eigenvalue and its eigenvector when `m` is not
/// symmetric positive semidefinite within `tol` (relative to `max(1, |m|)`).
fn psd_violation(m: &RMatrix, tol: f64) -> Option<(f64, DVector<Complex64>)> {
    let scale = m.norm().max(1.0);
    let asym = (m - m.transpose()).norm();
    let (d, u) = sym_eig_desc(m);
    let k = d.len() - 1;
    let x: DVector<Complex64> = u.column(k).map(|v| Complex64::new(v, 0.0));
    if d[k] < -tol * scale {
        Some((d[k], x))
    } else if asym > 1e-7 * scale {
        Some((-asym, x))
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassivityReport {
    pub holds: bool,
    /// Frequency of the smallest eigenvalue of `G + G*` (`None` means infinity).
    pub witness_omega: Option<f64>,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OspReport {
    pub holds: bool,
    /// Estimate of the largest `eps` with `G + G* >= eps G* G` on the grid.
    pub epsilon: f64,
    pub argmin_omega: Option<f64>,
}

fn require_stable(g: &TransferMatrix) -> Result<()> {
    for p in poles(g) {
        if p.location.re >= -AXIS_TOL {
            return Err(Error::NotStable(p.location));
        }
    }
    Ok(())
}

/// Grid for the passivity tests: `omega = 0`, the base grid, and infinity
/// (encoded as `None`).
fn passivity_points(opts: &ClassifyOptions) -> Vec<Option<f64>> {
    let mut pts = vec![Some(0.0)];
    pts.extend(frequency_grid(opts, &[]).into_iter().map(Some));
    pts.push(None);
    pts
}

fn eval_point(g: &TransferMatrix, w: Option<f64>) -> CMatrix {
    match w {
        Some(w) => g.eval_jw(w).expect("stable system has no axis poles"),
        None => to_complex(&g.instantaneous_gain()),
    }
}

pub fn is_positive_real(g: &TransferMatrix) -> Result<PassivityReport> {
    is_positive_real_with(g, &ClassifyOptions::default())
}

pub fn is_positive_real_with(g: &TransferMatrix, opts: &ClassifyOptions) -> Result<PassivityReport> {
    require_stable(g)?;
    let pts = passivity_points(opts);
    let vals: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&w| {
            let m = eval_point(g, w);
            let (lam, _) = hermitian_min(&(&m + m.adjoint()));
            (lam, lam / m.norm().max(1.0))
        })
        .collect();
    let mut best = 0;
    for k in 1..vals.len() {
        if vals[k].1 < vals[best].1 {
            best = k;
        }
    }
    Ok(PassivityReport {
        holds: vals[best].1 >= -opts.tol,
        witness_omega: pts[best],
        min_eigenvalue: vals[best].0,
    })
}

/// Largest `eps` with `G + G* - eps G*G >= 0` at one frequency.
fn osp_epsilon(m: &CMatrix, tol: f64) -> f64 {
    let scale = m.norm();
    if scale == 0.0 {
        return f64::INFINITY;
    }
    if sigma_min_c(m) > 1e-12 * scale {
        if let Some(mi) = m.clone().try_inverse() {
            return hermitian_min(&(&mi + mi.adjoint())).0;
        }
    }
    let herm = m + m.adjoint();
    let gram = m.adjoint() * m;
    let f = |e: f64| hermitian_min(&(&herm - &gram * Complex64::new(e, 0.0))).0 >= -tol * scale;
    if !f(0.0) {
        return hermitian_min(&herm).0 / (scale * scale);
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi) && doublings < 200 {
        hi *= 2.0;
        doublings += 1;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn is_output_strictly_passive(g: &TransferMatrix) -> Result<OspReport> {
    is_output_strictly_passive_with(g, &ClassifyOptions::default())
}

pub fn is_output_strictly_passive_with(g: &TransferMatrix, opts: &ClassifyOptions) -> Result<OspReport> {
    require_stable(g)?;
    let pts = passivity_points(opts);
    let eps: Vec<f64> = pts
        .par_iter()
        .map(|&w| osp_epsilon(&eval_point(g, w), opts.tol))
        .collect();
    let mut best = 0;
    for k in 1..eps.len() {
        if eps[k] < eps[best] {
            best = k;
        }
    }
    Ok(OspReport {
        holds: eps[best] > opts.tol,
        epsilon: eps[best],
        argmin_omega: pts[best],
    })
}

/// Replays `x^* j(G(j omega) - G(j omega)^*) x` for a witness.
pub fn replay_frequency_defect(g: &TransferMatrix, omega: f64, x: &DVector<Complex64>) -> Result<f64> {
    let m = g.eval_jw(omega)?;
    let h = (&m - m.adjoint()) * J;
    Ok((x.adjoint() * h * x)[(0, 0)].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    #[test]
    fn lag_is_sni() {
        let c = classify_ni(&scalar(&[1.0], &[1.0, 1.0]));
        assert_eq!(c.verdict, NiVerdict::Sni);
        assert!(c.witness.is_none());
    }

    #[test]
    fn integrator_is_ni_with_origin_pole() {
        let g = scalar(&[1.0], &[0.0, 1.0]);
        let c = classify_ni(&g);
        assert_eq!(c.verdict, NiVerdict::Ni);
        assert_eq!(c.marginal_poles.len(), 1);
        assert_eq!(g.scaled_origin_limit(2).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn high_pass_witness() {
        let g = scalar(&[0.0, 1.0], &[1.0, 1.0]);
        let c = classify_ni(&g);
        assert_eq!(c.verdict, NiVerdict::NotNi);
        let w = c.witness.unwrap();
        assert_eq!(w.clause, Clause::Frequency);
        assert_eq!(w.point, WitnessPoint::Frequency(1.0));
        assert!((w.defect + 1.0).abs() < 1e-12);
        assert!((w.x[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let r = replay_frequency_defect(&g, 1.0, &w.x).unwrap();
        assert!((r - w.defect).abs() < 1e-9);
    }

    #[test]
    fn undamped_resonance_is_ni() {
        let c = classify_ni(&scalar(&[1.0], &[4.0, 0.0, 1.0]));
        assert_eq!(c.verdict, NiVerdict::Ni);
        assert_eq!(c.marginal_poles.len(), 2);
    }

    #[test]
    fn negative_resonance_fails() {
        let c = classify_ni(&scalar(&[-1.0], &[4.0, 0.0, 1.0]));
        assert_eq!(c.verdict, NiVerdict::NotNi);
    }

    #[test]
    fn unstable_pole_fails_first_clause() {
        let c = classify_ni(&scalar(&[1.0], &[-1.0, 1.0]));
        assert_eq!(c.witness.unwrap().clause, Clause::RhpPole);
    }

    #[test]
    fn triple_origin_pole_fails() {
        let c = classify_ni(&scalar(&[1.0], &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(c.verdict, NiVerdict::NotNi);
    }

    #[test]
    fn double_integrator_is_ni() {
        let c = classify_ni(&scalar(&[1.0], &[0.0, 0.0, 1.0]));
        assert_eq!(c.verdict, NiVerdict::Ni);
    }

    #[test]
    fn positive_real_examples() {
        assert!(is_positive_real(&scalar(&[1.0], &[1.0, 1.0])).unwrap().holds);
        let r = is_positive_real(&scalar(&[-1.0], &[1.0])).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness_omega, Some(0.0));
        assert!(is_positive_real(&scalar(&[0.0, 1.0], &[1.0, 1.0, 1.0])).unwrap().holds);
    }

    #[test]
    fn osp_examples() {
        let r = is_output_strictly_passive(&scalar(&[1.0], &[1.0])).unwrap();
        assert!(r.holds);
        assert!((r.epsilon - 2.0).abs() < 1e-12);
        let r = is_output_strictly_passive(&scalar(&[1.0], &[1.0, 1.0])).unwrap();
        assert!((r.epsilon - 2.0).abs() < 1e-9);
        assert!(matches!(
            is_output_strictly_passive(&scalar(&[1.0], &[0.0, 1.0])),
            Err(Error::NotStable(_))
        ));
    }
}
