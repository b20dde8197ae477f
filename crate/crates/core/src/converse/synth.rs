//! Destabilizing plant constructions, one per failed controller condition.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    necessity_check, plant_in_class, require_stable_controller, ClassKind, NecessityStatus, NecessityVerdict,
    UncertaintyClass, ViolationKind,
};
use crate::classify::{classify_ni, frequency_grid, ClassifyOptions, NiVerdict};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::spectral::{sigma_min_c, sym_eig_desc, symmetrize};
use crate::stability::MARGIN;
use crate::tfm::{affine, CMatrix, RMatrix, TransferMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecipeKind {
    #[serde(rename = "ResonantRankOne_eps")]
    ResonantRankOneEps,
    CatalogSecondOrder,
    SchurConstant,
    SchurFirstOrder,
    SchurIntegrator,
    InstGainLag,
    InverseStaticGain,
    ResonantPlusLossless,
}

impl RecipeKind {
    /// Recipes whose singularity is pinned at `s = j omega0`.
    pub fn frequency_pinned(self) -> bool {
        matches!(
            self,
            RecipeKind::ResonantRankOneEps | RecipeKind::CatalogSecondOrder | RecipeKind::ResonantPlusLossless
        )
    }
}

/// The second-order catalog parameter, labelled by the phase case it serves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", content = "value")]
pub enum CatalogParam {
    #[serde(rename = "a")]
    A(f64),
    #[serde(rename = "b")]
    B(f64),
    #[serde(rename = "c")]
    C(f64),
    #[serde(rename = "d")]
    D(f64),
    #[serde(rename = "e")]
    E(f64),
}

impl CatalogParam {
    pub fn value(self) -> f64 {
        match self {
            CatalogParam::A(v) | CatalogParam::B(v) | CatalogParam::C(v) | CatalogParam::D(v) | CatalogParam::E(v) => v,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CatalogParam::A(_) => "a",
            CatalogParam::B(_) => "b",
            CatalogParam::C(_) => "c",
            CatalogParam::D(_) => "d",
            CatalogParam::E(_) => "e",
        }
    }

    fn with_value(self, v: f64) -> Self {
        match self {
            CatalogParam::A(_) => CatalogParam::A(v),
            CatalogParam::B(_) => CatalogParam::B(v),
            CatalogParam::C(_) => CatalogParam::C(v),
            CatalogParam::D(_) => CatalogParam::D(v),
            CatalogParam::E(_) => CatalogParam::E(v),
        }
    }
}

/// Coefficients (ascending) of the positive real factor `n(s)` used by the
/// resonant recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveRealFactor {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecipe {
    pub recipe_kind: RecipeKind,
    pub violation: ViolationKind,
    pub omega0: Option<f64>,
    pub x: Option<DVector<Complex64>>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<DVector<f64>>,
    pub beta: Option<DVector<f64>>,
    pub catalog_param: Option<CatalogParam>,
    /// Open interval the catalog parameter (or epsilon) must lie in.
    pub interval: Option<(f64, f64)>,
    pub epsilon: Option<f64>,
    pub m: Option<RMatrix>,
    pub u: Option<RMatrix>,
    pub d: Option<Vec<f64>>,
    pub e0: Option<RMatrix>,
    pub pr_factor: Option<PositiveRealFactor>,
    /// Weight of the `I/(s+1)` term that makes rank-one catalog plants SNI.
    pub filler: Option<f64>,
    pub plant: TransferMatrix,
}

impl CounterexampleRecipe {
    fn new(kind: RecipeKind, violation: ViolationKind, plant: TransferMatrix) -> Self {
        CounterexampleRecipe {
            recipe_kind: kind,
            violation,
            omega0: None,
            x: None,
            r: None,
            theta: None,
            alpha: None,
            beta: None,
            catalog_param: None,
            interval: None,
            epsilon: None,
            m: None,
            u: None,
            d: None,
            e0: None,
            pr_factor: None,
            filler: None,
            plant,
        }
    }
}

fn rf(num: Polynomial, den: Polynomial) -> RationalFunction {
    RationalFunction::new(num, den).expect("nonzero denominator")
}

fn poly(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

/// `f(s) q(s) f(-s)^T` with `f(s) = alpha s + beta`.
fn rank_one(q: &RationalFunction, alpha: &DVector<f64>, beta: &DVector<f64>) -> TransferMatrix {
    let n = beta.len();
    TransferMatrix::from_fn(n, |i, j| {
        let fi = affine(alpha[i], beta[i]);
        let fj = affine(-alpha[j], beta[j]);
        q.mul_poly(&(&fi * &fj))
    })
    .expect("finite coefficients")
}

fn add_diag(p: &TransferMatrix, g: &RationalFunction) -> TransferMatrix {
    let n = p.dim();
    TransferMatrix::from_fn(n, |i, j| if i == j { p.entry(i, j) + g } else { p.entry(i, j).clone() }).expect("finite")
}

/// Scalar catalog entry `K / (r (s^2 + b1 s + X^2))`.
pub fn catalog_p(param: CatalogParam, omega0: f64, r: f64, theta: f64) -> RationalFunction {
    let w2 = omega0 * omega0;
    let (k, b1, x2) = match param {
        CatalogParam::A(a) => (a * a - w2, 0.0, a * a),
        CatalogParam::B(b) => (w2 - b * b, 0.0, b * b),
        CatalogParam::C(c) => (c * omega0, c, w2),
        CatalogParam::D(v) | CatalogParam::E(v) => {
            let delta = v * v - w2;
            (delta / theta.cos(), delta * theta.tan() / omega0, v * v)
        }
    };
    rf(poly(&[k]), poly(&[r * x2, r * b1, r]))
}

/// Scalar factor of the positive real correction: stable, biproper,
/// `Re n(jw) >= 0` with equality only at `omega0`, and `n(j omega0) = -j`.
pub fn pr_factor(omega0: f64) -> RationalFunction {
    let w2 = omega0 * omega0;
    rf(poly(&[w2, 0.5 * omega0, 0.5]), poly(&[0.5 * w2, 0.5 * omega0, 1.0]))
}

/// `N(s) = n(s) alpha alpha^T`, positive real in RH-infinity with
/// `N(j omega0) = -j alpha alpha^T`.
pub fn positive_real_term(omega0: f64, alpha: &DVector<f64>) -> TransferMatrix {
    TransferMatrix::scalar_times(&pr_factor(omega0), &(alpha * alpha.transpose())).expect("finite")
}

/// `P = G - G(inf) + (omega0/s) N` with `G = f(s) f(-s)^T / (s^2 + omega0^2)`.
/// Since `G(inf) = -alpha alpha^T`, `P = G + (1 + omega0 n(s)/s) alpha alpha^T`.
pub fn resonant_plus_lossless(omega0: f64, alpha: &DVector<f64>, beta: &DVector<f64>) -> TransferMatrix {
    let g = rank_one(&rf(poly(&[1.0]), poly(&[omega0 * omega0, 0.0, 1.0])), alpha, beta);
    let n = pr_factor(omega0);
    let tail = &RationalFunction::constant(1.0) + &rf(n.num().scale(omega0), n.den().shift_up(1));
    g.add(&TransferMatrix::scalar_times(&tail, &(alpha * alpha.transpose())).expect("finite"))
        .expect("same dimension")
}

fn c_at(c: &TransferMatrix, omega: f64) -> CMatrix {
    c.eval_jw(omega).expect("stable controller is finite on the axis")
}

fn golden(lo: f64, hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        x1
    } else {
        x2
    }
}

/// Minimizes `f` over the classification grid, then polishes between the
/// neighbours of the best grid point. Ties go to the frequency nearest 1.
fn grid_minimize(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let grid = frequency_grid(&ClassifyOptions::default(), &[]);
    let vals: Vec<f64> = grid.iter().map(|&w| f(w)).collect();
    let mut best = 0;
    for k in 1..grid.len() {
        let better = vals[k] < vals[best]
            || (vals[k] == vals[best] && grid[k].ln().abs() < grid[best].ln().abs());
        if better {
            best = k;
        }
    }
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();
    let t = golden(lo, hi, 80, |t| f(t.exp()));
    let (w, v) = (t.exp(), f(t.exp()));
    if v < vals[best] {
        (w, v)
    } else {
        (grid[best], vals[best])
    }
}

/// Real direction maximizing `Im(x^T C(j w) x)`: `(omega, x, value)`.
fn real_witness(c: &TransferMatrix) -> (f64, DVector<f64>, f64) {
    let top = |w: f64| {
        let m = c_at(c, w);
        let im = symmetrize(&m.map(|z| z.im));
        sym_eig_desc(&im).0[0]
    };
    let (omega, neg) = grid_minimize(|w| -top(w));
    let m = c_at(c, omega);
    let (_, u) = sym_eig_desc(&symmetrize(&m.map(|z| z.im)));
    (omega, u.column(0).into_owned(), -neg)
}

fn quad(x: &DVector<Complex64>, m: &CMatrix) -> Complex64 {
    (x.adjoint() * m * x)[(0, 0)]
}

fn real_to_complex(x: &DVector<f64>) -> DVector<Complex64> {
    x.map(|v| Complex64::new(v, 0.0))
}

/// Principal argument, snapped to `0`, `pi/2` or `pi` within `1e-9`.
fn phase(z: Complex64) -> f64 {
    let t = z.arg();
    if t.sin().abs() <= 1e-9 {
        if t.cos() > 0.0 {
            0.0
        } else {
            PI
        }
    } else if t.cos().abs() <= 1e-9 && t > 0.0 {
        FRAC_PI_2
    } else {
        t
    }
}

fn gamma_eff(cls: &UncertaintyClass) -> f64 {
    cls.gamma.unwrap_or(1.0)
}

struct Catalog {
    param: CatalogParam,
    interval: (f64, f64),
    /// Endpoint that can never violate the dc bound.
    safe: f64,
}

/// Interval and interior choice for the phase case of `theta`; `b2 = |beta|^2`.
fn catalog_choice(omega0: f64, r: f64, theta: f64, b2: f64, gamma: f64) -> Catalog {
    let w2 = omega0 * omega0;
    let mid_sq = |lo: f64, hi: f64| ((lo * lo + hi * hi) / 2.0).sqrt();
    if theta == 0.0 || (theta > 0.0 && theta < FRAC_PI_2) {
        let shrink = if theta == 0.0 { gamma * r } else { gamma * r * theta.cos() };
        let (hi, v) = if b2 > shrink {
            let hi = (w2 * b2 / (b2 - shrink)).sqrt();
            (hi, mid_sq(omega0, hi))
        } else {
            (f64::INFINITY, 2.0 * omega0)
        };
        let param = if theta == 0.0 { CatalogParam::A(v) } else { CatalogParam::D(v) };
        Catalog {
            param,
            interval: (omega0, hi),
            safe: omega0,
        }
    } else if theta == PI || theta > FRAC_PI_2 {
        let grow = if theta == PI { gamma * r } else { -gamma * r * theta.cos() };
        let lo = (w2 * b2 / (b2 + grow)).sqrt();
        let v = mid_sq(lo, omega0);
        let param = if theta == PI { CatalogParam::B(v) } else { CatalogParam::E(v) };
        Catalog {
            param,
            interval: (lo, omega0),
            safe: omega0,
        }
    } else {
        let hi = gamma * r * omega0 / b2;
        Catalog {
            param: CatalogParam::C(hi / 2.0),
            interval: (0.0, hi),
            safe: 0.0,
        }
    }
}

struct Witness {
    omega0: f64,
    x: DVector<Complex64>,
}

fn split(x: &DVector<Complex64>, omega0: f64) -> (DVector<f64>, DVector<f64>) {
    (x.map(|z| z.im / omega0), x.map(|z| z.re))
}

fn scale_of(m: &CMatrix) -> f64 {
    m.norm().max(1.0)
}

/// Frequency witness for a failed NI (`strict`) or SNI condition, restricted
/// to real directions when the class needs them.
fn pick_witness(c: &TransferMatrix, v: &NecessityVerdict, real_only: bool, strict: bool) -> Option<Witness> {
    let viol = v.violation.as_ref()?;
    if let (Some(omega0), Some(x)) = (viol.omega0, viol.x.as_ref()) {
        if omega0 > 0.0 && (!real_only || x.iter().all(|z| z.im.abs() <= 1e-14)) {
            let x = if real_only { x.map(|z| Complex64::new(z.re, 0.0)) } else { x.clone() };
            let z = quad(&x, &c_at(c, omega0));
            let tol = 1e-9 * scale_of(&c_at(c, omega0));
            if (strict && z.im > tol) || (!strict && z.im >= -tol) {
                return Some(Witness {
                    omega0,
                    x: x.unscale(x.norm()),
                });
            }
        }
    }
    let (omega0, x, top) = real_witness(c);
    let tol = 1e-9 * scale_of(&c_at(c, omega0));
    if (strict && top > tol) || (!strict && top >= -tol) {
        let x = real_to_complex(&x);
        let x = crate::spectral::normalize_phase(&x);
        Some(Witness { omega0, x })
    } else {
        None
    }
}

/// Catalog or resonant plant from a frequency witness.
fn frequency_recipe(
    c: &TransferMatrix,
    cls: &UncertaintyClass,
    kind: ViolationKind,
    w: Witness,
) -> Result<CounterexampleRecipe> {
    let n = c.dim();
    let gamma = gamma_eff(cls);
    let omega0 = w.omega0;
    let (alpha, beta) = split(&w.x, omega0);
    let b2 = beta.norm_squared();
    let cj = c_at(c, omega0);
    let z0 = quad(&w.x, &cj);
    let scale = scale_of(&cj);
    let sni = cls.kind.sni_plants();

    if !sni && z0.norm() <= 1e-12 * scale {
        let eps = (gamma * omega0 * omega0 / (2.0 * b2)).min(1.0);
        let q = rf(poly(&[eps]), poly(&[omega0 * omega0, 0.0, 1.0]));
        let mut rec = CounterexampleRecipe::new(RecipeKind::ResonantRankOneEps, kind, rank_one(&q, &alpha, &beta));
        rec.omega0 = Some(omega0);
        rec.x = Some(w.x);
        rec.alpha = Some(alpha);
        rec.beta = Some(beta);
        rec.epsilon = Some(eps);
        rec.interval = Some((0.0, gamma * omega0 * omega0 / b2));
        return Ok(rec);
    }

    // SNI classes get a diagonal first-order term: rank-one plants are never
    // SNI for n >= 2, and it keeps the high-frequency tail strictly NI.
    let mut delta = if sni { 0.1 * gamma } else { 0.0 };
    for _ in 0..60 {
        let (z, h_delta) = if delta > 0.0 {
            let h = Complex64::new(1.0, omega0).inv() * delta;
            let a = CMatrix::identity(n, n) - &cj * h;
            let ainv = a.try_inverse().ok_or(Error::Singular)?;
            (quad(&w.x, &(&cj * ainv)), delta)
        } else {
            (z0, 0.0)
        };
        let r = z.norm();
        let theta = phase(z);
        if z.im < 0.0 && theta != 0.0 && theta != PI {
            if delta > 0.0 {
                delta /= 2.0;
                continue;
            }
            return Err(Error::NotSynthesizable(format!(
                "witness x*C(j{omega0})x = {z} lies below the real axis"
            )));
        }
        if sni && (theta == 0.0 || theta == PI) {
            if delta > 0.0 && z0.im > 1e-9 * scale {
                delta /= 2.0;
                continue;
            }
            return Err(Error::NotSynthesizable(
                "SNI class needs a witness with Im(x*Cx) > 0".into(),
            ));
        }
        let gamma_c = gamma - h_delta;
        let mut cat = catalog_choice(omega0, r, theta, b2, gamma_c);
        let filler = (delta > 0.0).then(|| rf(poly(&[delta]), poly(&[1.0, 1.0])));
        let build = |param: CatalogParam| {
            let p = rank_one(&catalog_p(param, omega0, r, theta), &alpha, &beta);
            match &filler {
                Some(g) => add_diag(&p, g),
                None => p,
            }
        };
        let mut plant = build(cat.param);
        let mut ok = false;
        for _ in 0..60 {
            if dc_within(&plant, cls) {
                ok = true;
                break;
            }
            let v = (cat.param.value() + cat.safe) / 2.0;
            cat.param = cat.param.with_value(v);
            plant = build(cat.param);
        }
        if !ok {
            return Err(Error::NotSynthesizable("catalog plant exceeds the dc bound".into()));
        }
        if sni && classify_ni(&plant).verdict != NiVerdict::Sni && delta > 1e-6 * gamma {
            delta /= 2.0;
            continue;
        }
        let mut rec = CounterexampleRecipe::new(RecipeKind::CatalogSecondOrder, kind, plant);
        rec.omega0 = Some(omega0);
        rec.x = Some(w.x);
        rec.r = Some(r);
        rec.theta = Some(theta);
        rec.alpha = Some(alpha);
        rec.beta = Some(beta);
        rec.catalog_param = Some(cat.param);
        rec.interval = Some(cat.interval);
        rec.filler = (delta > 0.0).then_some(delta);
        return Ok(rec);
    }
    Err(Error::NotSynthesizable("no admissible filler weight".into()))
}

fn dc_within(p: &TransferMatrix, cls: &UncertaintyClass) -> bool {
    let Some(gamma) = cls.gamma else { return true };
    match p.static_gain() {
        Some(p0) => {
            let top = sym_eig_desc(&p0).0[0];
            if cls.kind == ClassKind::N0InstNonnegDcStrict {
                top < gamma
            } else {
                top <= gamma
            }
        }
        None => false,
    }
}

/// `C(0) = U diag(d) U^T` with `d` descending.
fn schur(c: &TransferMatrix) -> (RMatrix, Vec<f64>, RMatrix) {
    let c0 = symmetrize(&c.static_gain().expect("stable controller"));
    let (d, u) = sym_eig_desc(&c0);
    (c0, d, u)
}

fn lag(k: f64) -> RationalFunction {
    rf(poly(&[k]), poly(&[1.0, 1.0]))
}

fn static_recipe(c: &TransferMatrix, cls: &UncertaintyClass) -> Result<CounterexampleRecipe> {
    let n = c.dim();
    let (c0, d, u) = schur(c);
    let u1 = u.column(0).into_owned();
    let p1 = &u1 * u1.transpose();
    let kind = ViolationKind::StaticGainBound;
    let lam = d[0];
    let mut rec = match cls.kind {
        ClassKind::StrictlyProperNI | ClassKind::NiNoDoubleOriginPole => {
            if lam.abs() <= MARGIN * (1.0 + c0.norm()) {
                let e0 = c.derivative_at_zero()?;
                let a = 1.0 / (2.0 * (e0.norm() + 1.0));
                let m = &p1 * a;
                let integ = rf(poly(&[1.0]), poly(&[0.0, 1.0]));
                let mut rec = CounterexampleRecipe::new(
                    RecipeKind::SchurIntegrator,
                    kind,
                    TransferMatrix::scalar_times(&integ, &m)?,
                );
                let mut dd = vec![0.0; n];
                dd[0] = a;
                rec.d = Some(dd);
                rec.m = Some(m);
                rec.e0 = Some(e0);
                rec
            } else {
                let m = &p1 / lam;
                let mut rec =
                    CounterexampleRecipe::new(RecipeKind::SchurFirstOrder, kind, TransferMatrix::scalar_times(&lag(1.0), &m)?);
                let mut dd = vec![0.0; n];
                dd[0] = 1.0 / lam;
                rec.d = Some(dd);
                rec.m = Some(m);
                rec
            }
        }
        ClassKind::SniInstNonneg => {
            let m = &p1 / lam + (RMatrix::identity(n, n) - &p1);
            let mut rec =
                CounterexampleRecipe::new(RecipeKind::SchurFirstOrder, kind, TransferMatrix::scalar_times(&lag(1.0), &m)?);
            let mut dd = vec![1.0; n];
            dd[0] = 1.0 / lam;
            rec.d = Some(dd);
            rec.m = Some(m);
            rec
        }
        ClassKind::N0DcBounded | ClassKind::N0DcBoundedNonneg | ClassKind::N0InstNonnegDcStrict => {
            let m = RMatrix::identity(n, n) / lam;
            let mut rec = CounterexampleRecipe::new(RecipeKind::SchurConstant, kind, TransferMatrix::constant(&m));
            rec.m = Some(m);
            rec
        }
        ClassKind::SniInstNonnegDcBounded | ClassKind::SniDcBounded | ClassKind::SniDcBoundedNonneg => {
            let m = RMatrix::identity(n, n) / lam;
            let mut rec =
                CounterexampleRecipe::new(RecipeKind::SchurFirstOrder, kind, TransferMatrix::scalar_times(&lag(1.0), &m)?);
            rec.m = Some(m);
            rec
        }
    };
    if rec.d.is_none() {
        rec.d = Some(d);
    }
    rec.u = Some(u);
    Ok(rec)
}

fn inst_gain_recipe(c: &TransferMatrix) -> Result<CounterexampleRecipe> {
    let n = c.dim();
    let (d, u) = sym_eig_desc(&symmetrize(&c.instantaneous_gain()));
    let lam = d[n - 1];
    let g = rf(poly(&[0.0, 1.0 / lam]), poly(&[1.0, 1.0]));
    let mut rec = CounterexampleRecipe::new(
        RecipeKind::InstGainLag,
        ViolationKind::InstGainSign,
        TransferMatrix::scalar_times(&g, &RMatrix::identity(n, n))?,
    );
    rec.d = Some(d);
    rec.u = Some(u);
    Ok(rec)
}

/// `C(j w)` singular at some `w > 0` while `C` is NI: resonant plant plus a
/// lossless correction.
fn singular_recipe(c: &TransferMatrix, kind: ViolationKind) -> Result<CounterexampleRecipe> {
    let (omega0, smin) = grid_minimize(|w| {
        let m = c_at(c, w);
        sigma_min_c(&m) / scale_of(&m)
    });
    if smin >= 1e-9 {
        return Err(Error::NotSynthesizable(
            "C is pointwise strictly NI but not uniformly so; the general construction is not implemented".into(),
        ));
    }
    let m = c_at(c, omega0);
    let (_, t1) = crate::spectral::min_left_singular(&m);
    let t1 = crate::spectral::normalize_phase(&t1);
    let (alpha, beta) = split(&t1, omega0);
    let plant = resonant_plus_lossless(omega0, &alpha, &beta);
    let n = pr_factor(omega0);
    let mut rec = CounterexampleRecipe::new(RecipeKind::ResonantPlusLossless, kind, plant);
    rec.omega0 = Some(omega0);
    rec.x = Some(t1);
    rec.alpha = Some(alpha);
    rec.beta = Some(beta);
    rec.pr_factor = Some(PositiveRealFactor {
        num: n.num().coeffs().to_vec(),
        den: n.den().coeffs().to_vec(),
    });
    Ok(rec)
}

/// Destabilizers for the strictly proper NI class.
fn strictly_proper_recipe(c: &TransferMatrix, cls: &UncertaintyClass, v: &NecessityVerdict) -> Result<CounterexampleRecipe> {
    let viol = v.violation.as_ref().expect("violated verdict");
    match viol.kind {
        ViolationKind::StaticGainBound => static_recipe(c, cls),
        ViolationKind::NotSni | ViolationKind::NotNi => {
            if let Some(w) = pick_witness(c, v, true, false) {
                return frequency_recipe(c, cls, viol.kind, w);
            }
            if v.classification.verdict.is_ni() {
                return singular_recipe(c, viol.kind);
            }
            Err(Error::NotSynthesizable(
                "C is not NI and has no real witness direction".into(),
            ))
        }
        other => Err(Error::NotSynthesizable(format!("{other:?} does not apply to this class"))),
    }
}

pub fn synthesize_destabilizer(
    c: &TransferMatrix,
    cls: &UncertaintyClass,
    verdict: &NecessityVerdict,
) -> Result<CounterexampleRecipe> {
    require_stable_controller(c)?;
    let viol = match (verdict.status, verdict.violation.as_ref()) {
        (NecessityStatus::RobustlyStabilizing, _) | (_, None) => {
            return Err(Error::NotSynthesizable("controller satisfies the class conditions".into()))
        }
        (_, Some(v)) => v,
    };
    let rec = match viol.kind {
        ViolationKind::NonexistenceClass => {
            let c0 = c.static_gain().expect("stable controller");
            let spni = UncertaintyClass::unbounded(ClassKind::StrictlyProperNI);
            let inner = necessity_check(c, &spni)?;
            if inner.status == NecessityStatus::RobustlyStabilizing {
                let inv = symmetrize(&c0).try_inverse().ok_or(Error::Singular)?;
                let mut rec = CounterexampleRecipe::new(
                    RecipeKind::InverseStaticGain,
                    ViolationKind::NonexistenceClass,
                    TransferMatrix::constant(&inv),
                );
                rec.m = Some(inv);
                rec
            } else {
                strictly_proper_recipe(c, cls, &inner)?
            }
        }
        ViolationKind::StaticGainBound => static_recipe(c, cls)?,
        ViolationKind::InstGainSign => inst_gain_recipe(c)?,
        ViolationKind::NotSni | ViolationKind::NotNi => {
            if matches!(cls.kind, ClassKind::StrictlyProperNI) {
                strictly_proper_recipe(c, cls, verdict)?
            } else {
                let strict = viol.kind == ViolationKind::NotNi;
                let w = pick_witness(c, verdict, cls.kind.needs_real_witness(), strict).ok_or_else(|| {
                    Error::NotSynthesizable("no witness direction admissible for this class".into())
                })?;
                frequency_recipe(c, cls, viol.kind, w)?
            }
        }
    };
    if let Err(why) = plant_in_class(&rec.plant, cls, &classify_ni(&rec.plant)) {
        return Err(Error::NotSynthesizable(format!("constructed plant left the class: {why}")));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    fn attack(c: &TransferMatrix, cls: UncertaintyClass) -> CounterexampleRecipe {
        let v = necessity_check(c, &cls).unwrap();
        synthesize_destabilizer(c, &cls, &v).unwrap()
    }

    #[test]
    fn constant_two_against_sni_plants() {
        let rec = attack(&scalar(&[2.0], &[1.0]), UncertaintyClass::unbounded(ClassKind::SniInstNonneg));
        assert_eq!(rec.recipe_kind, RecipeKind::SchurFirstOrder);
        assert!((rec.m.unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
        let p0 = rec.plant.static_gain().unwrap()[(0, 0)];
        assert!((1.0 - 2.0 * p0).abs() < 1e-15);
    }

    #[test]
    fn inverse_static_gain() {
        let c = scalar(&[-1.0, -2.0], &[1.0, 1.0]);
        let rec = attack(&c, UncertaintyClass::unbounded(ClassKind::NiNoDoubleOriginPole));
        assert_eq!(rec.recipe_kind, RecipeKind::InverseStaticGain);
        assert!((rec.plant.static_gain().unwrap()[(0, 0)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_pass_catalog_case_d() {
        // s/(s+1) at w = 1: (1 + j)/2, so r = sqrt(2)/2 and theta = pi/4
        let c = scalar(&[0.0, 1.0], &[1.0, 1.0]);
        let cls = UncertaintyClass::bounded(ClassKind::N0DcBounded, 1.0).unwrap();
        let rec = attack(&c, cls);
        assert_eq!(rec.recipe_kind, RecipeKind::CatalogSecondOrder);
        let w = rec.omega0.unwrap();
        let z = quad(rec.x.as_ref().unwrap(), &c_at(&c, w));
        let p = catalog_p(rec.catalog_param.unwrap(), w, rec.r.unwrap(), rec.theta.unwrap());
        let pj = p.eval(Complex64::new(0.0, w)).unwrap();
        assert!((pj * z - 1.0).norm() < 1e-9);
        if (w - 1.0).abs() < 1e-12 {
            assert!((rec.theta.unwrap() - PI / 4.0).abs() < 1e-12);
            assert!((rec.catalog_param.unwrap().value() - 1.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn catalog_identity_all_cases() {
        let w0 = 1.3;
        for (theta, param) in [
            (0.0, CatalogParam::A(1.7)),
            (PI, CatalogParam::B(0.9)),
            (FRAC_PI_2, CatalogParam::C(0.4)),
            (0.6, CatalogParam::D(1.5)),
            (2.4, CatalogParam::E(1.1)),
        ] {
            let r = 0.8;
            let z = Complex64::from_polar(r, theta);
            let p = catalog_p(param, w0, r, theta).eval(Complex64::new(0.0, w0)).unwrap();
            assert!((p * z - 1.0).norm() < 1e-12, "{param:?}");
        }
    }

    #[test]
    fn resonant_plant_is_strictly_proper_ni() {
        let alpha = DVector::from_vec(vec![0.3, -0.2]);
        let beta = DVector::from_vec(vec![1.0, 0.5]);
        let p = resonant_plus_lossless(2.0, &alpha, &beta);
        assert!(p.is_strictly_proper());
        assert_eq!(p.origin_pole_order(), 1);
        assert!(classify_ni(&p).verdict.is_ni());
    }

    #[test]
    fn pr_factor_hits_minus_j() {
        for w in [0.01, 0.7, 3.0, 150.0] {
            let v = pr_factor(w).eval(Complex64::new(0.0, w)).unwrap();
            assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        }
    }
}
