//! State-space realizations, Kalman reduction and closed-loop formation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eigenvalues, sigma_min, to_complex};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::tfm::{CMatrix, RMatrix, TransferMatrix};

/// Singular values below this fraction of the system scale are treated as zero
/// during minimality reduction.
pub const RANK_TOL: f64 = 1e-9;
/// `|Re p| < AXIS_TOL (1 + |p|)` classifies a pole as lying on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-8;
/// Relative threshold on `sigma_min(I - P(inf) C(inf))` for well-posedness.
pub const WELL_POSED_TOL: f64 = 1e-10;
/// Relative distance under which roots are merged into one pole cluster.
const CLUSTER_TOL: f64 = 1e-5;
/// Absolute part of the cluster test, relative to the largest root.
const CLUSTER_FLOOR: f64 = 1e-7;
/// Relative tolerance for root multiplicities in Laurent expansions.
const LAURENT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceRealization {
    #[serde(rename = "A")]
    pub a: RMatrix,
    #[serde(rename = "B")]
    pub b: RMatrix,
    #[serde(rename = "C")]
    pub c: RMatrix,
    #[serde(rename = "D")]
    pub d: RMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleData {
    pub location: Complex64,
    /// Laurent order of the pole (largest over the entries).
    pub multiplicity: usize,
    /// `lim (s - p) G(s)`, populated only for simple imaginary-axis poles.
    pub residue_matrix: Option<CMatrix>,
}

impl PoleData {
    pub fn on_axis(&self) -> bool {
        is_axis(self.location)
    }
}

pub fn is_axis(p: Complex64) -> bool {
    p.re.abs() < AXIS_TOL * (1.0 + p.norm())
}

impl StateSpaceRealization {
    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    /// `C (sI - A)^{-1} B + D`
    pub fn transfer_at(&self, s: Complex64) -> Result<CMatrix> {
        let nx = self.states();
        let d = to_complex(&self.d);
        if nx == 0 {
            return Ok(d);
        }
        let m = CMatrix::identity(nx, nx) * s - to_complex(&self.a);
        let x = m.lu().solve(&to_complex(&self.b)).ok_or(Error::EvalAtPole(s))?;
        Ok(to_complex(&self.c) * x + d)
    }

    /// `(T^{-1} A T, T^{-1} B, C T, D)`
    pub fn similarity(&self, t: &RMatrix) -> Result<Self> {
        let ti = t.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(StateSpaceRealization {
            a: &ti * &self.a * t,
            b: &ti * &self.b,
            c: &self.c * t,
            d: self.d.clone(),
        })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        eigenvalues(&self.a)
    }

    /// Stacks per-entry controllable canonical forms. Not minimal in general.
    pub fn stacked(g: &TransferMatrix) -> Self {
        let n = g.dim();
        let d = g.instantaneous_gain();
        let mut blocks = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let e = g.entry(i, j).strictly_proper_part();
                if e.is_zero() {
                    continue;
                }
                let den = e.den();
                let m = den.degree() as usize;
                let mut a = RMatrix::zeros(m, m);
                for k in 0..m.saturating_sub(1) {
                    a[(k, k + 1)] = 1.0;
                }
                for k in 0..m {
                    a[(m - 1, k)] = -den.coeff(k);
                }
                let c: Vec<f64> = (0..m).map(|k| e.num().coeff(k)).collect();
                blocks.push((i, j, a, c));
            }
        }
        let nx: usize = blocks.iter().map(|b| b.2.nrows()).sum();
        let mut a = RMatrix::zeros(nx, nx);
        let mut b = RMatrix::zeros(nx, n);
        let mut c = RMatrix::zeros(n, nx);
        let mut off = 0;
        for (i, j, ab, cb) in blocks {
            let m = ab.nrows();
            a.view_mut((off, off), (m, m)).copy_from(&ab);
            b[(off + m - 1, j)] = 1.0;
            for (k, v) in cb.iter().enumerate() {
                c[(i, off + k)] = *v;
            }
            off += m;
        }
        StateSpaceRealization { a, b, c, d }
    }

    /// Minimal realization, assembled pole group by pole group.
    ///
    /// Each real pole cluster (or conjugate pair of clusters) gets a Jordan-form
    /// realization of its Laurent part, reduced on its own; the blocks have
    /// disjoint spectra, so their union is minimal. Working locally keeps the
    /// rank decisions independent of how widely the poles are spread.
    pub fn minimal(g: &TransferMatrix) -> Self {
        let n = g.dim();
        let d = g.instantaneous_gain();
        let sp: Vec<RationalFunction> = g.entries().iter().map(|e| e.strictly_proper_part()).collect();
        let mut dens: Vec<&Polynomial> = Vec::new();
        let mut roots = Vec::new();
        for e in sp.iter().filter(|e| !e.is_zero()) {
            if !dens.contains(&e.den()) {
                dens.push(e.den());
                roots.extend(e.den().roots());
            }
        }
        let mut blocks = Vec::new();
        for p in cluster(&roots) {
            let real = p.im == 0.0;
            if p.im < 0.0 {
                continue;
            }
            let laurent: Vec<Vec<Complex64>> = sp.iter().map(|e| laurent_coefficients(e, p)).collect();
            let k = laurent.iter().map(Vec::len).max().unwrap_or(0);
            if k == 0 {
                continue;
            }
            // R_j = coefficient of (s - p)^-j, j = 1..=k
            let r: Vec<CMatrix> = (1..=k)
                .map(|j| CMatrix::from_fn(n, n, |a, b| laurent[a * n + b].get(j - 1).copied().unwrap_or_default()))
                .collect();
            blocks.push(local_block(p, &r, real));
        }
        let nx: usize = blocks.iter().map(|b| b.states()).sum();
        let mut a = RMatrix::zeros(nx, nx);
        let mut b = RMatrix::zeros(nx, n);
        let mut c = RMatrix::zeros(n, nx);
        let mut off = 0;
        for blk in blocks {
            let m = blk.states();
            a.view_mut((off, off), (m, m)).copy_from(&blk.a);
            b.view_mut((off, 0), (m, n)).copy_from(&blk.b);
            c.view_mut((0, off), (n, m)).copy_from(&blk.c);
            off += m;
        }
        StateSpaceRealization { a, b, c, d }
    }

    /// Diagonal similarity equalizing row and column norms of `A`.
    pub fn balanced(&self) -> Self {
        let nx = self.states();
        if nx == 0 {
            return self.clone();
        }
        let mut a = self.a.clone();
        let mut scale = vec![1.0f64; nx];
        for _ in 0..100 {
            let mut converged = true;
            for i in 0..nx {
                let mut c = 0.0;
                let mut r = 0.0;
                for k in 0..nx {
                    if k != i {
                        c += a[(k, i)].abs();
                        r += a[(i, k)].abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let mut f = 1.0;
                let s = c + r;
                let (mut cc, mut rr) = (c, r);
                while cc < rr / 2.0 {
                    cc *= 2.0;
                    rr /= 2.0;
                    f *= 2.0;
                }
                while cc >= rr * 2.0 {
                    cc /= 2.0;
                    rr *= 2.0;
                    f /= 2.0;
                }
                if (cc + rr) < 0.95 * s {
                    converged = false;
                    scale[i] *= f;
                    for k in 0..nx {
                        a[(i, k)] /= f;
                        a[(k, i)] *= f;
                    }
                }
            }
            if converged {
                break;
            }
        }
        let t = RMatrix::from_diagonal(&nalgebra::DVector::from_vec(scale));
        self.similarity(&t).expect("diagonal scaling is invertible")
    }

    /// Removes uncontrollable and unobservable modes.
    pub fn reduce(&self) -> Self {
        let scale = self
            .a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(f64::MIN_POSITIVE);
        let tol = RANK_TOL * scale;
        let zc = controllable_basis(&self.a, &self.b, tol);
        let a1 = zc.transpose() * &self.a * &zc;
        let b1 = zc.transpose() * &self.b;
        let c1 = &self.c * &zc;
        let zo = controllable_basis(&a1.transpose(), &c1.transpose(), tol);
        StateSpaceRealization {
            a: zo.transpose() * &a1 * &zo,
            b: zo.transpose() * &b1,
            c: &c1 * &zo,
            d: self.d.clone(),
        }
    }
}

/// Laurent coefficients of `f` at `p`, `[R_1, ..., R_k]` with `R_j` the
/// coefficient of `(s - p)^-j`; empty when `f` has no pole there.
fn laurent_coefficients(f: &RationalFunction, p: Complex64) -> Vec<Complex64> {
    if f.is_zero() {
        return Vec::new();
    }
    // Numerator cancellation is not decided here: a vanishing numerator just
    // gives negligible coefficients, which the staircase rank test drops.
    let k = f.den().root_multiplicity(p, LAURENT_TOL);
    if k == 0 {
        return Vec::new();
    }
    let tn = f.num().taylor_at(p);
    let td = &f.den().taylor_at(p)[k..];
    // Series quotient tn / td, first k terms.
    let mut q: Vec<Complex64> = Vec::with_capacity(k);
    for i in 0..k {
        let mut acc = tn.get(i).copied().unwrap_or_default();
        for l in 1..=i.min(td.len() - 1) {
            acc -= td[l] * q[i - l];
        }
        q.push(acc / td[0]);
    }
    q.reverse();
    q
}

/// Minimal real realization of `sum_j R_j / (s - p)^j`, plus the conjugate
/// term when `p` is not real.
fn local_block(p: Complex64, r: &[CMatrix], real: bool) -> StateSpaceRealization {
    let n = r[0].nrows();
    let k = r.len();
    let kn = k * n;
    // Jordan form: x_i' = p x_i + x_{i+1}, input into the last block,
    // output sum R_{k-i} x_i.
    let mut shift = RMatrix::zeros(kn, kn);
    for i in 0..kn.saturating_sub(n) {
        shift[(i, i + n)] = 1.0;
    }
    let mut bj = RMatrix::zeros(kn, n);
    bj.view_mut((kn - n, 0), (n, n)).fill_with_identity();
    let cj = CMatrix::from_fn(n, kn, |a, col| r[k - 1 - col / n][(a, col % n)]);
    let (a, b, c) = if real {
        (shift, bj, cj.map(|z| z.re))
    } else {
        let w = p.im;
        let mut a = RMatrix::zeros(2 * kn, 2 * kn);
        a.view_mut((0, 0), (kn, kn)).copy_from(&shift);
        a.view_mut((kn, kn), (kn, kn)).copy_from(&shift);
        a.view_mut((0, kn), (kn, kn)).fill_diagonal(-w);
        a.view_mut((kn, 0), (kn, kn)).fill_diagonal(w);
        let mut b = RMatrix::zeros(2 * kn, n);
        b.view_mut((0, 0), (kn, n)).copy_from(&bj);
        let mut c = RMatrix::zeros(n, 2 * kn);
        c.view_mut((0, 0), (n, kn)).copy_from(&cj.map(|z| 2.0 * z.re));
        c.view_mut((0, kn), (n, kn)).copy_from(&cj.map(|z| -2.0 * z.im));
        (a, b, c)
    };
    // Reduce with the real part removed; it commutes with everything.
    let local = StateSpaceRealization {
        a,
        b,
        c,
        d: RMatrix::zeros(n, n),
    }
    .reduce();
    let m = local.states();
    StateSpaceRealization {
        a: local.a + RMatrix::identity(m, m) * p.re,
        ..local
    }
}

/// Orthonormal basis of the controllable subspace via the staircase algorithm.
fn controllable_basis(a: &RMatrix, b: &RMatrix, tol: f64) -> RMatrix {
    let nx = a.nrows();
    let mut z = RMatrix::identity(nx, nx);
    let mut at = a.clone();
    let mut blk = b.clone();
    let mut off = 0;
    while off < nx && blk.ncols() > 0 {
        let m = nx - off;
        let (t, r) = pivoted_qr_basis(&blk, tol);
        if r == 0 {
            break;
        }
        let mut full = RMatrix::identity(nx, nx);
        full.view_mut((off, off), (m, m)).copy_from(&t);
        at = full.transpose() * &at * &full;
        z = &z * &full;
        blk = at.view((off + r, off), (m - r, r)).into_owned();
        off += r;
    }
    z.columns(0, off).into_owned()
}

/// Householder QR with column pivoting. Returns the full orthogonal `Q` and
/// the numerical rank (pivot column norms above `tol`).
fn pivoted_qr_basis(m: &RMatrix, tol: f64) -> (RMatrix, usize) {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut q = RMatrix::identity(rows, rows);
    let mut rank = 0;
    for j in 0..rows.min(cols) {
        let (p, norm) = (j..cols)
            .map(|c| (c, a.view((j, c), (rows - j, 1)).norm()))
            .fold((j, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if norm <= tol {
            break;
        }
        a.swap_columns(j, p);
        let mut v = a.view((j, j), (rows - j, 1)).into_owned();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vn = v.norm();
        if vn > 0.0 {
            v /= vn;
            let mut tail = a.view_mut((j, j), (rows - j, cols - j));
            let w = v.transpose() * &tail;
            tail -= &v * w * 2.0;
            let mut qt = q.view_mut((0, j), (rows, rows - j));
            let w = &qt * &v;
            qt -= w * v.transpose() * 2.0;
        }
        rank += 1;
    }
    (q, rank)
}

/// Poles of `G` from its minimal realization, merged by location, with Laurent
/// orders and residues at simple imaginary-axis poles.
pub fn poles(g: &TransferMatrix) -> Vec<PoleData> {
    let real = StateSpaceRealization::minimal(g);
    let eig = real.eigenvalues();
    let clusters = cluster(&eig);
    let mut out = Vec::new();
    for mut p in clusters {
        if is_axis(p) {
            p = Complex64::new(0.0, p.im);
        }
        if p.im.abs() < 1e-14 * (1.0 + p.re.abs()) {
            p = Complex64::new(p.re, 0.0);
        }
        let order = (0..g.dim() * g.dim())
            .map(|k| g.entries()[k].pole_order_at(p, 1e-7))
            .max()
            .unwrap_or(0)
            .max(1) as usize;
        let residue_matrix = if order == 1 && is_axis(p) {
            let n = g.dim();
            Some(CMatrix::from_fn(n, n, |i, j| g.entry(i, j).residue_at(p, 1e-7)))
        } else {
            None
        };
        out.push(PoleData {
            location: p,
            multiplicity: order,
            residue_matrix,
        });
    }
    out.sort_by(|a, b| {
        a.location
            .re
            .total_cmp(&b.location.re)
            .then(a.location.im.total_cmp(&b.location.im))
    });
    out
}

/// Groups nearby eigenvalues and returns the cluster means. Closeness is
/// relative to the magnitudes, with an absolute floor tied to the largest
/// magnitude so split multiple roots near the origin still merge.
fn cluster(eig: &[Complex64]) -> Vec<Complex64> {
    let floor = CLUSTER_FLOOR * eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let close = |w: Complex64, z: Complex64| (w - z).norm() <= CLUSTER_TOL * w.norm().max(z.norm()) + floor;
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &z in eig {
        match groups.iter_mut().find(|g| g.iter().any(|&w| close(w, z))) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    let spread = floor / CLUSTER_FLOOR;
    groups
        .into_iter()
        .map(|g| {
            let m = g.iter().sum::<Complex64>() / g.len() as f64;
            // Relative root tests degrade next to the origin; snap it exactly.
            if m.norm() <= 1e-12 * spread {
                Complex64::new(0.0, 0.0)
            } else if m.im.abs() <= CLUSTER_TOL * m.norm() + floor {
                Complex64::new(m.re, 0.0)
            } else {
                m
            }
        })
        .collect()
}

/// `sigma_min(I - Dp Dc)` relative to the size of the product.
pub fn well_posedness_margin(dp: &RMatrix, dc: &RMatrix) -> f64 {
    let n = dp.nrows();
    let m = RMatrix::identity(n, n) - dp * dc;
    sigma_min(&m) / (1.0 + dp.norm() * dc.norm())
}

/// State matrix of the positive feedback interconnection `[P, C]`
/// (`u1 = w1 + y2`, `u2 = w2 + y1`), built from minimal realizations.
pub fn close_loop(p: &TransferMatrix, c: &TransferMatrix) -> Result<StateSpaceRealization> {
    if p.dim() != c.dim() {
        return Err(Error::DimensionMismatch(format!("P is {}, C is {}", p.dim(), c.dim())));
    }
    let rp = StateSpaceRealization::minimal(p);
    let rc = StateSpaceRealization::minimal(c);
    close_loop_realizations(&rp, &rc)
}

pub fn close_loop_realizations(
    rp: &StateSpaceRealization,
    rc: &StateSpaceRealization,
) -> Result<StateSpaceRealization> {
    let n = rp.d.nrows();
    if well_posedness_margin(&rp.d, &rc.d) <= WELL_POSED_TOL {
        return Err(Error::IllPosed);
    }
    // u1 = R (Dc Cp xp + Cc xc), R = (I - Dc Dp)^{-1}; u2 = Cp xp + Dp u1.
    let r = (RMatrix::identity(n, n) - &rc.d * &rp.d)
        .try_inverse()
        .ok_or(Error::IllPosed)?;
    let (np, nc) = (rp.states(), rc.states());
    let u1_xp = &r * &rc.d * &rp.c;
    let u1_xc = &r * &rc.c;
    let u2_xp = &rp.c + &rp.d * &u1_xp;
    let u2_xc = &rp.d * &u1_xc;
    let mut a = RMatrix::zeros(np + nc, np + nc);
    a.view_mut((0, 0), (np, np)).copy_from(&(&rp.a + &rp.b * &u1_xp));
    a.view_mut((0, np), (np, nc)).copy_from(&(&rp.b * &u1_xc));
    a.view_mut((np, 0), (nc, np)).copy_from(&(&rc.b * &u2_xp));
    a.view_mut((np, np), (nc, nc)).copy_from(&(&rc.a + &rc.b * &u2_xc));
    // Inputs (w1, w2), outputs (u1, u2): enough for pole computations.
    let mut b = RMatrix::zeros(np + nc, 2 * n);
    let rw = r.clone();
    b.view_mut((0, 0), (np, n)).copy_from(&(&rp.b * &rw));
    b.view_mut((np, n), (nc, n)).copy_from(&rc.b);
    let mut cm = RMatrix::zeros(2 * n, np + nc);
    cm.view_mut((0, 0), (n, np)).copy_from(&u1_xp);
    cm.view_mut((0, np), (n, nc)).copy_from(&u1_xc);
    cm.view_mut((n, 0), (n, np)).copy_from(&u2_xp);
    cm.view_mut((n, np), (n, nc)).copy_from(&u2_xc);
    Ok(StateSpaceRealization {
        a,
        b,
        c: cm,
        d: DMatrix::zeros(2 * n, 2 * n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;

    fn scalar(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(RationalFunction::from_coeffs(n, d).unwrap()).unwrap()
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn integrator_pole() {
        let p = poles(&scalar(&[1.0], &[0.0, 1.0]));
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].location, Complex64::new(0.0, 0.0));
        assert_eq!(p[0].multiplicity, 1);
        let r = p[0].residue_matrix.as_ref().unwrap();
        assert!((r[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn resonant_poles_and_residues() {
        let p = poles(&scalar(&[1.0], &[4.0, 0.0, 1.0]));
        assert_eq!(p.len(), 2);
        // -2j then +2j
        assert!((p[0].location - Complex64::new(0.0, -2.0)).norm() < 1e-10);
        let r0 = p[0].residue_matrix.as_ref().unwrap()[(0, 0)];
        let r1 = p[1].residue_matrix.as_ref().unwrap()[(0, 0)];
        assert!((r0 - Complex64::new(0.0, 0.25)).norm() < 1e-10);
        assert!((r1 - Complex64::new(0.0, -0.25)).norm() < 1e-10);
    }

    #[test]
    fn repeated_channel_pole_merged() {
        let g = TransferMatrix::from_fn(2, |i, j| {
            if i == j {
                RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()
            } else {
                RationalFunction::zero()
            }
        })
        .unwrap();
        let p = poles(&g);
        assert_eq!(p.len(), 1);
        assert!((p[0].location + 1.0).norm() < 1e-10);
        assert_eq!(p[0].multiplicity, 1);
    }

    #[test]
    fn closed_loop_examples() {
        let cl = close_loop(&scalar(&[1.0], &[1.0, 1.0]), &scalar(&[-1.0], &[1.0])).unwrap();
        let e = cl.eigenvalues();
        assert_eq!(e.len(), 1);
        assert!((e[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);

        assert_eq!(
            close_loop(&scalar(&[1.0], &[1.0]), &scalar(&[1.0], &[1.0])).unwrap_err(),
            Error::IllPosed
        );

        let cl = close_loop(&scalar(&[2.0], &[1.0, 1.0]), &scalar(&[1.0], &[1.0, 1.0])).unwrap();
        let e = sorted_re(cl.eigenvalues());
        let r2 = 2f64.sqrt();
        assert!((e[0].re - (-1.0 - r2)).abs() < 1e-10);
        assert!((e[1].re - (-1.0 + r2)).abs() < 1e-10);
    }

    #[test]
    fn non_minimal_entry_is_reduced() {
        // Same pole in both entries of a rank-one 2x2: McMillan degree one.
        let g = TransferMatrix::from_fn(2, |_, _| RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap())
            .unwrap();
        let r = StateSpaceRealization::minimal(&g);
        assert_eq!(r.states(), 1);
        let v = r.transfer_at(Complex64::new(0.3, 0.9)).unwrap();
        let w = g.eval_at(Complex64::new(0.3, 0.9)).unwrap();
        assert!((v - w).norm() < 1e-10);
    }

    fn matches(r: &StateSpaceRealization, g: &TransferMatrix) {
        for s0 in [Complex64::new(0.3, 0.9), Complex64::new(-0.01, 2.0), Complex64::new(5.0, -40.0)] {
            let v = r.transfer_at(s0).unwrap();
            let w = g.eval_at(s0).unwrap();
            assert!((&v - &w).norm() <= 1e-8 * w.norm().max(1.0), "at {s0}: {v} vs {w}");
        }
    }

    #[test]
    fn wide_pole_spread_rank_one_modes() {
        // Integrator plus modes at 81 and 0.011 rad/s, each rank one in 3x3.
        let dirs = [[1.0, 0.2, -0.3], [0.1, -0.7, 0.4], [0.5, 0.5, 0.9]];
        let modes = [
            RationalFunction::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap(),
            RationalFunction::from_coeffs(&[6561.0], &[6561.0, 6.0, 1.0]).unwrap(),
            RationalFunction::from_coeffs(&[1.21e-4], &[1.21e-4, 2e-3, 1.0]).unwrap(),
        ];
        let mut g = TransferMatrix::zeros(3);
        for (d, m) in dirs.iter().zip(&modes) {
            let a = nalgebra::DVector::from_column_slice(d);
            g = g.add(&TransferMatrix::scalar_times(m, &(&a * a.transpose())).unwrap()).unwrap();
        }
        let r = StateSpaceRealization::minimal(&g);
        assert_eq!(r.states(), 5);
        matches(&r, &g);
    }

    #[test]
    fn jordan_blocks_kept() {
        let g = scalar(&[1.0], &[0.0, 0.0, 1.0]);
        let r = StateSpaceRealization::minimal(&g);
        assert_eq!(r.states(), 2);
        matches(&r, &g);
        // (s^2 + 1)^2
        let g = scalar(&[1.0, 1.0], &[1.0, 0.0, 2.0, 0.0, 1.0]);
        let r = StateSpaceRealization::minimal(&g);
        assert_eq!(r.states(), 4);
        matches(&r, &g);
    }

    #[test]
    fn slow_resonance_not_merged_into_origin() {
        let g = scalar(&[1e-12], &[1.5e-12, 0.0, 1.0]);
        let r = StateSpaceRealization::minimal(&g);
        assert_eq!(r.states(), 2);
        let p = poles(&g);
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|p| p.location.re == 0.0 && p.location.im.abs() > 1e-6));
    }
}
