//! Floating-point evaluation of the locally harmonic Maass form
//!
//! `F(z) = Delta^{1/2-k} / (C(2k-2, k-1) 2 pi) * sum_Q chi(Q) sgn(Q_z) Q(z,1)^{k-1} beta(Delta y^2 / |Q(z,1)|^2)`
//!
//! truncated to `|a| <= a_bound` and apexes `t = -b/(2a)` with `|t - Re z| <= b_window`.
//!
//! Term sizes: writing `Q(z,1) = a((z - t)^2 - r^2)`, a term is about
//! `Delta^{k-1/2} y^{2k-1} |Q(z,1)|^{-k}`, i.e. `|a|^{-k} |z - t|^{-2k}` far out.
//! The window loses `O(b_window^{1-2k})` per shell; the shell cut loses the
//! tail of an oscillating Dirichlet series in `a`. Neither bound is rigorous;
//! [`FValue::tail`] reports the outer half-shell contribution as a proxy.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::kronecker;
use crate::genus::{chi_small, GenusError};
use crate::localpoly::{LocalPolyParams, ParamError};
use crate::qforms::{middle_residues, GL2Matrix, QuadForm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaassError {
    #[error("beta argument {0} outside [0, 1]")]
    BetaDomain(f64),
    #[error("a_bound {a_bound} must be a positive multiple of N = {n}")]
    BadBound { a_bound: u64, n: u64 },
    #[error("b_window must be positive")]
    BadWindow,
    #[error("quadrature tolerance {0} outside (0, 1e-6]")]
    BadTolerance(f64),
    #[error("point must lie in the upper half-plane, got Im z = {0}")]
    NotInUpperHalfPlane(f64),
    #[error("z = {re} + {im}i is within {qz:e} of the geodesic of {form}")]
    NearGeodesic {
        re: f64,
        im: f64,
        form: Box<QuadForm>,
        qz: f64,
    },
    #[error("{0} is not in Gamma0(N)")]
    NotInGroup(Box<GL2Matrix>),
    #[error("no point on the geodesic of {0} avoids the other geodesics")]
    NoCleanPoint(Box<QuadForm>),
    #[error("the form set is empty")]
    EmptyFormSet,
    #[error("coefficient overflow")]
    TooLarge,
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Genus(#[from] GenusError),
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `beta(v; k - 1/2, 1/2) = int_0^v u^{k-3/2} (1-u)^{-1/2} du`.
///
/// Series in `v` below 1/2; above, `u = sin^2 theta` turns it into
/// `2 int_0^theta sin^{2k-2}`, reduced to `theta` by the usual recursion.
pub fn beta_incomplete(v: f64, k: u32) -> Result<f64, MaassError> {
    if !(0.0..=1.0).contains(&v) || k < 2 {
        return Err(MaassError::BetaDomain(v));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let s = k as f64 - 0.5;
    if v < 0.5 {
        // (1-u)^{-1/2} = sum (1/2)_n / n! u^n
        let (mut coef, mut pw, mut acc) = (1.0f64, v.powf(s), 0.0f64);
        for n in 0..200 {
            let term = coef * pw / (s + n as f64);
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
            coef *= (n as f64 + 0.5) / (n as f64 + 1.0);
            pw *= v;
        }
        return Ok(acc);
    }
    let theta = v.sqrt().asin();
    let (sn, cs) = theta.sin_cos();
    let mut i = theta;
    for m in 1..k {
        let m2 = 2.0 * m as f64;
        i = -sn.powi(2 * m as i32 - 1) * cs / m2 + (m2 - 1.0) / m2 * i;
    }
    Ok(2.0 * i)
}

/// Same integral by adaptive Simpson in `theta`; smooth integrand, no endpoint singularity.
pub fn beta_quadrature(v: f64, k: u32, tol: f64) -> Result<f64, MaassError> {
    if !(0.0..=1.0).contains(&v) || k < 2 {
        return Err(MaassError::BetaDomain(v));
    }
    let f = |t: f64| 2.0 * t.sin().powi(2 * k as i32 - 2);
    #[allow(clippy::too_many_arguments)]
    fn simpson(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let b = v.sqrt().asin();
    let (fa, fm, fb) = (f(0.0), f(0.5 * b), f(b));
    let whole = b / 6.0 * (fa + 4.0 * fm + fb);
    Ok(simpson(&f, 0.0, b, fa, fm, fb, whole, tol, 50))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaassEvalConfig {
    pub params: LocalPolyParams,
    pub a_bound: u64,
    /// Radius, in units of `Re z`, of the apex window.
    pub b_window: u32,
    pub quadrature_tol: f64,
    /// Minimum `|Q_z|` tolerated off the exceptional set.
    pub margin: f64,
}

impl MaassEvalConfig {
    pub fn new(params: LocalPolyParams, a_bound: u64, b_window: u32) -> Result<Self, MaassError> {
        let c = MaassEvalConfig {
            params,
            a_bound,
            b_window,
            quadrature_tol: 1e-12,
            margin: 1e-8,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), MaassError> {
        let n = self.params.n;
        if self.a_bound == 0 || !self.a_bound.is_multiple_of(n) {
            return Err(MaassError::BadBound {
                a_bound: self.a_bound,
                n,
            });
        }
        if self.b_window == 0 {
            return Err(MaassError::BadWindow);
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol <= 1e-6) {
            return Err(MaassError::BadTolerance(self.quadrature_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, MaassError> {
        if im.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(MaassError::NotInUpperHalfPlane(im));
        }
        Ok(ComplexPoint { re, im })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn from_c(z: Complex64) -> Result<Self, MaassError> {
        Self::new(z.re, z.im)
    }
}

/// Möbius action on the upper half-plane.
pub fn act(g: &GL2Matrix, z: Complex64) -> Complex64 {
    let [a, b, c, d] = g.entries_i128().expect("small matrix").map(|x| x as f64);
    (a * z + b) / (c * z + d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeodesicPolicy {
    /// Error if some retained form has `|Q_z| < margin`.
    Reject,
    /// Treat `|Q_z| < eps` as lying on the geodesic (`sgn = 0`).
    ZeroBelow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub value: Complex64,
    /// Contribution of the shells `a_bound/2 < |a| <= a_bound`.
    pub tail: f64,
    /// Smallest `|Q_z|` among the retained forms: distance indicator to the exceptional set.
    pub min_abs_qz: f64,
    pub terms: usize,
}

struct Shell {
    a: i64,
    /// `(b mod 2|a|, chi)` for every admissible class.
    roots: Vec<(i64, i32)>,
}

/// Precomputed truncated sum for one parameter set.
pub struct MaassForm {
    pub config: MaassEvalConfig,
    shells: Vec<Shell>,
    delta: f64,
    delta_i: i128,
    prefactor: f64,
    pub skip_zero_chi: bool,
}

impl MaassForm {
    pub fn new(config: MaassEvalConfig) -> Result<Self, MaassError> {
        config.validate()?;
        let p = &config.params;
        let n = p.n as i128;
        let delta_i = p.delta.to_i128().ok_or(MaassError::TooLarge)?;
        let d0 = p.d0.value().to_i128().ok_or(MaassError::TooLarge)?;
        let residues = middle_residues(n, delta_i);
        let mags: Vec<i128> = (1..=(config.a_bound as i128 / n)).map(|m| m * n).collect();
        let per_mag: Result<Vec<Vec<Shell>>, MaassError> = mags
            .par_iter()
            .map(|&m| {
                let mut roots = Vec::new();
                for &r in &residues {
                    let mut b = r;
                    while b < 2 * m {
                        if (b * b - delta_i) % (4 * m) == 0 {
                            roots.push(b);
                        }
                        b += 2 * n;
                    }
                }
                roots.sort_unstable();
                let mut out = Vec::with_capacity(2);
                for a in [-m, m] {
                    let mut rs = Vec::with_capacity(roots.len());
                    for &b in &roots {
                        let chi = chi_small(d0, a, b, (b * b - delta_i) / (4 * a))?;
                        rs.push((b as i64, chi));
                    }
                    out.push(Shell { a: a as i64, roots: rs });
                }
                Ok(out)
            })
            .collect();
        let shells: Vec<Shell> = per_mag?.into_iter().flatten().collect();
        let delta = delta_i as f64;
        let k = p.k;
        let prefactor = delta.powf(0.5 - k as f64) / (binomial(2 * k as u64 - 2, k as u64 - 1) * 2.0 * PI);
        Ok(MaassForm {
            config,
            shells,
            delta,
            delta_i,
            prefactor,
            skip_zero_chi: true,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.shells.iter().all(|s| s.roots.is_empty())
    }

    fn shell_sum(
        &self,
        s: &Shell,
        z: Complex64,
        policy: GeodesicPolicy,
    ) -> Result<(Complex64, f64, usize), MaassError> {
        let (x, y) = (z.re, z.im);
        let k = self.config.params.k;
        let w = self.config.b_window as f64;
        let a = s.a as f64;
        let two_abs_a = 2 * s.a.abs();
        let lo = -2.0 * a * x - 2.0 * a.abs() * w;
        let hi = -2.0 * a * x + 2.0 * a.abs() * w;
        let r2 = self.delta / (4.0 * a * a);
        let (mut acc, mut min_qz, mut count) = (Complex64::zero(), f64::INFINITY, 0usize);
        for &(r, chi) in &s.roots {
            if chi == 0 && self.skip_zero_chi {
                continue;
            }
            let m_lo = ((lo - r as f64) / two_abs_a as f64).ceil() as i64;
            let m_hi = ((hi - r as f64) / two_abs_a as f64).floor() as i64;
            for m in m_lo..=m_hi {
                let b = r + two_abs_a * m;
                let u = x + b as f64 / (2.0 * a);
                let qz = a * (u * u + y * y - r2) / y;
                let sgn = match policy {
                    GeodesicPolicy::Reject => {
                        if qz.abs() < self.config.margin {
                            let c = ((b as i128) * (b as i128) - self.delta_i) / (4 * s.a as i128);
                            return Err(MaassError::NearGeodesic {
                                re: x,
                                im: y,
                                form: Box::new(QuadForm::new(s.a, b, c)),
                                qz,
                            });
                        }
                        qz.signum()
                    }
                    GeodesicPolicy::ZeroBelow(eps) => {
                        if qz.abs() < eps {
                            0.0
                        } else {
                            qz.signum()
                        }
                    }
                };
                min_qz = min_qz.min(qz.abs());
                count += 1;
                if chi == 0 || sgn == 0.0 {
                    continue;
                }
                let zu = Complex64::new(u, y);
                let q = a * (zu * zu - r2);
                let v = (self.delta / (qz * qz + self.delta)).min(1.0);
                let beta = beta_incomplete(v, k)?;
                acc += q.powi(k as i32 - 1) * (chi as f64 * sgn * beta);
            }
        }
        Ok((acc, min_qz, count))
    }

    pub fn eval_with(&self, z: ComplexPoint, policy: GeodesicPolicy) -> Result<FValue, MaassError> {
        let zc = z.z();
        let parts: Result<Vec<(Complex64, f64, usize)>, MaassError> =
            self.shells.par_iter().map(|s| self.shell_sum(s, zc, policy)).collect();
        let parts = parts?;
        let half = self.config.a_bound as i64 / 2;
        let values: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
        let outer: Vec<Complex64> = self
            .shells
            .iter()
            .zip(&parts)
            .filter(|(s, _)| s.a.abs() > half)
            .map(|(_, p)| p.0)
            .collect();
        Ok(FValue {
            value: pairwise_sum(&values) * self.prefactor,
            tail: (pairwise_sum(&outer) * self.prefactor).norm(),
            min_abs_qz: parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            terms: parts.iter().map(|p| p.2).sum(),
        })
    }

    pub fn eval(&self, z: ComplexPoint) -> Result<FValue, MaassError> {
        self.eval_with(z, GeodesicPolicy::Reject)
    }

    fn eval_c(&self, z: Complex64) -> Result<FValue, MaassError> {
        self.eval(ComplexPoint::from_c(z)?)
    }

    /// Number of retained forms with `a < 0 < Q_z`.
    pub fn local_form_count(&self, z: ComplexPoint) -> usize {
        let (x, y) = (z.re, z.im);
        let w = self.config.b_window as f64;
        let mut count = 0;
        for s in self.shells.iter().filter(|s| s.a < 0) {
            let a = s.a as f64;
            let two_abs_a = (2 * s.a.abs()) as f64;
            let r2 = self.delta / (4.0 * a * a);
            for &(r, _) in &s.roots {
                let m_lo = ((-2.0 * a * x - two_abs_a * w - r as f64) / two_abs_a).ceil() as i64;
                let m_hi = ((-2.0 * a * x + two_abs_a * w - r as f64) / two_abs_a).floor() as i64;
                for m in m_lo..=m_hi {
                    let u = x + (r as f64 + two_abs_a * m as f64) / (2.0 * a);
                    if a * (u * u + y * y - r2) / y > 0.0 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// `|(cz + d)^{2k-2} F(gamma z) - F(z)| / max(1, |F(z)|)`.
    pub fn check_modularity(&self, g: &GL2Matrix, z: ComplexPoint) -> Result<f64, MaassError> {
        let n = BigInt::from(self.config.params.n);
        if !(&g.m21 % &n).is_zero() || g.determinant() != BigInt::from(1) {
            return Err(MaassError::NotInGroup(Box::new(g.clone())));
        }
        let zc = z.z();
        let [_, _, c, d] = g.entries_i128().ok_or(MaassError::TooLarge)?.map(|x| x as f64);
        let f = self.eval_c(zc)?.value;
        let fg = self.eval_c(act(g, zc))?.value;
        let j = (c * zc + d).powi(2 * self.config.params.k as i32 - 2);
        Ok((j * fg - f).norm() / f.norm().max(1.0))
    }

    /// `|N^{k-1} z^{2k-2} F(-1/(Nz)) - (D0|N) F(z)| / max(1, |F(z)|)`.
    pub fn check_fricke(&self, z: ComplexPoint) -> Result<f64, MaassError> {
        let p = &self.config.params;
        let k = p.k as i32;
        let n = p.n as f64;
        let zc = z.z();
        let eps = kronecker(p.d0.value(), &BigInt::from(p.n)) as f64;
        let f = self.eval_c(zc)?.value;
        let fw = self.eval_c(-1.0 / (n * zc))?.value;
        let lhs = n.powi(k - 1) * zc.powi(2 * k - 2) * fw;
        Ok((lhs - f * eps).norm() / f.norm().max(1.0))
    }

    /// A point on the geodesic of `q` that keeps `margin` away from every other retained geodesic.
    pub fn point_on_geodesic(&self, q: &QuadForm) -> Result<ComplexPoint, MaassError> {
        let (a, b) = (q.a.to_f64().unwrap(), q.b.to_f64().unwrap());
        let t = -b / (2.0 * a);
        let r = self.delta.sqrt() / (2.0 * a.abs());
        let eps = 1e-9 * (1.0 + self.delta);
        for i in 1..40 {
            let th = PI * i as f64 / 40.0;
            let z = ComplexPoint::new(t + r * th.cos(), r * th.sin())?;
            let clean = self.shells.iter().all(|s| {
                let fa = s.a as f64;
                s.roots.iter().all(|&(root, _)| {
                    let two = (2 * s.a.abs()) as f64;
                    let w = self.config.b_window as f64;
                    let m_lo = ((-2.0 * fa * z.re - two * w - root as f64) / two).ceil() as i64;
                    let m_hi = ((-2.0 * fa * z.re + two * w - root as f64) / two).floor() as i64;
                    (m_lo..=m_hi).all(|m| {
                        let bb = root as f64 + two * m as f64;
                        // Q and -Q share a geodesic
                        if (s.a as f64).abs() == a.abs() && bb * (s.a as f64).signum() == b * a.signum() {
                            return true;
                        }
                        let u = z.re + bb / (2.0 * fa);
                        let qz = fa * (u * u + z.im * z.im - self.delta / (4.0 * fa * fa)) / z.im;
                        qz.abs() >= self.config.margin.max(eps) * 1e3
                    })
                })
            });
            if clean {
                return Ok(z);
            }
        }
        Err(MaassError::NoCleanPoint(Box::new(q.clone())))
    }

    /// `|F(z0) - (F(z0 + iw) + F(z0 - iw))/2|` per `w`, with `z0` on the geodesic of `q0`.
    pub fn check_exceptional_average(&self, q0: &QuadForm, ws: &[f64]) -> Result<Vec<(f64, f64)>, MaassError> {
        if self.is_empty() {
            return Ok(ws.iter().map(|&w| (w, 0.0)).collect());
        }
        let z0 = self.point_on_geodesic(q0)?;
        self.average_residuals(z0, ws)
    }

    /// Same residual ladder at an arbitrary point.
    pub fn average_residuals(&self, z0: ComplexPoint, ws: &[f64]) -> Result<Vec<(f64, f64)>, MaassError> {
        let policy = GeodesicPolicy::ZeroBelow(1e-7);
        let f0 = self.eval_with(z0, policy)?.value;
        ws.iter()
            .map(|&w| {
                let up = self.eval_with(ComplexPoint::new(z0.re, z0.im + w)?, policy)?.value;
                let dn = self.eval_with(ComplexPoint::new(z0.re, z0.im - w)?, policy)?.value;
                Ok((w, (f0 - 0.5 * (up + dn)).norm()))
            })
            .collect()
    }

    /// The form of least `|a|` (then least `b >= 0`) in the retained set.
    pub fn minimal_form(&self) -> Option<QuadForm> {
        let s = self.shells.iter().find(|s| s.a < 0 && !s.roots.is_empty())?;
        let (b, _) = s.roots[0];
        let c = ((b as i128) * (b as i128) - self.delta_i) / (4 * s.a as i128);
        Some(QuadForm::new(s.a, b, c))
    }

    /// `p^{1-2k} F(pz) + p^{-1} sum_j F((z + j)/p)`.
    pub fn hecke_tp(&self, p: u64, z: ComplexPoint) -> Result<Complex64, MaassError> {
        let k = self.config.params.k as i32;
        let pf = p as f64;
        let zc = z.z();
        let mut acc = self.eval_c(zc * pf)?.value * pf.powi(1 - 2 * k);
        for j in 0..p {
            acc += self.eval_c((zc + j as f64) / pf)?.value / pf;
        }
        Ok(acc)
    }
}

/// Fixed-shape reduction tree, so results do not depend on scheduling.
fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::zero(),
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

pub fn eval_f(config: &MaassEvalConfig, z: ComplexPoint) -> Result<FValue, MaassError> {
    MaassForm::new(config.clone())?.eval(z)
}

/// Residual of `F_D | T_p = F_{Dp^2} + p^{-k} (D|p) F_D` at each sample point,
/// normalized by `max(1, |F_D|T_p|)`. The `Dp^2` side uses `a_bound * p^2`,
/// which covers every form reached from the `F_D` shells through `z -> pz`
/// and `z -> (z + j)/p`.
pub fn check_hecke_relation(config: &MaassEvalConfig, p: u64, zs: &[ComplexPoint]) -> Result<f64, MaassError> {
    let params = &config.params;
    crate::localpoly::HeckeSpec::new(vec![(p, 0)]).validate_strict(params.n, params.d0.value())?;
    let d = params.d.value();
    let pb = BigInt::from(p);
    if (d % (&pb * &pb)).is_zero() {
        return Err(ParamError::NotDiscriminant(d.clone()).into());
    }
    let lifted = LocalPolyParams::relaxed(params.k, params.n, d * &pb * &pb, params.d0.value().clone())?;
    let lhs_form = MaassForm::new(config.clone())?;
    let rhs_cfg = MaassEvalConfig {
        params: lifted,
        a_bound: config.a_bound * p * p,
        ..config.clone()
    };
    let rhs_form = MaassForm::new(rhs_cfg)?;
    let eps = kronecker(d, &pb) as f64 * (p as f64).powi(-(params.k as i32));
    let mut worst = 0.0f64;
    for &z in zs {
        let lhs = lhs_form.hecke_tp(p, z)?;
        let rhs = rhs_form.eval(z)?.value + lhs_form.eval(z)?.value * eps;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form_172(a_bound: u64) -> MaassForm {
        let p = LocalPolyParams::new(2, 9, 172, 13).unwrap();
        MaassForm::new(MaassEvalConfig::new(p, a_bound, 30).unwrap()).unwrap()
    }

    fn pt(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_incomplete(0.0, 2).unwrap(), 0.0);
        assert!((beta_incomplete(1.0, 2).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(beta_incomplete(1.5, 2).is_err());
        assert!(beta_incomplete(-0.1, 3).is_err());
        let q = beta_quadrature(0.5, 2, 1e-13).unwrap();
        assert!((beta_incomplete(0.5, 2).unwrap() - q).abs() < 1e-10);
    }

    #[test]
    fn beta_against_statrs() {
        for k in 2..6u32 {
            let (a, b) = (k as f64 - 0.5, 0.5);
            let full = statrs::function::beta::beta(a, b);
            for i in 0..=50 {
                let v = i as f64 / 50.0;
                let want = statrs::function::beta::beta_reg(a, b, v) * full;
                let got = beta_incomplete(v, k).unwrap();
                assert!(
                    (got - want).abs() <= 1e-10 * want.abs().max(1e-300) + 1e-14,
                    "k={k} v={v}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn beta_branches_agree_at_switch() {
        for k in 2..7 {
            let below = beta_incomplete(0.5 - 1e-12, k).unwrap();
            let above = beta_incomplete(0.5, k).unwrap();
            assert!((below - above).abs() < 1e-10);
        }
    }

    #[test]
    fn config_validation() {
        let p = LocalPolyParams::new(2, 9, 172, 13).unwrap();
        assert!(MaassEvalConfig::new(p.clone(), 100, 5).is_err());
        assert!(MaassEvalConfig::new(p.clone(), 90, 0).is_err());
        let mut c = MaassEvalConfig::new(p, 90, 5).unwrap();
        c.quadrature_tol = 1e-3;
        assert!(c.validate().is_err());
        assert!(ComplexPoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn empty_form_set_is_zero() {
        let p = LocalPolyParams::relaxed(2, 9, 1, 5).unwrap();
        let f = MaassForm::new(MaassEvalConfig::new(p, 900, 10).unwrap()).unwrap();
        assert!(f.is_empty());
        assert_eq!(f.eval(pt(0.3, 0.7)).unwrap().value, Complex64::zero());
        assert_eq!(f.check_fricke(pt(0.1, 0.4)).unwrap(), 0.0);
    }

    #[test]
    fn translation_and_identity() {
        let f = form_172(900);
        let z = pt(0.123, 0.77);
        assert_eq!(f.check_modularity(&GL2Matrix::identity(), z).unwrap(), 0.0);
        assert!(f.check_modularity(&GL2Matrix::t(), z).unwrap() < 1e-9);
        assert!(f.check_modularity(&GL2Matrix::s(), z).is_err());
    }

    #[test]
    fn no_local_forms_high_up() {
        let f = form_172(900);
        let h = (2236f64).sqrt() / 18.0;
        assert_eq!(f.local_form_count(pt(0.37, h * 1.01)), 0);
        assert!(f.local_form_count(pt(0.37, 0.2)) > 0);
    }

    #[test]
    fn skipping_zero_chi_changes_nothing() {
        let mut f = form_172(450);
        let z = pt(0.31, 0.52);
        let a = f.eval(z).unwrap().value;
        f.skip_zero_chi = false;
        assert_eq!(f.eval(z).unwrap().value, a);
    }

    #[test]
    fn deterministic() {
        let f = form_172(450);
        let z = pt(-0.2, 0.61);
        assert_eq!(f.eval(z).unwrap().value, f.eval(z).unwrap().value);
    }

    #[test]
    fn near_geodesic_is_reported() {
        let f = form_172(450);
        let q = f.minimal_form().unwrap();
        let z = f.point_on_geodesic(&q).unwrap();
        assert!(matches!(f.eval(z), Err(MaassError::NearGeodesic { .. })));
    }

    #[test]
    fn doubling_truncation_is_stable() {
        let z = pt(0.21, 0.43);
        let v1 = form_172(1800).eval(z).unwrap();
        let v2 = form_172(3600).eval(z).unwrap();
        assert!(
            (v1.value - v2.value).norm() <= 4.0 * v1.tail.max(1e-12),
            "{v1:?} {v2:?}"
        );
    }
    fn on_circle(ctr: f64, th: f64) -> ComplexPoint {
        pt(ctr + th.cos() / 9.0, th.sin() / 9.0)
    }

    #[test]
    fn modularity_improves_with_truncation() {
        let g = GL2Matrix::new(4, -1, 9, -2);
        let z = on_circle(2.0 / 9.0, 1.2);
        let rel = |a| {
            let f = form_172(a);
            f.check_modularity(&g, z).unwrap() / f.eval(z).unwrap().value.norm()
        };
        let (r1, r2) = (rel(1800), rel(7200));
        assert!(r2 < r1 / 4.0 && r2 < 2e-2, "{r1} {r2}");
    }

    #[test]
    fn fricke_fixed_point_value_vanishes() {
        // -F(i/3) = (13|9) F(i/3) at k = 2
        let f = form_172(7200);
        let at_fixed = f.eval(pt(0.0, 1.0 / 3.0)).unwrap().value.norm();
        let typical = f.eval(pt(0.05, 0.31)).unwrap().value.norm();
        assert!(at_fixed < 1e-2 * typical, "{at_fixed} {typical}");
        assert!(f.check_fricke(pt(0.3, 0.25)).unwrap() / typical < 5e-3);
    }

    #[test]
    fn exceptional_ladder_decreases() {
        let f = form_172(1800);
        let q = f.minimal_form().unwrap();
        let ladder = f.check_exceptional_average(&q, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!(ladder.windows(2).all(|w| w[1].1 < w[0].1), "{ladder:?}");
        let jump = (f
            .eval_with(f.point_on_geodesic(&q).unwrap(), GeodesicPolicy::ZeroBelow(1e-7))
            .unwrap()
            .value)
            .norm();
        assert!(ladder[2].1 < 1e-3 * jump.max(1e-12) || ladder[2].1 < 1e-10);
        let control = f.average_residuals(pt(0.13, 0.41), &[1e-2, 1e-3]).unwrap();
        assert!(control[1].1 < control[0].1 && control[1].1 < 1e-9);
    }

    #[test]
    fn hecke_relation_small() {
        let p = LocalPolyParams::new(2, 9, 172, 13).unwrap();
        let z = [pt(0.13, 0.41)];
        let rel = |a| {
            let cfg = MaassEvalConfig::new(p.clone(), a, 30).unwrap();
            let scale = MaassForm::new(cfg.clone()).unwrap().hecke_tp(5, z[0]).unwrap().norm();
            check_hecke_relation(&cfg, 5, &z).unwrap() / scale
        };
        let (r1, r2) = (rel(1800), rel(4050));
        assert!(r2 < r1 / 2.0 && r2 < 2e-2, "{r1} {r2}");
        let cfg = MaassEvalConfig::new(p.clone(), 450, 30).unwrap();
        assert!(check_hecke_relation(&cfg, 13, &z).is_err());
    }

    #[test]
    fn hecke_relation_empty_sets() {
        let p = LocalPolyParams::relaxed(2, 9, 1, 5).unwrap();
        let cfg = MaassEvalConfig::new(p, 450, 10).unwrap();
        assert_eq!(check_hecke_relation(&cfg, 7, &[pt(0.1, 0.5)]).unwrap(), 0.0);
    }
}
