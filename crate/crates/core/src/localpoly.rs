//! Exact evaluation of the local-polynomial family: character-weighted sums
//! over `Q_{N,Delta}(x)`, the unweighted sums, and the weight `2 - 2k` slash
//! and Hecke actions on rational-point-evaluable functions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{factorize_u128, gcd_i128, is_square, kronecker, kronecker_i128, rat_pow, Discriminant, Rational};
use crate::genus::{chi_small, GenusError};
use crate::qforms::{for_each_level_form, level_forms_small, middle_residues, reduce_mod_one, GL2Matrix, QFormError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalPolyError {
    #[error(transparent)]
    Forms(#[from] QFormError),
    #[error(transparent)]
    Genus(#[from] GenusError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("slash by {matrix} has a pole at {x}")]
    Pole { matrix: Box<GL2Matrix>, x: Rational },
    #[error("value out of machine range at {0}")]
    TooLarge(Rational),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("k must be at least 2, got {0}")]
    BadWeight(u32),
    #[error("level must be positive")]
    BadLevel,
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(BigInt),
    #[error("(-1)^k * {0} must be positive")]
    WrongSign(BigInt),
    #[error("gcd({0}, N) > 1")]
    NotCoprime(BigInt),
    #[error("Kronecker symbols of D = {d} and D0 = {d0} differ at p = {p}")]
    KroneckerMismatch { d: BigInt, d0: BigInt, p: u64 },
    #[error("D * D0 = {0} is a square")]
    SquareDelta(BigInt),
    #[error("D * D0 = {0} is not positive")]
    NonPositiveDelta(BigInt),
    #[error("{0} is not a discriminant")]
    NotDiscriminant(BigInt),
    #[error("Hecke prime {0} is not prime")]
    NotPrime(u64),
    #[error("Hecke prime {0} repeated")]
    RepeatedPrime(u64),
    #[error("Hecke prime {0} is not coprime to the level (or to D0 where required)")]
    HeckePrimeNotCoprime(u64),
}

/// `(k, N, D, D0)` with `Delta = D D0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPolyParams {
    pub k: u32,
    pub n: u64,
    pub d: Discriminant,
    pub d0: Discriminant,
    pub delta: BigInt,
}

fn disc_of(v: &BigInt) -> Result<Discriminant, ParamError> {
    Discriminant::new(v.clone()).map_err(|_| ParamError::NotDiscriminant(v.clone()))
}

impl LocalPolyParams {
    /// Validates every hypothesis of the vanishing criterion.
    pub fn new(k: u32, n: u64, d: impl Into<BigInt>, d0: impl Into<BigInt>) -> Result<Self, ParamError> {
        let p = Self::relaxed(k, n, d, d0)?;
        if !p.d.is_fundamental() {
            return Err(ParamError::NotFundamental(p.d.value().clone()));
        }
        let sign_ok = |v: &BigInt| {
            if k.is_multiple_of(2) {
                v.is_positive()
            } else {
                v.is_negative()
            }
        };
        for v in [p.d.value(), p.d0.value()] {
            if !sign_ok(v) {
                return Err(ParamError::WrongSign(v.clone()));
            }
            if !v.gcd(&BigInt::from(n)).is_one() {
                return Err(ParamError::NotCoprime(v.clone()));
            }
        }
        for (q, _) in factorize_u128(n as u128) {
            let q = BigInt::from(q);
            if kronecker(p.d.value(), &q) != kronecker(p.d0.value(), &q) {
                return Err(ParamError::KroneckerMismatch {
                    d: p.d.value().clone(),
                    d0: p.d0.value().clone(),
                    p: q.to_u64().unwrap(),
                });
            }
        }
        Ok(p)
    }

    /// Only requires a fundamental `D0`, a discriminant `D`, and `D D0 > 0`
    /// nonsquare. Used where `D` picks up square factors (Hecke relation).
    pub fn relaxed(k: u32, n: u64, d: impl Into<BigInt>, d0: impl Into<BigInt>) -> Result<Self, ParamError> {
        if k < 2 {
            return Err(ParamError::BadWeight(k));
        }
        if n == 0 {
            return Err(ParamError::BadLevel);
        }
        let (d, d0) = (disc_of(&d.into())?, disc_of(&d0.into())?);
        if !d0.is_fundamental() {
            return Err(ParamError::NotFundamental(d0.value().clone()));
        }
        let delta = d.value() * d0.value();
        if !delta.is_positive() {
            return Err(ParamError::NonPositiveDelta(delta));
        }
        if is_square(&delta) {
            return Err(ParamError::SquareDelta(delta));
        }
        Ok(LocalPolyParams { k, n, d, d0, delta })
    }

    fn small(&self) -> Result<(i128, i128, i128), LocalPolyError> {
        let too_large = || LocalPolyError::TooLarge(Rational::from_integer(self.delta.clone()));
        Ok((
            self.n as i128,
            self.delta.to_i128().ok_or_else(too_large)?,
            self.d0.value().to_i128().ok_or_else(too_large)?,
        ))
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && factorize_u128(p as u128) == vec![(p as u128, 1)]
}

/// `prod_i (T_{p_i} + s_i p_i^{1-2k})`, listed innermost first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeckeSpec {
    pub factors: Vec<(u64, i64)>,
}

impl HeckeSpec {
    pub fn new(factors: Vec<(u64, i64)>) -> Self {
        HeckeSpec { factors }
    }

    /// Distinct primes not dividing `N`; enough for the operator at level `N`.
    pub fn validate(&self, n: u64) -> Result<(), ParamError> {
        let mut seen = Vec::new();
        for &(p, _) in &self.factors {
            if !is_prime(p) {
                return Err(ParamError::NotPrime(p));
            }
            if seen.contains(&p) {
                return Err(ParamError::RepeatedPrime(p));
            }
            seen.push(p);
            if n.is_multiple_of(p) {
                return Err(ParamError::HeckePrimeNotCoprime(p));
            }
        }
        Ok(())
    }

    /// Additionally requires every prime to be coprime to `D0`, as the
    /// discriminant-shifting Hecke relation does.
    pub fn validate_strict(&self, n: u64, d0: &BigInt) -> Result<(), ParamError> {
        self.validate(n)?;
        match self.factors.iter().find(|(p, _)| (d0 % BigInt::from(*p)).is_zero()) {
            Some(&(p, _)) => Err(ParamError::HeckePrimeNotCoprime(p)),
            None => Ok(()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Polynomial with exact coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivariatePoly {
    coeffs: Vec<Rational>,
}

impl UnivariatePoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UnivariatePoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        UnivariatePoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    fn add_assign_scaled(&mut self, other: &[BigInt], scale: i32) {
        if self.coeffs.len() < other.len() {
            self.coeffs.resize(other.len(), Rational::zero());
        }
        for (c, o) in self.coeffs.iter_mut().zip(other) {
            *c += Rational::from_integer(o * scale);
        }
    }
}

impl fmt::Display for UnivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                (true, false) => {}
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "X")?,
                _ => write!(f, "X^{i}")?,
            }
        }
        Ok(())
    }
}

/// Anything that can be evaluated exactly at rational points.
pub trait Evaluable: Sync {
    fn eval(&self, x: &Rational) -> Result<Rational, LocalPolyError>;
}

pub struct Constant(pub Rational);

impl Evaluable for Constant {
    fn eval(&self, _x: &Rational) -> Result<Rational, LocalPolyError> {
        Ok(self.0.clone())
    }
}

/// Wraps a closure.
pub struct FnEval<F>(pub F);

impl<F> Evaluable for FnEval<F>
where
    F: Fn(&Rational) -> Result<Rational, LocalPolyError> + Sync,
{
    fn eval(&self, x: &Rational) -> Result<Rational, LocalPolyError> {
        (self.0)(x)
    }
}

impl Evaluable for UnivariatePoly {
    fn eval(&self, x: &Rational) -> Result<Rational, LocalPolyError> {
        Ok(UnivariatePoly::eval(self, x))
    }
}

/// `sum chi(Q) n_Q^{k-1}` over `Q_{N,Delta}(u/v)` with `n_Q = v^2 Q(u/v, 1)`,
/// or with `chi = 1` when `d0` is `None`.
fn kernel_sum(n: i128, delta: i128, d0: Option<i128>, k: u32, u: i128, v: i128) -> Result<BigInt, LocalPolyError> {
    let mut acc: i128 = 0;
    let mut big = BigInt::zero();
    let mut err: Option<LocalPolyError> = None;
    let mut last_a = 0i128;
    let mut chi_a: Option<i32> = None;
    let (u2, uv, v2) = (u * u, u * v, v * v);
    for_each_level_form(n, delta, u, v, |a, b, c| {
        let chi = match d0 {
            None => 1,
            Some(d0) => {
                if a != last_a {
                    last_a = a;
                    // with gcd(a, D0) = 1 the value at Q(1, 0) = a decides
                    chi_a = (gcd_i128(a, d0) == 1).then(|| kronecker_i128(d0, a));
                }
                match chi_a {
                    Some(x) => x,
                    None => match chi_small(d0, a, b, c) {
                        Ok(x) => x,
                        Err(e) => {
                            err.get_or_insert(e.into());
                            0
                        }
                    },
                }
            }
        };
        if chi == 0 {
            return;
        }
        let nq = a * u2 + b * uv + c * v2;
        match nq.checked_pow(k - 1).and_then(|t| acc.checked_add(chi as i128 * t)) {
            Some(s) => acc = s,
            None => {
                big += BigInt::from(acc) + BigInt::from(chi) * num_traits::pow(BigInt::from(nq), (k - 1) as usize);
                acc = 0;
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(big + BigInt::from(acc))
}

/// Reduces `x` modulo 1 and folds `u/v` into `[0, 1/2]`.
fn folded(x: &Rational) -> Option<(i128, i128)> {
    let (_, u, v) = reduce_mod_one(x)?;
    Some((u.min(v - u), v))
}

fn weighted_at(n: i128, delta: i128, d0: Option<i128>, k: u32, x: &Rational) -> Result<Rational, LocalPolyError> {
    let (u, v) = folded(x).ok_or_else(|| LocalPolyError::TooLarge(x.clone()))?;
    let total = kernel_sum(n, delta, d0, k, u, v)?;
    let scale = num_traits::pow(BigInt::from(v), 2 * (k as usize - 1));
    Ok(Rational::new(total, scale))
}

/// `sum_{Q in Q_{N,Delta}(x)} chi_{D0}(Q) Q(x, 1)^{k-1}`.
pub fn nonconst_sum(params: &LocalPolyParams, x: &Rational) -> Result<Rational, LocalPolyError> {
    let (n, delta, d0) = params.small()?;
    weighted_at(n, delta, Some(d0), params.k, x)
}

/// Memoizing [`Evaluable`] wrapper around [`nonconst_sum`], keyed by the
/// folded residue of `x` modulo 1.
pub struct NonConstSum {
    pub params: LocalPolyParams,
    cache: Mutex<HashMap<(i128, i128), Rational>>,
}

impl NonConstSum {
    pub fn new(params: LocalPolyParams) -> Self {
        NonConstSum {
            params,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

impl Evaluable for NonConstSum {
    fn eval(&self, x: &Rational) -> Result<Rational, LocalPolyError> {
        let key = folded(x).ok_or_else(|| LocalPolyError::TooLarge(x.clone()))?;
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let value = nonconst_sum(&self.params, x)?;
        self.cache.lock().unwrap().insert(key, value.clone());
        Ok(value)
    }
}

/// `sum chi_{D0}(Q) Q(X, 1)^{k-1}` over the forms selected at `x0`.
pub fn weighted_poly(params: &LocalPolyParams, x0: &Rational) -> Result<UnivariatePoly, LocalPolyError> {
    let (n, delta, d0) = params.small()?;
    let forms = level_forms_small(n, delta, x0)?;
    let mut out = UnivariatePoly::zero();
    for q in forms {
        let chi = chi_small(d0, q.a, q.b, q.c)?;
        if chi == 0 {
            continue;
        }
        let base = [BigInt::from(q.c), BigInt::from(q.b), BigInt::from(q.a)];
        let mut pow = vec![BigInt::one()];
        for _ in 1..params.k {
            let mut next = vec![BigInt::zero(); pow.len() + 2];
            for (i, p) in pow.iter().enumerate() {
                for (j, b) in base.iter().enumerate() {
                    next[i + j] += p * b;
                }
            }
            pow = next;
        }
        out.add_assign_scaled(&pow, chi);
    }
    Ok(UnivariatePoly::new(out.coeffs))
}

fn small_pair(n: u64, delta: &BigInt) -> Result<(i128, i128), LocalPolyError> {
    let d = delta
        .to_i128()
        .ok_or_else(|| LocalPolyError::TooLarge(Rational::from_integer(delta.clone())))?;
    Ok((n as i128, d))
}

/// `p_{N,Delta}(x) = sum_{Q in Q_{N,Delta}(x)} Q(x, 1)`.
pub fn zagier_sum(n: u64, delta: &BigInt, x: &Rational) -> Result<Rational, LocalPolyError> {
    let (n, d) = small_pair(n, delta)?;
    if is_square(delta) {
        return Err(QFormError::SquareDiscriminant(delta.clone()).into());
    }
    weighted_at(n, d, None, 2, x)
}

/// `p_{N,Delta,0}(x) = sum_{a < 0 < c} Q(x, 1) = A x^2 + C`, returned with `(A, C)`.
///
/// The substitution `[a,b,c] -> [-cN, b, -a/N]` permutes the summation set,
/// which gives `A = -N C`; this is checked before returning.
pub fn zagier_zero_poly(n: u64, delta: &BigInt) -> Result<(UnivariatePoly, BigInt, BigInt), LocalPolyError> {
    let (n_s, d) = small_pair(n, delta)?;
    let forms = level_forms_small(n_s, d, &Rational::zero())?;
    let (mut a_sum, mut b_sum, mut c_sum) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    for q in &forms {
        a_sum += q.a;
        b_sum += q.b;
        c_sum += q.c;
    }
    assert!(b_sum.is_zero(), "middle coefficients cancel under b -> -b");
    assert_eq!(a_sum, -(&c_sum * BigInt::from(n)), "A = -N C");
    let poly = UnivariatePoly::new(vec![
        Rational::from_integer(c_sum.clone()),
        Rational::zero(),
        Rational::from_integer(a_sum.clone()),
    ]);
    Ok((poly, a_sum, c_sum))
}

/// `(m21 x + m22)^{2k-2} f(gamma x)`.
pub fn slash(f: &dyn Evaluable, k: u32, g: &GL2Matrix, x: &Rational) -> Result<Rational, LocalPolyError> {
    let j = g.cocycle_base(x);
    if j.is_zero() {
        return Err(LocalPolyError::Pole {
            matrix: Box::new(g.clone()),
            x: x.clone(),
        });
    }
    let y = g.act(x).expect("nonzero automorphy factor");
    Ok(rat_pow(&j, 2 * k as i64 - 2) * f.eval(&y)?)
}

/// The Hecke expansion of `x` as a linear combination of points:
/// `(f | prod_i (T_{p_i} + s_i p_i^{1-2k}))(x) = sum_y c_y f(y)`.
///
/// The last factor acts outermost, so it is expanded first.
pub fn hecke_expansion(k: u32, spec: &HeckeSpec, x: &Rational) -> Vec<(Rational, Rational)> {
    let mut terms: BTreeMap<Rational, Rational> = BTreeMap::from([(x.clone(), Rational::one())]);
    for &(p, s) in spec.factors.iter().rev() {
        let pr = Rational::from_integer(BigInt::from(p));
        let lead = rat_pow(&pr, 1 - 2 * k as i64);
        let inv_p = pr.recip();
        let mut next: BTreeMap<Rational, Rational> = BTreeMap::new();
        let mut add = |y: Rational, c: Rational| {
            let e = next.entry(y).or_insert_with(Rational::zero);
            *e += c;
        };
        for (y, c) in &terms {
            add(y * &pr, c * &lead);
            for j in 0..p {
                add((y + Rational::from_integer(BigInt::from(j))) * &inv_p, c * &inv_p);
            }
            if s != 0 {
                add(y.clone(), c * &lead * Rational::from_integer(BigInt::from(s)));
            }
        }
        next.retain(|_, c| !c.is_zero());
        terms = next;
    }
    terms.into_iter().collect()
}

/// Largest denominator among the leaves of the Hecke expansion at `x`.
pub fn hecke_max_denominator(k: u32, spec: &HeckeSpec, x: &Rational) -> BigInt {
    hecke_expansion(k, spec, x)
        .iter()
        .map(|(y, _)| y.denom().clone())
        .max()
        .unwrap_or_else(BigInt::one)
}

/// Applies the shifted Hecke product at `x`, evaluating leaves in parallel.
pub fn hecke_apply(f: &dyn Evaluable, k: u32, spec: &HeckeSpec, x: &Rational) -> Result<Rational, LocalPolyError> {
    let terms = hecke_expansion(k, spec, x);
    let values: Vec<Result<Rational, LocalPolyError>> = terms.par_iter().map(|(y, _)| f.eval(y)).collect();
    let mut total = Rational::zero();
    for ((_, c), v) in terms.iter().zip(values) {
        total += c * v?;
    }
    Ok(total)
}

/// Truncated constant `c_infinity`.
#[derive(Debug, Clone)]
pub struct CInfinity {
    pub estimate: f64,
    /// `(a, S(a))` with `S(a) = sum_{b mod 2a, b^2 = Delta (4a)} chi_{D0}([a, b, (b^2 - Delta)/4a])`.
    pub inner_sums: Vec<(u64, i64)>,
    /// Contribution of the last decade `a in (A/10, A]`; a heuristic tail size.
    pub last_decade: f64,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Partial sum of `c_infinity = -2^{3-2k} / ((2k-1) C(2k-2, k-1)) *
/// sum_{a > 0, N | a} a^{-k} S(a)` over `a <= trunc_a`.
pub fn c_infinity_approx(params: &LocalPolyParams, trunc_a: u64) -> Result<CInfinity, LocalPolyError> {
    let (n, delta, d0) = params.small()?;
    let k = params.k as i32;
    let residues = middle_residues(n, delta);
    let mut inner_sums = Vec::new();
    let (mut total, mut decade) = (0.0f64, 0.0f64);
    let mut a = n;
    while a <= trunc_a as i128 {
        let mut s = 0i64;
        let step = 2 * n;
        for &r in &residues {
            let mut b = r;
            while b < 2 * a {
                let num = b * b - delta;
                if num % (4 * a) == 0 {
                    s += chi_small(d0, a, b, num / (4 * a))? as i64;
                }
                b += step;
            }
        }
        inner_sums.push((a as u64, s));
        let term = s as f64 * (a as f64).powi(-k);
        total += term;
        if a * 10 > trunc_a as i128 {
            decade += term;
        }
        a += n;
    }
    let pre = -(2f64.powi(3 - 2 * k)) / ((2 * k - 1) as f64 * binomial(2 * params.k as u64 - 2, params.k as u64 - 1));
    Ok(CInfinity {
        estimate: pre * total,
        inner_sums,
        last_decade: pre * decade,
    })
}

/// `c_{k,Delta} = (-1)^k 2^{3-2k} Delta^{1/2-k}` as `(rational factor, exponent of Delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CKDelta {
    pub factor: Rational,
    pub exponent: Rational,
    pub value: f64,
}

pub fn c_k_delta(k: u32, delta: &BigInt) -> CKDelta {
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    let factor = rat_pow(&Rational::from_integer(BigInt::from(2)), 3 - 2 * k as i64)
        * Rational::from_integer(BigInt::from(sign));
    let exponent = BigRational::new(BigInt::from(1 - 2 * k as i64), BigInt::from(2));
    let value = factor.to_f64().unwrap() * delta.to_f64().unwrap().powf(0.5 - k as f64);
    // exact when Delta is a perfect square
    let value = match (is_square(delta), delta.sqrt()) {
        (true, r) => (factor.clone() * rat_pow(&Rational::from_integer(r), 1 - 2 * k as i64))
            .to_f64()
            .unwrap(),
        _ => value,
    };
    CKDelta {
        factor,
        exponent,
        value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::qforms::{enumerate_at_rational, eval_at_rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params_172() -> LocalPolyParams {
        LocalPolyParams::new(2, 9, 172, 13).unwrap()
    }

    /// Straight sum over the exact form set with BigInt character values.
    fn oracle_nonconst(p: &LocalPolyParams, x: &Rational) -> Rational {
        let set = enumerate_at_rational(&BigInt::from(p.n), &p.delta, x).unwrap();
        set.forms
            .iter()
            .map(|q| {
                let chi = crate::genus::chi(p.d0.value().to_i64().unwrap(), q).unwrap();
                Rational::from_integer(BigInt::from(chi)) * rat_pow(&eval_at_rational(q, x), p.k as i64 - 1)
            })
            .sum()
    }

    #[test]
    fn params_validation() {
        assert!(LocalPolyParams::new(2, 9, 172, 13).is_ok());
        assert!(matches!(
            LocalPolyParams::new(2, 9, 172, 5),
            Err(ParamError::KroneckerMismatch { .. })
        ));
        assert!(matches!(
            LocalPolyParams::new(2, 9, 12, 13),
            Err(ParamError::NotCoprime(_))
        ));
        assert!(matches!(
            LocalPolyParams::new(2, 9, -4, 13),
            Err(ParamError::NonPositiveDelta(_))
        ));
        assert!(matches!(
            LocalPolyParams::new(2, 9, -4, -7),
            Err(ParamError::WrongSign(_))
        ));
        assert!(matches!(
            LocalPolyParams::new(2, 9, 13, 13),
            Err(ParamError::SquareDelta(_))
        ));
        assert!(matches!(
            LocalPolyParams::new(2, 9, 45, 13),
            Err(ParamError::NotFundamental(_))
        ));
        assert!(LocalPolyParams::relaxed(2, 9, 172 * 25, 13).is_ok());
    }

    #[test]
    fn hecke_spec_validation() {
        let d0 = BigInt::from(21);
        assert!(HeckeSpec::new(vec![(7, 6), (2, 4)]).validate(25).is_ok());
        assert!(HeckeSpec::new(vec![(7, 6), (2, 4)]).validate_strict(25, &d0).is_err());
        assert!(HeckeSpec::new(vec![(2, 4)]).validate_strict(25, &d0).is_ok());
        assert!(HeckeSpec::new(vec![(4, 1)]).validate(25).is_err());
        assert!(HeckeSpec::new(vec![(2, 1), (2, 3)]).validate(25).is_err());
        assert!(HeckeSpec::new(vec![(5, 1)]).validate(25).is_err());
    }

    #[test]
    fn nonconst_examples() {
        let p = params_172();
        assert_eq!(nonconst_sum(&p, &rat(0, 1)).unwrap(), rat(336, 1));
        assert_eq!(nonconst_sum(&p, &rat(1, 7)).unwrap(), rat(336, 1));
        let empty = LocalPolyParams::relaxed(2, 9, 1, 5).unwrap();
        assert_eq!(nonconst_sum(&empty, &rat(2, 7)).unwrap(), rat(0, 1));
    }

    #[test]
    fn nonconst_matches_oracle() {
        let p = params_172();
        for x in [rat(0, 1), rat(1, 2), rat(4, 5), rat(-3, 7), rat(13, 11), rat(2, 9)] {
            assert_eq!(nonconst_sum(&p, &x).unwrap(), oracle_nonconst(&p, &x), "x={x}");
        }
        let p = LocalPolyParams::new(3, 4, -3, -11).unwrap();
        for x in [rat(0, 1), rat(1, 3), rat(5, 8)] {
            assert_eq!(nonconst_sum(&p, &x).unwrap(), oracle_nonconst(&p, &x), "x={x}");
        }
    }

    #[test]
    fn weighted_poly_examples() {
        let p = params_172();
        assert_eq!(
            weighted_poly(&p, &rat(0, 1)).unwrap(),
            UnivariatePoly::from_ints(&[336, 0, -3024])
        );
        assert_eq!(
            weighted_poly(&p, &rat(1, 3)).unwrap(),
            UnivariatePoly::from_ints(&[-1008, 8064, -12096])
        );
        let empty = LocalPolyParams::relaxed(2, 9, 1, 5).unwrap();
        assert!(weighted_poly(&empty, &rat(0, 1)).unwrap().is_zero());
        assert_eq!(
            UnivariatePoly::from_ints(&[336, 0, -3024]).to_string(),
            "-3024X^2 + 336"
        );
    }

    #[test]
    fn weighted_poly_evaluates_to_nonconst_sum() {
        let p = params_172();
        for x in [rat(1, 2), rat(1, 5), rat(3, 8)] {
            assert_eq!(weighted_poly(&p, &x).unwrap().eval(&x), nonconst_sum(&p, &x).unwrap());
        }
    }

    #[test]
    fn zagier_examples() {
        let d = BigInt::from(2236);
        assert_eq!(zagier_sum(9, &d, &rat(1, 5)).unwrap(), rat(17272, 25));
        assert_eq!(zagier_sum(9, &d, &rat(0, 1)).unwrap(), rat(696, 1));
        assert_eq!(zagier_sum(9, &d, &rat(1, 2)).unwrap(), rat(680, 1));
        let (poly, a, c) = zagier_zero_poly(9, &d).unwrap();
        assert_eq!(a, -(&c * BigInt::from(9)));
        assert_eq!(poly.eval(&rat(0, 1)), zagier_sum(9, &d, &rat(0, 1)).unwrap());
    }

    #[test]
    fn zagier_constancy_level_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for delta in [5, 8, 12, 13] {
            let d = BigInt::from(delta);
            let c = zagier_sum(1, &d, &rat(0, 1)).unwrap();
            for _ in 0..25 {
                let x = rat(rng.gen_range(-40..40), rng.gen_range(1..15));
                assert_eq!(zagier_sum(1, &d, &x).unwrap(), c, "delta={delta} x={x}");
            }
        }
    }

    #[test]
    fn inversion_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 30 {
            let n = [1u64, 4, 9, 25][rng.gen_range(0..4)];
            let delta: i64 = rng.gen_range(5..2000);
            let d = BigInt::from(delta);
            if !(delta % 4 == 0 || delta % 4 == 1) || is_square(&d) {
                continue;
            }
            let x = rat(rng.gen_range(-12..12), rng.gen_range(1..8));
            if x.is_zero() {
                continue;
            }
            let nr = Rational::from_integer(BigInt::from(n));
            let lhs = &nr * &x * &x * zagier_sum(n, &d, &(&nr * &x).recip()).unwrap() - zagier_sum(n, &d, &x).unwrap();
            let (p0, _, _) = zagier_zero_poly(n, &d).unwrap();
            assert_eq!(lhs, -p0.eval(&x), "n={n} delta={delta} x={x}");
            checked += 1;
        }
    }

    #[test]
    fn periodicity_and_mirror() {
        let p = params_172();
        let d = BigInt::from(2236);
        for x in [rat(1, 3), rat(2, 7), rat(-5, 4)] {
            let one = Rational::one();
            // direct enumeration without the folding shortcut
            assert_eq!(oracle_nonconst(&p, &(&x + &one)), oracle_nonconst(&p, &x));
            assert_eq!(oracle_nonconst(&p, &(-&x)), oracle_nonconst(&p, &x));
            assert_eq!(zagier_sum(9, &d, &(&x + &one)).unwrap(), zagier_sum(9, &d, &x).unwrap());
        }
    }

    #[test]
    fn slash_basics() {
        let f = UnivariatePoly::from_ints(&[1, -2, 3]);
        let x = rat(2, 5);
        assert_eq!(slash(&f, 2, &GL2Matrix::identity(), &x).unwrap(), f.eval(&x));
        assert_eq!(
            slash(&f, 3, &GL2Matrix::t(), &x).unwrap(),
            f.eval(&(&x + Rational::one()))
        );
        assert!(matches!(
            slash(&f, 2, &GL2Matrix::s(), &rat(0, 1)),
            Err(LocalPolyError::Pole { .. })
        ));
    }

    #[test]
    fn hecke_on_constants() {
        let one = Constant(Rational::one());
        for (p, s) in [(2u64, 4i64), (7, 6), (3, -1)] {
            let spec = HeckeSpec::new(vec![(p, s)]);
            let want = rat_pow(&rat(p as i64, 1), -3) * rat(1 + s, 1) + Rational::one();
            assert_eq!(hecke_apply(&one, 2, &spec, &rat(3, 11)).unwrap(), want);
        }
        let f = UnivariatePoly::from_ints(&[1, 1, 1]);
        assert_eq!(
            hecke_apply(&f, 2, &HeckeSpec::default(), &rat(3, 4)).unwrap(),
            f.eval(&rat(3, 4))
        );
    }

    #[test]
    fn hecke_factors_commute_on_periodic_functions() {
        let p = params_172();
        let f = NonConstSum::new(p);
        let ab = HeckeSpec::new(vec![(2, 3), (5, -1)]);
        let ba = HeckeSpec::new(vec![(5, -1), (2, 3)]);
        for x in [rat(1, 3), rat(2, 7)] {
            assert_eq!(
                hecke_apply(&f, 2, &ab, &x).unwrap(),
                hecke_apply(&f, 2, &ba, &x).unwrap()
            );
        }
    }

    #[test]
    fn c_k_delta_examples() {
        assert_eq!(c_k_delta(2, &BigInt::from(1)).value, 0.5);
        assert_eq!(c_k_delta(2, &BigInt::from(4)).value, 1.0 / 16.0);
        assert_eq!(c_k_delta(3, &BigInt::from(1)).value, -0.125);
        assert_eq!(c_k_delta(2, &BigInt::from(1)).factor, rat(1, 2));
        assert_eq!(c_k_delta(2, &BigInt::from(1)).exponent, rat(-3, 2));
    }

    #[test]
    fn c_infinity_behaviour() {
        let empty = LocalPolyParams::relaxed(2, 9, 1, 5).unwrap();
        let c = c_infinity_approx(&empty, 900).unwrap();
        assert_eq!(c.estimate, 0.0);
        assert!(c.inner_sums.iter().all(|&(_, s)| s == 0));

        let p = params_172();
        let s = |a: u64| c_infinity_approx(&p, a).unwrap().estimate;
        let (s1, s2, s4) = (s(450), s(900), s(1800));
        assert!((s4 - s2).abs() < (s2 - s1).abs(), "{s1} {s2} {s4}");
        assert!((s4 - s1).abs() < 0.1 * s4.abs().max(1e-3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unimodular() -> impl Strategy<Value = GL2Matrix> {
            (-12i64..12, -12i64..12, -4i64..4).prop_filter_map("coprime", |(a, c, t)| {
                let (g, x, y) = crate::arith::ext_gcd(&BigInt::from(a), &BigInt::from(c));
                g.is_one()
                    .then(|| GL2Matrix::new(a, -&y + BigInt::from(a * t), c, &x + BigInt::from(c * t)))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(120))]
            #[test]
            fn slash_cocycle(g1 in unimodular(), g2 in unimodular(), p in -30i64..30, q in 1i64..30, k in 2u32..5) {
                let f = UnivariatePoly::from_ints(&[3, -1, 4, 1, -5]);
                let x = rat(p, q);
                let g12 = g1.mul(&g2);
                let inner = FnEval(|y: &Rational| slash(&f, k, &g1, y));
                let two_step = slash(&inner, k, &g2, &x);
                let one_step = slash(&f, k, &g12, &x);
                match (one_step, two_step) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                    (Err(_), _) | (_, Err(_)) => {}
                }
            }

            #[test]
            fn hecke_is_linear(p in -20i64..20, q in 1i64..12, s in -5i64..5) {
                let f = UnivariatePoly::from_ints(&[1, 2, 3]);
                let g = UnivariatePoly::from_ints(&[-4, 0, 7]);
                let sum = UnivariatePoly::from_ints(&[-3, 2, 10]);
                let spec = HeckeSpec::new(vec![(3, s), (2, 1)]);
                let x = rat(p, q);
                let lhs = hecke_apply(&sum, 2, &spec, &x).unwrap();
                let rhs = hecke_apply(&f, 2, &spec, &x).unwrap() + hecke_apply(&g, 2, &spec, &x).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
