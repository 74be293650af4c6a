//! Binary quadratic forms `[a, b, c] = aX^2 + bXY + cY^2` and the level-`N`
//! enumeration kernels.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{is_square, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QFormError {
    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(BigInt),
    #[error("level {level} does not divide leading coefficient of {form}")]
    LevelDoesNotDivide { form: Box<QuadForm>, level: BigInt },
    #[error("discriminant {0} is a perfect square")]
    SquareDiscriminant(BigInt),
    #[error("discriminant {0} is not positive or not 0, 1 mod 4")]
    BadDiscriminant(BigInt),
    #[error("level must be positive, got {0}")]
    BadLevel(BigInt),
    #[error("height must be positive")]
    NonPositiveHeight,
    #[error("enumeration size out of machine range (delta {delta}, denominator {den})")]
    TooLarge { delta: BigInt, den: BigInt },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    disc: BigInt,
}

impl QuadForm {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        let (a, b, c) = (a.into(), b.into(), c.into());
        let disc = &b * &b - BigInt::from(4) * &a * &c;
        QuadForm { a, b, c, disc }
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// `Q(x, y)` at integers.
    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }

    pub fn negate_middle(&self) -> QuadForm {
        QuadForm::new(self.a.clone(), -&self.b, self.c.clone())
    }

    pub fn to_small(&self) -> Option<SmallForm> {
        Some(SmallForm {
            a: self.a.to_i128()?,
            b: self.b.to_i128()?,
            c: self.c.to_i128()?,
        })
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// Machine-word form used inside the kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl From<SmallForm> for QuadForm {
    fn from(f: SmallForm) -> Self {
        QuadForm::new(f.a, f.b, f.c)
    }
}

/// Integer 2x2 matrix `[[m11, m12], [m21, m22]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GL2Matrix {
    pub m11: BigInt,
    pub m12: BigInt,
    pub m21: BigInt,
    pub m22: BigInt,
}

impl GL2Matrix {
    pub fn new(m11: impl Into<BigInt>, m12: impl Into<BigInt>, m21: impl Into<BigInt>, m22: impl Into<BigInt>) -> Self {
        GL2Matrix {
            m11: m11.into(),
            m12: m12.into(),
            m21: m21.into(),
            m22: m22.into(),
        }
    }

    pub fn identity() -> Self {
        GL2Matrix::new(1, 0, 0, 1)
    }

    /// `T = [[1,1],[0,1]]`.
    pub fn t() -> Self {
        GL2Matrix::new(1, 1, 0, 1)
    }

    /// `S = [[0,-1],[1,0]]`.
    pub fn s() -> Self {
        GL2Matrix::new(0, -1, 1, 0)
    }

    pub fn determinant(&self) -> BigInt {
        &self.m11 * &self.m22 - &self.m12 * &self.m21
    }

    pub fn mul(&self, o: &GL2Matrix) -> GL2Matrix {
        GL2Matrix {
            m11: &self.m11 * &o.m11 + &self.m12 * &o.m21,
            m12: &self.m11 * &o.m12 + &self.m12 * &o.m22,
            m21: &self.m21 * &o.m11 + &self.m22 * &o.m21,
            m22: &self.m21 * &o.m12 + &self.m22 * &o.m22,
        }
    }

    /// Inverse of a determinant-one matrix (the adjugate).
    pub fn inverse(&self) -> GL2Matrix {
        GL2Matrix {
            m11: self.m22.clone(),
            m12: -&self.m12,
            m21: -&self.m21,
            m22: self.m11.clone(),
        }
    }

    pub fn neg(&self) -> GL2Matrix {
        GL2Matrix {
            m11: -&self.m11,
            m12: -&self.m12,
            m21: -&self.m21,
            m22: -&self.m22,
        }
    }

    pub fn pow(&self, e: i64) -> GL2Matrix {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = GL2Matrix::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == GL2Matrix::identity()
    }

    /// Equal up to sign.
    pub fn eq_projective(&self, o: &GL2Matrix) -> bool {
        self == o || *self == o.neg()
    }

    /// `m21 x + m22`, the automorphy factor base.
    pub fn cocycle_base(&self, x: &Rational) -> Rational {
        Rational::from_integer(self.m21.clone()) * x + Rational::from_integer(self.m22.clone())
    }

    /// Mobius action on a rational; `None` for the cusp at infinity.
    pub fn act(&self, x: &Rational) -> Option<Rational> {
        let num = x.numer() * &self.m11 + x.denom() * &self.m12;
        let den = x.numer() * &self.m21 + x.denom() * &self.m22;
        if den.is_zero() {
            None
        } else {
            Some(Rational::new(num, den))
        }
    }

    pub fn entries_i128(&self) -> Option<[i128; 4]> {
        Some([
            self.m11.to_i128()?,
            self.m12.to_i128()?,
            self.m21.to_i128()?,
            self.m22.to_i128()?,
        ])
    }
}

impl fmt::Display for GL2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.m11, self.m12, self.m21, self.m22)
    }
}

/// The forms `Q` with `N | a`, `disc Q = delta` and `a < 0 < Q(point, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelFormSet {
    pub level: BigInt,
    pub delta: BigInt,
    pub point: Rational,
    pub forms: Vec<QuadForm>,
}

pub fn eval_at_rational(q: &QuadForm, x: &Rational) -> Rational {
    let (u, v) = (x.numer(), x.denom());
    Rational::new(q.eval(u, v), v * v)
}

/// `(Q o gamma)(x, y) = Q(m11 x + m12 y, m21 x + m22 y)`.
pub fn apply_matrix(q: &QuadForm, g: &GL2Matrix) -> Result<QuadForm, QFormError> {
    let det = g.determinant();
    if !det.is_one() {
        return Err(QFormError::NotUnimodular(det));
    }
    let a = q.eval(&g.m11, &g.m21);
    let c = q.eval(&g.m12, &g.m22);
    let b = BigInt::from(2) * &q.a * &g.m11 * &g.m12
        + &q.b * (&g.m11 * &g.m22 + &g.m12 * &g.m21)
        + BigInt::from(2) * &q.c * &g.m21 * &g.m22;
    Ok(QuadForm::new(a, b, c))
}

/// `[a, b, c] -> [cN, -b, a/N]`.
pub fn fricke(q: &QuadForm, n: &BigInt) -> Result<QuadForm, QFormError> {
    if !n.is_positive() {
        return Err(QFormError::BadLevel(n.clone()));
    }
    if !(&q.a % n).is_zero() {
        return Err(QFormError::LevelDoesNotDivide {
            form: Box::new(q.clone()),
            level: n.clone(),
        });
    }
    Ok(QuadForm::new(&q.c * n, -&q.b, &q.a / n))
}

fn check_level_delta(n: &BigInt, delta: &BigInt) -> Result<(), QFormError> {
    if !n.is_positive() {
        return Err(QFormError::BadLevel(n.clone()));
    }
    let r = delta.mod_floor(&BigInt::from(4));
    if !delta.is_positive() || !(r.is_zero() || r.is_one()) {
        return Err(QFormError::BadDiscriminant(delta.clone()));
    }
    if is_square(delta) {
        return Err(QFormError::SquareDiscriminant(delta.clone()));
    }
    Ok(())
}

/// Residues `r mod 2N` with `r^2 = delta (mod 4N)`; exactly the classes of
/// middle coefficients admissible at level `N`.
pub fn middle_residues(n: i128, delta: i128) -> Vec<i128> {
    let m = 4 * n;
    let target = delta.rem_euclid(m);
    (0..2 * n).filter(|r| (r * r) % m == target).collect()
}

/// Calls `f(a, b, c)` for every form with `N | a`, discriminant `delta` and
/// `a < 0 < Q(u/v, 1)`, where `0 <= u < v`, `gcd(u, v) = 1`.
///
/// Bound on `a`: writing `Q(u/v, 1) = n / v^2` with `n = au^2 + buv + cv^2`
/// a positive integer, `Q(u/v, 1) >= 1/v^2`. For `a < 0` the maximum of
/// `Q(x, 1)` over real `x` is `delta / (4|a|)`, so `|a| <= delta v^2 / 4`.
///
/// Window on `b`: `4a v^2 Q(u/v, 1) = (2au + bv)^2 - delta v^2`, so with
/// `a < 0` positivity is `|2au + bv| < v sqrt(delta)`. Since `delta v^2` is
/// not a square this is `|2au + bv| <= isqrt(delta v^2)`.
///
/// Forms arrive ordered by decreasing `a`, then increasing `b`.
pub(crate) fn for_each_level_form<F>(n: i128, delta: i128, u: i128, v: i128, mut f: F) -> Result<(), QFormError>
where
    F: FnMut(i128, i128, i128),
{
    debug_assert!(v > 0 && 0 <= u && u < v);
    let too_large = || QFormError::TooLarge {
        delta: BigInt::from(delta),
        den: BigInt::from(v),
    };
    let dv2 = v
        .checked_mul(v)
        .and_then(|v2| v2.checked_mul(delta))
        .filter(|&x| x < (1i128 << 61))
        .ok_or_else(too_large)?;
    // |b| <= dv2/2 + sqrt(delta), so b^2 fits in i64 when dv2 < 2^31.
    let small = dv2 < (1i128 << 31);
    let s = num_integer::Roots::sqrt(&dv2);
    let residues = middle_residues(n, delta);
    if residues.is_empty() {
        return Ok(());
    }
    let step = 2 * n;
    let a_max = dv2 / 4;
    let mut a = -n;
    while -a <= a_max {
        let four_a = 4 * a;
        let lo = Integer::div_ceil(&(-2 * a * u - s), &v);
        let hi = Integer::div_floor(&(-2 * a * u + s), &v);
        if lo <= hi {
            let base = lo - lo.rem_euclid(step);
            for &r in &residues {
                let mut b = base + r;
                if b < lo {
                    b += step;
                }
                while b <= hi {
                    let num = b * b - delta;
                    let divisible = if small {
                        (num as i64) % (four_a as i64) == 0
                    } else {
                        num % four_a == 0
                    };
                    if divisible {
                        f(a, b, num / four_a);
                    }
                    b += step;
                }
            }
        }
        a -= n;
    }
    Ok(())
}

/// Splits `x` into `(n, u, v)` with `x = n + u/v`, `0 <= u < v`.
pub(crate) fn reduce_mod_one(x: &Rational) -> Option<(i128, i128, i128)> {
    let v = x.denom().to_i128()?;
    let num = x.numer().to_i128()?;
    Some((Integer::div_floor(&num, &v), num.rem_euclid(v), v))
}

/// All members of `Q_{N,delta}(x)` as machine-word forms, sorted by `(a, b, c)`.
pub fn level_forms_small(n: i128, delta: i128, x: &Rational) -> Result<Vec<SmallForm>, QFormError> {
    check_level_delta(&BigInt::from(n), &BigInt::from(delta))?;
    let (shift, u, v) = reduce_mod_one(x).ok_or_else(|| QFormError::TooLarge {
        delta: BigInt::from(delta),
        den: x.denom().clone(),
    })?;
    let mut out = Vec::new();
    for_each_level_form(n, delta, u, v, |a, b, c| {
        // Q(y) = Q'(y - shift) for Q' found at the reduced point.
        out.push(SmallForm {
            a,
            b: b - 2 * a * shift,
            c: a * shift * shift - b * shift + c,
        });
    })?;
    out.sort_unstable();
    Ok(out)
}

pub fn enumerate_at_rational(n: &BigInt, delta: &BigInt, x: &Rational) -> Result<LevelFormSet, QFormError> {
    check_level_delta(n, delta)?;
    let too_large = || QFormError::TooLarge {
        delta: delta.clone(),
        den: x.denom().clone(),
    };
    let n_small = n.to_i128().ok_or_else(too_large)?;
    let d_small = delta.to_i128().ok_or_else(too_large)?;
    let forms = level_forms_small(n_small, d_small, x)?;
    Ok(LevelFormSet {
        level: n.clone(),
        delta: delta.clone(),
        point: x.clone(),
        forms: forms.into_iter().map(QuadForm::from).collect(),
    })
}

/// A point `x + iy` of the upper half plane with rational `x` and `y^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPoint {
    pub re: Rational,
    pub im_sq: Rational,
}

/// Forms with `N | a`, disc `delta`, `a < 0 < Q_z`, where
/// `Q_z = (a|z|^2 + b Re z + c) / Im z`.
///
/// `Q_z > 0` with `a < 0` reads `(2ax + b)^2 < delta - 4a^2 y^2`, which
/// forces `|a| < sqrt(delta) / (2y)`.
pub fn enumerate_negative_a_below_height(
    n: &BigInt,
    delta: &BigInt,
    z: &ExactPoint,
) -> Result<Vec<QuadForm>, QFormError> {
    check_level_delta(n, delta)?;
    if !z.im_sq.is_positive() {
        return Err(QFormError::NonPositiveHeight);
    }
    let delta_r = Rational::from_integer(delta.clone());
    let four = Rational::from_integer(BigInt::from(4));
    let mut out = Vec::new();
    let mut a: BigInt = -n.clone();
    loop {
        let a_r = Rational::from_integer(a.clone());
        // slack = delta - 4 a^2 y^2; need (2ax + b)^2 < slack
        let slack = &delta_r - &four * &a_r * &a_r * &z.im_sq;
        if !slack.is_positive() {
            break;
        }
        let t_max: BigInt = (slack.numer() / slack.denom()).sqrt() + 1;
        let center: BigInt = (Rational::from_integer(BigInt::from(-2)) * &a_r * &z.re)
            .floor()
            .to_integer();
        let mut b: BigInt = &center - &t_max - 1;
        let b_end: BigInt = &center + &t_max + 1;
        let four_a: BigInt = &a * 4;
        while b <= b_end {
            let num: BigInt = &b * &b - delta;
            if (&num % &four_a).is_zero() {
                let t = Rational::from_integer(BigInt::from(2)) * &a_r * &z.re + Rational::from_integer(b.clone());
                if &t * &t < slack {
                    out.push(QuadForm::new(a.clone(), b.clone(), &num / &four_a));
                }
            }
            b += 1;
        }
        a -= n;
    }
    out.sort();
    Ok(out)
}

/// Checks that `[a,b,c] -> [a, b+2a, a+b+c]` maps `Q(x+1)` onto `Q(x)` and
/// `[a,b,c] -> [a,-b,c]` maps `Q(x)` onto `Q(-x)`.
pub fn translate_bijection_check(n: &BigInt, delta: &BigInt, x: &Rational) -> Result<bool, QFormError> {
    let at_x = enumerate_at_rational(n, delta, x)?.forms;
    let shifted = enumerate_at_rational(n, delta, &(x + Rational::one()))?.forms;
    let mirrored = enumerate_at_rational(n, delta, &(-x))?.forms;
    let mut mapped: Vec<QuadForm> = shifted
        .iter()
        .map(|q| QuadForm::new(q.a.clone(), &q.b + &q.a * 2, &q.a + &q.b + &q.c))
        .collect();
    mapped.sort();
    let mut flipped: Vec<QuadForm> = at_x.iter().map(QuadForm::negate_middle).collect();
    flipped.sort();
    Ok(mapped == at_x && flipped == mirrored)
}
