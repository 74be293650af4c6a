//! Exact integer and rational foundations.
//!
//! Everything in the exact pipeline is built on [`BigInt`] and [`Rational`]
//! (an alias for [`BigRational`], which keeps values in lowest terms with a
//! positive denominator). The enumeration kernels drop to `i128` internally,
//! so this module also carries machine-word versions of the hot primitives.

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact arbitrary-precision rational number.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("negative input {0} to integer square root")]
    NegativeSqrt(BigInt),
    #[error("Pell equation needs a positive non-square discriminant, got {0}")]
    BadPellDiscriminant(BigInt),
    #[error("{0} is not a discriminant (must be 0 or 1 mod 4)")]
    NotDiscriminant(BigInt),
}

/// An integer congruent to 0 or 1 mod 4, tagged with whether it is fundamental.
///
/// `1` counts as fundamental, following Kohnen's convention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Discriminant {
    value: BigInt,
    fundamental: bool,
}

impl Discriminant {
    pub fn new(value: impl Into<BigInt>) -> Result<Self, ArithError> {
        let value = value.into();
        let r = value.mod_floor(&BigInt::from(4));
        if !(r.is_zero() || r.is_one()) {
            return Err(ArithError::NotDiscriminant(value));
        }
        let fundamental = is_fundamental_discriminant(&value);
        Ok(Discriminant { value, fundamental })
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn is_fundamental(&self) -> bool {
        self.fundamental
    }
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Builds `num/den` from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

// (2|n) for odd n, indexed by n mod 8.
const KRONECKER_TWO: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Kronecker symbol `(a|n)` on machine integers.
pub fn kronecker_i128(a: i128, n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut b = n;
    let mut a = a;
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v.is_multiple_of(2) {
        1
    } else {
        KRONECKER_TWO[(a.rem_euclid(8)) as usize]
    };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    // b is odd and positive from here on.
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= KRONECKER_TWO[(b % 8) as usize];
        }
        if a.rem_euclid(4) == 3 && b % 4 == 3 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

fn trailing_zeros_big(n: &BigInt) -> u64 {
    n.trailing_zeros().unwrap_or(0)
}

/// Kronecker symbol `(a|n)`, fully extended to even and negative `n`.
///
/// `(a|-1)` is `-1` exactly when `a < 0`, and `(a|2)` follows `a mod 8`.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i32 {
    if let (Some(a), Some(n)) = (a.to_i128(), n.to_i128()) {
        return kronecker_i128(a, n);
    }
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    if a.is_even() && n.is_even() {
        return 0;
    }
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    let mut b = n.clone();
    let mut a = a.clone();
    let v = trailing_zeros_big(&b);
    b >>= v;
    let mut k = if v.is_multiple_of(2) {
        1
    } else {
        KRONECKER_TWO[a.mod_floor(&eight).to_usize().unwrap()]
    };
    if b.is_negative() {
        b = -b;
        if a.is_negative() {
            k = -k;
        }
    }
    loop {
        if a.is_zero() {
            return if b.is_one() { k } else { 0 };
        }
        let v = trailing_zeros_big(&a);
        a >>= v;
        if v % 2 == 1 {
            k *= KRONECKER_TWO[b.mod_floor(&eight).to_usize().unwrap()];
        }
        if a.mod_floor(&four) == BigInt::from(3) && b.mod_floor(&four) == BigInt::from(3) {
            k = -k;
        }
        let r = a.abs();
        a = b.mod_floor(&r);
        b = r;
    }
}

pub fn is_squarefree_u128(mut n: u128) -> bool {
    if n == 0 {
        return false;
    }
    let mut p: u128 = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

pub fn is_squarefree(n: &BigInt) -> bool {
    if n.is_zero() {
        return false;
    }
    if let Some(m) = n.abs().to_u128() {
        return is_squarefree_u128(m);
    }
    factorize(n).iter().all(|(_, e)| *e == 1)
}

/// True iff `d` is 1, a squarefree `d ≡ 1 (mod 4)`, or `4m` with `m ≡ 2, 3 (mod 4)` squarefree.
pub fn is_fundamental_discriminant(d: &BigInt) -> bool {
    if d.is_one() {
        return true;
    }
    let four = BigInt::from(4);
    match d.mod_floor(&four).to_u8().unwrap() {
        1 => is_squarefree(d),
        0 => {
            let m = d / &four;
            let r = m.mod_floor(&four).to_u8().unwrap();
            (r == 2 || r == 3) && is_squarefree(&m)
        }
        _ => false,
    }
}

pub fn integer_sqrt_floor(n: &BigInt) -> Result<BigInt, ArithError> {
    if n.is_negative() {
        return Err(ArithError::NegativeSqrt(n.clone()));
    }
    Ok(n.sqrt())
}

pub fn is_square(n: &BigInt) -> bool {
    match integer_sqrt_floor(n) {
        Ok(r) => &r * &r == *n,
        Err(_) => false,
    }
}

pub fn isqrt_u128(n: u128) -> u128 {
    n.sqrt()
}

/// Prime factorization of `|n|` by trial division, primes ascending.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut m = n.abs();
    if m.is_zero() {
        return out;
    }
    if let Some(small) = m.to_u128() {
        return factorize_u128(small)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect();
    }
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if !m.is_one() {
        out.push((m, 1));
    }
    out
}

pub fn factorize_u128(mut m: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut p: u128 = 2;
    while p * p <= m {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let nr = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, nr);
        let ns = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, ns);
        let nt = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, nt);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

/// Integer power of a rational with a possibly negative exponent.
pub fn rat_pow(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

pub const PELL_SCAN_LIMIT: u64 = 10_000;

/// Smallest positive solution `(t, u)` of `t^2 - delta u^2 = 4`.
///
/// Scans `u = 1, 2, ...` up to [`PELL_SCAN_LIMIT`] and otherwise falls back
/// to the continued fraction of `sqrt(delta)`.
pub fn pell_fundamental(delta: &BigInt) -> Result<(BigInt, BigInt), ArithError> {
    if !delta.is_positive() || is_square(delta) {
        return Err(ArithError::BadPellDiscriminant(delta.clone()));
    }
    let r = delta.mod_floor(&BigInt::from(4));
    if !(r.is_zero() || r.is_one()) {
        return Err(ArithError::BadPellDiscriminant(delta.clone()));
    }
    if let Some(d) = delta.to_u128().filter(|&d| d < (1u128 << 90)) {
        for u in 1..=PELL_SCAN_LIMIT as u128 {
            let t2 = d * u * u + 4;
            let t = t2.sqrt();
            if t * t == t2 {
                return Ok((BigInt::from(t), BigInt::from(u)));
            }
        }
    }
    Ok(pell_by_continued_fraction(delta))
}

/// Minimal `(x, y)` with `x^2 - d y^2 = 1`, from the period of the
/// continued fraction of `sqrt(d)`.
pub fn pell_unit_cf(d: &BigInt) -> (BigInt, BigInt) {
    let a0 = d.sqrt();
    let (mut m, mut q, mut a) = (BigInt::zero(), BigInt::one(), a0.clone());
    let (mut p_prev, mut p) = (BigInt::one(), a0.clone());
    let (mut q_prev, mut qq) = (BigInt::zero(), BigInt::one());
    loop {
        if &p * &p - d * &qq * &qq == BigInt::one() {
            return (p, qq);
        }
        m = &q * &a - &m;
        q = (d - &m * &m) / &q;
        a = (&a0 + &m) / &q;
        let np = &a * &p + &p_prev;
        p_prev = std::mem::replace(&mut p, np);
        let nq = &a * &qq + &q_prev;
        q_prev = std::mem::replace(&mut qq, nq);
    }
}

fn pell_by_continued_fraction(delta: &BigInt) -> (BigInt, BigInt) {
    // x + y sqrt(delta) lies in Z[sqrt(delta)], whose unit group has index
    // 1, 2 or 3 in the units of the order of discriminant delta. Undo the
    // largest power that still gives an integral (t + u sqrt(delta))/2.
    let (x, y) = pell_unit_cf(delta);
    let four = BigInt::from(4);
    let check = |t: &BigInt| -> Option<(BigInt, BigInt)> {
        let num = t * t - &four;
        if !num.is_positive() || !(&num % delta).is_zero() {
            return None;
        }
        let u2 = num / delta;
        let u = u2.sqrt();
        (&u * &u == u2 && u.is_positive()).then(|| (t.clone(), u))
    };
    // cube: trace(eps^3) = t^3 - 3t = 2x
    let target: BigInt = &x * 2;
    let guess: BigInt = target.cbrt();
    for t in [&guess - 1i32, guess.clone(), &guess + 1i32, &guess + 2i32] {
        if t.is_positive() && &t * &t * &t - &t * 3 == target {
            if let Some(sol) = check(&t) {
                return sol;
            }
        }
    }
    // square: trace(eps^2) = t^2 - 2 = 2x
    let t2: BigInt = &x * 2 + 2;
    let t = t2.sqrt();
    if &t * &t == t2 {
        if let Some(sol) = check(&t) {
            return sol;
        }
    }
    (x * 2, y * 2)
}

pub fn sign_of(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn legendre_by_counting(a: i64, p: i64) -> i32 {
        let a = a.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == a) {
            1
        } else {
            -1
        }
    }

    fn small_primes(limit: i64) -> Vec<i64> {
        (2..limit)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(&b(21), &b(1)), 1);
        assert_eq!(kronecker(&b(-7), &b(1)), 1);
        assert_eq!(kronecker(&b(21), &b(5)), 1);
        assert_eq!(kronecker(&b(8), &b(5)), -1);
        assert_eq!(kronecker(&b(13), &b(-9)), 1);
        assert_eq!(kronecker(&b(-3), &b(-1)), -1);
        assert_eq!(kronecker(&b(5), &b(2)), -1);
        assert_eq!(kronecker(&b(17), &b(2)), 1);
        assert_eq!(kronecker(&b(4), &b(2)), 0);
        assert_eq!(kronecker(&b(1), &b(0)), 1);
        assert_eq!(kronecker(&b(2), &b(0)), 0);
    }

    #[test]
    fn kronecker_matches_legendre_oracle() {
        for p in small_primes(200).into_iter().filter(|&p| p > 2) {
            for a in -50..50 {
                assert_eq!(
                    kronecker_i128(a as i128, p as i128),
                    legendre_by_counting(a, p),
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn reciprocity_sign() {
        let odd: Vec<i64> = (3..120).step_by(2).collect();
        for &m in &odd {
            for &n in &odd {
                if num_integer::gcd(m, n) != 1 {
                    continue;
                }
                let lhs = kronecker_i128(m as i128, n as i128) * kronecker_i128(n as i128, m as i128);
                let rhs = if (m % 4 == 3) && (n % 4 == 3) { -1 } else { 1 };
                assert_eq!(lhs, rhs, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn kronecker_big_agrees_with_small() {
        let big = BigInt::from(10).pow(40) + 7;
        let big_n = BigInt::from(10).pow(41) + 3;
        // multiplicativity in the top argument
        let a = BigInt::from(13);
        let lhs = kronecker(&(&a * &big), &big_n);
        let rhs = kronecker(&a, &big_n) * kronecker(&big, &big_n);
        assert_eq!(lhs, rhs);
        assert_eq!(kronecker(&b(13), &b(2236)), kronecker_i128(13, 2236));
    }

    #[test]
    fn fundamental_discriminants() {
        assert!(!is_fundamental_discriminant(&b(9)));
        assert!(is_fundamental_discriminant(&b(21)));
        assert!(!is_fundamental_discriminant(&b(45)));
        assert!(is_fundamental_discriminant(&b(1)));
        assert!(is_fundamental_discriminant(&b(8)));
        assert!(is_fundamental_discriminant(&b(-4)));
        assert!(is_fundamental_discriminant(&b(-3)));
        assert!(is_fundamental_discriminant(&b(172)));
        assert!(!is_fundamental_discriminant(&b(4)));
        assert!(!is_fundamental_discriminant(&b(16)));
        assert!(!is_fundamental_discriminant(&b(2)));
        assert!(!is_fundamental_discriminant(&b(0)));
    }

    #[test]
    fn discriminant_type() {
        assert!(Discriminant::new(7).is_err());
        let d = Discriminant::new(13).unwrap();
        assert!(d.is_fundamental());
        assert!(Discriminant::new(2236).unwrap().is_fundamental());
        assert!(!Discriminant::new(45).unwrap().is_fundamental());
    }

    #[test]
    fn sqrt_and_squares() {
        assert_eq!(integer_sqrt_floor(&b(0)).unwrap(), b(0));
        assert_eq!(integer_sqrt_floor(&b(2236)).unwrap(), b(47));
        assert!(!is_square(&b(2236)));
        assert!(is_square(&b(2209)));
        assert!(integer_sqrt_floor(&b(-1)).is_err());
    }

    #[test]
    fn pell_examples() {
        assert_eq!(pell_fundamental(&b(5)).unwrap(), (b(3), b(1)));
        assert_eq!(pell_fundamental(&b(12)).unwrap(), (b(4), b(1)));
        assert_eq!(pell_fundamental(&b(8)).unwrap(), (b(6), b(2)));
        assert!(pell_fundamental(&b(9)).is_err());
        assert!(pell_fundamental(&b(-5)).is_err());
    }

    #[test]
    fn pell_minimality_by_scan() {
        for delta in (5..10_000i64).filter(|d| d % 4 == 0 || d % 4 == 1) {
            let d = b(delta);
            if is_square(&d) {
                continue;
            }
            let (t, u) = pell_fundamental(&d).unwrap();
            assert_eq!(&t * &t - &d * &u * &u, b(4));
            let u = u.to_i64().unwrap_or(i64::MAX);
            for smaller in 1..u.min(2000) {
                assert!(!is_square(&(b(delta) * b(smaller) * b(smaller) + 4)), "delta={delta}");
            }
        }
    }

    #[test]
    fn pell_continued_fraction_agrees_with_scan() {
        for delta in (5..3000i64).filter(|d| d % 4 == 0 || d % 4 == 1) {
            let d = b(delta);
            if is_square(&d) {
                continue;
            }
            assert_eq!(
                pell_by_continued_fraction(&d),
                pell_fundamental(&d).unwrap(),
                "delta={delta}"
            );
        }
    }

    #[test]
    fn ext_gcd_identity() {
        let (g, x, y) = ext_gcd(&b(240), &b(-46));
        assert_eq!(g, b(2));
        assert_eq!(b(240) * x + b(-46) * y, b(2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rational_add_sub_roundtrip(
                a in any::<i64>(), b in 1i64..i64::MAX, c in any::<i64>(), d in 1i64..i64::MAX,
                scale in 0u32..5,
            ) {
                let s = BigInt::from(10).pow(scale * 9);
                let x = Rational::new(BigInt::from(a) * &s, BigInt::from(b));
                let y = Rational::new(BigInt::from(c), BigInt::from(d) * &s);
                prop_assert_eq!((&x + &y) - &y, x);
            }

            #[test]
            fn kronecker_multiplicative_in_top(a in -500i128..500, c in -500i128..500, n in -500i128..500) {
                prop_assert_eq!(kronecker_i128(a * c, n), kronecker_i128(a, n) * kronecker_i128(c, n));
            }
        }
    }
}
