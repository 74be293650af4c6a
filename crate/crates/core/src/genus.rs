//! The extended genus character `chi_{D0}` on forms with `D0 | disc`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{factorize, gcd_i128, is_fundamental_discriminant, kronecker, kronecker_i128, Discriminant};
use crate::qforms::{apply_matrix, GL2Matrix, QuadForm};

/// Largest L-infinity radius scanned for a represented value.
pub const SEARCH_RADIUS: i64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenusError {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(BigInt),
    #[error("{d0} does not divide the discriminant {disc} of the form")]
    DoesNotDivide { d0: BigInt, disc: BigInt },
    #[error("cofactor {0} of the discriminant is not 0 or 1 mod 4")]
    BadCofactor(BigInt),
    #[error("no represented value coprime to {d0} found for {form} within radius {radius}")]
    BudgetExhausted {
        d0: BigInt,
        form: Box<QuadForm>,
        radius: i64,
    },
    #[error("{0} represents no positive integer")]
    NoPositiveValue(Box<QuadForm>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusCharQuery {
    pub d0: Discriminant,
    pub form: QuadForm,
}

impl GenusCharQuery {
    pub fn new(d0: Discriminant, form: QuadForm) -> Result<Self, GenusError> {
        if !d0.is_fundamental() {
            return Err(GenusError::NotFundamental(d0.value().clone()));
        }
        if !(form.discriminant() % d0.value()).is_zero() {
            return Err(GenusError::DoesNotDivide {
                d0: d0.value().clone(),
                disc: form.discriminant().clone(),
            });
        }
        let cofactor = form.discriminant() / d0.value();
        let r = cofactor.mod_floor(&BigInt::from(4));
        if !(r.is_zero() || r.is_one()) {
            return Err(GenusError::BadCofactor(cofactor));
        }
        Ok(GenusCharQuery { d0, form })
    }
}

/// Points of the square ring `max(|x|, |y|) = r`, in a fixed order.
fn ring(r: i64) -> impl Iterator<Item = (i64, i64)> {
    let top = (-r..=r).map(move |x| (x, r));
    let sides = (-r + 1..r).flat_map(move |y| [(r, y), (-r, y)]);
    let bottom = (-r..=r).map(move |x| (x, -r));
    top.chain(sides).chain(bottom)
}

/// Represented values `Q(x, y) != 0` coprime to `d0`, in search order.
fn coprime_values<'a>(q: &'a QuadForm, d0: &'a BigInt) -> impl Iterator<Item = BigInt> + 'a {
    let quick = [(1i64, 0i64), (0, 1), (1, 1), (1, -1)];
    quick
        .into_iter()
        .chain((1..=SEARCH_RADIUS).flat_map(ring))
        .map(move |(x, y)| q.eval(&BigInt::from(x), &BigInt::from(y)))
        .filter(move |r| !r.is_zero() && r.gcd(d0).is_one())
}

fn content_shares_factor(q: &QuadForm, d0: &BigInt) -> bool {
    !q.a.gcd(&q.b).gcd(&q.c).gcd(d0).is_one()
}

/// `chi_{D0}(Q)`: zero when `gcd(a, b, c, D0) > 1`, else `(D0 | r)` for a
/// represented `r` coprime to `D0`.
pub fn chi_by_definition(q: &GenusCharQuery) -> Result<i32, GenusError> {
    let d0 = q.d0.value();
    if content_shares_factor(&q.form, d0) {
        return Ok(0);
    }
    coprime_values(&q.form, d0)
        .next()
        .map(|r| kronecker(d0, &r))
        .ok_or_else(|| GenusError::BudgetExhausted {
            d0: d0.clone(),
            form: Box::new(q.form.clone()),
            radius: SEARCH_RADIUS,
        })
}

/// `chi_{D0}(Q)` evaluated at each of the first `count` coprime represented values.
pub fn chi_from_representatives(q: &GenusCharQuery, count: usize) -> Vec<(BigInt, i32)> {
    let d0 = q.d0.value();
    let mut seen: Vec<BigInt> = Vec::new();
    let mut out = Vec::new();
    for r in coprime_values(&q.form, d0) {
        if seen.contains(&r) {
            continue;
        }
        seen.push(r.clone());
        out.push((r.clone(), kronecker(d0, &r)));
        if out.len() == count {
            break;
        }
    }
    out
}

/// Machine-word fast path of [`chi_by_definition`] used by the kernels.
/// The caller guarantees `d0 | b^2 - 4ac` and that `d0` is fundamental.
pub fn chi_small(d0: i128, a: i128, b: i128, c: i128) -> Result<i32, GenusError> {
    if gcd_i128(gcd_i128(gcd_i128(a, b), c), d0) != 1 {
        return Ok(0);
    }
    for r in [a, c, a + b + c, a - b + c] {
        if r != 0 && gcd_i128(r, d0) == 1 {
            return Ok(kronecker_i128(d0, r));
        }
    }
    let form = QuadForm::new(a, b, c);
    let d0 = BigInt::from(d0);
    chi_by_definition(&GenusCharQuery {
        d0: Discriminant::new(d0).expect("caller passes a discriminant"),
        form,
    })
}

/// `p* = +-p^l` with `|p*|` the exact power of `p` in `d` and `d/p*` fundamental.
///
/// When `d` is not fundamental no sign works; `+p^l` is returned then.
pub fn p_star(p: &BigInt, d: &Discriminant) -> BigInt {
    let mut l = 0u32;
    let mut m = d.value().clone();
    while !m.is_zero() && (&m % p).is_zero() {
        m /= p;
        l += 1;
    }
    let pl = num_traits::pow(p.clone(), l as usize);
    if l > 0 && !(p % 2u32).is_zero() {
        // odd prime discriminant: sign fixed by p mod 4
        return if (p % 4u32) == BigInt::one() { pl } else { -pl };
    }
    for cand in [pl.clone(), -pl.clone()] {
        if is_fundamental_discriminant(&(d.value() / &cand)) {
            return cand;
        }
    }
    pl
}

/// An `SL_2(Z)`-equivalent form with positive leading coefficient.
fn positive_leading(q: &QuadForm) -> Result<QuadForm, GenusError> {
    if q.a.is_positive() {
        return Ok(q.clone());
    }
    let candidates = (1..=SEARCH_RADIUS).flat_map(ring);
    for (x, y) in candidates {
        if num_integer::gcd(x, y) != 1 {
            continue;
        }
        let (bx, by) = (BigInt::from(x), BigInt::from(y));
        if q.eval(&bx, &by).is_positive() {
            // first column (x, y); complete with x r + y s = 1
            let (_, r, s) = crate::arith::ext_gcd(&bx, &by);
            let g = GL2Matrix::new(bx, -s, by, r);
            return Ok(apply_matrix(q, &g).expect("determinant one by construction"));
        }
    }
    Err(GenusError::NoPositiveValue(Box::new(q.clone())))
}

/// Kohnen's closed formula
/// `chi_D([a,b,c]) = prod_{p^v || a} (D/p* | p^v) (p* | ac/p^v)`, `a > 0`.
pub fn chi_explicit(q: &GenusCharQuery) -> Result<i32, GenusError> {
    let d = &q.d0;
    if content_shares_factor(&q.form, d.value()) {
        return Ok(0);
    }
    let form = positive_leading(&q.form)?;
    let ac = &form.a * &form.c;
    let mut chi = 1;
    for (p, v) in factorize(&form.a) {
        let pv = num_traits::pow(p.clone(), v as usize);
        let ps = p_star(&p, d);
        chi *= kronecker(&(d.value() / &ps), &pv) * kronecker(&ps, &(&ac / &pv));
        if chi == 0 {
            break;
        }
    }
    Ok(chi)
}

/// Character value from a small integer, used by the tests and bindings.
pub fn chi(d0: i64, form: &QuadForm) -> Result<i32, GenusError> {
    let d0 = Discriminant::new(d0).map_err(|_| GenusError::NotFundamental(BigInt::from(d0)))?;
    chi_by_definition(&GenusCharQuery::new(d0, form.clone())?)
}
