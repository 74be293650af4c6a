//! Decision driver: evaluates the Hecke-slashed character sum at the orbit
//! points of the generators of `Gamma0(N)` and reports whether the twisted
//! L-value product vanishes.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{factorize_u128, kronecker, Rational};
use crate::gamma0::{build_context, is_equivalent_to_zero, EvaluationPoint, Gamma0Context, Gamma0Error};
use crate::localpoly::{
    hecke_apply, hecke_max_denominator, HeckeSpec, LocalPolyError, LocalPolyParams, NonConstSum, ParamError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VanishError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Compute(#[from] LocalPolyError),
    #[error(transparent)]
    Group(#[from] Gamma0Error),
    #[error("no configured D0 matches the Kronecker symbols of D = {0} at the primes dividing N")]
    NoMatchingD0(BigInt),
    #[error("point {point} needs denominator {den} > bound {bound}")]
    CostExceeded {
        point: Box<Rational>,
        den: BigInt,
        bound: BigInt,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Vanishing,
    Nonvanishing,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Vanishing => "VANISHING",
            Verdict::Nonvanishing => "NONVANISHING",
        })
    }
}

/// A fixed `D0`, or a list to choose from by Kronecker symbols at `p | N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum D0Choice {
    Fixed(BigInt),
    Auto(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishJob {
    pub k: u32,
    pub n: u64,
    pub d0: D0Choice,
    pub candidates: Vec<BigInt>,
    pub hecke: HeckeSpec,
    pub base_point: Rational,
    /// Points evaluated in the first round on top of the generator images.
    pub extra_points: Vec<Rational>,
    /// Refuse Hecke leaves with larger denominators.
    pub max_denominator: Option<BigInt>,
}

impl VanishJob {
    pub fn new(k: u32, n: u64, d0: D0Choice, candidates: Vec<BigInt>, hecke: HeckeSpec) -> Self {
        VanishJob {
            k,
            n,
            d0,
            candidates,
            hecke,
            base_point: Rational::zero(),
            extra_points: Vec::new(),
            max_denominator: None,
        }
    }
}

/// First configured `D0` whose Kronecker symbols agree with `D` at every `p | N`.
pub fn select_d0(n: u64, d: &BigInt, choices: &[BigInt]) -> Option<BigInt> {
    let primes: Vec<BigInt> = factorize_u128(n as u128)
        .into_iter()
        .map(|(p, _)| BigInt::from(p))
        .collect();
    choices
        .iter()
        .find(|d0| primes.iter().all(|p| kronecker(d, p) == kronecker(d0, p)))
        .cloned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointValue {
    #[serde(serialize_with = "ser_rational")]
    pub point: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub generator: Option<usize>,
    pub power: Option<u32>,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscriminantReport {
    #[serde(serialize_with = "ser_bigint")]
    pub d: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub d0: BigInt,
    pub verdict: Verdict,
    /// `S(base_point)`, subtracted from every entry.
    #[serde(serialize_with = "ser_rational")]
    pub constant: Rational,
    pub table: Vec<PointValue>,
    pub rounds_used: u32,
}

impl DiscriminantReport {
    pub fn value_at(&self, x: &Rational) -> Option<&Rational> {
        self.table.iter().find(|e| &e.point == x).map(|e| &e.value)
    }
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    #[serde(serialize_with = "ser_bigint")]
    pub d: BigInt,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VanishReport {
    pub k: u32,
    pub n: u64,
    pub reports: Vec<DiscriminantReport>,
    pub rejected: Vec<Rejection>,
    /// The Atkin-Lehner hypotheses are taken on trust.
    pub atkin_lehner_asserted: bool,
}

/// Per-discriminant evaluator for `S(x)` and `P(x) = S(x) - S(base)`.
pub struct Evaluator {
    pub params: LocalPolyParams,
    pub hecke: HeckeSpec,
    f: NonConstSum,
    max_denominator: Option<BigInt>,
    constant: Rational,
}

impl Evaluator {
    pub fn new(params: LocalPolyParams, hecke: HeckeSpec, base_point: &Rational) -> Result<Self, VanishError> {
        Self::with_bound(params, hecke, base_point, None)
    }

    pub fn with_bound(
        params: LocalPolyParams,
        hecke: HeckeSpec,
        base_point: &Rational,
        max_denominator: Option<BigInt>,
    ) -> Result<Self, VanishError> {
        hecke.validate(params.n)?;
        let mut ev = Evaluator {
            f: NonConstSum::new(params.clone()),
            params,
            hecke,
            max_denominator,
            constant: Rational::zero(),
        };
        ev.constant = ev.s(base_point)?;
        Ok(ev)
    }

    /// The Hecke-slashed weighted sum at `x`.
    pub fn s(&self, x: &Rational) -> Result<Rational, VanishError> {
        if let Some(bound) = &self.max_denominator {
            let den = hecke_max_denominator(self.params.k, &self.hecke, x);
            if &den > bound {
                return Err(VanishError::CostExceeded {
                    point: Box::new(x.clone()),
                    den,
                    bound: bound.clone(),
                });
            }
        }
        Ok(hecke_apply(&self.f, self.params.k, &self.hecke, x)?)
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn p_relative(&self, x: &Rational) -> Result<Rational, VanishError> {
        Ok(self.s(x)? - &self.constant)
    }
}

/// `S(x)` for a single parameter set.
pub fn s_value(params: &LocalPolyParams, hecke: &HeckeSpec, x: &Rational) -> Result<Rational, VanishError> {
    hecke.validate(params.n)?;
    Ok(hecke_apply(&NonConstSum::new(params.clone()), params.k, hecke, x)?)
}

/// `S(x) - S(base)`.
pub fn p_relative(
    params: &LocalPolyParams,
    hecke: &HeckeSpec,
    base: &Rational,
    x: &Rational,
) -> Result<Rational, VanishError> {
    Ok(s_value(params, hecke, x)? - s_value(params, hecke, base)?)
}

fn evaluate(ev: &Evaluator, points: &[(Rational, Option<usize>, Option<u32>)]) -> Result<Vec<PointValue>, VanishError> {
    points
        .par_iter()
        .map(|(x, g, p)| {
            Ok(PointValue {
                point: x.clone(),
                value: ev.p_relative(x)?,
                generator: *g,
                power: *p,
            })
        })
        .collect()
}

/// Two-round decision for one parameter set against a prepared group context.
pub fn decide_one(
    ctx: &Gamma0Context,
    params: LocalPolyParams,
    hecke: &HeckeSpec,
    base_point: &Rational,
    extra_points: &[Rational],
    max_denominator: Option<BigInt>,
) -> Result<DiscriminantReport, VanishError> {
    let k = params.k;
    let (d, d0) = (params.d.value().clone(), params.d0.value().clone());
    let ev = Evaluator::with_bound(params, hecke.clone(), base_point, max_denominator)?;
    let all: Vec<EvaluationPoint> = ctx.evaluation_points(k);
    let tagged = |e: &EvaluationPoint| (e.point.clone(), Some(e.generator), Some(e.power));

    let mut first: Vec<_> = all.iter().filter(|e| e.power == 1).map(tagged).collect();
    for x in extra_points {
        if first.iter().all(|(y, _, _)| y != x) {
            first.push((x.clone(), None, None));
        }
    }
    let mut table = evaluate(&ev, &first)?;
    let mut report = DiscriminantReport {
        d,
        d0,
        verdict: Verdict::Nonvanishing,
        constant: ev.constant().clone(),
        table: Vec::new(),
        rounds_used: 1,
    };
    if table.iter().any(|e| !e.value.is_zero()) {
        report.table = table;
        return Ok(report);
    }
    let escalation: Vec<_> = all
        .iter()
        .filter(|e| e.power > 1 && table.iter().all(|t| t.point != e.point))
        .map(tagged)
        .collect();
    table.extend(evaluate(&ev, &escalation)?);
    report.rounds_used = 2;
    if table.iter().all(|e| e.value.is_zero()) {
        report.verdict = Verdict::Vanishing;
    }
    report.table = table;
    Ok(report)
}

fn candidate_params(job: &VanishJob, d: &BigInt) -> Result<LocalPolyParams, VanishError> {
    let d0 = match &job.d0 {
        D0Choice::Fixed(d0) => d0.clone(),
        D0Choice::Auto(choices) => select_d0(job.n, d, choices).ok_or_else(|| VanishError::NoMatchingD0(d.clone()))?,
    };
    Ok(LocalPolyParams::new(job.k, job.n, d.clone(), d0)?)
}

/// Runs every candidate; invalid ones are listed in `rejected` with the reason.
/// A computation error on a valid candidate aborts the whole job.
pub fn decide(job: &VanishJob) -> Result<VanishReport, VanishError> {
    let ctx = build_context(job.n)?;
    let outcomes: Vec<Result<DiscriminantReport, (bool, VanishError)>> = job
        .candidates
        .par_iter()
        .map(|d| {
            let params = candidate_params(job, d).map_err(|e| (true, e))?;
            decide_one(
                &ctx,
                params,
                &job.hecke,
                &job.base_point,
                &job.extra_points,
                job.max_denominator.clone(),
            )
            .map_err(|e| (matches!(e, VanishError::Params(_)), e))
        })
        .collect();
    let mut report = VanishReport {
        k: job.k,
        n: job.n,
        reports: Vec::new(),
        rejected: Vec::new(),
        atkin_lehner_asserted: true,
    };
    for (d, outcome) in job.candidates.iter().zip(outcomes) {
        match outcome {
            Ok(r) => report.reports.push(r),
            Err((true, e)) => report.rejected.push(Rejection {
                d: d.clone(),
                reason: e.to_string(),
            }),
            Err((false, e)) => return Err(e),
        }
    }
    Ok(report)
}

/// `P(q1 / (N q2))` for coprime `q1`, `q2` with `1 <= q2 <= max_q2` and
/// `0 < q1 < N q2`. These cusps are inequivalent to 0, but the relative
/// value is still predicted to vanish when the L-value product does.
pub fn cusp_infinity_values(ev: &Evaluator, max_q2: u64) -> Result<Vec<(Rational, Rational)>, VanishError> {
    let n = ev.params.n;
    let mut pts = Vec::new();
    for q2 in 1..=max_q2 {
        let den = n * q2;
        for q1 in 1..den {
            let x = Rational::new(BigInt::from(q1), BigInt::from(den));
            if x.denom() == &BigInt::from(den) && !pts.contains(&x) {
                debug_assert!(is_equivalent_to_zero(n, &x).is_none() || n == 1);
                pts.push(x);
            }
        }
    }
    pts.par_iter().map(|x| Ok((x.clone(), ev.p_relative(x)?))).collect()
}

/// Published L-values; verdicts must agree with their zero pattern.
pub mod fixtures {
    /// `(D, L(F x chi_D, 2))` for the level 9 form.
    pub const LVALUES_LEVEL_9: &[(i64, f64)] = &[
        (5, 1.22352),
        (13, 0.58368),
        (28, 2.95446),
        (53, 0.03545),
        (88, 0.53026),
        (152, 1.86870),
        (161, 1.31245),
        (172, 0.0),
    ];

    /// `(D, L(F x chi_D, 2))` for the first level 25 newform.
    pub const LVALUES_LEVEL_25: &[(i64, f64)] = &[
        (8, 1.72936),
        (21, 1.62649),
        (44, 0.13407),
        (53, 0.0),
        (56, 0.37350),
        (69, 0.0),
        (73, 1.568476),
        (77, 0.23165),
    ];

    /// Hecke eigenvalues `(p, a_p)` for `p = 2, 3, 7` of the level 25 eigenforms.
    pub const EIGENVALUES_LEVEL_25: &[(&str, [(u64, i64); 3])] = &[
        ("F25_1", [(2, 1), (3, 7), (7, 6)]),
        ("F25_2", [(2, 4), (3, -2), (7, -6)]),
        ("F25_3", [(2, -1), (3, -7), (7, -6)]),
        ("F5", [(2, -4), (3, 2), (7, 6)]),
    ];
}

/// Shifts `s_p` killing every eigenform but `target`: for each prime, the
/// shift is `-a_p(other)` for the first other eigenform it removes.
pub fn killing_shifts(eigen: &[(&str, [(u64, i64); 3])], target: &str, primes: &[u64]) -> Option<Vec<(u64, i64)>> {
    let t = eigen.iter().find(|(name, _)| *name == target)?;
    let ap = |row: &[(u64, i64); 3], p: u64| row.iter().find(|(q, _)| *q == p).map(|&(_, a)| a);
    let mut remaining: Vec<_> = eigen.iter().filter(|(name, _)| *name != target).collect();
    let mut out = Vec::new();
    for &p in primes {
        let target_ap = ap(&t.1, p)?;
        let candidate = remaining
            .iter()
            .filter_map(|(_, row)| ap(row, p))
            .find(|&a| a != target_ap)?;
        remaining.retain(|(_, row)| ap(row, p) != Some(candidate));
        out.push((p, -candidate));
    }
    remaining.is_empty().then_some(out)
}

pub fn is_nonzero_lvalue(table: &[(i64, f64)], d: i64) -> Option<bool> {
    table.iter().find(|(x, _)| *x == d).map(|&(_, l)| l != 0.0)
}
