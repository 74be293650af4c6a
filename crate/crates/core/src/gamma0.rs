//! `Gamma_0(N)`: cosets over `P^1(Z/N)`, generators from a Farey symbol,
//! word decomposition, and the cusp-equivalent-to-zero test.
//!
//! All group computations are projective: `g` and `-g` are identified.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::arith::{ext_gcd, factorize_u128, Rational};
use crate::qforms::GL2Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gamma0Error {
    #[error("level must be positive")]
    BadLevel,
    #[error("{0} is not in Gamma_0({1})")]
    NotInGroup(Box<GL2Matrix>, u64),
    #[error("word reduction of {0} did not terminate")]
    ReductionStalled(Box<GL2Matrix>),
    #[error("Farey symbol for level {0} failed its index check")]
    FareyIndexMismatch(u64),
}

/// How a side of the Farey symbol is paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideKind {
    /// Paired with another side; `forward` if the generator maps this side to the partner.
    Free { partner: usize, forward: bool },
    /// Self-paired through an elliptic point of order 2.
    Even,
    /// Self-paired through an elliptic point of order 3.
    Odd,
}

#[derive(Debug, Clone)]
pub struct FareySymbol {
    /// Finite vertices `a/b`, increasing from `0/1` to `1/1`.
    pub vertices: Vec<(i64, i64)>,
    /// Kind and generator index of the side between vertex `i` and `i + 1`.
    pub sides: Vec<(SideKind, usize)>,
}

/// One generator power applied to a base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationPoint {
    pub point: Rational,
    pub generator: usize,
    pub power: u32,
    pub base: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspWitness {
    pub target: Rational,
    pub matrix: GL2Matrix,
}

/// A word `prod g_i^e` in the generators of a context.
pub type Word = Vec<(usize, i64)>;

#[derive(Debug, Clone)]
pub struct Gamma0Context {
    pub level: u64,
    pub index: u64,
    /// Normalized points of `P^1(Z/N)`; entry `i` is the bottom row of `coset_reps[i]` mod `N`.
    pub p1: Vec<(u64, u64)>,
    pub coset_reps: Vec<GL2Matrix>,
    pub generators: Vec<GL2Matrix>,
    /// `coset_graph[i] = [i.S, i.T]`.
    pub coset_graph: Vec<[usize; 2]>,
    pub schreier_generators: Vec<GL2Matrix>,
    pub farey: Option<FareySymbol>,
    p1_index: HashMap<(u64, u64), usize>,
    units: Vec<u64>,
}

pub fn index_formula(n: u64) -> u64 {
    factorize_u128(n as u128)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p as u64 * (p as u64 + 1))
}

/// Canonical representative of `(c : d)` under scaling by units mod `n`.
fn p1_normalize(c: u64, d: u64, n: u64, units: &[u64]) -> (u64, u64) {
    units
        .iter()
        .map(|&u| ((u * c) % n, (u * d) % n))
        .min()
        .expect("at least one unit")
}

fn units_mod(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|u| u.gcd(&n) == 1).collect()
}

/// All points of `P^1(Z/N)` by direct enumeration of primitive pairs.
pub fn p1_points(n: u64) -> Vec<(u64, u64)> {
    let units = units_mod(n);
    let mut pts: Vec<(u64, u64)> = (0..n)
        .flat_map(|c| (0..n).map(move |d| (c, d)))
        .filter(|&(c, d)| c.gcd(&d).gcd(&n) == 1 || n == 1)
        .map(|(c, d)| p1_normalize(c, d, n, &units))
        .collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn in_gamma0(g: &GL2Matrix, n: u64) -> bool {
    g.determinant().is_one() && (&g.m21 % BigInt::from(n)).is_zero()
}

fn mat(a: i64, b: i64, c: i64, d: i64) -> GL2Matrix {
    GL2Matrix::new(a, b, c, d)
}

/// `M_i = [[a_{i+1}, a_i], [b_{i+1}, b_i]]`, mapping `0 -> v_i` and `oo -> v_{i+1}`.
fn side_matrix(v: &[(i64, i64)], i: usize) -> GL2Matrix {
    let (a0, b0) = v[i];
    let (a1, b1) = v[i + 1];
    mat(a1, a0, b1, b0)
}

fn elliptic_two() -> GL2Matrix {
    GL2Matrix::s()
}

/// `U = [[1,-1],[1,0]]`, cycling `0 -> oo -> 1 -> 0`.
fn elliptic_three() -> GL2Matrix {
    mat(1, -1, 1, 0)
}

/// Farey-symbol construction by growing a polygon of Farey triangles.
///
/// An oriented Farey edge `g(0 -> oo)` lies in the orbit `Gamma_0(N) g`, a
/// point of `P^1(Z/N)`. The polygon starts as the triangle `(0, 1, oo)`, whose
/// vertical sides are paired by `T`. Each round scans the unpaired finite
/// sides left to right and pairs side `i` as even, odd, or with the side whose
/// inner edge lies in the orbit of the outer edge of `i`. Sides still unpaired
/// are then extended by the triangle beyond them, provided none of its three
/// edges lies in an orbit the polygon already holds.
fn build_farey<F>(n: u64, coset: F) -> Result<(FareySymbol, Vec<GL2Matrix>), Gamma0Error>
where
    F: Fn(&GL2Matrix) -> usize,
{
    let u = elliptic_three();
    let u2 = u.mul(&u);
    let mut owned: std::collections::HashSet<usize> = [GL2Matrix::identity(), u.clone(), u2.clone()]
        .iter()
        .map(&coset)
        .collect();
    let mut vertices: Vec<(i64, i64)> = vec![(0, 1), (1, 1)];
    let mut kinds: Vec<Option<SideKind>> = vec![None];
    let max_rounds = 4 * index_formula(n) as usize + 8;
    for _round in 0..max_rounds {
        let sides = vertices.len() - 1;
        for i in 0..sides {
            if kinds[i].is_some() {
                continue;
            }
            let m = side_matrix(&vertices, i);
            let outer = coset(&m);
            if outer == coset(&m.mul(&elliptic_two())) {
                kinds[i] = Some(SideKind::Even);
                continue;
            }
            if outer == coset(&m.mul(&u)) {
                kinds[i] = Some(SideKind::Odd);
                continue;
            }
            for j in i + 1..sides {
                if kinds[j].is_none() && coset(&side_matrix(&vertices, j).mul(&GL2Matrix::s())) == outer {
                    kinds[i] = Some(SideKind::Free {
                        partner: j,
                        forward: true,
                    });
                    kinds[j] = Some(SideKind::Free {
                        partner: i,
                        forward: false,
                    });
                    break;
                }
            }
        }
        if kinds.iter().all(Option::is_some) {
            break;
        }
        let mut nv = Vec::with_capacity(2 * vertices.len());
        let mut nk = Vec::with_capacity(2 * kinds.len());
        let mut remap = Vec::with_capacity(kinds.len());
        for i in 0..sides {
            nv.push(vertices[i]);
            remap.push(nk.len());
            let fresh = kinds[i].is_none() && {
                let m = side_matrix(&vertices, i);
                let cs = [coset(&m), coset(&m.mul(&u)), coset(&m.mul(&u2))];
                let new = cs.iter().all(|c| !owned.contains(c));
                if new {
                    owned.extend(cs);
                }
                new
            };
            if fresh {
                let (a0, b0) = vertices[i];
                let (a1, b1) = vertices[i + 1];
                nv.push((a0 + a1, b0 + b1));
                nk.push(None);
                nk.push(None);
            } else {
                nk.push(kinds[i]);
            }
        }
        nv.push(*vertices.last().unwrap());
        for k in nk.iter_mut().flatten() {
            if let SideKind::Free { partner, .. } = k {
                *partner = remap[*partner];
            }
        }
        vertices = nv;
        kinds = nk;
    }
    let kinds: Vec<SideKind> = kinds
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(Gamma0Error::FareyIndexMismatch(n))?;
    let odd = kinds.iter().filter(|k| matches!(k, SideKind::Odd)).count() as u64;
    let finite = vertices.len() as u64 - 1;
    if 3 * finite + odd != index_formula(n) {
        return Err(Gamma0Error::FareyIndexMismatch(n));
    }
    let mut generators = vec![GL2Matrix::t()];
    let mut sides = Vec::with_capacity(kinds.len());
    let mut gen_of_side: Vec<Option<usize>> = vec![None; kinds.len()];
    for (i, kind) in kinds.iter().enumerate() {
        let g = match *kind {
            SideKind::Even => {
                let m = side_matrix(&vertices, i);
                Some(m.mul(&elliptic_two()).mul(&m.inverse()))
            }
            SideKind::Odd => {
                let m = side_matrix(&vertices, i);
                Some(m.mul(&elliptic_three()).mul(&m.inverse()))
            }
            SideKind::Free { partner, forward: true } => Some(
                side_matrix(&vertices, partner)
                    .mul(&GL2Matrix::s())
                    .mul(&side_matrix(&vertices, i).inverse()),
            ),
            SideKind::Free {
                partner,
                forward: false,
            } => {
                gen_of_side[i] = gen_of_side[partner];
                None
            }
        };
        if let Some(g) = g {
            gen_of_side[i] = Some(generators.len());
            generators.push(g);
        }
        sides.push((*kind, gen_of_side[i].expect("source side precedes its partner")));
    }
    Ok((FareySymbol { vertices, sides }, generators))
}

fn minus_identity_generated(generators: &[GL2Matrix]) -> bool {
    let minus = GL2Matrix::identity().neg();
    generators.iter().any(|g| g.mul(g) == minus || g.mul(g).mul(g) == minus)
}

/// Builds the context for level `n`.
pub fn build_context(n: u64) -> Result<Gamma0Context, Gamma0Error> {
    if n == 0 {
        return Err(Gamma0Error::BadLevel);
    }
    let index = index_formula(n);
    let units = units_mod(n);
    let norm = |c: i128, d: i128| -> (u64, u64) {
        let nn = n as i128;
        p1_normalize(c.rem_euclid(nn) as u64, d.rem_euclid(nn) as u64, n, &units)
    };

    // Cosets by breadth-first search under right multiplication by S and T.
    let start = norm(0, 1);
    let mut p1 = vec![start];
    let mut coset_reps = vec![GL2Matrix::identity()];
    let mut p1_index = HashMap::from([(start, 0usize)]);
    let mut coset_graph: Vec<[usize; 2]> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let steps = [GL2Matrix::s(), GL2Matrix::t()];
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    while let Some(i) = queue.pop_front() {
        for (s, step) in steps.iter().enumerate() {
            let g = coset_reps[i].mul(step);
            let key = norm(g.m21.to_i128().unwrap(), g.m22.to_i128().unwrap());
            let j = *p1_index.entry(key).or_insert_with(|| {
                p1.push(key);
                coset_reps.push(g.clone());
                queue.push_back(p1.len() - 1);
                p1.len() - 1
            });
            edges.push((i, s, j));
        }
    }
    coset_graph.resize(p1.len(), [0, 0]);
    let mut schreier_generators = Vec::new();
    for &(i, s, j) in &edges {
        coset_graph[i][s] = j;
        let h = coset_reps[i].mul(&steps[s]).mul(&coset_reps[j].inverse());
        debug_assert!(in_gamma0(&h, n));
        if !h.eq_projective(&GL2Matrix::identity())
            && !schreier_generators.iter().any(|x: &GL2Matrix| x.eq_projective(&h))
        {
            schreier_generators.push(h);
        }
    }

    let (farey, mut generators) = if n == 1 {
        (None, vec![GL2Matrix::s(), GL2Matrix::t()])
    } else {
        let lookup = |g: &GL2Matrix| -> usize { p1_index[&norm(g.m21.to_i128().unwrap(), g.m22.to_i128().unwrap())] };
        let (f, g) = build_farey(n, lookup)?;
        (Some(f), g)
    };
    if !minus_identity_generated(&generators) {
        generators.push(GL2Matrix::identity().neg());
    }
    Ok(Gamma0Context {
        level: n,
        index,
        p1,
        coset_reps,
        generators,
        coset_graph,
        schreier_generators,
        farey,
        p1_index,
        units,
    })
}

fn push_letter(word: &mut Word, g: usize, e: i64) {
    if let Some(last) = word.last_mut() {
        if last.0 == g {
            last.1 += e;
            if last.1 == 0 {
                word.pop();
            }
            return;
        }
    }
    word.push((g, e));
}

/// Image of a rational under `g` in `P^1(Q)`; `None` is infinity.
fn image(g: &GL2Matrix, num: i64, den: i64) -> Option<Rational> {
    let (p, q) = (BigInt::from(num), BigInt::from(den));
    let top = &g.m11 * &p + &g.m12 * &q;
    let bot = &g.m21 * &p + &g.m22 * &q;
    (!bot.is_zero()).then(|| Rational::new(top, bot))
}

impl Gamma0Context {
    pub fn contains(&self, g: &GL2Matrix) -> bool {
        in_gamma0(g, self.level)
    }

    /// Coset index of `Gamma_0(N) g`.
    pub fn coset_of(&self, g: &GL2Matrix) -> usize {
        let n = BigInt::from(self.level);
        let c = g.m21.mod_floor(&n).to_u64().unwrap();
        let d = g.m22.mod_floor(&n).to_u64().unwrap();
        let key = p1_normalize(c, d, self.level, &self.units);
        self.p1_index[&key]
    }

    pub fn word_product(&self, word: &[(usize, i64)]) -> GL2Matrix {
        word.iter().fold(GL2Matrix::identity(), |acc, &(g, e)| {
            acc.mul(&self.generators[g].pow(e))
        })
    }

    /// Writes `gamma` as a word in the generators, up to sign.
    pub fn decompose(&self, gamma: &GL2Matrix) -> Result<Word, Gamma0Error> {
        if !self.contains(gamma) {
            return Err(Gamma0Error::NotInGroup(Box::new(gamma.clone()), self.level));
        }
        match &self.farey {
            None => Ok(decompose_modular(gamma)),
            Some(f) => self.decompose_farey(f, gamma),
        }
    }

    /// Reduces the Farey triangle `h(0, 1, oo)` back into the fundamental
    /// polygon one side pairing at a time; the applied letters, inverted and
    /// reversed, spell `gamma`.
    fn decompose_farey(&self, f: &FareySymbol, gamma: &GL2Matrix) -> Result<Word, Gamma0Error> {
        let mut h = gamma.clone();
        let mut applied: Word = Vec::new();
        let budget = 64 + 8 * (gamma.m11.bits() + gamma.m12.bits() + gamma.m21.bits() + gamma.m22.bits()) as usize;
        let verts: Vec<Rational> = f
            .vertices
            .iter()
            .map(|&(a, b)| Rational::new(a.into(), b.into()))
            .collect();
        for _ in 0..budget * 4 {
            let p0 = image(&h, 0, 1);
            let pinf = image(&h, 1, 0);
            if p0.as_ref().is_some_and(Zero::is_zero) && pinf.is_none() {
                let mut word: Word = Vec::new();
                for &(g, e) in applied.iter() {
                    push_letter(&mut word, g, -e);
                }
                return Ok(word);
            }
            let p1 = image(&h, 1, 1);
            let tri: Vec<Option<Rational>> = vec![p0, p1, pinf];
            // Triangles touching infinity are (oo, k, k+1); others lie in one strip.
            let finite: Vec<&Rational> = tri.iter().flatten().collect();
            let lo = finite.iter().map(|r| (*r).clone()).min().unwrap();
            let hi = finite.iter().map(|r| (*r).clone()).max().unwrap();
            let k = lo.floor().to_integer();
            if !k.is_zero() || tri.iter().any(Option::is_none) {
                if k.is_zero() {
                    // (oo, 0, 1) is inside the polygon; only the identity maps there.
                    return Err(Gamma0Error::NotInGroup(Box::new(gamma.clone()), self.level));
                }
                let e = k
                    .to_i64()
                    .ok_or_else(|| Gamma0Error::ReductionStalled(Box::new(gamma.clone())))?;
                h = GL2Matrix::t().pow(-e).mul(&h);
                push_letter(&mut applied, 0, -e);
                continue;
            }
            let side = (0..f.sides.len()).find(|&i| verts[i] <= lo && hi <= verts[i + 1]);
            let Some(i) = side else {
                return Err(Gamma0Error::NotInGroup(Box::new(gamma.clone()), self.level));
            };
            let (kind, g) = f.sides[i];
            let e = match kind {
                SideKind::Even => 1,
                SideKind::Free { forward, .. } => {
                    if forward {
                        1
                    } else {
                        -1
                    }
                }
                SideKind::Odd => {
                    let (a0, b0) = f.vertices[i];
                    let (a1, b1) = f.vertices[i + 1];
                    let m = Rational::new((a0 + a1).into(), (b0 + b1).into());
                    if hi <= m {
                        1
                    } else if lo >= m {
                        -1
                    } else {
                        return Err(Gamma0Error::NotInGroup(Box::new(gamma.clone()), self.level));
                    }
                }
            };
            h = self.generators[g].pow(e).mul(&h);
            push_letter(&mut applied, g, e);
        }
        Err(Gamma0Error::ReductionStalled(Box::new(gamma.clone())))
    }

    /// Rewrites `gamma` over the Schreier generators by walking the coset graph.
    pub fn decompose_schreier(&self, gamma: &GL2Matrix) -> Result<Vec<GL2Matrix>, Gamma0Error> {
        if !self.contains(gamma) {
            return Err(Gamma0Error::NotInGroup(Box::new(gamma.clone()), self.level));
        }
        let letters = modular_letters(gamma);
        let steps = [GL2Matrix::s(), GL2Matrix::t()];
        let mut coset = 0usize;
        let mut out = Vec::new();
        for (s, e) in letters {
            for _ in 0..e.unsigned_abs() {
                let (step, next) = if e > 0 {
                    (steps[s].clone(), self.coset_graph[coset][s])
                } else {
                    let inv = steps[s].inverse();
                    let next = self.coset_of(&self.coset_reps[coset].mul(&inv));
                    (inv, next)
                };
                let h = self.coset_reps[coset].mul(&step).mul(&self.coset_reps[next].inverse());
                if !h.eq_projective(&GL2Matrix::identity()) {
                    out.push(h);
                }
                coset = next;
            }
        }
        Ok(out)
    }

    /// `gamma_i^j . base` for every generator, `j = 1..=2k-1`.
    ///
    /// The base point is 0 unless the matrix sends 0 to infinity, in which
    /// case the integer of least absolute value (negative first) keeping the
    /// image finite is used. Duplicates are dropped, first occurrence kept.
    pub fn evaluation_points(&self, k: u32) -> Vec<EvaluationPoint> {
        let mut out: Vec<EvaluationPoint> = Vec::new();
        let max_power = 2 * k - 1;
        for power in 1..=max_power {
            for (i, g) in self.generators.iter().enumerate() {
                let gp = g.pow(power as i64);
                let base = base_point_for(&gp);
                let point = gp
                    .act(&Rational::from_integer(base.clone()))
                    .expect("base avoids the pole");
                if out.iter().all(|e| e.point != point) {
                    out.push(EvaluationPoint {
                        point,
                        generator: i,
                        power,
                        base,
                    });
                }
            }
        }
        out
    }

    pub fn first_round_points(&self) -> Vec<Rational> {
        self.evaluation_points(1).into_iter().map(|e| e.point).collect()
    }
}

fn base_point_for(g: &GL2Matrix) -> BigInt {
    (0i64..)
        .flat_map(|m| if m == 0 { vec![0] } else { vec![-m, m] })
        .map(BigInt::from)
        .find(|x| !(&g.m21 * x + &g.m22).is_zero())
        .expect("a nonzero linear form has at most one root")
}

/// Letters `(0 = S, 1 = T)` with exponents whose product is `+-gamma`.
fn modular_letters(gamma: &GL2Matrix) -> Vec<(usize, i64)> {
    let mut h = gamma.clone();
    let mut applied: Vec<(usize, i64)> = Vec::new();
    while !h.m21.is_zero() {
        let q = h.m11.div_floor(&h.m21);
        let qi = q.to_i64().expect("quotient fits");
        if qi != 0 {
            h = GL2Matrix::t().pow(-qi).mul(&h);
            applied.push((1, -qi));
        }
        h = GL2Matrix::s().mul(&h);
        applied.push((0, 1));
    }
    // h = +-T^m
    let m = (&h.m12 * &h.m11).to_i64().expect("translation fits");
    if m != 0 {
        applied.push((1, -m));
    }
    applied.iter().map(|&(g, e)| (g, -e)).collect()
}

/// Word over `[S, T]` for the full modular group.
fn decompose_modular(gamma: &GL2Matrix) -> Word {
    let mut word = Vec::new();
    for (g, e) in modular_letters(gamma) {
        push_letter(&mut word, g, e);
    }
    word
}

/// `Some(witness)` iff `x = q1/q2` (lowest terms) has `gcd(q2, N) = 1`; the
/// witness `[[s, q1], [-N t, q2]]` comes from `q2 s + q1 N t = 1`.
pub fn is_equivalent_to_zero(n: u64, x: &Rational) -> Option<CuspWitness> {
    let (q1, q2) = (x.numer(), x.denom());
    let nb = BigInt::from(n);
    if !q2.gcd(&nb).is_one() {
        return None;
    }
    let (g, s, t) = ext_gcd(q2, &(q1 * &nb));
    debug_assert!(g.is_one());
    let mut m = GL2Matrix::new(s, q1.clone(), -(&nb * t), q2.clone());
    if m.m11.is_negative() && m.m21.is_zero() {
        m = m.neg();
    }
    Some(CuspWitness {
        target: x.clone(),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn paper_generators_9() -> Vec<GL2Matrix> {
        vec![GL2Matrix::t(), mat(4, -1, 9, -2), mat(7, -4, 9, -5)]
    }

    fn paper_generators_25() -> Vec<GL2Matrix> {
        vec![
            GL2Matrix::t(),
            mat(6, -1, 25, -4),
            mat(7, -2, 25, -7),
            mat(11, -4, 25, -9),
            mat(16, -9, 25, -14),
            mat(18, -13, 25, -18),
            mat(21, -16, 25, -19),
        ]
    }

    #[test]
    fn index_examples() {
        assert_eq!(build_context(1).unwrap().index, 1);
        assert_eq!(build_context(9).unwrap().index, 12);
        assert_eq!(build_context(25).unwrap().index, 30);
    }

    #[test]
    fn index_formula_matches_orbit_count() {
        for n in 1..=200 {
            assert_eq!(p1_points(n).len() as u64, index_formula(n), "N={n}");
        }
    }

    #[test]
    fn coset_graph_is_complete_and_connected() {
        for n in [1, 2, 9, 25, 36, 97] {
            let ctx = build_context(n).unwrap();
            assert_eq!(ctx.coset_graph.len() as u64, ctx.index);
            assert_eq!(ctx.p1.len() as u64, ctx.index);
            for (i, rep) in ctx.coset_reps.iter().enumerate() {
                assert_eq!(ctx.coset_of(rep), i);
                assert_eq!(ctx.coset_of(&rep.mul(&GL2Matrix::s())), ctx.coset_graph[i][0]);
                assert_eq!(ctx.coset_of(&rep.mul(&GL2Matrix::t())), ctx.coset_graph[i][1]);
            }
        }
    }

    #[test]
    fn farey_generators_reproduce_known_lists() {
        let ctx = build_context(9).unwrap();
        assert_eq!(&ctx.generators[..3], &paper_generators_9()[..]);
        assert_eq!(ctx.generators[3], GL2Matrix::identity().neg());
        assert_eq!(
            ctx.farey.as_ref().unwrap().vertices,
            vec![(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]
        );
        let ctx = build_context(25).unwrap();
        assert_eq!(&ctx.generators[..7], &paper_generators_25()[..]);
    }

    #[test]
    fn generators_lie_in_group() {
        for n in 1..=120 {
            let ctx = build_context(n).unwrap();
            for g in &ctx.generators {
                assert!(ctx.contains(g), "N={n} g={g}");
            }
        }
    }

    #[test]
    fn known_generators_decompose() {
        for (n, gens) in [(9, paper_generators_9()), (25, paper_generators_25())] {
            let ctx = build_context(n).unwrap();
            for g in gens {
                let w = ctx.decompose(&g).unwrap();
                assert!(ctx.word_product(&w).eq_projective(&g));
            }
        }
    }

    #[test]
    fn identity_decomposes_to_empty_word() {
        for n in [1, 9, 25] {
            assert!(build_context(n)
                .unwrap()
                .decompose(&GL2Matrix::identity())
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn rejects_non_members() {
        let ctx = build_context(9).unwrap();
        assert!(matches!(
            ctx.decompose(&mat(1, 0, 3, 1)),
            Err(Gamma0Error::NotInGroup(..))
        ));
        assert!(ctx.decompose(&mat(2, 0, 0, 1)).is_err());
    }

    #[test]
    fn schreier_generators_decompose_over_farey_generators() {
        for n in 1..=60 {
            let ctx = build_context(n).unwrap();
            for h in &ctx.schreier_generators {
                let w = ctx.decompose(h).unwrap_or_else(|e| panic!("N={n}: {e}"));
                assert!(ctx.word_product(&w).eq_projective(h), "N={n} h={h}");
            }
        }
    }

    #[test]
    fn random_products_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [2, 3, 4, 9, 11, 25, 30] {
            let ctx = build_context(n).unwrap();
            for _ in 0..40 {
                let len = rng.gen_range(0..12);
                let mut g = GL2Matrix::identity();
                for _ in 0..len {
                    let i = rng.gen_range(0..ctx.generators.len());
                    let e = rng.gen_range(-3i64..=3);
                    g = g.mul(&ctx.generators[i].pow(e));
                }
                let w = ctx.decompose(&g).unwrap();
                assert!(ctx.word_product(&w).eq_projective(&g));
                let s = ctx.decompose_schreier(&g).unwrap();
                let prod = s.iter().fold(GL2Matrix::identity(), |acc, x| acc.mul(x));
                assert!(prod.eq_projective(&g));
            }
        }
    }

    #[test]
    fn witness_examples() {
        let w = is_equivalent_to_zero(9, &rat(1, 1)).unwrap();
        assert_eq!(w.matrix, mat(1, 1, 0, 1));
        assert!(is_equivalent_to_zero(9, &rat(1, 3)).is_none());
        let w = is_equivalent_to_zero(25, &rat(16, 19)).unwrap();
        assert_eq!(w.matrix.act(&rat(0, 1)).unwrap(), rat(16, 19));
        assert_eq!(mat(21, -16, 25, -19).act(&rat(0, 1)).unwrap(), rat(16, 19));
        assert_eq!(
            is_equivalent_to_zero(9, &rat(0, 1)).unwrap().matrix,
            GL2Matrix::identity()
        );
    }

    #[test]
    fn witnesses_are_valid() {
        for n in [1u64, 4, 9, 25, 12] {
            for p in -30i64..30 {
                for q in 1i64..30 {
                    let x = rat(p, q);
                    match is_equivalent_to_zero(n, &x) {
                        Some(w) => {
                            assert!(in_gamma0(&w.matrix, n));
                            assert!(!w.matrix.m22.is_zero());
                            assert_eq!(w.matrix.act(&rat(0, 1)).unwrap(), x);
                        }
                        None => assert!(x.denom().gcd(&BigInt::from(n)) != BigInt::one()),
                    }
                }
            }
        }
    }

    #[test]
    fn evaluation_point_lists() {
        let pts = build_context(9).unwrap().first_round_points();
        assert_eq!(pts, vec![rat(1, 1), rat(1, 2), rat(4, 5), rat(0, 1)]);
        let pts = build_context(25).unwrap().first_round_points();
        assert_eq!(
            pts,
            vec![
                rat(1, 1),
                rat(1, 4),
                rat(2, 7),
                rat(4, 9),
                rat(9, 14),
                rat(13, 18),
                rat(16, 19)
            ]
        );
        let pts = build_context(1).unwrap().first_round_points();
        assert_eq!(pts, vec![rat(1, 1)]);
    }

    #[test]
    fn escalation_points_include_powers() {
        let ctx = build_context(9).unwrap();
        let all = ctx.evaluation_points(2);
        for (i, g) in ctx.generators.iter().enumerate() {
            for j in 1..=3u32 {
                let gp = g.pow(j as i64);
                if gp.m22.is_zero() {
                    continue;
                }
                let x = gp.act(&rat(0, 1)).unwrap();
                assert!(all.iter().any(|e| e.point == x), "gen {i} power {j}");
            }
        }
    }
}
