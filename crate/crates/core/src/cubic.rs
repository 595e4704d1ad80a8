//! Cubic fields via GL₂(Z)-classes of irreducible, maximal binary cubic
//! forms.
//!
//! Each class is represented by a form with a > 0 whose covariant point lies
//! in the closed fundamental domain {0 ≤ Re z ≤ 1/2, |z| ≥ 1}. The point is
//! the root of the Hessian for D > 0 and the complex root of F(x, 1) for
//! D < 0. Membership is decided with exact integer arithmetic. A D < 0
//! irreducible form never lies on the boundary (that would make its real root
//! rational), so only D > 0 forms need a canonical choice among boundary
//! representatives.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{isqrt, primes_up_to, FactorTable, Rational};
use crate::densities::{delta, SplittingType};
use crate::quadratic::{validate_conditions, DiscSign, SplittingCondition};
use crate::{Error, Result};

/// Largest X accepted by [`enumerate_cubic`].
pub const DEFAULT_CUBIC_LIMIT: u64 = 10_000_000;

const CACHE_MAGIC: &[u8; 4] = b"CCEN";
const CACHE_VERSION: u32 = 1;

/// ax³ + bx²y + cxy² + dy³ with its discriminant.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub disc: i64,
}

impl fmt::Debug for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}; {})",
            self.a, self.b, self.c, self.d, self.disc
        )
    }
}

impl fmt::Display for CubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn discriminant(a: i64, b: i64, c: i64, d: i64) -> i128 {
    let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
    b * b * c * c + 18 * a * b * c * d - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
}

impl CubicForm {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        let disc = discriminant(a, b, c, d) as i64;
        CubicForm { a, b, c, d, disc }
    }

    pub fn coeffs(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        let (x, y) = (x as i128, y as i128);
        ((a * x + b * y) * x + c * y * y) * x + d * y * y * y
    }

    /// F((x, y)·M) for M = [[p, q], [r, s]], i.e. F(px + ry, qx + sy).
    pub fn transform(&self, p: i64, q: i64, r: i64, s: i64) -> Self {
        // substitute X = px + ry, Y = qx + sy and expand
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let na = a * p * p * p + b * p * p * q + c * p * q * q + d * q * q * q;
        let nb = 3 * a * p * p * r
            + b * (p * p * s + 2 * p * q * r)
            + c * (2 * p * q * s + q * q * r)
            + 3 * d * q * q * s;
        let nc = 3 * a * p * r * r
            + b * (2 * p * r * s + q * r * r)
            + c * (p * s * s + 2 * q * r * s)
            + 3 * d * q * s * s;
        let nd = a * r * r * r + b * r * r * s + c * r * s * s + d * s * s * s;
        CubicForm {
            a: na,
            b: nb,
            c: nc,
            d: nd,
            disc: self.disc,
        }
    }

    /// Sign-normalised: the representative of ±F with a > 0 (or, if a = 0,
    /// the first nonzero coefficient positive).
    pub fn normalized(&self) -> Self {
        let lead = self.coeffs().into_iter().find(|&x| x != 0).unwrap_or(0);
        if lead < 0 {
            CubicForm {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
                disc: self.disc,
            }
        } else {
            *self
        }
    }

    /// Hessian (P, Q, R) = (b² − 3ac, bc − 9ad, c² − 3bd), of discriminant −3D.
    pub fn hessian(&self) -> (i128, i128, i128) {
        let (a, b, c, d) = (
            self.a as i128,
            self.b as i128,
            self.c as i128,
            self.d as i128,
        );
        (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
    }
}

/// Position of the covariant point relative to the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    Outside,
    Boundary,
    Interior,
}

fn domain(f: &CubicForm) -> Domain {
    use std::cmp::Ordering::*;
    if f.a <= 0 {
        return Domain::Outside;
    }
    // each test compares a quantity with 0; Equal means on the boundary
    let tests: [std::cmp::Ordering; 3] = if f.disc > 0 {
        let (p, q, r) = f.hessian();
        // Re z = −Q/2P ∈ [0, 1/2], |z|² = R/P ≥ 1
        [(-q).cmp(&0), (p + q).cmp(&0), (r - p).cmp(&0)]
    } else {
        // real root θ of F(x, 1); F(t, 1) > 0 iff t > θ
        let u_nonneg = f.eval(-f.b, f.a).cmp(&0);
        let u_le_half = (-f.eval(-f.b - f.a, f.a)).cmp(&0);
        let g = f.eval(-f.d, f.a);
        let norm_ge_one = if f.d < 0 { g.cmp(&0) } else { (-g).cmp(&0) };
        [u_nonneg, u_le_half, norm_ge_one]
    };
    if tests.contains(&Less) {
        Domain::Outside
    } else if tests.contains(&Equal) {
        Domain::Boundary
    } else {
        Domain::Interior
    }
}

/// Least sign-normalised form in the domain among images of `f` under short
/// words in T, T⁻¹, S and the reflection x ↦ −x.
fn canonical_key(f: &CubicForm) -> CubicForm {
    const MAX_DEPTH: usize = 5;
    let gens: [(i64, i64, i64, i64); 4] =
        [(1, 0, 1, 1), (1, 0, -1, 1), (0, 1, -1, 0), (-1, 0, 0, 1)];
    let start = f.normalized();
    let mut seen: HashSet<[i64; 4]> = HashSet::new();
    seen.insert(start.coeffs());
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut best = start;
    while let Some((g, depth)) = queue.pop_front() {
        if domain(&g) != Domain::Outside && g.coeffs() < best.coeffs() {
            best = g;
        }
        if depth == MAX_DEPTH {
            continue;
        }
        for &(p, q, r, s) in &gens {
            let h = g.transform(p, q, r, s).normalized();
            if seen.insert(h.coeffs()) {
                queue.push_back((h, depth + 1));
            }
        }
    }
    best
}

fn divisors(n: u64) -> Vec<i64> {
    let mut out = vec![1i64];
    for (p, e) in crate::arith::factor(n) {
        let len = out.len();
        let mut pk = 1i64;
        for _ in 0..e {
            pk *= p as i64;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out
}

/// No linear factor over Q. A root p/q in lowest terms has q | a and p | d.
pub fn is_irreducible(f: &CubicForm) -> bool {
    if f.a == 0 || f.d == 0 {
        return false;
    }
    let qs = divisors(f.a.unsigned_abs());
    let ps = divisors(f.d.unsigned_abs());
    for &q in &qs {
        for &p in &ps {
            if f.eval(p, q) == 0 || f.eval(-p, q) == 0 {
                return false;
            }
        }
    }
    true
}

fn mod_eval(f: &CubicForm, x: u64, y: u64, m: u64) -> u64 {
    f.eval(x as i64, y as i64).rem_euclid(m as i128) as u64
}

/// Whether the ring attached to F is maximal at p.
pub fn is_maximal_at(f: &CubicForm, p: u64) -> bool {
    let pi = p as i64;
    if f.coeffs().iter().all(|&x| x.rem_euclid(pi) == 0) {
        return false;
    }
    let p2 = p * p;
    // root at infinity, multiplicity ≥ 2 iff p | a and p | b
    if f.a.rem_euclid(pi) == 0 && f.b.rem_euclid(pi) == 0 && f.a.rem_euclid(p2 as i64) == 0 {
        return false;
    }
    for r in 0..p {
        if mod_eval(f, r, 1, p) != 0 {
            continue;
        }
        // F_x(r, 1) = 3ar² + 2br + c
        let r = r as i128;
        let dr =
            (3 * f.a as i128 * r * r + 2 * f.b as i128 * r + f.c as i128).rem_euclid(p as i128);
        let r = r as u64;
        if dr == 0 && mod_eval(f, r, 1, p2) == 0 {
            return false;
        }
    }
    true
}

/// Maximal at every p with p² | disc.
pub fn is_maximal(f: &CubicForm, factors: &FactorTable) -> bool {
    factors
        .factor(f.disc.unsigned_abs())
        .into_iter()
        .filter(|&(_, e)| e >= 2)
        .all(|(p, _)| is_maximal_at(f, p))
}

/// Number of roots of F in P¹(F_p), counted without multiplicity.
fn projective_root_count(f: &CubicForm, p: u64) -> u32 {
    let at_inf = (f.a.rem_euclid(p as i64) == 0) as u32;
    at_inf + (0..p).filter(|&r| mod_eval(f, r, 1, p) == 0).count() as u32
}

/// Splitting type of p in the field of a maximal irreducible form.
pub fn splitting_type_cubic(f: &CubicForm, p: u64) -> SplittingType {
    if f.disc.rem_euclid(p as i64) == 0 {
        return SplittingType::Ramified;
    }
    match projective_root_count(f, p) {
        3 => SplittingType::totally_split(3),
        1 => SplittingType::from_parts(&[1, 2]).unwrap(),
        0 => SplittingType::from_parts(&[3]).unwrap(),
        n => unreachable!("squarefree cubic mod {p} with {n} roots"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicCensus {
    pub x: u64,
    pub sign: DiscSign,
    /// sorted by (|disc|, disc, coefficients)
    pub fields: Vec<CubicForm>,
}

impl CubicCensus {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn up_to(&self, y: u64) -> &[CubicForm] {
        let end = self.fields.partition_point(|f| f.disc.unsigned_abs() <= y);
        &self.fields[..end]
    }

    pub fn restrict(&self, y: u64, sign: DiscSign) -> CubicCensus {
        CubicCensus {
            x: y.min(self.x),
            sign,
            fields: self
                .up_to(y)
                .iter()
                .copied()
                .filter(|f| sign.includes(f.disc))
                .collect(),
        }
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 40 * self.len());
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.x.to_le_bytes());
        for f in &self.fields {
            for v in [f.a, f.b, f.c, f.d, f.disc] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    /// Reads a cache file; the sign tag is recovered from the rows present.
    pub fn read_cache(path: &Path, sign: DiscSign) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 16 || &buf[..4] != CACHE_MAGIC {
            return Err(Error::Cache(format!(
                "{} is not a cubic census",
                path.display()
            )));
        }
        let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!(
                "unsupported census version {version}"
            )));
        }
        let x = u64::from_le_bytes(buf[8..16].try_into().unwrap());
        let body = &buf[16..];
        if body.len() % 40 != 0 {
            return Err(Error::Cache("truncated census body".into()));
        }
        let mut fields = Vec::with_capacity(body.len() / 40);
        for row in body.chunks_exact(40) {
            let v: Vec<i64> = row
                .chunks_exact(8)
                .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let f = CubicForm {
                a: v[0],
                b: v[1],
                c: v[2],
                d: v[3],
                disc: v[4],
            };
            if discriminant(f.a, f.b, f.c, f.d) != f.disc as i128 {
                return Err(Error::Cache(format!(
                    "row {f} has an inconsistent discriminant"
                )));
            }
            if sign.includes(f.disc) {
                fields.push(f);
            }
        }
        Ok(CubicCensus { x, sign, fields })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,c,d,disc\n");
        for f in &self.fields {
            out.push_str(&format!("{},{},{},{},{}\n", f.a, f.b, f.c, f.d, f.disc));
        }
        out
    }
}

pub fn enumerate_cubic(x: u64, sign: DiscSign) -> Result<CubicCensus> {
    enumerate_cubic_with_limit(x, sign, DEFAULT_CUBIC_LIMIT)
}

pub fn enumerate_cubic_with_limit(x: u64, sign: DiscSign, limit: u64) -> Result<CubicCensus> {
    if x > limit {
        return Err(Error::Resource(format!(
            "cubic census bound {x} exceeds limit {limit}"
        )));
    }
    let factors = FactorTable::new(x.max(1));
    let xf = x as f64;
    let mut candidates: Vec<CubicForm> = Vec::new();
    if sign.includes(1) {
        let amax = ((8.0f64 / 27.0).sqrt() * xf.powf(0.25)).floor() as i64 + 1;
        let slices: Vec<Vec<CubicForm>> = (1..=amax)
            .into_par_iter()
            .map(|a| positive_slice(a, x, &factors))
            .collect();
        candidates.extend(slices.into_iter().flatten());
    }
    if sign.includes(-1) {
        let amax = (16.0 * xf / 27.0).powf(0.25).floor() as i64 + 1;
        let slices: Vec<Vec<CubicForm>> = (1..=amax)
            .into_par_iter()
            .map(|a| negative_slice(a, x, &factors))
            .collect();
        candidates.extend(slices.into_iter().flatten());
    }
    candidates.sort_unstable_by_key(|f| (f.disc.unsigned_abs(), f.disc, f.coeffs()));
    candidates.dedup();
    Ok(CubicCensus {
        x,
        sign,
        fields: candidates,
    })
}

/// Irreducible maximal forms found at this (a, b, c, d); boundary forms are
/// replaced by their canonical key.
fn accept(f: CubicForm, x: u64, factors: &FactorTable) -> Option<CubicForm> {
    if f.disc == 0 || f.disc.unsigned_abs() > x {
        return None;
    }
    let place = domain(&f);
    if place == Domain::Outside || !is_irreducible(&f) || !is_maximal(&f, factors) {
        return None;
    }
    Some(if place == Domain::Boundary {
        canonical_key(&f)
    } else {
        f
    })
}

fn positive_slice(a: i64, x: u64, factors: &FactorTable) -> Vec<CubicForm> {
    // P = b² − 3ac ∈ (0, √X] (as 3P² ≤ 4PR − Q² = 3D), |Q| ≤ P, and the
    // covariant point within 1/2 of the roots' weighted mean bounds b.
    let xf = x as f64;
    let sx = isqrt(x) as i64;
    let bmax = (1.5 * a as f64 + 3.0 * 2f64.sqrt() * xf.powf(0.25)).ceil() as i64 + 1;
    let mut out = Vec::new();
    for b in -bmax..=bmax {
        let b2 = b * b;
        let cmin = (b2 - sx - 1).div_euclid(3 * a);
        let cmax = (b2 - 1).div_euclid(3 * a);
        for c in cmin..=cmax {
            let p = b2 - 3 * a * c;
            if p <= 0 || p > sx + 1 {
                continue;
            }
            let dmin = (b * c - p).div_euclid(9 * a) - 1;
            let dmax = (b * c + p).div_euclid(9 * a) + 1;
            for d in dmin..=dmax {
                let disc = discriminant(a, b, c, d);
                if disc <= 0 || disc > x as i128 {
                    continue;
                }
                if let Some(f) = accept(
                    CubicForm {
                        a,
                        b,
                        c,
                        d,
                        disc: disc as i64,
                    },
                    x,
                    factors,
                ) {
                    out.push(f);
                }
            }
        }
    }
    out
}

fn negative_slice(a: i64, x: u64, factors: &FactorTable) -> Vec<CubicForm> {
    // complex root ω = u + iv in the domain and |D| = 4a⁴v²|θ − ω|⁴ ≤ X give
    // |θ| ≤ Θ and |ω|² ≤ 1/4 + K^{2/3}
    let xf = x as f64;
    let af = a as f64;
    let k = xf.sqrt() / (2.0 * af * af);
    let theta = 0.5 + (2.0 * k / 3f64.sqrt()).sqrt();
    let norm_max = 0.25 + k.powf(2.0 / 3.0);
    let bmax = (af * (theta + 1.0)).ceil() as i64 + 1;
    let cmin = (-af * theta).floor() as i64 - 1;
    let cmax = (af * (theta + norm_max)).ceil() as i64 + 1;
    let dabs = (af * theta * norm_max).ceil() as i64 + 1;
    let mut out = Vec::new();
    for b in -bmax..=bmax {
        for c in cmin..=cmax {
            // D(d) = −27a²d² + (18abc − 4b³)d + b²c² − 4ac³ ≥ −X
            let qa = -27.0 * af * af;
            let qb = 18.0 * af * b as f64 * c as f64 - 4.0 * (b as f64).powi(3);
            let qc = (b as f64 * c as f64).powi(2) - 4.0 * af * (c as f64).powi(3) + xf;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let r1 = (-qb + sq) / (2.0 * qa);
            let r2 = (-qb - sq) / (2.0 * qa);
            let lo = (r1.min(r2).floor() as i64 - 1).max(-dabs);
            let hi = (r1.max(r2).ceil() as i64 + 1).min(dabs);
            for d in lo..=hi {
                let disc = discriminant(a, b, c, d);
                if disc >= 0 || -disc > x as i128 {
                    continue;
                }
                if let Some(f) = accept(
                    CubicForm {
                        a,
                        b,
                        c,
                        d,
                        disc: disc as i64,
                    },
                    x,
                    factors,
                ) {
                    out.push(f);
                }
            }
        }
    }
    out
}

/// N₃(X; p): fields with |disc| ≤ X in which p is totally split.
pub fn count_cubic_with_split(census: &CubicCensus, x: u64, p: u64) -> u64 {
    let st = SplittingType::totally_split(3);
    census
        .up_to(x)
        .iter()
        .filter(|f| splitting_type_cubic(f, p) == st)
        .count() as u64
}

/// Fields with |disc| ≤ X satisfying every condition.
pub fn count_cubic_with_conditions(
    census: &CubicCensus,
    x: u64,
    conditions: &[SplittingCondition],
) -> Result<u64> {
    validate_conditions(conditions, 3)?;
    if x > census.x {
        return Err(Error::Invalid(format!(
            "census reaches {}, asked for {x}",
            census.x
        )));
    }
    Ok(census
        .up_to(x)
        .iter()
        .filter(|f| {
            conditions
                .iter()
                .all(|c| splitting_type_cubic(f, c.p) == c.kind)
        })
        .count() as u64)
}

/// Π δ_p over the conditions.
pub fn density_prediction_cubic(conditions: &[SplittingCondition]) -> Result<Rational> {
    validate_conditions(conditions, 3)?;
    let mut acc = Rational::one();
    for c in conditions {
        acc = acc * delta(3, c.kind, c.p)?;
    }
    Ok(acc)
}

const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Leading term of the number of cubic fields with |disc| ≤ X:
/// X/(12ζ(3)) totally real plus X/(4ζ(3)) complex.
pub fn cubic_main_term(x: u64, sign: DiscSign) -> f64 {
    sign.parts()
        .iter()
        .map(|s| match s {
            DiscSign::Positive => x as f64 / (12.0 * ZETA3),
            _ => x as f64 / (4.0 * ZETA3),
        })
        .sum()
}

/// Frequencies of each splitting type of p over the census up to X.
pub fn splitting_frequencies(census: &CubicCensus, x: u64, p: u64) -> Vec<(SplittingType, u64)> {
    let mut types: Vec<(SplittingType, u64)> = crate::densities::shapes(3)
        .into_iter()
        .map(|s| (SplittingType::Unramified(s), 0))
        .chain(std::iter::once((SplittingType::Ramified, 0)))
        .collect();
    for f in census.up_to(x) {
        let st = splitting_type_cubic(f, p);
        if let Some(slot) = types.iter_mut().find(|(t, _)| *t == st) {
            slot.1 += 1;
        }
    }
    types
}

/// Primes up to `limit` as a convenience for callers iterating p.
pub fn small_primes(limit: u64) -> Vec<u64> {
    primes_up_to(limit).primes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(a: i64, b: i64, c: i64, d: i64) -> CubicForm {
        CubicForm::new(a, b, c, d)
    }

    #[test]
    fn discriminant_formula() {
        // x³ − x − 1
        assert_eq!(form(1, 0, -1, -1).disc, -23);
        // x³ + x² − 2x − 1, the cyclic field of conductor 7
        assert_eq!(form(1, 1, -2, -1).disc, 49);
        // invariance under GL2(Z)
        let f = form(2, -3, 5, 7);
        for (p, q, r, s) in [(1, 0, 1, 1), (0, 1, -1, 0), (-1, 0, 0, 1), (2, 1, 1, 1)] {
            let g = f.transform(p, q, r, s);
            assert_eq!(discriminant(g.a, g.b, g.c, g.d), f.disc as i128);
        }
    }

    #[test]
    fn transform_is_substitution() {
        let f = form(3, -1, 4, 2);
        let g = f.transform(2, 1, 1, 1);
        for (x, y) in [(1, 0), (0, 1), (3, -2), (-5, 7)] {
            assert_eq!(g.eval(x, y), f.eval(2 * x + y, x + y));
        }
    }

    #[test]
    fn tiny_censuses() {
        assert!(enumerate_cubic(22, DiscSign::Both).unwrap().is_empty());
        let c = enumerate_cubic(23, DiscSign::Both).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.fields[0].disc, -23);
        let r = enumerate_cubic(200, DiscSign::Positive).unwrap();
        let discs: Vec<i64> = r.fields.iter().map(|f| f.disc).collect();
        assert_eq!(discs, vec![49, 81, 148, 169]);
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&form(1, 0, -1, -1)));
        // (x − y)(x² + y²)
        assert!(!is_irreducible(&form(1, -1, 1, -1)));
        // (2x + 3y)(x² + xy + 5y²)
        assert!(!is_irreducible(&form(2, 5, 13, 15)));
        assert!(!is_irreducible(&form(1, 2, 3, 0)));
    }

    #[test]
    fn maximality() {
        // x³ − 2: Z[2^{1/3}] is maximal; disc −108 = −2²·3³
        let f = form(1, 0, 0, -2);
        assert!(is_maximal_at(&f, 2) && is_maximal_at(&f, 3));
        // x³ − 4 has the same field but index 2
        assert!(!is_maximal_at(&form(1, 0, 0, -4), 2));
        // multiples of p are never maximal
        assert!(!is_maximal_at(&form(5, 10, 5, 15), 5));
    }

    #[test]
    fn splitting_of_x3_minus_x_minus_1() {
        let f = form(1, 0, -1, -1);
        // x³ + x + 1 has no root mod 2
        assert_eq!(
            splitting_type_cubic(&f, 2),
            SplittingType::from_parts(&[3]).unwrap()
        );
        assert_eq!(splitting_type_cubic(&f, 23), SplittingType::Ramified);
        let brute = (0..59)
            .filter(|&x: &i64| (x * x * x - x - 1).rem_euclid(59) == 0)
            .count();
        let expect = match brute {
            3 => SplittingType::totally_split(3),
            1 => SplittingType::from_parts(&[1, 2]).unwrap(),
            _ => SplittingType::from_parts(&[3]).unwrap(),
        };
        assert_eq!(splitting_type_cubic(&f, 59), expect);
    }

    #[test]
    fn census_entries_are_consistent() {
        let census = enumerate_cubic(20_000, DiscSign::Both).unwrap();
        let factors = FactorTable::new(20_000);
        let mut seen = HashSet::new();
        for f in &census.fields {
            assert_eq!(discriminant(f.a, f.b, f.c, f.d), f.disc as i128);
            assert!(is_irreducible(f) && is_maximal(f, &factors), "{f}");
            assert!(is_maximal(f, &factors), "maximality test not idempotent");
            assert!(seen.insert(f.coeffs()), "duplicate {f}");
        }
    }

    #[test]
    fn cache_round_trip() {
        let census = enumerate_cubic(3000, DiscSign::Both).unwrap();
        let dir = std::env::temp_dir().join(format!("ccen-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.bin");
        census.write_cache(&path).unwrap();
        assert_eq!(
            CubicCensus::read_cache(&path, DiscSign::Both).unwrap(),
            census
        );
        let neg = CubicCensus::read_cache(&path, DiscSign::Negative).unwrap();
        assert!(neg.fields.iter().all(|f| f.disc < 0));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
