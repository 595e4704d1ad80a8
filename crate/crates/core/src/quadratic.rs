//! Quadratic fields by discriminant: a segmented census, splitting types, and
//! two independent ways of counting fields with prescribed local behaviour.
//!
//! The second count never looks at individual discriminants. It removes odd
//! square factors by inclusion–exclusion inside residue classes modulo 2^g and
//! modulo the condition primes, then counts each class with a periodic table.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    isqrt, kronecker, mod_inverse, moebius, primes_up_to, squarefree_range, Rational, INV_ZETA2,
};
use crate::densities::{delta, SplittingType};
use crate::{Error, Result};

/// Largest X accepted by [`enumerate_quadratic`] (about 1 GB of i64 output
/// for both signs).
pub const DEFAULT_QUADRATIC_LIMIT: u64 = 200_000_000;

const CACHE_MAGIC: &[u8; 4] = b"QCEN";
const CACHE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscSign {
    Positive,
    Negative,
    Both,
}

impl DiscSign {
    pub fn includes(self, d: i64) -> bool {
        match self {
            DiscSign::Positive => d > 0,
            DiscSign::Negative => d < 0,
            DiscSign::Both => true,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            DiscSign::Positive => 1,
            DiscSign::Negative => 2,
            DiscSign::Both => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            1 => Some(DiscSign::Positive),
            2 => Some(DiscSign::Negative),
            3 => Some(DiscSign::Both),
            _ => None,
        }
    }

    /// The single signs making up this choice.
    pub fn parts(self) -> &'static [DiscSign] {
        match self {
            DiscSign::Positive => &[DiscSign::Positive],
            DiscSign::Negative => &[DiscSign::Negative],
            DiscSign::Both => &[DiscSign::Positive, DiscSign::Negative],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiscSign::Positive => "real",
            DiscSign::Negative => "imaginary",
            DiscSign::Both => "both",
        }
    }
}

impl fmt::Display for DiscSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiscSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "positive" | "pos" | "+" => Ok(DiscSign::Positive),
            "imaginary" | "complex" | "negative" | "neg" | "-" => Ok(DiscSign::Negative),
            "both" | "all" => Ok(DiscSign::Both),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FundamentalDiscriminant(i64);

impl FundamentalDiscriminant {
    pub fn new(d: i64) -> Result<Self> {
        if crate::arith::is_fundamental_discriminant(d) {
            Ok(FundamentalDiscriminant(d))
        } else {
            Err(Error::Invalid(format!(
                "{d} is not a fundamental discriminant"
            )))
        }
    }

    pub fn value(self) -> i64 {
        self.0
    }

    pub fn abs(self) -> u64 {
        self.0.unsigned_abs()
    }
}

impl fmt::Display for FundamentalDiscriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SplittingCondition {
    pub p: u64,
    pub kind: SplittingType,
}

impl SplittingCondition {
    pub fn new(p: u64, kind: SplittingType) -> Self {
        SplittingCondition { p, kind }
    }
}

impl fmt::Display for SplittingCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.p, self.kind)
    }
}

/// Checks that conditions name distinct primes and valid types of degree d.
pub fn validate_conditions(conditions: &[SplittingCondition], d: u32) -> Result<()> {
    let mut seen = Vec::with_capacity(conditions.len());
    for c in conditions {
        if c.p < 2 || crate::arith::factor(c.p) != vec![(c.p, 1)] {
            return Err(Error::Invalid(format!("{} is not prime", c.p)));
        }
        if seen.contains(&c.p) {
            return Err(Error::Invalid(format!("prime {} appears twice", c.p)));
        }
        if let Some(k) = c.kind.degree() {
            if k != d {
                return Err(Error::Invalid(format!(
                    "{} is not a degree-{d} splitting type",
                    c.kind
                )));
            }
        }
        seen.push(c.p);
    }
    Ok(())
}

/// Fundamental discriminants with |D| ≤ X of one or both signs, ordered by
/// (|D|, D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticCensus {
    pub x: u64,
    pub sign: DiscSign,
    pub discriminants: Vec<i64>,
}

impl QuadraticCensus {
    pub fn len(&self) -> usize {
        self.discriminants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discriminants.is_empty()
    }

    /// Discriminants with |D| ≤ y (a prefix).
    pub fn up_to(&self, y: u64) -> &[i64] {
        let end = self
            .discriminants
            .partition_point(|d| d.unsigned_abs() <= y);
        &self.discriminants[..end]
    }

    /// Count of fields with |D| ≤ y and sign in `sign` satisfying every
    /// condition.
    pub fn count_with(&self, y: u64, sign: DiscSign, conditions: &[SplittingCondition]) -> u64 {
        self.up_to(y)
            .iter()
            .filter(|&&d| sign.includes(d) && satisfies(d, conditions))
            .count() as u64
    }

    /// `out[y]` = count with |D| ≤ y for every y in 0..=self.x.
    pub fn cumulative_counts(&self, sign: DiscSign, conditions: &[SplittingCondition]) -> Vec<u64> {
        let mut out = vec![0u64; self.x as usize + 1];
        for &d in &self.discriminants {
            if sign.includes(d) && satisfies(d, conditions) {
                out[d.unsigned_abs() as usize] += 1;
            }
        }
        for i in 1..out.len() {
            out[i] += out[i - 1];
        }
        out
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(17 + 8 * self.len());
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.x.to_le_bytes());
        buf.push(self.sign.code());
        for d in &self.discriminants {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 17 || &buf[..4] != CACHE_MAGIC {
            return Err(Error::Cache(format!(
                "{} is not a quadratic census",
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
        let sign =
            DiscSign::from_code(buf[16]).ok_or_else(|| Error::Cache("bad sign byte".into()))?;
        let body = &buf[17..];
        if body.len() % 8 != 0 {
            return Err(Error::Cache("truncated census body".into()));
        }
        let discriminants = body
            .chunks_exact(8)
            .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(QuadraticCensus {
            x,
            sign,
            discriminants,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("D,sign\n");
        for &d in &self.discriminants {
            let s = if d > 0 { "real" } else { "imaginary" };
            out.push_str(&format!("{d},{s}\n"));
        }
        out
    }
}

pub fn enumerate_quadratic(x: u64, sign: DiscSign) -> Result<QuadraticCensus> {
    enumerate_quadratic_with_limit(x, sign, DEFAULT_QUADRATIC_LIMIT)
}

pub fn enumerate_quadratic_with_limit(
    x: u64,
    sign: DiscSign,
    limit: u64,
) -> Result<QuadraticCensus> {
    if x > limit {
        return Err(Error::Resource(format!(
            "quadratic census bound {x} exceeds limit {limit}"
        )));
    }
    const SEG: u64 = 1 << 16;
    let primes = primes_up_to(isqrt(x) + 2);
    let segments: Vec<(u64, u64)> = (0..=x / SEG)
        .map(|i| (i * SEG, ((i + 1) * SEG).min(x + 1)))
        .collect();
    let chunks: Vec<Vec<i64>> = segments
        .par_iter()
        .map(|&(lo, hi)| census_segment(lo, hi, sign, &primes))
        .collect();
    let discriminants = chunks.concat();
    Ok(QuadraticCensus {
        x,
        sign,
        discriminants,
    })
}

/// Fundamental discriminants with lo ≤ |D| < hi.
fn census_segment(lo: u64, hi: u64, sign: DiscSign, primes: &crate::arith::PrimeTable) -> Vec<i64> {
    let sf = squarefree_range(lo, hi, primes);
    let (mlo, mhi) = (lo.div_ceil(4), hi.div_ceil(4));
    let sf4 = squarefree_range(mlo, mhi, primes);
    let want_pos = sign.includes(1);
    let want_neg = sign.includes(-1);
    let mut out = Vec::new();
    for n in lo.max(2)..hi {
        let (neg, pos) = match n % 4 {
            1 => (false, sf[(n - lo) as usize]),
            3 => (sf[(n - lo) as usize], false),
            0 => {
                let m = n / 4;
                if !sf4[(m - mlo) as usize] {
                    continue;
                }
                // D = 4m' with m' ≡ 2, 3 (mod 4) and m' = ±m
                (matches!(m % 4, 1 | 2), matches!(m % 4, 2 | 3))
            }
            _ => continue,
        };
        if neg && want_neg {
            out.push(-(n as i64));
        }
        if pos && want_pos {
            out.push(n as i64);
        }
    }
    out
}

pub fn splitting_type_quadratic(d: FundamentalDiscriminant, p: u64) -> SplittingType {
    split_of(d.value(), p)
}

#[inline]
fn split_of(d: i64, p: u64) -> SplittingType {
    match kronecker(d, p) {
        0 => SplittingType::Ramified,
        1 => SplittingType::split(),
        _ => SplittingType::inert(),
    }
}

#[inline]
fn satisfies(d: i64, conditions: &[SplittingCondition]) -> bool {
    conditions.iter().all(|c| split_of(d, c.p) == c.kind)
}

/// Exact count by scanning a fresh census.
pub fn count_with_conditions_direct(
    x: u64,
    sign: DiscSign,
    conditions: &[SplittingCondition],
) -> Result<u64> {
    validate_conditions(conditions, 2)?;
    let census = enumerate_quadratic(x, sign)?;
    Ok(census.count_with(x, sign, conditions))
}

/// Exact count by inclusion–exclusion over odd squares.
pub fn count_with_conditions_sieve(
    x: u64,
    sign: DiscSign,
    conditions: &[SplittingCondition],
) -> Result<u64> {
    Ok(SievePlan::new(x, sign, conditions)?.count(x))
}

pub fn density_prediction_quadratic(conditions: &[SplittingCondition]) -> Result<Rational> {
    validate_conditions(conditions, 2)?;
    let mut acc = Rational::one();
    for c in conditions {
        acc = acc * delta(2, c.kind, c.p)?;
    }
    Ok(acc)
}

/// δ_P · X/(2ζ(2)) per sign.
pub fn predicted_main_term(
    x: u64,
    sign: DiscSign,
    conditions: &[SplittingCondition],
) -> Result<f64> {
    let per_sign = density_prediction_quadratic(conditions)?.to_f64() * x as f64 * INV_ZETA2 / 2.0;
    Ok(per_sign * sign.parts().len() as f64)
}

/// Reusable form of the inclusion–exclusion count: every residue table and
/// Möbius term needed for any X up to `x_max` is built once.
#[derive(Clone, Debug)]
pub struct SievePlan {
    x_max: u64,
    branches: Vec<Branch>,
}

#[derive(Clone, Debug)]
struct Branch {
    tables: Vec<PeriodicTable>,
    /// sorted by `scale`
    terms: Vec<Term>,
    /// n = 1 lies in this branch (D = 1 is not a field)
    contains_one: bool,
}

#[derive(Clone, Copy, Debug)]
struct Term {
    scale: u64,
    mu: i8,
    table: u32,
}

/// Count of admissible k in [1, K] for a condition periodic modulo `period`.
#[derive(Clone, Debug)]
struct PeriodicTable {
    period: u64,
    per_period: u64,
    prefix: Vec<u32>,
}

impl PeriodicTable {
    fn build(period: u64, admissible: impl Fn(u64) -> bool) -> Self {
        let mut prefix = Vec::with_capacity(period as usize);
        let mut acc = 0u32;
        prefix.push(0);
        for r in 1..period {
            acc += admissible(r) as u32;
            prefix.push(acc);
        }
        // r = period ≡ 0 closes the period
        let per_period = acc as u64 + admissible(0) as u64;
        PeriodicTable {
            period,
            per_period,
            prefix,
        }
    }

    #[inline]
    fn count(&self, k: u64) -> u64 {
        (k / self.period) * self.per_period + self.prefix[(k % self.period) as usize] as u64
    }
}

/// Largest period 2^g·e′ a plan may tabulate.
const MAX_PERIOD: u64 = 50_000_000;

impl SievePlan {
    pub fn new(x_max: u64, sign: DiscSign, conditions: &[SplittingCondition]) -> Result<Self> {
        validate_conditions(conditions, 2)?;
        let mut branches = Vec::new();
        for &s in sign.parts() {
            for (g, b) in two_adic_classes(s, conditions) {
                branches.push(Branch::new(x_max, s, g, b, conditions)?);
            }
        }
        Ok(SievePlan { x_max, branches })
    }

    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn count(&self, x: u64) -> u64 {
        assert!(
            x <= self.x_max,
            "plan built for X ≤ {}, asked for {x}",
            self.x_max
        );
        self.branches.iter().map(|b| b.count(x)).sum()
    }
}

/// Residue classes n ≡ b (mod 2^g) for n = |D| compatible with the sign and
/// with the condition at 2 (if any).
fn two_adic_classes(sign: DiscSign, conditions: &[SplittingCondition]) -> Vec<(u32, u64)> {
    let pos = sign == DiscSign::Positive;
    let at_two = conditions.iter().find(|c| c.p == 2).map(|c| c.kind);
    // D ≡ 1 (mod 4): n ≡ 1 (real) or 3 (imaginary) mod 4
    let odd = vec![(2, if pos { 1 } else { 3 })];
    // D = 4m, m ≡ 2, 3 (mod 4)
    let even = if pos {
        vec![(4, 8), (4, 12)]
    } else {
        vec![(4, 4), (4, 8)]
    };
    match at_two {
        None => odd.into_iter().chain(even).collect(),
        Some(SplittingType::Ramified) => even,
        // (D/2) = 1 iff D ≡ 1 (mod 8)
        Some(t) if t == SplittingType::split() => vec![(3, if pos { 1 } else { 7 })],
        Some(_) => vec![(3, if pos { 5 } else { 3 })],
    }
}

impl Branch {
    fn new(
        x_max: u64,
        sign: DiscSign,
        g: u32,
        b: u64,
        conditions: &[SplittingCondition],
    ) -> Result<Self> {
        let modulus = 1u64 << g;
        let odd: Vec<&SplittingCondition> = conditions.iter().filter(|c| c.p != 2).collect();
        let e0: u64 = odd
            .iter()
            .filter(|c| c.kind == SplittingType::Ramified)
            .map(|c| c.p)
            .product();
        // unramified odd primes with the required value of (n/p)
        let unram: Vec<(u64, i8)> = odd
            .iter()
            .filter(|c| c.kind != SplittingType::Ramified)
            .map(|c| {
                let eps: i8 = if c.kind == SplittingType::split() {
                    1
                } else {
                    -1
                };
                let sign_char = if sign == DiscSign::Positive {
                    1
                } else {
                    kronecker(-1, c.p)
                };
                (c.p, eps * sign_char)
            })
            .collect();
        let e_prime: u64 = unram.iter().map(|&(p, _)| p).product();
        let period = modulus
            .checked_mul(e_prime)
            .filter(|&l| l <= MAX_PERIOD)
            .ok_or_else(|| {
                Error::Resource("condition primes too large for a residue table".into())
            })?;

        let mut tables = Vec::new();
        let mut table_index: HashMap<(u64, u64), u32> = HashMap::new();
        let mut terms = Vec::new();
        let mut d = 1u64;
        while d * d <= x_max {
            if d % 2 == 1 && d.gcd(&e_prime) == 1 {
                let mu = moebius(d);
                if mu != 0 {
                    let e00 = e0 / d.gcd(&e0);
                    let scale = d * d * e00;
                    if scale <= x_max {
                        let inv = mod_inverse((scale % modulus) as i64, modulus as i64)
                            .expect("odd scale") as u64;
                        let c = b * inv % modulus;
                        let idx = *table_index.entry((c, e00)).or_insert_with(|| {
                            // (d²e00k / p) = (e00/p)(k/p)
                            let targets: Vec<(u64, i8)> = unram
                                .iter()
                                .map(|&(p, eps)| (p, eps * kronecker(e00 as i64, p)))
                                .collect();
                            tables.push(PeriodicTable::build(period, |k| {
                                k % modulus == c
                                    && targets.iter().all(|&(p, t)| kronecker(k as i64, p) == t)
                            }));
                            (tables.len() - 1) as u32
                        });
                        terms.push(Term {
                            scale,
                            mu,
                            table: idx,
                        });
                    }
                }
            }
            d += 1;
        }
        terms.sort_by_key(|t| t.scale);
        let contains_one = sign == DiscSign::Positive
            && b % modulus == 1
            && e0 == 1
            && unram.iter().all(|&(_, eps)| eps == 1);
        Ok(Branch {
            tables,
            terms,
            contains_one,
        })
    }

    fn count(&self, x: u64) -> u64 {
        let mut total: i64 = 0;
        for t in &self.terms {
            if t.scale > x {
                break;
            }
            let c = self.tables[t.table as usize].count(x / t.scale) as i64;
            total += t.mu as i64 * c;
        }
        if self.contains_one && x >= 1 {
            total -= 1;
        }
        debug_assert!(total >= 0);
        total as u64
    }
}
