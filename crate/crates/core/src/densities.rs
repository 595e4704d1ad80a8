//! Exact local densities of splitting types for fields of degree 2 to 5, the
//! non-maximality densities ν(p), and the exponent bookkeeping that feeds the
//! sieve (δ₀, ℓ(d), U(z) leading constants).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::Rational;
use crate::{Error, Result};

/// Cycle shape of an unramified prime: inertia degrees in ascending order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    parts: [u8; 5],
    len: u8,
}

impl Shape {
    pub fn new(parts: &[u8]) -> Result<Self> {
        if parts.is_empty() || parts.len() > 5 || parts.contains(&0) {
            return Err(Error::Invalid(format!("bad inertia degrees {parts:?}")));
        }
        let mut buf = [0u8; 5];
        buf[..parts.len()].copy_from_slice(parts);
        buf[..parts.len()].sort_unstable();
        Ok(Shape {
            parts: buf,
            len: parts.len() as u8,
        })
    }

    pub fn parts(&self) -> &[u8] {
        &self.parts[..self.len as usize]
    }

    pub fn degree(&self) -> u32 {
        self.parts().iter().map(|&f| f as u32).sum()
    }

    pub fn is_totally_split(&self) -> bool {
        self.parts().iter().all(|&f| f == 1)
    }

    /// 1/z_λ: the proportion of S_d lying in this cycle type.
    pub fn weight(&self) -> Rational {
        let mut z: i64 = 1;
        let mut i = 0;
        let p = self.parts();
        while i < p.len() {
            let f = p[i] as i64;
            let mut m = 0i64;
            while i < p.len() && p[i] as i64 == f {
                m += 1;
                i += 1;
            }
            z *= f.pow(m as u32) * (1..=m).product::<i64>();
        }
        Rational::new(1, z)
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for d in self.parts() {
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// How a rational prime decomposes in a field of degree d.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplittingType {
    Unramified(Shape),
    Ramified,
}

impl SplittingType {
    pub fn totally_split(d: u32) -> Self {
        SplittingType::Unramified(Shape::new(&vec![1u8; d as usize]).expect("1 <= d <= 5"))
    }

    pub fn from_parts(parts: &[u8]) -> Result<Self> {
        Ok(SplittingType::Unramified(Shape::new(parts)?))
    }

    pub fn split() -> Self {
        SplittingType::totally_split(2)
    }

    pub fn inert() -> Self {
        SplittingType::Unramified(Shape::new(&[2]).unwrap())
    }

    pub fn is_totally_split(&self) -> bool {
        matches!(self, SplittingType::Unramified(s) if s.is_totally_split())
    }

    pub fn degree(&self) -> Option<u32> {
        match self {
            SplittingType::Unramified(s) => Some(s.degree()),
            SplittingType::Ramified => None,
        }
    }

    /// Parses `split`, `inert`, `ramified`, or a shape like `(12)` / `112`.
    /// `split` means totally split in degree `d`, `inert` means one prime of
    /// degree `d`.
    pub fn parse(s: &str, d: u32) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "split" | "totally-split" | "s" => return Ok(SplittingType::totally_split(d)),
            "inert" | "i" => return SplittingType::from_parts(&[d as u8]),
            "ramified" | "ram" | "r" => return Ok(SplittingType::Ramified),
            _ => {}
        }
        let digits = t.trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<u8> = digits
            .chars()
            .map(|c| c.to_digit(10).map(|x| x as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse(format!("unknown splitting type {s:?}")))?;
        let st = SplittingType::from_parts(&parts)?;
        if st.degree() != Some(d) {
            return Err(Error::Invalid(format!(
                "splitting type {s} is not of degree {d}"
            )));
        }
        Ok(st)
    }

    /// Short name used in reports: `split`/`inert` for quadratics, the shape
    /// otherwise.
    pub fn label(&self) -> String {
        match self {
            SplittingType::Ramified => "ramified".into(),
            SplittingType::Unramified(s) if s.degree() == 2 => if s.is_totally_split() {
                "split"
            } else {
                "inert"
            }
            .into(),
            SplittingType::Unramified(s) => s.to_string(),
        }
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl fmt::Debug for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SplittingType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// Integer partitions of d, each in ascending order, from totally split to
/// inert.
pub fn shapes(d: u32) -> Vec<Shape> {
    fn rec(rem: u32, min: u32, cur: &mut Vec<u8>, out: &mut Vec<Shape>) {
        if rem == 0 {
            out.push(Shape::new(cur).unwrap());
            return;
        }
        for f in min..=rem {
            cur.push(f as u8);
            rec(rem - f, f, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, 1, &mut Vec::new(), &mut out);
    out
}

fn check_degree(d: u32) -> Result<()> {
    if (2..=5).contains(&d) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("degree {d} outside 2..=5")))
    }
}

/// Coefficients of the normaliser as a polynomial in p⁻¹, constant term first.
fn normalizer_coeffs(d: u32) -> &'static [i64] {
    match d {
        2 => &[1, 1],
        3 => &[1, 1, 1],
        4 => &[1, 1, 2, 1],
        5 => &[1, 1, 2, 2, 1],
        _ => unreachable!(),
    }
}

fn poly_in_inverse(coeffs: &[i64], p: u64) -> Rational {
    let inv = Rational::new(1, p as i64);
    let mut acc = Rational::zero();
    let mut pw = Rational::one();
    for &c in coeffs {
        acc += Rational::integer(c) * &pw;
        pw = pw * &inv;
    }
    acc
}

/// The normaliser 1 + p⁻¹ + … for degree d; its reciprocal is the
/// unramified mass.
pub fn normalizer(d: u32, p: u64) -> Result<Rational> {
    check_degree(d)?;
    Ok(poly_in_inverse(normalizer_coeffs(d), p))
}

/// δ_p(type) for a degree-d field.
pub fn delta(d: u32, st: SplittingType, p: u64) -> Result<Rational> {
    check_degree(d)?;
    let norm = normalizer(d, p)?;
    match st {
        SplittingType::Ramified => Ok((norm.clone() - Rational::one()) / norm),
        SplittingType::Unramified(shape) => {
            if shape.degree() != d {
                return Err(Error::Invalid(format!(
                    "{shape} is not a splitting type in degree {d}"
                )));
            }
            Ok(shape.weight() / norm)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityTable {
    pub d: u32,
    pub p: u64,
    pub entries: Vec<(SplittingType, Rational)>,
}

impl DensityTable {
    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(_, r)| r).sum()
    }

    pub fn get(&self, st: SplittingType) -> Option<&Rational> {
        self.entries.iter().find(|(t, _)| *t == st).map(|(_, r)| r)
    }
}

/// All splitting types of degree d at p, unramified shapes first, ramified
/// last.
pub fn density_table(d: u32, p: u64) -> Result<DensityTable> {
    check_degree(d)?;
    let mut entries = Vec::new();
    for s in shapes(d) {
        let st = SplittingType::Unramified(s);
        entries.push((st, delta(d, st, p)?));
    }
    entries.push((
        SplittingType::Ramified,
        delta(d, SplittingType::Ramified, p)?,
    ));
    Ok(DensityTable { d, p, entries })
}

/// Density of lattice points giving rings non-maximal at p (d = 4 or 5).
pub fn nu(d: u32, p: u64) -> Result<Rational> {
    match d {
        4 => Ok(poly_in_inverse(
            &[0, 0, 1, 2, 2, -3, -4, -1, 3, 3, -1, -1],
            p,
        )),
        5 => {
            let p = Rational::from(p);
            let one = Rational::one();
            let q = |c: &[i64]| -> Rational {
                let mut acc = Rational::zero();
                for &k in c.iter().rev() {
                    acc = acc * &p + Rational::integer(k);
                }
                acc
            };
            let num = (p.clone() - one.clone()).pow(8)
                * p.pow(12)
                * (p.clone() + one.clone()).pow(4)
                * q(&[1, 0, 1]).pow(2)
                * q(&[1, 1, 1]).pow(2)
                * q(&[1, 1, 1, 1, 1])
                * q(&[1, 2, 2, 1, 1]);
            Ok(one - num / p.pow(40))
        }
        _ => Err(Error::Invalid(format!(
            "nu is defined for degrees 4 and 5, not {d}"
        ))),
    }
}

pub fn delta0(d: u32) -> Result<Rational> {
    check_degree(d)?;
    Ok(match d {
        2 => Rational::new(1, 6),
        3 => Rational::new(2, 25),
        4 => Rational::new(1, 48),
        _ => Rational::new(1, 200),
    })
}

/// Largest admissible δ given the count's main-term and error exponents:
/// (1−τ)/(1+2σ), further capped at 1/4 for d = 3 and 1−γ for d = 5.
pub fn delta0_from_exponents(
    sigma: &Rational,
    tau: &Rational,
    gamma: Option<&Rational>,
    d: u32,
) -> Result<Rational> {
    check_degree(d)?;
    let one = Rational::one();
    if sigma <= &Rational::zero() || tau <= &Rational::zero() || tau >= &one {
        return Err(Error::Invalid(format!(
            "need σ > 0 and 0 < τ < 1, got σ={sigma}, τ={tau}"
        )));
    }
    let mut v = (one.clone() - tau) / (one.clone() + Rational::integer(2) * sigma);
    if d == 3 {
        v = v.min(Rational::new(1, 4));
    }
    if d == 5 {
        let g = gamma.ok_or_else(|| Error::Invalid("degree 5 needs γ".into()))?;
        v = v.min(one - g);
    }
    Ok(v)
}

/// (σ_d, τ_d, γ): the e-exponent and X-exponent of the error term in the
/// degree-d field count with local conditions, and for d = 5 the exponent of
/// the tail estimate.
pub fn count_exponents(d: u32) -> Result<(Rational, Rational, Option<Rational>)> {
    check_degree(d)?;
    Ok(match d {
        2 => (Rational::one(), Rational::new(1, 2), None),
        3 => (Rational::new(8, 9), Rational::new(7, 9), None),
        4 => (Rational::new(1, 2), Rational::new(23, 24), None),
        _ => (
            Rational::new(1, 2),
            Rational::new(79, 80),
            Some(Rational::new(199, 200)),
        ),
    })
}

/// Smallest ℓ for which the sieve route alone gives the dyadic exponent
/// 3/2 − 1/(2ℓ(d−1)).
pub fn ell_threshold(d: u32) -> Result<u64> {
    check_degree(d)?;
    Ok(match d {
        2 | 3 => 1,
        4 => 8,
        _ => 25,
    })
}

/// Leading constants (lower, upper) with U(z) between lower·z/log z and
/// upper·z/log z asymptotically: δ_p(totally split) at p = 2 and 1/d!.
pub fn u_constants(d: u32) -> Result<(Rational, Rational)> {
    check_degree(d)?;
    let lower = delta(d, SplittingType::totally_split(d), 2)?;
    let upper = SplittingType::totally_split(d);
    let SplittingType::Unramified(s) = upper else {
        unreachable!()
    };
    Ok((lower, s.weight()))
}

/// U(z) = Σ_{p ≤ z} δ_p(totally split).
pub fn u_of_z(d: u32, primes: &[u64]) -> Result<Rational> {
    let st = SplittingType::totally_split(d);
    let terms = primes
        .iter()
        .map(|&p| delta(d, st, p).map(|r| (r.numer().clone(), r.denom().clone())))
        .collect::<Result<Vec<_>>>()?;
    // Balanced summation with a single reduction at the end; reducing after
    // every step costs a gcd of ever-growing denominators.
    fn tree_sum(t: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
        match t {
            [] => (BigInt::zero(), BigInt::one()),
            [x] => x.clone(),
            _ => {
                let (l, r) = t.split_at(t.len() / 2);
                let ((a, b), (c, d)) = (tree_sum(l), tree_sum(r));
                (a * &d + c * &b, b * d)
            }
        }
    }
    let (num, den) = tree_sum(&terms);
    Ok(Rational::from_bigints(num, den))
}

/// Long-format CSV `d,p,type,delta,delta_float`.
pub fn density_csv(degrees: &[u32], primes: &[u64]) -> Result<String> {
    let mut out = String::from("d,p,type,delta,delta_float\n");
    for &d in degrees {
        for &p in primes {
            for (st, r) in density_table(d, p)?.entries {
                out.push_str(&format!("{d},{p},{st},{r},{:.12}\n", r.to_f64()));
            }
        }
    }
    Ok(out)
}
