//! Form class groups of quadratic discriminants: Gauss reduction, Dirichlet
//! composition, class enumeration and ℓ-torsion counts. For D > 0 the group
//! is the narrow one, with each class keyed by the least form on its
//! reduction cycle.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_fundamental_discriminant, isqrt};
use crate::{Error, Result};

/// Largest |D| accepted by [`class_group`].
pub const DEFAULT_CLASSGROUP_LIMIT: u64 = 100_000_000;

/// ax² + bxy + cy².
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Debug for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl QuadForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    /// The form (a, b, (b² − D)/4a); `None` if that is not integral.
    pub fn from_ab(a: i64, b: i64, d: i64) -> Option<Self> {
        let num = b as i128 * b as i128 - d as i128;
        let den = 4 * a as i128;
        if a == 0 || num % den != 0 {
            return None;
        }
        Some(QuadForm::new(a, b, (num / den) as i64))
    }

    pub fn discriminant(&self) -> i64 {
        (self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128) as i64
    }

    pub fn inverse(&self) -> Self {
        QuadForm::new(self.a, -self.b, self.c)
    }

    /// Reduced in the definite sense: |b| ≤ a ≤ c, b ≥ 0 if |b| = a or a = c.
    pub fn is_reduced_definite(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        a > 0 && b.abs() <= a && a <= c && !(b < 0 && (b == -a || a == c))
    }

    /// Reduced in the indefinite sense: 0 < b < √D and √D − b < 2|a| < √D + b.
    pub fn is_reduced_indefinite(&self) -> bool {
        let d = self.discriminant();
        if d <= 0 {
            return false;
        }
        let s = isqrt(d as u64) as i64;
        let a2 = 2 * self.a.abs();
        self.b > 0 && self.b <= s && a2 + self.b > s && a2 - self.b <= s
    }

    /// The principal form of discriminant D.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        QuadForm::from_ab(1, b, d).expect("D ≡ 0, 1 mod 4")
    }
}

fn is_square(d: i64) -> bool {
    d >= 0 && {
        let s = isqrt(d as u64) as i64;
        s * s == d
    }
}

/// Reduces a positive definite form to the unique reduced form in its class.
fn reduce_definite(f: QuadForm) -> QuadForm {
    let (mut a, mut b, mut c) = (f.a, f.b, f.c);
    loop {
        // b into (−a, a]
        if b > a || b <= -a {
            let two_a = 2 * a;
            let r = (a - b).div_euclid(two_a);
            let nb = b + two_a * r;
            c = (c as i128 + (r as i128) * (b as i128 + a as i128 * r as i128)) as i64;
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return QuadForm::new(a, b, c);
    }
}

/// One step of the indefinite reduction operator ρ: (a, b, c) ↦ (c, b′, a′)
/// with b′ ≡ −b (mod 2c) normalised against s = ⌊√D⌋.
fn rho(f: QuadForm, d: i64, s: i64) -> QuadForm {
    let c = f.c;
    let m = 2 * c.abs();
    let nb = if c.abs() as i128 * c.abs() as i128 > d as i128 {
        // −|c| < b′ ≤ |c|
        let r = (-f.b).rem_euclid(m);
        if r > c.abs() {
            r - m
        } else {
            r
        }
    } else {
        // s − 2|c| < b′ ≤ s
        let lo = s - m + 1;
        lo + (-f.b - lo).rem_euclid(m)
    };
    let na = ((nb as i128 * nb as i128 - d as i128) / (4 * c as i128)) as i64;
    QuadForm::new(c, nb, na)
}

fn reduce_indefinite(f: QuadForm) -> QuadForm {
    let d = f.discriminant();
    let s = isqrt(d as u64) as i64;
    let mut g = f;
    while !g.is_reduced_indefinite() {
        g = rho(g, d, s);
    }
    g
}

/// The least form on the ρ-cycle of a reduced indefinite form.
fn cycle_key(f: QuadForm) -> QuadForm {
    let d = f.discriminant();
    let s = isqrt(d as u64) as i64;
    let mut best = f;
    let mut g = rho(f, d, s);
    while g != f {
        best = best.min(g);
        g = rho(g, d, s);
    }
    best
}

/// Reduced representative. For D > 0 this is some form on the class's
/// reduction cycle, not a canonical one (see [`canonical`]).
pub fn reduce(f: QuadForm) -> Result<QuadForm> {
    let d = f.discriminant();
    if is_square(d) {
        return Err(Error::Degenerate(d));
    }
    if d < 0 {
        if f.a <= 0 {
            return Err(Error::Invalid(format!("{f} is not positive definite")));
        }
        Ok(reduce_definite(f))
    } else {
        Ok(reduce_indefinite(f))
    }
}

/// Canonical class key: the reduced form (D < 0) or the least form on the
/// reduction cycle (D > 0).
pub fn canonical(f: QuadForm) -> Result<QuadForm> {
    let r = reduce(f)?;
    Ok(if r.discriminant() > 0 {
        cycle_key(r)
    } else {
        r
    })
}

/// Dirichlet composition without reduction.
fn compose_raw(f: QuadForm, g: QuadForm, d: i64) -> QuadForm {
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let s = (b1 + b2) / 2;
    let e1 = a1.extended_gcd(&a2);
    let e2 = e1.gcd.extended_gcd(&s);
    let e = e2.gcd;
    // u·a1 + v·a2 + w·s = e
    let (u, v, w) = (e2.x * e1.x, e2.x * e1.y, e2.y);
    let a3 = a1 * a2 / (e * e);
    let big_b = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + d as i128) / 2) / e;
    let m = 2 * a3.abs();
    let b3 = big_b.rem_euclid(m);
    let c3 = (b3 * b3 - d as i128) / (4 * a3);
    QuadForm::new(a3 as i64, b3 as i64, c3 as i64)
}

/// Composition of classes, returned as the canonical key of the product.
pub fn compose(f: QuadForm, g: QuadForm) -> Result<QuadForm> {
    let (df, dg) = (f.discriminant(), g.discriminant());
    if df != dg {
        return Err(Error::DiscriminantMismatch(df, dg));
    }
    if is_square(df) {
        return Err(Error::Degenerate(df));
    }
    canonical(compose_raw(f, g, df))
}

#[inline]
fn square_definite(f: QuadForm, d: i64) -> QuadForm {
    // a1 = a2, b1 = b2: e = gcd(a, b), u·a + w·b = e
    let eg = f.a.extended_gcd(&f.b);
    let e = eg.gcd;
    let a3 = (f.a / e) * (f.a / e);
    let big_b = ((eg.x as i128 * f.a as i128 * f.b as i128
        + eg.y as i128 * ((f.b as i128 * f.b as i128 + d as i128) / 2))
        / e as i128) as i64;
    let b3 = big_b.rem_euclid(2 * a3);
    let c3 = ((b3 as i128 * b3 as i128 - d as i128) / (4 * a3 as i128)) as i64;
    reduce_definite(QuadForm::new(a3, b3, c3))
}

/// f^n as a canonical key.
pub fn power(f: QuadForm, mut n: u64) -> Result<QuadForm> {
    let d = f.discriminant();
    let mut result = canonical(QuadForm::principal(d))?;
    let mut base = canonical(f)?;
    while n > 0 {
        if n & 1 == 1 {
            result = compose(result, base)?;
        }
        n >>= 1;
        if n > 0 {
            base = compose(base, base)?;
        }
    }
    Ok(result)
}

#[derive(Clone, Debug, Serialize)]
pub struct FormClassGroup {
    pub d: i64,
    /// canonical keys, ascending
    pub classes: Vec<QuadForm>,
    pub h: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionCount {
    pub ell: u64,
    pub count: u64,
}

impl FormClassGroup {
    pub fn identity(&self) -> QuadForm {
        canonical(QuadForm::principal(self.d)).expect("fundamental D")
    }

    pub fn contains(&self, f: &QuadForm) -> bool {
        self.classes.binary_search(f).is_ok()
    }
}

pub fn class_group(d: i64) -> Result<FormClassGroup> {
    class_group_with_limit(d, DEFAULT_CLASSGROUP_LIMIT)
}

pub fn class_group_with_limit(d: i64, limit: u64) -> Result<FormClassGroup> {
    if !is_fundamental_discriminant(d) {
        return Err(Error::Invalid(format!(
            "{d} is not a fundamental discriminant"
        )));
    }
    if d.unsigned_abs() > limit {
        return Err(Error::Resource(format!(
            "|D| = {} exceeds class group limit {limit}",
            d.unsigned_abs()
        )));
    }
    let mut classes = if d < 0 {
        reduced_definite_forms(d)
    } else {
        indefinite_cycle_keys(d)
    };
    classes.sort_unstable();
    let h = classes.len() as u64;
    Ok(FormClassGroup { d, classes, h })
}

/// All reduced positive definite forms of discriminant D < 0. For fundamental
/// D every form is primitive.
pub fn reduced_definite_forms(d: i64) -> Vec<QuadForm> {
    let n = d.unsigned_abs();
    let amax = isqrt(n / 3) as i64;
    let mut out = Vec::new();
    for a in 1..=amax {
        let mut b = -a + 1;
        if (b - d).rem_euclid(2) != 0 {
            b += 1;
        }
        while b <= a {
            if let Some(f) = QuadForm::from_ab(a, b, d) {
                if f.is_reduced_definite() {
                    out.push(f);
                }
            }
            b += 2;
        }
    }
    out
}

fn indefinite_cycle_keys(d: i64) -> Vec<QuadForm> {
    let s = isqrt(d as u64) as i64;
    let mut reduced = Vec::new();
    let mut b = s;
    while b > 0 {
        if (b - d).rem_euclid(2) == 0 {
            // 4ac = b² − D < 0
            let m = (d - b * b) / 4;
            let mut a = 1;
            while a * a <= m {
                if m % a == 0 {
                    for aa in [a, m / a] {
                        for sgn in [1, -1] {
                            let f = QuadForm::new(sgn * aa, b, -sgn * (m / aa));
                            if f.is_reduced_indefinite() {
                                reduced.push(f);
                            }
                        }
                        if a * a == m {
                            break;
                        }
                    }
                }
                a += 1;
            }
        }
        b -= 1;
    }
    reduced.sort_unstable();
    reduced.dedup();
    let mut seen: HashSet<QuadForm> = HashSet::new();
    let mut keys = Vec::new();
    for f in reduced {
        if seen.contains(&f) {
            continue;
        }
        let mut g = f;
        let mut best = f;
        loop {
            seen.insert(g);
            best = best.min(g);
            g = rho(g, d, s);
            if g == f {
                break;
            }
        }
        keys.push(best);
    }
    keys
}

/// #{g ∈ G : g^ℓ = 1} by exponentiating every class.
pub fn torsion_count(g: &FormClassGroup, ell: u64) -> Result<TorsionCount> {
    if ell == 0 {
        return Err(Error::Invalid("ell must be positive".into()));
    }
    if g.d > 0 && ell.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "even ell = {ell} for D = {} > 0 (narrow and wide groups differ at 2)",
            g.d
        )));
    }
    let id = g.identity();
    let mut count = 0;
    for &f in &g.classes {
        if power(f, ell)? == id {
            count += 1;
        }
    }
    Ok(TorsionCount { ell, count })
}

/// One row of the per-discriminant torsion table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionRow {
    pub d: i64,
    pub h: u64,
    pub ell: u64,
    pub torsion: u64,
}

/// ℓ-torsion of every imaginary quadratic field with |D| ≤ X, ordered by |D|.
///
/// Reduced forms are enumerated for blocks of consecutive |D| at once (loop
/// over a, b, then the c-range that lands in the block) and bucketed by D,
/// which avoids per-discriminant divisor searches.
pub fn imaginary_torsion_table(x: u64, ell: u64) -> Result<Vec<TorsionRow>> {
    if ell == 0 {
        return Err(Error::Invalid("ell must be positive".into()));
    }
    const BLOCK: u64 = 1 << 14;
    let blocks: Vec<(u64, u64)> = (0..=x / BLOCK)
        .map(|i| (i * BLOCK, ((i + 1) * BLOCK).min(x + 1)))
        .collect();
    let parts: Vec<Vec<TorsionRow>> = blocks
        .par_iter()
        .map(|&(lo, hi)| {
            for_each_imaginary_in_block(lo, hi, |d, forms| TorsionRow {
                d,
                h: forms.len() as u64,
                ell,
                torsion: forms
                    .iter()
                    .filter(|f| has_order_dividing(**f, ell, d))
                    .count() as u64,
            })
        })
        .collect();
    Ok(parts.concat())
}

/// Calls `f(D, reduced forms)` for every fundamental D < 0 with lo ≤ |D| < hi.
pub fn for_each_imaginary_in_block<T>(
    lo: u64,
    hi: u64,
    mut f: impl FnMut(i64, &[QuadForm]) -> T,
) -> Vec<T> {
    let lo = lo.max(3);
    if lo >= hi {
        return Vec::new();
    }
    let width = (hi - lo) as usize;
    let fundamental: Vec<bool> = (lo..hi)
        .map(|n| is_fundamental_discriminant(-(n as i64)))
        .collect();
    let mut buckets: Vec<Vec<QuadForm>> = vec![Vec::new(); width];
    let amax = isqrt((hi - 1) / 3) as i64;
    for a in 1..=amax {
        for b in (-a + 1)..=a {
            // n = 4ac − b² ∈ [lo, hi), c ≥ a
            let b2 = b * b;
            let four_a = 4 * a;
            let cmin = ((lo as i64 + b2) + four_a - 1).div_euclid(four_a).max(a);
            let cmax = (hi as i64 - 1 + b2).div_euclid(four_a);
            let mut c = cmin;
            while c <= cmax {
                // (a, b, a) with b < 0 is not reduced
                if !(b < 0 && c == a) {
                    let n = (four_a * c - b2) as u64;
                    let i = (n - lo) as usize;
                    if fundamental[i] {
                        buckets[i].push(QuadForm::new(a, b, c));
                    }
                }
                c += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (i, forms) in buckets.iter().enumerate() {
        if fundamental[i] {
            out.push(f(-((lo + i as u64) as i64), forms));
        }
    }
    out
}

/// f^ℓ = 1 for a reduced definite form. ℓ = 2, 3 use the shortcuts f = f⁻¹
/// and f² = f⁻¹.
fn has_order_dividing(f: QuadForm, ell: u64, d: i64) -> bool {
    let inv = reduce_definite(f.inverse());
    match ell {
        1 => f == QuadForm::principal(d),
        2 => f == inv,
        3 => square_definite(f, d) == inv,
        _ => {
            let id = QuadForm::principal(d);
            let mut result = id;
            let mut base = f;
            let mut n = ell;
            while n > 0 {
                if n & 1 == 1 {
                    result = reduce_definite(compose_raw(result, base, d));
                }
                n >>= 1;
                if n > 0 {
                    base = square_definite(base, d);
                }
            }
            result == id
        }
    }
}

pub fn torsion_csv(rows: &[TorsionRow]) -> String {
    let mut out = String::from("D,h,ell,torsion_count\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.d, r.h, r.ell, r.torsion));
    }
    out
}
