//! Split-prime profiles, bad sets, ℓ-torsion bounds and the averaged torsion
//! experiment for quadratic fields.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{floor_power, primes_up_to, Rational, INV_ZETA2};
use crate::classgroup::{class_group, imaginary_torsion_table, torsion_count, TorsionRow};
use crate::cubic::CubicForm;
use crate::densities::{delta0, ell_threshold};
use crate::quadratic::{DiscSign, QuadraticCensus};
use crate::sieve::{compute_stats, family_instance, Family};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum FieldId {
    Quadratic(i64),
    Cubic([i64; 4]),
}

/// N(K; Y), the number of primes p ≤ Y splitting completely in K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplitPrimeProfile {
    pub field: FieldId,
    pub disc: i64,
    pub y: u64,
    pub n: u32,
}

fn field_at(family: Family<'_>, i: usize) -> (FieldId, i64) {
    match family {
        Family::Quadratic(c) => (FieldId::Quadratic(c.discriminants[i]), c.discriminants[i]),
        Family::Cubic(c) => {
            let f: &CubicForm = &c.fields[i];
            (FieldId::Cubic(f.coeffs()), f.disc)
        }
    }
}

/// Profiles of every field with |D| ≤ x, in census order.
pub fn split_profile(family: Family<'_>, x: u64, y: u64) -> Vec<SplitPrimeProfile> {
    let primes: Vec<u64> = primes_up_to(y).iter().collect();
    (0..family.size(x))
        .into_par_iter()
        .map(|i| {
            let (field, disc) = field_at(family, i);
            let n = primes
                .iter()
                .filter(|&&p| family.totally_split(i, p))
                .count() as u32;
            SplitPrimeProfile { field, disc, y, n }
        })
        .collect()
}

/// Fields with |D| ≤ X in which at most M primes p ≤ Y split completely.
#[derive(Clone, Debug, Serialize)]
pub struct BadSetReport {
    pub d: u32,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub count: u64,
    pub family_size: u64,
    pub fraction: f64,
}

/// `profiles` must have been computed with prime bound ⌊y⌋; only fields
/// with |D| ≤ x are counted.
pub fn bad_set(d: u32, x: u64, y: f64, m: f64, profiles: &[SplitPrimeProfile]) -> BadSetReport {
    debug_assert!(profiles.iter().all(|p| p.y == y.max(0.0).floor() as u64));
    let in_range = profiles.iter().filter(|p| p.disc.unsigned_abs() <= x);
    let (mut count, mut size) = (0u64, 0u64);
    for p in in_range {
        size += 1;
        if (p.n as f64) <= m {
            count += 1;
        }
    }
    let fraction = if size == 0 {
        0.0
    } else {
        count as f64 / size as f64
    };
    BadSetReport {
        d,
        x,
        y,
        m,
        count,
        family_size: size,
        fraction,
    }
}

/// Supremum of admissible δ for the bound of size D^{1/2+ε}/M with ℓ and d:
/// 1/(2ℓ(d−1)).
pub fn split_prime_delta_limit(d: u32, ell: u64) -> Result<Rational> {
    if !(2..=5).contains(&d) || ell == 0 {
        return Err(Error::Invalid(format!(
            "need d in 2..=5 and ell >= 1, got d={d}, ell={ell}"
        )));
    }
    Ok(Rational::new(1, 2 * ell as i64 * (d as i64 - 1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionBound {
    pub disc: u64,
    pub d: u32,
    pub ell: u64,
    pub delta: Rational,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub bound: f64,
}

/// C·|D|^{1/2+ε}/M, valid when M primes p ≤ |D|^δ split completely and
/// δ < 1/(2ℓ(d−1)).
pub fn split_prime_bound(
    disc: u64,
    d: u32,
    ell: u64,
    delta: &Rational,
    epsilon: f64,
    m: u64,
    c: f64,
) -> Result<TorsionBound> {
    let limit = split_prime_delta_limit(d, ell)?;
    if delta >= &limit || delta.is_negative() {
        return Err(Error::Invalid(format!(
            "delta = {delta} violates 0 <= delta < {limit} for d={d}, ell={ell}"
        )));
    }
    if m == 0 {
        return Err(Error::UndefinedBound(format!(
            "no split primes below |D|^delta for |D| = {disc}"
        )));
    }
    let bound = c * (disc as f64).powf(0.5 + epsilon) / m as f64;
    Ok(TorsionBound {
        disc,
        d,
        ell,
        delta: delta.clone(),
        epsilon,
        m,
        c,
        bound,
    })
}

/// lim Σ_{|D| ≤ X} |Cl_K[ℓ]| / X over fields of the given sign, where known.
pub fn torsion_prediction(ell: u64, sign: DiscSign) -> Option<f64> {
    // per sign: #fields ~ X/(2ζ(2)); mean |Cl[3]| is 2 (imaginary), 4/3 (real)
    let per = |s: DiscSign| match (ell, s) {
        (1, _) => Some(INV_ZETA2 / 2.0),
        (3, DiscSign::Negative) => Some(INV_ZETA2),
        (3, DiscSign::Positive) => Some(2.0 * INV_ZETA2 / 3.0),
        _ => None,
    };
    sign.parts().iter().map(|&s| per(s)).sum()
}

/// Per-field torsion rows of the census fields with |D| ≤ x and the
/// requested sign, ordered by (|D|, D).
pub fn torsion_rows(
    census: &QuadraticCensus,
    ell: u64,
    x: u64,
    sign: DiscSign,
) -> Result<Vec<TorsionRow>> {
    if x > census.x {
        return Err(Error::Invalid(format!(
            "census reaches {}, asked for {x}",
            census.x
        )));
    }
    if sign.parts().iter().any(|s| {
        !census
            .sign
            .includes(if *s == DiscSign::Positive { 1 } else { -1 })
    }) {
        return Err(Error::Invalid(format!(
            "census holds {} fields, asked for {sign}",
            census.sign
        )));
    }
    if sign.includes(1) && ell.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "even ell = {ell} with real fields"
        )));
    }
    let mut rows = Vec::new();
    if sign.includes(-1) {
        rows = imaginary_torsion_table(x, ell)?;
        debug_assert_eq!(
            rows.len(),
            census.up_to(x).iter().filter(|&&d| d < 0).count()
        );
    }
    if sign.includes(1) {
        let real: Vec<i64> = census.up_to(x).iter().copied().filter(|&d| d > 0).collect();
        let real_rows = real
            .par_iter()
            .map(|&d| {
                let g = class_group(d)?;
                let t = torsion_count(&g, ell)?;
                Ok(TorsionRow {
                    d,
                    h: g.h,
                    ell,
                    torsion: t.count,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(real_rows);
        rows.sort_by_key(|r| (r.d.unsigned_abs(), r.d));
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionSum {
    #[serde(rename = "X")]
    pub x: u64,
    pub sign: DiscSign,
    pub ell: u64,
    pub fields: u64,
    pub sum: u64,
    /// sum / X
    pub ratio: Rational,
    pub prediction: Option<f64>,
}

fn summarize(rows: &[TorsionRow], x: u64, ell: u64, sign: DiscSign) -> TorsionSum {
    let in_range = rows.iter().filter(|r| r.d.unsigned_abs() <= x);
    let (mut fields, mut sum) = (0u64, 0u64);
    for r in in_range {
        fields += 1;
        sum += r.torsion;
    }
    TorsionSum {
        x,
        sign,
        ell,
        fields,
        sum,
        ratio: Rational::from(sum) / Rational::from(x.max(1)),
        prediction: torsion_prediction(ell, sign),
    }
}

/// Σ |Cl_K[ℓ]| over the census fields with |D| ≤ x.
pub fn average_torsion(
    census: &QuadraticCensus,
    ell: u64,
    x: u64,
    sign: DiscSign,
) -> Result<TorsionSum> {
    Ok(summarize(
        &torsion_rows(census, ell, x, sign)?,
        x,
        ell,
        sign,
    ))
}

/// How the exponent for (d, ℓ) is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Cl[1] is trivial.
    Trivial,
    /// 2-torsion of quadratic fields is given by genus theory.
    GenusTheory,
    /// The 2- and 3-torsion averages for cubic fields are known results.
    KnownAverage,
    /// The sieve with δ = min{δ₁, δ₂}.
    Sieve,
}

#[derive(Clone, Debug, Serialize)]
pub struct DyadicRange {
    pub j: u32,
    /// fields with 2^j < D ≤ 2^{j+1}
    pub lo: u64,
    pub hi: u64,
    /// split-prime level (2^j)^δ
    pub y: f64,
    /// (2^{j+1})^{3/2} · log Y / Y, the contribution of fields with many
    /// split primes
    pub good_term: f64,
    /// (2^{j+1})^{1 − δ} · (2^{j+1})^{1/2}, the bad fields at the trivial bound
    pub bad_term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DyadicReport {
    pub d: u32,
    pub ell: u64,
    pub delta1: Rational,
    pub delta2: Rational,
    pub delta: Rational,
    /// 3/2 − min{δ₁, δ₂}
    pub sieve_exponent: Rational,
    /// exponent of the averaged bound Σ|Cl[ℓ]| ≪ X^{e+ε}
    pub average_exponent: Rational,
    /// exponent of the pointwise bound outside the exceptional set
    pub field_exponent: Rational,
    /// exponent of the exceptional set size
    pub exceptional_exponent: Rational,
    pub route: Route,
    #[serde(rename = "X")]
    pub x: u64,
    pub ranges: Vec<DyadicRange>,
}

/// Exponents for Σ_{D ≤ X} |Cl_K[ℓ]| over degree-d fields. `delta1`
/// defaults to (and may not exceed) the supremum 1/(2ℓ(d−1)); `delta2`
/// defaults to (and may not exceed) δ₀(d).
pub fn dyadic_average_bound(
    d: u32,
    ell: u64,
    delta1: Option<Rational>,
    delta2: Option<Rational>,
    x: u64,
) -> Result<DyadicReport> {
    let sup1 = split_prime_delta_limit(d, ell)?;
    let sup2 = delta0(d)?;
    let delta1 = delta1.unwrap_or_else(|| sup1.clone());
    let delta2 = delta2.unwrap_or_else(|| sup2.clone());
    let zero = Rational::zero();
    if delta1 <= zero || delta1 > sup1 {
        return Err(Error::Invalid(format!(
            "delta1 = {delta1} outside (0, {sup1}]"
        )));
    }
    if delta2 <= zero || delta2 > sup2 {
        return Err(Error::Invalid(format!(
            "delta2 = {delta2} outside (0, {sup2}]"
        )));
    }
    let delta = delta1.clone().min(delta2.clone());
    let three_halves = Rational::new(3, 2);
    let sieve_exponent = &three_halves - &delta;

    let ell_d = ell_threshold(d)?;
    let theta = if ell >= ell_d {
        sup1.clone()
    } else {
        sup2.clone()
    };
    let route = match (d, ell) {
        (_, 1) if ell >= ell_d => Route::Trivial,
        (2, 2) => Route::GenusTheory,
        (3, 2) | (3, 3) => Route::KnownAverage,
        _ => Route::Sieve,
    };
    debug_assert!(route != Route::Sieve || sup1.clone().min(sup2.clone()) == theta);

    let df = delta.to_f64();
    let top = 64 - x.max(1).leading_zeros();
    let ranges = (0..top)
        .map(|j| {
            let lo = 1u64 << j;
            let hi = (lo << 1).min(x.max(1));
            let y = (lo as f64).powf(df);
            let h = (lo << 1) as f64;
            let good_term = if y > 1.0 {
                h.powf(1.5) * y.ln() / y
            } else {
                f64::INFINITY
            };
            DyadicRange {
                j,
                lo,
                hi,
                y,
                good_term,
                bad_term: h.powf(1.5 - df),
            }
        })
        .collect();
    Ok(DyadicReport {
        d,
        ell,
        delta1,
        delta2,
        delta,
        sieve_exponent,
        average_exponent: &three_halves - &theta,
        field_exponent: Rational::new(1, 2) - &theta,
        exceptional_exponent: Rational::one() - &theta,
        route,
        x,
        ranges,
    })
}

/// Largest-constant scan for |Cl[ℓ]| ≤ C·|D|^{1/2+ε}/N(K; |D|^δ).
#[derive(Clone, Debug, Serialize)]
pub struct BoundConstantScan {
    #[serde(rename = "X")]
    pub x: u64,
    pub ell: u64,
    pub delta: Rational,
    pub epsilon: f64,
    /// fields with at least one split prime below |D|^δ
    pub fields: u64,
    /// fields with none (the bound says nothing about them)
    pub excluded: u64,
    pub max_constant: f64,
    pub argmax: i64,
    pub p99: f64,
}

/// Smallest n with ⌊n^δ⌋ ≥ p, for each prime p.
fn level_thresholds(primes: &[u64], delta: &Rational, n_max: u64) -> Result<Vec<u64>> {
    primes
        .iter()
        .map(|&p| {
            let reaches = |n: u64| floor_power(&Rational::from(n), delta).map(|y| y >= p);
            if !reaches(n_max)? {
                return Ok(u64::MAX);
            }
            let (mut lo, mut hi) = (1u64, n_max);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if reaches(mid)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(lo)
        })
        .collect()
}

/// Scans the rows with |D| ≤ x. The 99th percentile is nearest-rank.
pub fn bound_constant_scan(
    rows: &[TorsionRow],
    x: u64,
    ell: u64,
    delta: &Rational,
    epsilon: f64,
) -> Result<BoundConstantScan> {
    if rows.iter().any(|r| r.ell != ell) {
        return Err(Error::Invalid(format!(
            "rows were computed for a different ell than {ell}"
        )));
    }
    if delta.is_negative() || delta >= &Rational::one() {
        return Err(Error::Invalid(format!("delta = {delta} outside [0, 1)")));
    }
    let y_max = floor_power(&Rational::from(x.max(1)), delta)?;
    let primes: Vec<u64> = primes_up_to(y_max).iter().collect();
    let thresholds = level_thresholds(&primes, delta, x.max(1))?;
    let mut constants = Vec::new();
    let (mut excluded, mut argmax, mut max_constant) = (0u64, 0i64, 0.0f64);
    for r in rows.iter().filter(|r| r.d.unsigned_abs() <= x) {
        let n = r.d.unsigned_abs();
        let m = primes
            .iter()
            .zip(&thresholds)
            .filter(|&(&p, &t)| t <= n && crate::arith::kronecker(r.d, p) == 1)
            .count();
        if m == 0 {
            excluded += 1;
            continue;
        }
        let c = r.torsion as f64 * m as f64 / (n as f64).powf(0.5 + epsilon);
        if c > max_constant {
            max_constant = c;
            argmax = r.d;
        }
        constants.push(c);
    }
    constants.sort_by(f64::total_cmp);
    let p99 = if constants.is_empty() {
        0.0
    } else {
        constants[((constants.len() as f64 * 0.99).ceil() as usize).clamp(1, constants.len()) - 1]
    };
    Ok(BoundConstantScan {
        x,
        ell,
        delta: delta.clone(),
        epsilon,
        fields: constants.len() as u64,
        excluded,
        max_constant,
        argmax,
        p99,
    })
}

/// M(z) and U(z) at z = ⌊(X/2)^δ⌋, scaled by (X/2)^δ / log (X/2)^δ.
#[derive(Clone, Debug, Serialize)]
pub struct MeanWindow {
    #[serde(rename = "X")]
    pub x: u64,
    /// (X/2)^δ
    pub z: f64,
    pub primes: usize,
    #[serde(rename = "U")]
    pub u: Rational,
    #[serde(rename = "M")]
    pub m: Rational,
    pub u_ratio: f64,
    pub m_ratio: f64,
}

/// None when no prime lies below the level.
pub fn mean_window(family: Family<'_>, x: u64, delta: &Rational) -> Result<Option<MeanWindow>> {
    let level = crate::sieve::sieve_level(x, delta)?;
    if level < 2 {
        return Ok(None);
    }
    let inst = family_instance(family, x, level)?;
    let stats = compute_stats(&inst)?;
    let z = (x as f64 / 2.0).powf(delta.to_f64());
    let scale = z / z.ln();
    Ok(Some(MeanWindow {
        x,
        z,
        primes: stats.primes.len(),
        u_ratio: stats.u.to_f64() / scale,
        m_ratio: stats.m.to_f64() / scale,
        u: stats.u,
        m: stats.m,
    }))
}

/// c₀, c₁ with c₀·z/log z ≤ U/2 and 3U/2 ≤ c₁·z/log z at every scale,
/// together with whether every measured M(z) falls in [c₀, c₁]·z/log z.
#[derive(Clone, Debug, Serialize)]
pub struct FittedWindow {
    pub c0: f64,
    pub c1: f64,
    pub m_inside: bool,
    pub windows: Vec<MeanWindow>,
}

pub fn fit_window(windows: Vec<MeanWindow>) -> Option<FittedWindow> {
    if windows.is_empty() {
        return None;
    }
    let min_u = windows
        .iter()
        .map(|w| w.u_ratio)
        .fold(f64::INFINITY, f64::min);
    let max_u = windows.iter().map(|w| w.u_ratio).fold(0.0, f64::max);
    let (c0, c1) = (min_u / 2.0, 1.5 * max_u);
    let m_inside = windows.iter().all(|w| c0 <= w.m_ratio && w.m_ratio <= c1);
    Some(FittedWindow {
        c0,
        c1,
        m_inside,
        windows,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BadSetTrend {
    pub d: u32,
    pub delta0: Rational,
    pub fit: Option<FittedWindow>,
    pub per_scale: Vec<BadSetReport>,
    /// bad fraction strictly decreasing along the scales
    pub decreasing: bool,
}

/// Bad sets with Y = (X/2)^{δ₀(d)} and M = ½·c₀·Y/log Y at each scale, c₀
/// fitted from the scales where the level contains a prime.
pub fn bad_set_trend(family: Family<'_>, scales: &[u64]) -> Result<BadSetTrend> {
    let d = family.degree();
    let delta = delta0(d)?;
    let windows = scales
        .iter()
        .map(|&x| mean_window(family, x, &delta))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let fit = fit_window(windows);
    let c0 = fit.as_ref().map_or(0.0, |f| f.c0);
    let per_scale: Vec<BadSetReport> = scales
        .iter()
        .map(|&x| -> Result<BadSetReport> {
            let y = (x as f64 / 2.0).powf(delta.to_f64());
            let m = if y > 1.0 { 0.5 * c0 * y / y.ln() } else { 0.0 };
            let y_int = crate::sieve::sieve_level(x, &delta)?;
            let profiles = split_profile(family, x, y_int);
            Ok(bad_set(d, x, y, m, &profiles))
        })
        .collect::<Result<_>>()?;
    let decreasing = per_scale.windows(2).all(|w| w[1].fraction < w[0].fraction);
    Ok(BadSetTrend {
        d,
        delta0: delta,
        fit,
        per_scale,
        decreasing,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentParams {
    pub scales: Vec<u64>,
    pub ell: u64,
    pub sign: DiscSign,
    pub scan_delta: Rational,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow {
    #[serde(rename = "X")]
    pub x: u64,
    pub fields: u64,
    pub sum_torsion: u64,
    /// sum / X
    pub ratio: f64,
    pub ratio_to_prediction: Option<f64>,
    pub bad_fraction: f64,
    pub scan_p99: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FittedConstants {
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    /// largest C with |Cl[ℓ]|·N(K; |D|^δ) = C·|D|^{1/2+ε} at the top scale
    #[serde(rename = "C0")]
    pub c_ev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub parameters: ExperimentParams,
    pub fitted_constants: FittedConstants,
    pub per_scale: Vec<ScaleRow>,
    pub bad_sets: BadSetTrend,
    pub bound_scans: Vec<BoundConstantScan>,
    pub dyadic: DyadicReport,
}

/// Torsion sums, bad-set trend and bound-constant scan for every scale; `census` must
/// reach the largest scale. Also returns the per-field rows at that scale.
pub fn run_experiment(
    census: &QuadraticCensus,
    params: &ExperimentParams,
) -> Result<(ExperimentReport, Vec<TorsionRow>)> {
    let x_max = *params
        .scales
        .iter()
        .max()
        .ok_or_else(|| Error::Invalid("no scales given".into()))?;
    if !params.scales.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Invalid("scales must be strictly increasing".into()));
    }
    split_prime_delta_limit(2, params.ell)?;
    let rows = torsion_rows(census, params.ell, x_max, params.sign)?;
    let restricted;
    let family_census = if census.sign == params.sign {
        census
    } else {
        restricted = QuadraticCensus {
            x: census.x,
            sign: params.sign,
            discriminants: census
                .discriminants
                .iter()
                .copied()
                .filter(|&d| params.sign.includes(d))
                .collect(),
        };
        &restricted
    };
    let bad_sets = bad_set_trend(Family::Quadratic(family_census), &params.scales)?;
    let bound_scans = params
        .scales
        .iter()
        .map(|&x| bound_constant_scan(&rows, x, params.ell, &params.scan_delta, params.epsilon))
        .collect::<Result<Vec<_>>>()?;
    let per_scale = params
        .scales
        .iter()
        .zip(&bad_sets.per_scale)
        .zip(&bound_scans)
        .map(|((&x, bad), ev)| {
            let s = summarize(&rows, x, params.ell, params.sign);
            let ratio = s.ratio.to_f64();
            ScaleRow {
                x,
                fields: s.fields,
                sum_torsion: s.sum,
                ratio,
                ratio_to_prediction: s.prediction.map(|p| ratio / p),
                bad_fraction: bad.fraction,
                scan_p99: ev.p99,
            }
        })
        .collect();
    let fitted_constants = FittedConstants {
        c0: bad_sets.fit.as_ref().map(|f| f.c0),
        c1: bad_sets.fit.as_ref().map(|f| f.c1),
        c_ev: bound_scans.last().map_or(0.0, |e| e.max_constant),
    };
    let dyadic = dyadic_average_bound(2, params.ell, None, None, x_max)?;
    let report = ExperimentReport {
        parameters: params.clone(),
        fitted_constants,
        per_scale,
        bad_sets,
        bound_scans,
        dyadic,
    };
    Ok((report, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::kronecker;
    use crate::quadratic::enumerate_quadratic;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn profiles_match_kronecker() {
        let census = enumerate_quadratic(100, DiscSign::Both).unwrap();
        let fam = Family::Quadratic(&census);
        let at = |d: i64, y: u64| {
            split_profile(fam, 100, y)
                .into_iter()
                .find(|p| p.disc == d)
                .unwrap()
                .n
        };
        assert_eq!(at(-4, 10), 1);
        assert_eq!(at(-4, 1), 0);
        let direct = (2..=30u64)
            .filter(|&p| primes_up_to(30).iter().any(|q| q == p) && kronecker(5, p) == 1)
            .count();
        assert_eq!(at(5, 30) as usize, direct);
        for p in split_profile(fam, 100, 50) {
            assert!(p.n as usize <= 15);
        }
    }

    #[test]
    fn bad_set_edges() {
        let census = enumerate_quadratic(1000, DiscSign::Both).unwrap();
        let profiles = split_profile(Family::Quadratic(&census), 1000, 20);
        let all = bad_set(2, 1000, 20.0, 8.0, &profiles);
        assert_eq!(all.count, census.len() as u64);
        assert_eq!(bad_set(2, 1000, 20.0, -1.0, &profiles).count, 0);
    }

    #[test]
    fn split_prime_bound_constraints() {
        let b = split_prime_bound(10_000, 2, 3, &r(1, 10), 0.0, 1, 1.0).unwrap();
        assert!((b.bound - 100.0).abs() < 1e-9);
        assert_eq!(split_prime_delta_limit(2, 4).unwrap(), r(1, 8));
        assert_eq!(split_prime_delta_limit(5, 25).unwrap(), r(1, 200));
        assert!(split_prime_bound(100, 2, 4, &r(1, 8), 0.05, 1, 1.0).is_err());
        assert!(matches!(
            split_prime_bound(100, 2, 3, &r(1, 10), 0.05, 0, 1.0),
            Err(Error::UndefinedBound(_))
        ));
    }

    #[test]
    fn small_torsion_sums() {
        let census = enumerate_quadratic(23, DiscSign::Negative).unwrap();
        assert_eq!(
            average_torsion(&census, 3, 4, DiscSign::Negative)
                .unwrap()
                .sum,
            2
        );
        let brute = |x: u64| -> u64 {
            census
                .up_to(x)
                .iter()
                .map(|&d| torsion_count(&class_group(d).unwrap(), 3).unwrap().count)
                .sum()
        };
        let s22 = average_torsion(&census, 3, 22, DiscSign::Negative)
            .unwrap()
            .sum;
        let s23 = average_torsion(&census, 3, 23, DiscSign::Negative)
            .unwrap()
            .sum;
        assert_eq!(s22, brute(22));
        assert_eq!(s23, s22 + 3);
        assert!(average_torsion(&census, 4, 23, DiscSign::Positive).is_err());
    }

    #[test]
    fn real_and_imaginary_rows_agree_with_class_groups() {
        let census = enumerate_quadratic(400, DiscSign::Both).unwrap();
        let rows = torsion_rows(&census, 3, 400, DiscSign::Both).unwrap();
        assert_eq!(rows.len(), census.len());
        for row in rows {
            let g = class_group(row.d).unwrap();
            assert_eq!(row.h, g.h);
            assert!(row.torsion <= row.h);
            assert_eq!(row.torsion, torsion_count(&g, 3).unwrap().count);
        }
    }

    #[test]
    fn exponent_table() {
        let e = |d, ell| dyadic_average_bound(d, ell, None, None, 1 << 20).unwrap();
        assert_eq!(e(2, 4).average_exponent, r(3, 2) - r(1, 8));
        assert_eq!(e(2, 4).sieve_exponent, r(3, 2) - r(1, 8));
        assert_eq!(e(4, 7).average_exponent, r(3, 2) - r(1, 48));
        assert_eq!(e(5, 24).average_exponent, r(3, 2) - r(1, 200));
        assert_eq!(e(5, 25).average_exponent, r(3, 2) - r(1, 200));
        assert_eq!(e(2, 2).route, Route::GenusTheory);
        assert_eq!(e(3, 3).route, Route::KnownAverage);
        assert_eq!(e(3, 4).route, Route::Sieve);
        let rep = dyadic_average_bound(2, 4, Some(r(1, 9)), Some(r(1, 6)), 1000).unwrap();
        assert_eq!(rep.sieve_exponent, r(3, 2) - r(1, 9));
        assert_eq!(rep.ranges.len(), 10);
        assert!(dyadic_average_bound(2, 4, Some(r(1, 7)), None, 1000).is_err());
    }

    #[test]
    fn level_thresholds_are_exact() {
        let t = level_thresholds(&[2, 3, 5], &r(3, 25), 1_000_000).unwrap();
        // n^{3/25} ≥ p  iff  n^3 ≥ p^25
        for (&p, &n) in [2u64, 3, 5].iter().zip(&t) {
            let big = |v: u64, e: u32| num_bigint::BigInt::from(v).pow(e);
            assert!(big(n, 3) >= big(p, 25));
            assert!(big(n - 1, 3) < big(p, 25));
        }
    }
}
