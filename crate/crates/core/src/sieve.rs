//! Exact Chebyshev sieve over a finite family with prime-indexed subsets.
//!
//! Items are indices 0..N. For each prime p ≤ z the engine stores the subset
//! A_p as a bitset, so every pairwise count #(A_p ∩ A_q) is a popcount over
//! N/64 words. All derived statistics are exact rationals; the identities
//! below are checked with `==`, never with a tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{floor_power, primes_up_to, Rational};
use crate::cubic::{splitting_type_cubic, CubicCensus};
use crate::densities::{delta, u_constants, u_of_z, SplittingType};
use crate::quadratic::{splitting_type_quadratic, FundamentalDiscriminant, QuadraticCensus};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn from_fn(n: usize, f: impl Fn(usize) -> bool + Sync) -> Self {
        let words = (0..n.div_ceil(64))
            .into_par_iter()
            .map(|w| {
                let lo = w * 64;
                let hi = (lo + 64).min(n);
                (lo..hi).fold(0u64, |acc, i| if f(i) { acc | 1 << (i - lo) } else { acc })
            })
            .collect();
        BitSet { words }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn count_and(&self, other: &BitSet) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
}

/// A finite family of N items with one subset A_p per prime p ≤ z and a
/// density δ_p ∈ [0, 1) attached to each subset.
#[derive(Clone, Debug)]
pub struct SieveInstance {
    n: usize,
    z: u64,
    primes: Vec<u64>,
    densities: Vec<Rational>,
    sets: Vec<BitSet>,
}

impl SieveInstance {
    /// Evaluates `membership(item, p)` once for every item and every prime
    /// p ≤ z. The oracle must be deterministic.
    pub fn new(
        n: usize,
        z: u64,
        density: impl Fn(u64) -> Rational,
        membership: impl Fn(usize, u64) -> bool + Sync,
    ) -> Result<Self> {
        if z < 2 {
            return Err(Error::Invalid(format!(
                "sieve level z = {z} must be at least 2"
            )));
        }
        let primes: Vec<u64> = primes_up_to(z).iter().collect();
        let densities: Vec<Rational> = primes.iter().map(|&p| density(p)).collect();
        for (p, d) in primes.iter().zip(&densities) {
            if d.is_negative() || *d >= Rational::one() {
                return Err(Error::Invalid(format!(
                    "density {d} at p = {p} is outside [0, 1)"
                )));
            }
        }
        let sets = primes
            .iter()
            .map(|&p| BitSet::from_fn(n, |i| membership(i, p)))
            .collect();
        Ok(SieveInstance {
            n,
            z,
            primes,
            densities,
            sets,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    pub fn contains(&self, item: usize, prime_index: usize) -> bool {
        self.sets[prime_index].get(item)
    }

    /// N(a): the number of primes p ≤ z with a ∈ A_p.
    pub fn hits(&self, item: usize) -> u32 {
        self.sets.iter().filter(|s| s.get(item)).count() as u32
    }

    /// hist[k] = #{a : N(a) = k} for k = 0..=π(z).
    pub fn hit_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.primes.len() + 1];
        for i in 0..self.n {
            hist[self.hits(i) as usize] += 1;
        }
        hist
    }
}

/// Exact first and second moment data of a [`SieveInstance`].
#[derive(Clone, Debug, Serialize)]
pub struct SieveStats {
    pub n: u64,
    pub z: u64,
    pub primes: Vec<u64>,
    pub densities: Vec<Rational>,
    /// #A_p
    pub counts: Vec<u64>,
    /// #(A_p ∩ A_q), symmetric, with #A_p on the diagonal
    pub pair_counts: Vec<Vec<u64>>,
    /// R_p = #A_p − δ_p N
    pub r_p: Vec<Rational>,
    /// R_pq = #A_pq − δ_p δ_q N off the diagonal, R_pp = R_p
    pub r_pq: Vec<Vec<Rational>>,
    pub u: Rational,
    /// M(z) = (1/N) Σ_a N(a)
    pub m: Rational,
    /// (1/N) Σ_a (N(a) − M)²
    pub variance: Rational,
}

impl SieveStats {
    fn n_rational(&self) -> Rational {
        Rational::from(self.n)
    }

    /// (1/N) Σ_p R_p
    pub fn mean_remainder(&self) -> Rational {
        self.r_p.iter().sum::<Rational>() / self.n_rational()
    }

    /// M as recomputed from U and the remainders; equals `m` exactly.
    pub fn mean_from_remainders(&self) -> Rational {
        &self.u + self.mean_remainder()
    }

    pub fn mean_identity_holds(&self) -> bool {
        self.m == self.mean_from_remainders()
    }
}

pub fn compute_stats(inst: &SieveInstance) -> Result<SieveStats> {
    if inst.n == 0 {
        return Err(Error::EmptyFamily);
    }
    let k = inst.primes.len();
    let n = inst.n as u64;
    let nr = Rational::from(n);
    let counts: Vec<u64> = inst.sets.iter().map(BitSet::count).collect();
    let pair_counts: Vec<Vec<u64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        counts[i]
                    } else {
                        inst.sets[i].count_and(&inst.sets[j])
                    }
                })
                .collect()
        })
        .collect();
    let r_p: Vec<Rational> = counts
        .iter()
        .zip(&inst.densities)
        .map(|(&c, d)| Rational::from(c) - d * &nr)
        .collect();
    let r_pq: Vec<Vec<Rational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        r_p[i].clone()
                    } else {
                        Rational::from(pair_counts[i][j])
                            - &inst.densities[i] * &inst.densities[j] * &nr
                    }
                })
                .collect()
        })
        .collect();
    let u: Rational = inst.densities.iter().sum();
    let m = Rational::from(counts.iter().sum::<u64>()) / &nr;
    let hist = inst.hit_histogram();
    let variance = hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(hits, &c)| {
            let dev = Rational::from(hits) - &m;
            Rational::from(c) * &dev * &dev
        })
        .sum::<Rational>()
        / &nr;
    Ok(SieveStats {
        n,
        z: inst.z,
        primes: inst.primes.clone(),
        densities: inst.densities.clone(),
        counts,
        pair_counts,
        r_p,
        r_pq,
        u,
        m,
        variance,
    })
}

/// Items lying in at most `threshold` of the sets A_p.
#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalSet {
    pub threshold: Rational,
    pub members: Vec<usize>,
    pub e: u64,
}

pub fn exceptional_set(inst: &SieveInstance, threshold: &Rational) -> ExceptionalSet {
    // N(a) ≤ t iff N(a) ≤ ⌊t⌋ for integer N(a)
    let floor = threshold.floor();
    let members: Vec<usize> = if floor < num_bigint::BigInt::from(0) {
        Vec::new()
    } else {
        (0..inst.n)
            .filter(|&i| num_bigint::BigInt::from(inst.hits(i)) <= floor)
            .collect()
    };
    ExceptionalSet {
        threshold: threshold.clone(),
        e: members.len() as u64,
        members,
    }
}

/// (4N/M²)(U + (1/N)Σ_{p,q}|R_pq| + (2U/N)Σ_p|R_p| + ((1/N)Σ_p|R_p|)²), the
/// pair sum running over ordered pairs including p = q.
pub fn lemma_rhs(stats: &SieveStats) -> Result<Rational> {
    if stats.m.is_zero() {
        return Err(Error::UndefinedBound("the mean M(z) is zero".into()));
    }
    let nr = stats.n_rational();
    let abs_rp: Rational = stats.r_p.iter().map(Rational::abs).sum();
    let abs_rpq: Rational = stats.r_pq.iter().flatten().map(Rational::abs).sum();
    let s = &abs_rp / &nr;
    let inner = &stats.u + &abs_rpq / &nr + Rational::integer(2) * &stats.u * &s + &s * &s;
    Ok(Rational::integer(4) * &nr / (&stats.m * &stats.m) * inner)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeRow {
    pub p: u64,
    pub count: u64,
    #[serde(rename = "R_p")]
    pub r_p: Rational,
}

/// E(A; z, M/2) against the right-hand side of the second moment bound.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCertificate {
    #[serde(rename = "N")]
    pub n: u64,
    pub z: u64,
    pub primes: Vec<u64>,
    #[serde(rename = "U")]
    pub u: Rational,
    #[serde(rename = "M")]
    pub m: Rational,
    #[serde(rename = "E")]
    pub e: u64,
    #[serde(rename = "RHS")]
    pub rhs: Rational,
    pub holds: bool,
    pub per_prime: Vec<PrimeRow>,
}

pub fn certify_lemma(inst: &SieveInstance) -> Result<LemmaCertificate> {
    let stats = compute_stats(inst)?;
    certify_with_stats(inst, &stats)
}

pub fn certify_with_stats(inst: &SieveInstance, stats: &SieveStats) -> Result<LemmaCertificate> {
    let rhs = lemma_rhs(stats)?;
    let e = exceptional_set(inst, &(&stats.m / Rational::integer(2))).e;
    let holds = Rational::from(e) <= rhs;
    debug_assert!(holds, "second moment bound violated: E = {e}, RHS = {rhs}");
    Ok(LemmaCertificate {
        n: stats.n,
        z: stats.z,
        primes: stats.primes.clone(),
        u: stats.u.clone(),
        m: stats.m.clone(),
        e,
        rhs,
        holds,
        per_prime: stats
            .primes
            .iter()
            .zip(&stats.counts)
            .zip(&stats.r_p)
            .map(|((&p, &count), r)| PrimeRow {
                p,
                count,
                r_p: r.clone(),
            })
            .collect(),
    })
}

/// Both sides of the signed variance expansion.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

/// (1/N)Σ(N(a) − M)² against
/// Σδ_p(1 − δ_p) + (1/N)Σ_{p,q}R_pq − 2U·(1/N)ΣR_p − ((1/N)ΣR_p)².
pub fn variance_identity(stats: &SieveStats) -> IdentityReport {
    let nr = stats.n_rational();
    let s = stats.mean_remainder();
    let spread: Rational = stats
        .densities
        .iter()
        .map(|d| d * (Rational::one() - d))
        .sum();
    let pairs: Rational = stats.r_pq.iter().flatten().sum();
    let rhs = spread + pairs / &nr - Rational::integer(2) * &stats.u * &s - &s * &s;
    IdentityReport {
        holds: stats.variance == rhs,
        lhs: stats.variance.clone(),
        rhs,
    }
}

pub fn variance_identity_check(inst: &SieveInstance) -> Result<IdentityReport> {
    Ok(variance_identity(&compute_stats(inst)?))
}

/// M against U + (1/N)ΣR_p.
pub fn mean_identity(stats: &SieveStats) -> IdentityReport {
    let rhs = stats.mean_from_remainders();
    IdentityReport {
        holds: stats.m == rhs,
        lhs: stats.m.clone(),
        rhs,
    }
}

/// Constant in Dusart's bound π(x) ≤ (x/log x)(1 + 1.2762/log x), x > 1.
const DUSART: f64 = 1.2762;

#[derive(Clone, Debug, Serialize)]
pub struct UBoundsReport {
    pub d: u32,
    pub z: u64,
    pub u: Rational,
    /// U(z) / (z / log z)
    pub ratio: f64,
    pub lower: Rational,
    pub upper: Rational,
    /// allowance above `upper` covering π(z) > z/log z
    pub slack: f64,
    /// C in U/(z/log z) − upper = C/log z; negative when U sits below the
    /// leading upper constant
    pub fitted_slack: f64,
    pub within: bool,
}

/// U(z) for the totally split densities of degree d, placed between the
/// leading constants. Every δ_p lies between its value at p = 2 and 1/d!, so
/// lower·π(z) ≤ U ≤ upper·π(z); the window uses π(z) ≥ z/log z (z ≥ 17)
/// and Dusart's upper bound for π.
pub fn u_bounds_check(d: u32, z: u64) -> Result<UBoundsReport> {
    let (lower, upper) = u_constants(d)?;
    let primes: Vec<u64> = primes_up_to(z).iter().collect();
    let u = u_of_z(d, &primes)?;
    let log_z = (z as f64).ln();
    let scale = z as f64 / log_z;
    let ratio = u.to_f64() / scale;
    let slack = upper.to_f64() * DUSART / log_z;
    let within = ratio >= lower.to_f64() - if z < 17 { slack } else { 0.0 }
        && ratio <= upper.to_f64() + slack;
    Ok(UBoundsReport {
        d,
        z,
        fitted_slack: (ratio - upper.to_f64()) * log_z,
        u,
        ratio,
        lower,
        upper,
        slack,
        within,
    })
}

/// ⌊(X/2)^δ⌋, the sieve level for a family of discriminants up to X.
pub fn sieve_level(x: u64, delta: &Rational) -> Result<u64> {
    floor_power(&Rational::new(x as i64, 2), delta)
}

/// A census viewed as a sieve family: A_p is the set of fields in which p
/// splits completely.
#[derive(Clone, Copy, Debug)]
pub enum Family<'a> {
    Quadratic(&'a QuadraticCensus),
    Cubic(&'a CubicCensus),
}

impl Family<'_> {
    pub fn degree(&self) -> u32 {
        match self {
            Family::Quadratic(_) => 2,
            Family::Cubic(_) => 3,
        }
    }

    /// Number of fields with |D| ≤ x.
    pub fn size(&self, x: u64) -> usize {
        match self {
            Family::Quadratic(c) => c.up_to(x).len(),
            Family::Cubic(c) => c.up_to(x).len(),
        }
    }

    pub fn max_x(&self) -> u64 {
        match self {
            Family::Quadratic(c) => c.x,
            Family::Cubic(c) => c.x,
        }
    }

    /// Whether p splits completely in the field at position `i` of the
    /// census order.
    pub fn totally_split(&self, i: usize, p: u64) -> bool {
        match self {
            Family::Quadratic(c) => {
                let d = FundamentalDiscriminant::new(c.discriminants[i])
                    .expect("census holds fundamental D");
                splitting_type_quadratic(d, p).is_totally_split()
            }
            Family::Cubic(c) => splitting_type_cubic(&c.fields[i], p).is_totally_split(),
        }
    }
}

/// The fields of `family` with |D| ≤ x as a sieve instance at level z.
pub fn family_instance(family: Family<'_>, x: u64, z: u64) -> Result<SieveInstance> {
    if x > family.max_x() {
        return Err(Error::Invalid(format!(
            "census only reaches {}, asked for {x}",
            family.max_x()
        )));
    }
    let d = family.degree();
    let split = SplittingType::totally_split(d);
    let n = family.size(x);
    SieveInstance::new(
        n,
        z,
        |p| delta(d, split, p).expect("valid degree"),
        |i, p| family.totally_split(i, p),
    )
}

/// A reproducible random family over primes p ≤ `zmax`. Each prime draws a
/// planted density k/20 and one of three membership patterns: independent
/// coin flips, a noisy copy of the previous prime's set (so pairs correlate),
/// or a residue class mod p. Half the instances declare the planted density,
/// the other half the empirical one.
pub fn synthetic_instance(items: usize, zmax: u64, seed: u64) -> Result<SieveInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes: Vec<u64> = primes_up_to(zmax).iter().collect();
    let empirical = rng.gen_bool(0.5);
    let mut sets: Vec<Vec<bool>> = Vec::with_capacity(primes.len());
    let mut dens = Vec::with_capacity(primes.len());
    for (k, &p) in primes.iter().enumerate() {
        let planted = Rational::new(rng.gen_range(0..20), 20);
        let q = planted.to_f64();
        let set: Vec<bool> = match rng.gen_range(0..3) {
            0 => (0..items).map(|_| rng.gen_bool(q)).collect(),
            1 if k > 0 => {
                let prev = &sets[k - 1];
                (0..items)
                    .map(|i| {
                        if rng.gen_bool(0.7) {
                            prev[i]
                        } else {
                            rng.gen_bool(q)
                        }
                    })
                    .collect()
            }
            _ => {
                let r = rng.gen_range(0..p) as usize;
                (0..items).map(|i| i % p as usize == r).collect()
            }
        };
        let count = set.iter().filter(|&&b| b).count();
        let declared = if empirical && count < items {
            Rational::new(count as i64, items as i64)
        } else {
            planted
        };
        sets.push(set);
        dens.push(declared);
    }
    let by_prime = |p: u64| primes.binary_search(&p).expect("prime below zmax");
    SieveInstance::new(
        items,
        zmax,
        |p| dens[by_prime(p)].clone(),
        |i, p| sets[by_prime(p)][i],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn divisibility(z: u64) -> SieveInstance {
        SieveInstance::new(
            100,
            z,
            |p| r(1, p as i64),
            |i, p| (i as u64 + 1).is_multiple_of(p),
        )
        .unwrap()
    }

    #[test]
    fn divisibility_family_z2() {
        let stats = compute_stats(&divisibility(2)).unwrap();
        assert_eq!(stats.counts, vec![50]);
        assert_eq!(stats.r_p, vec![r(0, 1)]);
        assert_eq!(stats.m, r(1, 2));
    }

    #[test]
    fn divisibility_family_z3() {
        let inst = divisibility(3);
        let stats = compute_stats(&inst).unwrap();
        let multiples = |k: u64| (1..=100u64).filter(|n| n % k == 0).count() as u64;
        assert_eq!(stats.counts, vec![multiples(2), multiples(3)]);
        assert_eq!(stats.pair_counts[0][1], multiples(6));
        assert_eq!(stats.m, r(83, 100));
        assert!(stats.mean_identity_holds());

        let ex = exceptional_set(&inst, &r(83, 200));
        let coprime: Vec<usize> = (1..=100u64)
            .filter(|n| n % 2 != 0 && n % 3 != 0)
            .map(|n| n as usize - 1)
            .collect();
        assert_eq!(ex.e, 33);
        assert_eq!(ex.members, coprime);

        // direct LHS: (1/N) Σ (N(a) − M)²
        let m = r(83, 100);
        let direct: Rational = (1..=100u64)
            .map(|n| {
                let k = (n % 2 == 0) as i64 + (n % 3 == 0) as i64;
                let dev = Rational::integer(k) - &m;
                &dev * &dev
            })
            .sum::<Rational>()
            / Rational::integer(100);
        let report = variance_identity(&stats);
        assert_eq!(report.lhs, direct);
        assert!(report.holds);

        let cert = certify_lemma(&inst).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.rhs, lemma_rhs(&stats).unwrap());
    }

    #[test]
    fn exceptional_thresholds() {
        let inst = divisibility(7);
        assert_eq!(exceptional_set(&inst, &r(4, 1)).e, 100);
        assert_eq!(exceptional_set(&inst, &r(-1, 2)).e, 0);
        assert_eq!(
            exceptional_set(&inst, &r(0, 1)).e,
            exceptional_set(&inst, &r(99, 100)).e
        );
    }

    #[test]
    fn empty_sets_give_zero_mean() {
        let inst = SieveInstance::new(10, 10, |_| r(0, 1), |_, _| false).unwrap();
        let stats = compute_stats(&inst).unwrap();
        assert_eq!(stats.u, r(0, 1));
        assert_eq!(stats.m, r(0, 1));
        assert!(matches!(lemma_rhs(&stats), Err(Error::UndefinedBound(_))));
        assert!(matches!(
            certify_lemma(&inst),
            Err(Error::UndefinedBound(_))
        ));
    }

    #[test]
    fn empty_family_is_rejected() {
        let inst = SieveInstance::new(0, 5, |_| r(1, 2), |_, _| true).unwrap();
        assert!(matches!(compute_stats(&inst), Err(Error::EmptyFamily)));
    }

    #[test]
    fn invalid_inputs() {
        assert!(SieveInstance::new(5, 1, |_| r(1, 2), |_, _| true).is_err());
        assert!(SieveInstance::new(5, 5, |_| r(1, 1), |_, _| true).is_err());
        assert!(SieveInstance::new(5, 5, |_| r(-1, 3), |_, _| true).is_err());
    }

    #[test]
    fn zero_remainders_reduce_rhs() {
        // items 0..4 over {2}: half of them in A_2 with δ = 1/2
        let inst = SieveInstance::new(4, 2, |_| r(1, 2), |i, _| i % 2 == 0).unwrap();
        let stats = compute_stats(&inst).unwrap();
        assert_eq!(stats.r_p, vec![r(0, 1)]);
        assert_eq!(lemma_rhs(&stats).unwrap(), Rational::integer(8 * 4));
        assert_eq!(
            lemma_rhs(&stats).unwrap(),
            Rational::integer(4 * 4) / &stats.u
        );
    }

    #[test]
    fn constant_family_identity() {
        let n = 37;
        let inst = SieveInstance::new(n, 13, |_| r(n as i64 - 1, n as i64), |_, _| true).unwrap();
        let stats = compute_stats(&inst).unwrap();
        assert_eq!(stats.variance, r(0, 1));
        assert!(variance_identity(&stats).holds);
        assert!(mean_identity(&stats).holds);
    }

    #[test]
    fn u_bounds() {
        let rep = u_bounds_check(2, 10).unwrap();
        assert_eq!(rep.u, r(25, 16));
        for d in 2..=5 {
            let rep = u_bounds_check(d, 10_000).unwrap();
            assert!(rep.within, "{rep:?}");
            assert!(rep.ratio > rep.lower.to_f64());
        }
    }

    #[test]
    fn synthetic_instances_are_reproducible_and_certified() {
        for seed in 0..50 {
            let a = synthetic_instance(300, 30, seed).unwrap();
            let b = synthetic_instance(300, 30, seed).unwrap();
            assert_eq!(a.sets, b.sets);
            assert_eq!(a.densities, b.densities);
            let stats = compute_stats(&a).unwrap();
            assert!(mean_identity(&stats).holds);
            assert!(variance_identity(&stats).holds);
            if !stats.m.is_zero() {
                assert!(certify_with_stats(&a, &stats).unwrap().holds);
            }
        }
    }

    #[test]
    fn levels() {
        assert_eq!(sieve_level(100_000, &r(1, 6)).unwrap(), 6);
        assert_eq!(sieve_level(100_000, &r(2, 25)).unwrap(), 2);
        assert_eq!(sieve_level(1_000_000, &r(1, 6)).unwrap(), 8);
    }
}
