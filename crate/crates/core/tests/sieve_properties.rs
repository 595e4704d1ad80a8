use class_sieve::arith::Rational;
use class_sieve::sieve::{
    certify_with_stats, compute_stats, exceptional_set, lemma_rhs, mean_identity,
    variance_identity, SieveInstance,
};
use proptest::prelude::*;

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// (item count, z, per-prime density numerators over 20, membership rows)
fn instance() -> impl Strategy<Value = (usize, u64, Vec<i64>, Vec<Vec<bool>>)> {
    (1usize..200, 0usize..PRIMES.len()).prop_flat_map(|(n, k)| {
        let z = PRIMES[k];
        (
            Just(n),
            Just(z),
            prop::collection::vec(0i64..20, k + 1),
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), k + 1),
        )
    })
}

fn build(n: usize, z: u64, dens: &[i64], rows: &[Vec<bool>]) -> SieveInstance {
    let idx = |p: u64| PRIMES.iter().position(|&q| q == p).unwrap();
    SieveInstance::new(
        n,
        z,
        |p| Rational::new(dens[idx(p)], 20),
        |i, p| rows[idx(p)][i],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_match_naive_recount((n, z, dens, rows) in instance()) {
        let stats = compute_stats(&build(n, z, &dens, &rows)).unwrap();
        for (i, ri) in rows.iter().enumerate() {
            prop_assert_eq!(stats.counts[i], ri.iter().filter(|&&b| b).count() as u64);
            for (j, rj) in rows.iter().enumerate() {
                let both = ri.iter().zip(rj).filter(|(a, b)| **a && **b).count() as u64;
                prop_assert_eq!(stats.pair_counts[i][j], both);
            }
        }
        let total: usize = rows.iter().map(|r| r.iter().filter(|&&b| b).count()).sum();
        prop_assert_eq!(stats.m.clone(), Rational::new(total as i64, n as i64));
    }

    #[test]
    fn identities_are_exact((n, z, dens, rows) in instance()) {
        let stats = compute_stats(&build(n, z, &dens, &rows)).unwrap();
        prop_assert!(mean_identity(&stats).holds);
        prop_assert!(variance_identity(&stats).holds);
    }

    #[test]
    fn second_moment_bound_holds((n, z, dens, rows) in instance()) {
        let inst = build(n, z, &dens, &rows);
        let stats = compute_stats(&inst).unwrap();
        if stats.m.is_zero() {
            prop_assert!(lemma_rhs(&stats).is_err());
        } else {
            let cert = certify_with_stats(&inst, &stats).unwrap();
            prop_assert!(cert.holds, "E = {} RHS = {}", cert.e, cert.rhs);
        }
    }

    #[test]
    fn exceptional_set_is_monotone((n, z, dens, rows) in instance(), a in -4i64..40, b in -4i64..40) {
        let inst = build(n, z, &dens, &rows);
        let (lo, hi) = (a.min(b), a.max(b));
        let e_lo = exceptional_set(&inst, &Rational::new(lo, 4));
        let e_hi = exceptional_set(&inst, &Rational::new(hi, 4));
        prop_assert!(e_lo.e <= e_hi.e);
        prop_assert!(e_lo.members.iter().all(|m| e_hi.members.contains(m)));
        let pi = inst.primes().len() as i64;
        prop_assert_eq!(exceptional_set(&inst, &Rational::integer(pi)).e, n as u64);
        prop_assert_eq!(exceptional_set(&inst, &Rational::new(-1, 3)).e, 0);
    }
}
