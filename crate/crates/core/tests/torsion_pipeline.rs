use class_sieve::arith::{kronecker, primes_up_to, Rational};
use class_sieve::classgroup::{imaginary_torsion_table, TorsionRow};
use class_sieve::cubic::enumerate_cubic;
use class_sieve::quadratic::{enumerate_quadratic, DiscSign};
use class_sieve::sieve::{certify_lemma, synthetic_instance, Family};
use class_sieve::torsion::{
    average_torsion, bound_constant_scan, run_experiment, split_profile, torsion_rows,
    ExperimentParams,
};
use serde_json::Value;

/// Largest y with y^25 ≤ n^3, i.e. ⌊n^{3/25}⌋.
fn level_3_25(n: u64) -> u64 {
    let n3 = (n as u128).pow(3);
    let mut y = 1u64;
    while ((y + 1) as u128).pow(25) <= n3 {
        y += 1;
    }
    y
}

fn naive_max_constant(rows: &[TorsionRow], x: u64, eps: f64) -> f64 {
    rows.iter()
        .filter(|r| r.d.unsigned_abs() <= x)
        .map(|r| {
            let n = r.d.unsigned_abs();
            let m = (2..=level_3_25(n))
                .filter(|&p| (2..p).all(|q| p % q != 0) && kronecker(r.d, p) == 1)
                .count();
            r.torsion as f64 * m as f64 / (n as f64).powf(0.5 + eps)
        })
        .fold(0.0, f64::max)
}

#[test]
fn bound_scan_is_stable_across_scales() {
    let delta = Rational::new(3, 25);
    let rows = imaginary_torsion_table(1_000_000, 3).unwrap();
    let small = bound_constant_scan(&rows, 10_000, 3, &delta, 0.05).unwrap();
    let large = bound_constant_scan(&rows, 1_000_000, 3, &delta, 0.05).unwrap();
    assert!(large.max_constant.is_finite() && large.max_constant > 0.0);
    assert!(
        large.p99 <= 1.1 * small.p99,
        "p99 {} at 1e6 vs {} at 1e4",
        large.p99,
        small.p99
    );
    assert_eq!(
        small.fields + small.excluded,
        rows.iter().filter(|r| r.d.unsigned_abs() <= 10_000).count() as u64
    );
    let naive = naive_max_constant(&rows, 10_000, 0.05);
    assert!(
        (small.max_constant - naive).abs() <= 1e-12 * naive,
        "{} vs {naive}",
        small.max_constant
    );
}

#[test]
fn torsion_never_exceeds_class_number() {
    let census = enumerate_quadratic(20_000, DiscSign::Both).unwrap();
    for ell in [3, 5, 7] {
        for sign in [DiscSign::Negative, DiscSign::Positive] {
            for r in torsion_rows(&census, ell, 20_000, sign).unwrap() {
                assert!(r.torsion >= 1 && r.torsion <= r.h, "{r:?}");
                assert_eq!(r.h % r.torsion, 0, "{r:?}");
            }
        }
    }
}

#[test]
fn small_three_torsion_sums() {
    let census = enumerate_quadratic(100, DiscSign::Negative).unwrap();
    assert_eq!(
        average_torsion(&census, 3, 4, DiscSign::Negative)
            .unwrap()
            .sum,
        2
    );
    let before = average_torsion(&census, 3, 22, DiscSign::Negative)
        .unwrap()
        .sum;
    assert_eq!(
        average_torsion(&census, 3, 23, DiscSign::Negative)
            .unwrap()
            .sum,
        before + 3
    );
}

#[test]
fn split_profiles_stay_below_prime_count() {
    let y = 60;
    let pi = primes_up_to(y).len() as u32;
    let quad = enumerate_quadratic(50_000, DiscSign::Both).unwrap();
    for prof in split_profile(Family::Quadratic(&quad), 50_000, y) {
        let naive = primes_up_to(y)
            .iter()
            .filter(|&p| kronecker(prof.disc, p) == 1)
            .count() as u32;
        assert_eq!(prof.n, naive);
        assert!(prof.n <= pi);
    }
    let cubic = enumerate_cubic(50_000, DiscSign::Both).unwrap();
    let profiles = split_profile(Family::Cubic(&cubic), 50_000, y);
    assert_eq!(profiles.len(), cubic.len());
    assert!(profiles.iter().all(|p| p.n <= pi));
}

#[test]
fn certificate_json_shape() {
    let cert = certify_lemma(&synthetic_instance(200, 20, 7).unwrap()).unwrap();
    let v: Value = serde_json::to_value(&cert).unwrap();
    for key in [
        "N",
        "z",
        "primes",
        "U",
        "M",
        "E",
        "RHS",
        "holds",
        "per_prime",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let row = &v["per_prime"][0];
    for key in ["p", "count", "R_p"] {
        assert!(row.get(key).is_some(), "missing per_prime.{key}");
    }
    assert_eq!(v["holds"], Value::Bool(true));
}

#[test]
fn experiment_report_json_shape() {
    let census = enumerate_quadratic(20_000, DiscSign::Both).unwrap();
    let params = ExperimentParams {
        scales: vec![2_000, 20_000],
        ell: 3,
        sign: DiscSign::Negative,
        scan_delta: Rational::new(3, 25),
        epsilon: 0.05,
    };
    let (report, rows) = run_experiment(&census, &params).unwrap();
    assert_eq!(
        rows.len() as u64,
        census.count_with(20_000, DiscSign::Negative, &[])
    );
    let v: Value = serde_json::to_value(&report).unwrap();
    for key in ["parameters", "fitted_constants", "per_scale"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let scales = v["per_scale"].as_array().unwrap();
    assert_eq!(scales.len(), 2);
    for key in ["X", "sum_torsion", "ratio_to_prediction", "bad_fraction"] {
        assert!(scales[0].get(key).is_some(), "missing per_scale.{key}");
    }
}
