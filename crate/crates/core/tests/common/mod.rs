#![allow(dead_code)]

pub mod hunter;

use class_sieve::cubic::{enumerate_cubic, CubicForm};
use class_sieve::quadratic::DiscSign;
use hunter::{cubic_fields, small_primes, Monic};

/// Roots of F in P¹(F_p).
fn projective_roots(f: &CubicForm, p: i64) -> usize {
    let at_infinity = (f.a.rem_euclid(p) == 0) as usize;
    at_infinity
        + (0..p)
            .filter(|&x| f.eval(x, 1).rem_euclid(p as i128) == 0)
            .count()
}

fn matches(f: &CubicForm, g: &Monic, primes: &[i64]) -> bool {
    let dg = g.disc();
    primes
        .iter()
        .filter(|&&p| (f.disc as i128) % p as i128 != 0 && dg % p as i128 != 0)
        .all(|&p| projective_roots(f, p) == g.roots_mod(p))
}

/// Compares the census up to x with the Hunter search, field by field.
/// Returns the number of fields on success.
pub fn census_agrees_with_oracle(x: u64) -> Result<usize, String> {
    let oracle = cubic_fields(x);
    let census = enumerate_cubic(x, DiscSign::Both).map_err(|e| e.to_string())?;
    let oracle_discs: Vec<i64> = oracle.iter().map(|f| f.disc).collect();
    let census_discs: Vec<i64> = census.fields.iter().map(|f| f.disc).collect();
    if census_discs != oracle_discs {
        return Err(format!(
            "discriminant lists differ: census {census_discs:?}, oracle {oracle_discs:?}"
        ));
    }
    let primes = small_primes(400);
    let mut used = vec![false; oracle.len()];
    for f in &census.fields {
        let hit = oracle
            .iter()
            .enumerate()
            .position(|(i, g)| !used[i] && g.disc == f.disc && matches(f, &g.poly, &primes))
            .ok_or_else(|| format!("no oracle field matches {f}"))?;
        used[hit] = true;
    }
    Ok(census.len())
}
