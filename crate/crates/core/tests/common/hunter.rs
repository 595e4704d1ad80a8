//! Independent cubic field list for small |D| via Hunter's theorem.
//!
//! Every cubic field K has θ ∈ O_K \ Z with Tr θ ∈ {0, 1} and
//! T2(θ) = Σ|θ_i|² ≤ (Tr θ)²/3 + (2/3)·√|D_K|. We list the monic cubics
//! x³ + a x² + b x + c with a ∈ {−1, 0, 1} obeying the T2 bound for
//! |D_K| ≤ X, compute D_K by enlarging Z[θ] one prime at a time, and group
//! the polynomials by field using root counts modulo primes.

use std::collections::BTreeMap;

/// A monic cubic x³ + a x² + b x + c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monic {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Monic {
    pub fn disc(&self) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c
    }

    fn eval_f64(&self, x: f64) -> f64 {
        ((x + self.a as f64) * x + self.b as f64) * x + self.c as f64
    }

    fn is_irreducible(&self) -> bool {
        // a monic integer cubic is reducible iff it has an integer root r | c
        let c = self.c.unsigned_abs();
        if c == 0 {
            return false;
        }
        (1..=c).filter(|r| c.is_multiple_of(*r)).all(|r| {
            let r = r as i128;
            [r, -r].iter().all(|&x| {
                x * x * x + self.a as i128 * x * x + self.b as i128 * x + self.c as i128 != 0
            })
        })
    }

    /// Σ|θ_i|² over the complex roots.
    fn t2(&self) -> f64 {
        let (a, b, c) = (self.a as f64, self.b as f64, self.c as f64);
        if self.disc() > 0 {
            return a * a - 2.0 * b;
        }
        // one real root r and a conjugate pair with r·|z|² = −c
        let mut lo = -1.0 - a.abs() - b.abs() - c.abs();
        let mut hi = -lo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval_f64(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        r * r - 2.0 * c / r
    }

    /// Number of roots modulo p.
    pub fn roots_mod(&self, p: i64) -> usize {
        (0..p)
            .filter(|&x| {
                let v = ((x * x % p + self.a.rem_euclid(p) * x) % p * x
                    + self.b.rem_euclid(p) * x
                    + self.c)
                    .rem_euclid(p);
                v == 0
            })
            .count()
    }
}

/// Lattice (1/den)·span(rows) in coordinates of the power basis 1, θ, θ².
#[derive(Clone, Debug)]
struct Lattice {
    rows: [[i128; 3]; 3],
    den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Row-style Hermite reduction of the generators to a basis of their span.
fn hnf(mut gens: Vec<[i128; 3]>) -> [[i128; 3]; 3] {
    let mut out = [[0i128; 3]; 3];
    for col in 0..3 {
        loop {
            let nz: Vec<usize> = (0..gens.len()).filter(|&i| gens[i][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| gens[i][col].abs()).unwrap();
            let pv = gens[piv];
            for &i in &nz {
                if i != piv {
                    let q = gens[i][col] / pv[col];
                    for k in 0..3 {
                        gens[i][k] -= q * pv[k];
                    }
                }
            }
        }
        let piv = gens
            .iter()
            .position(|g| g[col] != 0)
            .expect("full rank lattice");
        out[col] = gens.remove(piv);
    }
    out
}

fn det3(m: &[[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Lattice {
    /// Whether y/q (power basis coordinates) is an algebraic integer: its
    /// multiplication matrix N/q has an integral characteristic polynomial.
    fn integral(f: &Monic, y: [i128; 3], q: i128) -> bool {
        // companion matrix of multiplication by θ acting on coordinate columns
        let t = [
            [0, 0, -(f.c as i128)],
            [1, 0, -(f.b as i128)],
            [0, 1, -(f.a as i128)],
        ];
        let mul = |x: &[[i128; 3]; 3], y: &[[i128; 3]; 3]| {
            let mut r = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    r[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
                }
            }
            r
        };
        let t2 = mul(&t, &t);
        let mut n = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                n[i][j] = y[1] * t[i][j] + y[2] * t2[i][j] + if i == j { y[0] } else { 0 };
            }
        }
        let tr = n[0][0] + n[1][1] + n[2][2];
        let s2 = n[0][0] * n[1][1] - n[0][1] * n[1][0] + n[0][0] * n[2][2] - n[0][2] * n[2][0]
            + n[1][1] * n[2][2]
            - n[1][2] * n[2][1];
        tr % q == 0 && s2 % (q * q) == 0 && det3(&n) % (q * q * q) == 0
    }

    /// Replaces the lattice by its p-saturation inside O_K until p no longer
    /// divides the index.
    fn saturate(&mut self, f: &Monic, p: i128) {
        loop {
            let q = p * self.den;
            let mut gens: Vec<[i128; 3]> = self
                .rows
                .iter()
                .map(|r| [r[0] * p, r[1] * p, r[2] * p])
                .collect();
            let mut grew = false;
            for c0 in 0..p {
                for c1 in 0..p {
                    for c2 in 0..p {
                        if c0 == 0 && c1 == 0 && c2 == 0 {
                            continue;
                        }
                        let y: [i128; 3] = std::array::from_fn(|k| {
                            c0 * self.rows[0][k] + c1 * self.rows[1][k] + c2 * self.rows[2][k]
                        });
                        if Self::integral(f, y, q) {
                            gens.push(y);
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                return;
            }
            let rows = hnf(gens);
            let g = rows.iter().flatten().fold(q, |acc, &v| gcd(acc, v));
            self.rows = rows.map(|r| r.map(|v| v / g));
            self.den = q / g;
        }
    }
}

/// Field discriminant of Q(θ), f(θ) = 0.
pub fn field_discriminant(f: &Monic) -> i128 {
    let disc = f.disc();
    let mut lat = Lattice {
        rows: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        den: 1,
    };
    let mut n = disc.abs();
    let mut p = 2i128;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e >= 2 {
                lat.saturate(f, p);
            }
        }
        p += 1;
    }
    // disc(O) = disc(f)·(det(rows)/den³)²
    let det = det3(&lat.rows).abs();
    let den3 = lat.den * lat.den * lat.den;
    assert_eq!(den3 % det, 0);
    let index = den3 / det;
    assert_eq!(disc % (index * index), 0);
    disc / (index * index)
}

/// One field: its discriminant and a defining polynomial.
#[derive(Clone, Debug)]
pub struct OracleField {
    pub disc: i64,
    pub poly: Monic,
}

fn same_field(f: &Monic, g: &Monic, primes: &[i64]) -> bool {
    let (df, dg) = (f.disc(), g.disc());
    primes
        .iter()
        .filter(|&&p| df % p as i128 != 0 && dg % p as i128 != 0)
        .all(|&p| f.roots_mod(p) == g.roots_mod(p))
}

pub fn small_primes(limit: i64) -> Vec<i64> {
    (2..=limit)
        .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

/// Every cubic field with |D_K| ≤ x, sorted by (|D|, D).
pub fn cubic_fields(x: u64) -> Vec<OracleField> {
    let root = (x as f64).sqrt();
    let primes = small_primes(400);
    let mut by_disc: BTreeMap<(u64, i64), Vec<Monic>> = BTreeMap::new();
    for a in -1i64..=1 {
        let bound = (a * a) as f64 / 3.0 + 2.0 * root / 3.0 + 1e-9;
        let bmax = bound.floor() as i64;
        let cmax = (bound / 3.0).powf(1.5).floor() as i64;
        for b in -bmax..=bmax {
            for c in -cmax..=cmax {
                let f = Monic { a, b, c };
                if f.disc() == 0 || !f.is_irreducible() || f.t2() > bound {
                    continue;
                }
                let dk = field_discriminant(&f);
                if dk.unsigned_abs() > x as u128 {
                    continue;
                }
                let dk = dk as i64;
                let fields = by_disc.entry((dk.unsigned_abs(), dk)).or_default();
                if !fields.iter().any(|g| same_field(&f, g, &primes)) {
                    fields.push(f);
                }
            }
        }
    }
    by_disc
        .into_iter()
        .flat_map(|((_, d), polys)| {
            polys
                .into_iter()
                .map(move |poly| OracleField { disc: d, poly })
        })
        .collect()
}
