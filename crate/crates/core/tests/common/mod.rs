//! Slow, independent reference implementations. Nothing here calls into the
//! library's arithmetic; symbols come from Euler's criterion, primes from
//! trial division, subgroups from explicit powering.
#![allow(dead_code)]

use std::collections::BTreeSet;

pub fn powmod(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let (mut r, mut b) = (1 % m, b as u128 % m);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

pub fn is_prime_td(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_upto(x: u64) -> Vec<u64> {
    (2..=x).filter(|&p| is_prime_td(p)).collect()
}

pub fn odd_primes_upto(x: u64) -> Vec<u64> {
    (3..=x).filter(|&p| is_prime_td(p)).collect()
}

/// Legendre symbol by Euler's criterion.
pub fn legendre(a: u64, p: u64) -> i64 {
    match powmod(a % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

pub fn prime_factors(n: u64) -> Vec<u64> {
    let (mut m, mut d, mut out) = (n, 2, Vec::new());
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Jacobi symbol for odd squarefree `f`, given its prime factors, as a
/// product of Legendre symbols.
pub fn jacobi_sqfree(a: u64, f_primes: &[u64]) -> i64 {
    f_primes.iter().map(|&p| legendre(a, p)).product()
}

pub fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(2)..=r + 2).any(|s| s * s == n)
}

pub fn in_sbar(n: u64, x: u64) -> bool {
    n % 8 == 1 && odd_primes_upto(x).into_iter().all(|p| legendre(n, p) == 1)
}

pub fn naive_least_pseudosquare(x: u64) -> u64 {
    let odd = odd_primes_upto(x);
    (1u64..)
        .step_by(8)
        .find(|&n| !is_square(n) && odd.iter().all(|&p| legendre(n, p) == 1))
        .unwrap()
}

/// `sum prod_{odd p <= x} (1 + (m/p))` over `m = 1 (mod 8)` in `(a, a+len]`
/// coprime to `M_2(x)`.
pub fn naive_s_an(x: u64, a: u64, len: u64) -> i128 {
    let odd = odd_primes_upto(x);
    let m2: u64 = odd.iter().product();
    (a + 1..=a + len)
        .filter(|&m| m % 8 == 1 && gcd(m, m2) == 1)
        .map(|m| {
            odd.iter()
                .map(|&p| 1 + legendre(m, p) as i128)
                .product::<i128>()
        })
        .sum()
}

/// `sum (m/f)` over `m = 1 (mod 8)` in `(a, a+len]` coprime to `M_2(x)`.
pub fn naive_r_f(x: u64, f: u64, a: u64, len: u64) -> i128 {
    let m2: u64 = odd_primes_upto(x).iter().product();
    let fp = prime_factors(f);
    (a + 1..=a + len)
        .filter(|m| m % 8 == 1 && gcd(*m, m2) == 1)
        .map(|m| jacobi_sqfree(m, &fp) as i128)
        .sum()
}

pub fn naive_char_sum(q: u64, a: u64, len: u64) -> i128 {
    let qp = prime_factors(q);
    (a + 1..=a + len)
        .map(|m| jacobi_sqfree(m, &qp) as i128)
        .sum()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `{g^k mod p : k >= 0}`
pub fn subgroup(g: i64, p: u64) -> BTreeSet<u64> {
    let g = g.rem_euclid(p as i64) as u64;
    let mut set = BTreeSet::new();
    let mut v = 1 % p;
    while set.insert(v) {
        v = v * g % p;
    }
    set
}

/// `(l, i)` by walking powers of `g` modulo `p` with `p` not dividing `g`.
pub fn order_index(g: i64, p: u64) -> (u64, u64) {
    let l = subgroup(g, p).len() as u64;
    (l, (p - 1) / l)
}

pub fn base_divides(g: i64, p: u64) -> bool {
    g.unsigned_abs() % p == 0
}

/// Condition (i) for `p` not dividing `g`, (ii) `n = 0, 1 (mod p)` otherwise.
pub struct PbarOracle {
    sets: Vec<(u64, BTreeSet<u64>)>,
}

impl PbarOracle {
    pub fn new(g: i64, x: u64, ignore_divisors_of_g: bool) -> Self {
        let sets = primes_upto(x)
            .into_iter()
            .filter(|&p| !(ignore_divisors_of_g && base_divides(g, p)))
            .map(|p| {
                if base_divides(g, p) {
                    (p, BTreeSet::from([0, 1 % p]))
                } else {
                    (p, subgroup(g, p))
                }
            })
            .collect();
        PbarOracle { sets }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.sets.iter().all(|(p, s)| s.contains(&(n % p)))
    }
}

pub fn brute_pbar_count(g: i64, x: u64, a: u64, len: u64) -> u64 {
    let o = PbarOracle::new(g, x, false);
    (a + 1..=a + len).filter(|&n| o.contains(n)).count() as u64
}

/// `n = g^k` for some `k >= 0`.
pub fn is_power_of(n: u64, g: i64) -> bool {
    let mut v: i128 = 1;
    while v.unsigned_abs() <= n as u128 {
        if v == n as i128 {
            return true;
        }
        v *= g as i128;
    }
    false
}

pub fn naive_least_pseudopower(g: i64, x: u64, ignore_divisors_of_g: bool) -> u64 {
    let o = PbarOracle::new(g, x, ignore_divisors_of_g);
    (1u64..)
        .find(|&n| !is_power_of(n, g) && o.contains(n))
        .unwrap()
}

/// `Lambda(n)` by trial division.
pub fn mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let p = (2..=n).find(|d| n % d == 0).unwrap();
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    if m == 1 {
        (p as f64).ln()
    } else {
        0.0
    }
}

pub fn primorial(x: u64) -> u64 {
    primes_upto(x).iter().product()
}
