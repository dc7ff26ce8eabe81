//! Exact integer arithmetic shared by every other module: prime sieving,
//! primorials, Jacobi symbols, multiplicative orders, small factorizations,
//! perfect-power classification and discrete logarithms.
//!
//! Machine words are used for primes, thresholds and residues. Primorials and
//! anything that can live inside a window are [`BigUint`].

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest integer accepted by [`FactoredInteger::new`]; trial division
/// over the sieve stays in the millisecond range below this.
pub const FACTOR_LIMIT: u64 = 1_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("Jacobi modulus must be odd and positive, got {0}")]
    BadJacobiModulus(u64),
    #[error("{p} divides the base {g}")]
    PrimeDividesBase { g: i64, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("base must satisfy |g| >= 2, got {0}")]
    BadBase(i64),
    #[error("{n} exceeds the trial-division limit {limit}")]
    FactorLimit { n: u64, limit: u64 },
    #[error("cannot factor zero")]
    Zero,
    #[error("{root} is not a primitive root modulo {p}")]
    NotPrimitiveRoot { p: u64, root: u64 },
    #[error("{n} is not a unit modulo {p}")]
    NotUnit { p: u64, n: u64 },
}

pub type Result<T> = std::result::Result<T, ArithError>;

/// Primes up to `limit`, ascending. Odd-only sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    // index i stands for 2i + 1
    let len = ((limit - 1) / 2 + 1) as usize;
    let mut composite = vec![false; len];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < len {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(len / 4 + 1);
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    primes
}

/// Unbounded ascending stream of primes strictly greater than a starting
/// point, produced one segment at a time.
pub struct PrimeStream {
    next_lo: u64,
    segment: u64,
    base: Vec<u64>,
    base_limit: u64,
    buffer: std::vec::IntoIter<u64>,
}

impl PrimeStream {
    pub const DEFAULT_SEGMENT: u64 = 1 << 16;

    pub fn after(start: u64) -> Self {
        Self::with_segment(start, Self::DEFAULT_SEGMENT)
    }

    pub fn with_segment(start: u64, segment: u64) -> Self {
        PrimeStream {
            next_lo: start.saturating_add(1),
            segment: segment.max(64),
            base: Vec::new(),
            base_limit: 0,
            buffer: Vec::new().into_iter(),
        }
    }

    fn refill(&mut self) -> bool {
        let lo = self.next_lo;
        if lo == u64::MAX {
            return false;
        }
        let hi = lo.saturating_add(self.segment).min(u64::MAX - 1); // exclusive
        let root = hi.sqrt() + 1;
        if root > self.base_limit {
            self.base_limit = root.max(self.base_limit * 2);
            self.base = sieve_primes(self.base_limit);
        }
        let width = (hi - lo) as usize;
        let mut composite = vec![false; width];
        for &p in &self.base {
            if p * p >= hi {
                break;
            }
            let first = (p * p).max(lo.div_ceil(p) * p);
            let mut m = first;
            while m < hi {
                composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        let found: Vec<u64> = composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| lo + i as u64)
            .filter(|&n| n >= 2)
            .collect();
        self.next_lo = hi;
        self.buffer = found.into_iter();
        true
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if let Some(p) = self.buffer.next() {
                return Some(p);
            }
            if !self.refill() {
                return None;
            }
        }
    }
}

/// The primes up to a threshold together with the primorials built on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeBasis {
    pub x: u64,
    pub primes: Vec<u64>,
    pub pi_x: usize,
    /// Product of all primes `<= x`.
    pub m_x: BigUint,
    /// Product of the odd primes `<= x`.
    pub m2_x: BigUint,
}

impl PrimeBasis {
    pub fn new(x: u64) -> Self {
        let primes = sieve_primes(x);
        let m2_x = primes
            .iter()
            .filter(|&&p| p != 2)
            .fold(BigUint::one(), |acc, &p| acc * p);
        let m_x = if x >= 2 { &m2_x * 2u32 } else { BigUint::one() };
        PrimeBasis {
            x,
            pi_x: primes.len(),
            primes,
            m_x,
            m2_x,
        }
    }

    pub fn odd_primes(&self) -> &[u64] {
        match self.primes.first() {
            Some(2) => &self.primes[1..],
            _ => &self.primes,
        }
    }

    /// Primes of the basis that do not divide `g`.
    pub fn primes_coprime_to(&self, g: i64) -> Vec<u64> {
        self.primes
            .iter()
            .copied()
            .filter(|&p| g.unsigned_abs() % p != 0)
            .collect()
    }
}

/// Product of the primes in `basis`, skipping those that divide
/// `exclude_divisors_of` when given. `Some(2)` yields the odd primorial.
pub fn primorial(basis: &PrimeBasis, exclude_divisors_of: Option<i64>) -> BigUint {
    match exclude_divisors_of {
        None => basis.m_x.clone(),
        Some(g) => basis
            .primes
            .iter()
            .filter(|&&p| g.unsigned_abs() % p != 0)
            .fold(BigUint::one(), |acc, &p| acc * p),
    }
}

/// A Legendre/Jacobi symbol value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Symbol {
    Minus,
    Zero,
    Plus,
}

impl Symbol {
    pub fn value(self) -> i8 {
        match self {
            Symbol::Minus => -1,
            Symbol::Zero => 0,
            Symbol::Plus => 1,
        }
    }

    fn from_sign(v: i8) -> Self {
        match v {
            1 => Symbol::Plus,
            -1 => Symbol::Minus,
            _ => Symbol::Zero,
        }
    }
}

impl From<Symbol> for i8 {
    fn from(s: Symbol) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Symbol {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 | 0 | 1 => Ok(Symbol::from_sign(v)),
            _ => Err(format!("symbol out of range: {v}")),
        }
    }
}

impl std::ops::Mul for Symbol {
    type Output = Symbol;

    fn mul(self, rhs: Symbol) -> Symbol {
        Symbol::from_sign(self.value() * rhs.value())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Jacobi symbol `(a/m)` for a residue `a` already reduced below `m`.
/// `m` must be odd; this is the unchecked inner loop.
pub(crate) fn jacobi_reduced(mut a: u64, mut m: u64) -> i8 {
    debug_assert!(m & 1 == 1);
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && matches!(m & 7, 3 | 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut m);
        if a & 3 == 3 && m & 3 == 3 {
            t = -t;
        }
        a %= m;
    }
    if m == 1 {
        t
    } else {
        0
    }
}

fn check_jacobi_modulus(m: u64) -> Result<()> {
    if m == 0 || m & 1 == 0 {
        return Err(ArithError::BadJacobiModulus(m));
    }
    Ok(())
}

/// Jacobi symbol `(a/m)` for odd `m >= 1`.
pub fn jacobi(a: i64, m: u64) -> Result<Symbol> {
    check_jacobi_modulus(m)?;
    let r = (a as i128).rem_euclid(m as i128) as u64;
    Ok(Symbol::from_sign(jacobi_reduced(r, m)))
}

/// Jacobi symbol with an arbitrary-precision top argument.
pub fn jacobi_big(a: &BigInt, m: u64) -> Result<Symbol> {
    check_jacobi_modulus(m)?;
    let mut r = (a.magnitude() % m).to_u64().unwrap_or(0);
    if a.sign() == Sign::Minus && r != 0 {
        r = m - r;
    }
    Ok(Symbol::from_sign(jacobi_reduced(r, m)))
}

pub fn jacobi_biguint(a: &BigUint, m: u64) -> Result<Symbol> {
    check_jacobi_modulus(m)?;
    let r = (a % m).to_u64().unwrap_or(0);
    Ok(Symbol::from_sign(jacobi_reduced(r, m)))
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality for the small moduli this crate works with.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut y = pow_mod(a, d, n);
        if y == 1 || y == n - 1 {
            continue;
        }
        for _ in 1..s {
            y = mul_mod(y, y, n);
            if y == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Multiplicative order `l` of `g` modulo the prime `p` and the index
/// `i = (p - 1) / l` of the subgroup it generates. Negative `g` is reduced
/// modulo `p` first.
pub fn mul_order_index(g: i64, p: u64) -> Result<(u64, u64)> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    let residue = (g as i128).rem_euclid(p as i128) as u64;
    if residue == 0 {
        return Err(ArithError::PrimeDividesBase { g, p });
    }
    let group = p - 1;
    let order = element_order(residue, p, group);
    Ok((order, group / order))
}

/// Order of the unit `a` in a cyclic group of order `group` modulo `p`.
fn element_order(a: u64, p: u64, group: u64) -> u64 {
    let mut order = group;
    for q in distinct_prime_factors(group) {
        while order % q == 0 && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let group = p - 1;
    let qs = distinct_prime_factors(group);
    (2..p)
        .find(|&r| qs.iter().all(|&q| pow_mod(r, group / q, p) != 1))
        .ok_or(ArithError::NotPrime(p))
}

/// Exponent `e` in `[0, p - 2]` with `root^e = n (mod p)`, by baby-step
/// giant-step.
pub fn discrete_log(p: u64, root: u64, n: i64) -> Result<u64> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    let root = root % p;
    if root == 0 || element_order(root, p, p - 1) != p - 1 {
        return Err(ArithError::NotPrimitiveRoot { p, root });
    }
    let target = (n as i128).rem_euclid(p as i128) as u64;
    if target == 0 {
        return Err(ArithError::NotUnit {
            p,
            n: n.unsigned_abs(),
        });
    }
    let group = p - 1;
    let m = group.sqrt() + 1;
    let mut baby = HashMap::with_capacity(m as usize);
    let mut cur = 1u64;
    for j in 0..m {
        baby.entry(cur).or_insert(j);
        cur = mul_mod(cur, root, p);
    }
    // root^{-m}
    let giant = pow_mod(root, group - (m % group), p);
    let mut gamma = target;
    for i in 0..=m {
        if let Some(&j) = baby.get(&gamma) {
            return Ok((i * m + j) % group);
        }
        gamma = mul_mod(gamma, giant, p);
    }
    // unreachable for a genuine primitive root
    Err(ArithError::NotPrimitiveRoot { p, root })
}

/// `n` together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// Trial division; rejects `n = 0` and `n > FACTOR_LIMIT`.
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(ArithError::Zero);
        }
        if n > FACTOR_LIMIT {
            return Err(ArithError::FactorLimit {
                n,
                limit: FACTOR_LIMIT,
            });
        }
        let mut rest = n;
        let mut factors = Vec::new();
        let mut d = 2u64;
        while d * d <= rest {
            if rest % d == 0 {
                let mut e = 0;
                while rest % d == 0 {
                    rest /= d;
                    e += 1;
                }
                factors.push((d, e));
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(FactoredInteger { n, factors })
    }

    pub fn of_signed(n: i64) -> Result<Self> {
        Self::new(n.unsigned_abs())
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn functions(&self) -> MultFunctions {
        let tau = self.factors.iter().map(|&(_, e)| e as u64 + 1).product();
        let mu = if self.is_squarefree() {
            if self.factors.len() % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        };
        let phi = self
            .factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product();
        let rad = self.primes().product();
        MultFunctions {
            tau,
            mu,
            phi,
            rad,
            omega: self.factors.len() as u32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultFunctions {
    pub tau: u64,
    pub mu: i8,
    pub phi: u64,
    pub rad: u64,
    pub omega: u32,
}

/// Divisor count, Moebius value, totient, radical and distinct-prime count.
pub fn mult_functions(n: u64) -> Result<MultFunctions> {
    Ok(FactoredInteger::new(n)?.functions())
}

/// von Mangoldt weight: `ln p` when `n = p^k` with `k >= 1`, else zero.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    let f = FactoredInteger::new(n)?;
    Ok(match f.factors.as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerClass {
    pub is_square: bool,
    pub is_g_power: bool,
}

fn check_base(g: i64) -> Result<()> {
    if g.unsigned_abs() < 2 {
        return Err(ArithError::BadBase(g));
    }
    Ok(())
}

/// Whether `n > 0` equals `g^k` for some `k >= 0`. For negative `g` only even
/// exponents give positive values.
pub fn is_true_power(n: &BigUint, g: i64) -> bool {
    if n.is_zero() || g.unsigned_abs() < 2 {
        return false;
    }
    let step = if g > 0 {
        BigUint::from(g as u64)
    } else {
        BigUint::from(g.unsigned_abs()).pow(2)
    };
    let mut rest = n.clone();
    while !rest.is_one() {
        let (q, r) = rest.div_rem(&step);
        if !r.is_zero() {
            return false;
        }
        rest = q;
    }
    true
}

/// `u64` fast path of [`is_true_power`].
pub fn is_true_power_u64(n: u64, g: i64) -> bool {
    if n == 0 || g.unsigned_abs() < 2 {
        return false;
    }
    let step = if g > 0 {
        g as u128
    } else {
        (g.unsigned_abs() as u128).pow(2)
    };
    let mut rest = n as u128;
    while rest != 1 {
        if rest % step != 0 {
            return false;
        }
        rest /= step;
    }
    true
}

pub fn is_perfect_square(n: &BigUint) -> bool {
    let r = n.sqrt();
    &r * &r == *n
}

pub fn is_perfect_square_u64(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

pub fn classify_power(n: &BigUint, g: i64) -> Result<PowerClass> {
    check_base(g)?;
    Ok(PowerClass {
        is_square: is_perfect_square(n),
        is_g_power: is_true_power(n, g),
    })
}
