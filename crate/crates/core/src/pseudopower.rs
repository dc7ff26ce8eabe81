//! x-pseudopowers to a base `g`: positive integers that are not powers of
//! `g` yet reduce to a power of `g` modulo every prime up to `x`.
//!
//! For `p` not dividing `g` the powers of `g` mod `p` form the subgroup of
//! index `i_g(p)`, so membership is `n^(l_g(p)) = 1 (mod p)`. For `p | g`
//! they are the residues `0` and `1`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{
    self, is_true_power, is_true_power_u64, mul_order_index, pow_mod, primitive_root,
    FactoredInteger, PrimeBasis,
};
use crate::error::{invalid, Error, Result};
use crate::window::{add_counts, Binning, Budget, CountReport, Window};
use crate::EULER_GAMMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub p: u64,
    pub l: u64,
    pub i: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub g: i64,
    pub x: u64,
    pub rows: Vec<ProfileRow>,
    /// `I_g(x)`
    #[serde(with = "crate::decimal")]
    pub i_product: BigUint,
    #[serde(with = "crate::decimal")]
    pub l_product: BigUint,
}

impl PowerProfile {
    /// `M_g(x)`, the product of the profiled primes.
    pub fn modulus(&self) -> BigUint {
        self.rows.iter().fold(BigUint::one(), |acc, r| acc * r.p)
    }

    /// `phi(M_g(x))`
    pub fn totient(&self) -> BigUint {
        self.rows
            .iter()
            .fold(BigUint::one(), |acc, r| acc * (r.p - 1))
    }

    pub fn row(&self, p: u64) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.p == p)
    }
}

fn check_base(g: i64) -> Result<()> {
    if g.unsigned_abs() < 2 {
        return Err(arith::ArithError::BadBase(g).into());
    }
    Ok(())
}

pub fn power_profile(g: i64, x: u64) -> Result<PowerProfile> {
    check_base(g)?;
    let basis = PrimeBasis::new(x);
    let rows = basis
        .primes_coprime_to(g)
        .into_iter()
        .map(|p| mul_order_index(g, p).map(|(l, i)| ProfileRow { p, l, i }))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let i_product = rows.iter().fold(BigUint::one(), |acc, r| acc * r.i);
    let l_product = rows.iter().fold(BigUint::one(), |acc, r| acc * r.l);
    Ok(PowerProfile {
        g,
        x,
        rows,
        i_product,
        l_product,
    })
}

/// Conditions (i) and (ii) without the "not a true power" clause.
fn in_closure_with(
    n: &BigUint,
    g: i64,
    profile: &PowerProfile,
    ignore_divisors_of_g: bool,
) -> bool {
    let subgroup = profile.rows.iter().all(|row| {
        let r = (n % row.p).to_u64().unwrap();
        r != 0 && pow_mod(r, row.l, row.p) == 1
    });
    if !subgroup {
        return false;
    }
    ignore_divisors_of_g
        || PrimeBasis::new(profile.x)
            .primes
            .iter()
            .filter(|&&p| g.unsigned_abs() % p == 0)
            .all(|&p| matches!((n % p).to_u64().unwrap(), 0 | 1))
}

/// Membership in `P̄_x`, the pseudopowers together with the true powers.
pub fn in_closure(n: &BigUint, g: i64, x: u64) -> Result<bool> {
    let profile = power_profile(g, x)?;
    Ok(in_closure_with(n, g, &profile, false))
}

pub fn is_pseudopower(n: &BigUint, g: i64, x: u64, ignore_divisors_of_g: bool) -> Result<bool> {
    let profile = power_profile(g, x)?;
    Ok(!is_true_power(n, g) && in_closure_with(n, g, &profile, ignore_divisors_of_g))
}

/// Residue tables for the scanning paths: `allowed[r]` per prime.
struct MembershipSieve {
    primes: Vec<u64>,
    tables: Vec<Vec<bool>>,
}

impl MembershipSieve {
    fn new(profile: &PowerProfile, g: i64, ignore_divisors_of_g: bool) -> Self {
        let mut primes = Vec::new();
        let mut tables = Vec::new();
        for &p in &PrimeBasis::new(profile.x).primes {
            if let Some(row) = profile.row(p) {
                let t = (0..p)
                    .map(|r| r != 0 && pow_mod(r, row.l, p) == 1)
                    .collect();
                primes.push(p);
                tables.push(t);
            } else if !ignore_divisors_of_g {
                debug_assert_eq!(g.unsigned_abs() % p, 0);
                let t = (0..p).map(|r| r <= 1).collect();
                primes.push(p);
                tables.push(t);
            }
        }
        MembershipSieve { primes, tables }
    }

    #[inline]
    fn admits(&self, residues: &[u64]) -> bool {
        residues
            .iter()
            .zip(&self.tables)
            .all(|(&r, t)| t[r as usize])
    }

    fn admits_u64(&self, n: u64) -> bool {
        self.primes
            .iter()
            .zip(&self.tables)
            .all(|(&p, t)| t[(n % p) as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerVariant {
    /// every prime `p <= x`
    QG,
    /// only primes `p <= x` with `p` not dividing `g`
    PG,
}

/// `2 M(x) + 1`, the trivial ceiling for `q_g(x)`.
pub fn trivial_bound(x: u64) -> BigUint {
    PrimeBasis::new(x).m_x * 2u32 + 1u32
}

/// Least pseudopower of the chosen variant; an error means the scan passed
/// `2 M(x) + 1`.
pub fn least_pseudopower(g: i64, x: u64, variant: PowerVariant) -> Result<u64> {
    check_base(g)?;
    if x < 2 {
        return invalid(format!("threshold must be at least 2, got {x}"));
    }
    let profile = power_profile(g, x)?;
    let sieve = MembershipSieve::new(&profile, g, variant == PowerVariant::PG);
    let limit = trivial_bound(x).to_u64().unwrap_or(u64::MAX);
    (1..=limit)
        .find(|&n| sieve.admits_u64(n) && !is_true_power_u64(n, g))
        .ok_or(Error::SearchExhausted {
            bound: limit.to_string(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudopowerSearch {
    pub q_g: u64,
    pub p_g: u64,
    /// `q_g(x) <= |g| p_g(x)`
    pub relation_holds: bool,
}

pub fn pseudopower_search(g: i64, x: u64) -> Result<PseudopowerSearch> {
    let q_g = least_pseudopower(g, x, PowerVariant::QG)?;
    let p_g = least_pseudopower(g, x, PowerVariant::PG)?;
    Ok(PseudopowerSearch {
        q_g,
        p_g,
        relation_holds: q_g as u128 <= g.unsigned_abs() as u128 * p_g as u128,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCount {
    /// `#(P̄_x ∩ (0, M(x)])` from `2^omega(g) prod l_g(p)`
    #[serde(with = "crate::decimal")]
    pub count_pbar: BigUint,
    /// `#{g^k <= M(x) : k >= 0, g^k > 0}`
    pub count_true_powers: u64,
    /// True powers in range that lie in `P̄_x`.
    pub true_powers_in_pbar: u64,
    #[serde(with = "crate::decimal")]
    pub pseudopower_count: BigUint,
}

/// Positive true powers of `g` up to `limit`, ascending.
pub fn true_powers_upto(g: i64, limit: &BigUint) -> Vec<BigUint> {
    let step = if g > 0 {
        BigUint::from(g as u64)
    } else {
        BigUint::from(g.unsigned_abs()).pow(2)
    };
    let mut out = Vec::new();
    let mut v = BigUint::one();
    while v <= *limit {
        out.push(v.clone());
        v *= &step;
    }
    out
}

pub fn exact_count_period(g: i64, x: u64) -> Result<PeriodCount> {
    check_base(g)?;
    if x < g.unsigned_abs() {
        return invalid(format!("period count needs x >= |g|, got x = {x}, g = {g}"));
    }
    let profile = power_profile(g, x)?;
    let omega = FactoredInteger::of_signed(g)?.factors.len();
    let count_pbar = &profile.l_product << omega;
    let m = PrimeBasis::new(x).m_x;
    let powers = true_powers_upto(g, &m);
    let in_pbar = powers
        .iter()
        .filter(|n| in_closure_with(n, g, &profile, false))
        .count() as u64;
    Ok(PeriodCount {
        pseudopower_count: &count_pbar - in_pbar,
        count_pbar,
        count_true_powers: powers.len() as u64,
        true_powers_in_pbar: in_pbar,
    })
}

/// `2^omega(g) / (e^gamma phi(rad g) I_g(x) ln x)`
pub fn density_model(g: i64, x: u64) -> Result<f64> {
    let profile = power_profile(g, x)?;
    let f = FactoredInteger::of_signed(g)?;
    let phi_rad: u64 = f.primes().map(|p| p - 1).product();
    let i = profile.i_product.to_f64().unwrap_or(f64::INFINITY);
    Ok(2f64.powi(f.factors.len() as i32)
        / (EULER_GAMMA.exp() * phi_rad as f64 * i * (x as f64).ln()))
}

pub fn count_pseudopowers(
    g: i64,
    x: u64,
    window: &Window,
    bins: u64,
    budget: Budget,
) -> Result<CountReport> {
    check_base(g)?;
    let profile = power_profile(g, x)?;
    let sieve = MembershipSieve::new(&profile, g, false);
    let prog = window.progression(1, 0)?;
    budget.charge(prog.count as u128 * sieve.primes.len().max(1) as u128)?;
    let len = window.len_u64()?;
    let binning = Binning::new(len.max(1), bins)?;

    let (closure, proper, counts) = prog.par_fold(
        |lo, hi| {
            let mut cur = prog.cursor(&sieve.primes, lo);
            let (mut closure, mut proper) = (0u64, 0u64);
            let mut counts = binning.empty();
            for k in lo..hi {
                if sieve.admits(&cur.residues) {
                    closure += 1;
                    let power = match prog.value_u64(k) {
                        Some(n) => is_true_power_u64(n, g),
                        None => is_true_power(&prog.value(k), g),
                    };
                    if !power {
                        proper += 1;
                        counts[binning.index(k + 1)] += 1;
                    }
                }
                cur.advance();
            }
            (closure, proper, counts)
        },
        (0, 0, binning.empty()),
        |a, b| (a.0 + b.0, a.1 + b.1, add_counts(a.2, b.2)),
    );
    let density = density_model(g, x)?;
    Ok(CountReport {
        window: window.clone(),
        count: proper,
        closure_count: closure,
        model_density: density,
        model_count: len as f64 * density,
        histogram: binning.into_bins(window, counts, density),
    })
}

/// A character modulo `p` of a prescribed order, realized through a
/// primitive root: `chi(n) = exp(2 pi i ind(n) / order)`.
#[derive(Debug, Clone)]
pub struct OrderCharacter {
    pub p: u64,
    pub order: u64,
    pub root: u64,
    /// `index[n] = ind_root(n)` for `1 <= n < p`.
    index: Vec<u64>,
}

impl OrderCharacter {
    /// `ind(n) mod order`, or `None` when `p | n`.
    pub fn exponent(&self, n: u64) -> Option<u64> {
        match n % self.p {
            0 => None,
            r => Some(self.index[r as usize] % self.order),
        }
    }

    pub fn eval(&self, n: u64) -> Complex64 {
        self.eval_power(n, 1)
    }

    /// `chi^j(n)`
    pub fn eval_power(&self, n: u64, j: u64) -> Complex64 {
        match self.exponent(n) {
            None => Complex64::new(0.0, 0.0),
            Some(e) => {
                let k = (e * j) % self.order;
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / self.order as f64)
                }
            }
        }
    }

    /// `sum_{j=1}^{order} chi^j(n)`: `order` on the kernel, zero elsewhere.
    pub fn indicator_sum(&self, n: u64) -> Complex64 {
        (1..=self.order).map(|j| self.eval_power(n, j)).sum()
    }

    pub fn ind(&self, n: u64) -> Option<u64> {
        match n % self.p {
            0 => None,
            r => Some(self.index[r as usize]),
        }
    }
}

pub fn build_character(p: u64, order: u64) -> Result<OrderCharacter> {
    if !arith::is_prime(p) {
        return Err(arith::ArithError::NotPrime(p).into());
    }
    if order == 0 || (p - 1) % order != 0 {
        return invalid(format!("order {order} does not divide {} = p - 1", p - 1));
    }
    let root = primitive_root(p)?;
    let mut index = vec![0u64; p as usize];
    let mut v = 1u64;
    for e in 0..p - 1 {
        index[v as usize] = e;
        v = arith::mul_mod(v, root, p);
    }
    Ok(OrderCharacter {
        p,
        order,
        root,
        index,
    })
}

/// `chi_p` of order `i_g(p)` for every profiled prime.
fn characters_for(profile: &PowerProfile) -> Result<Vec<OrderCharacter>> {
    profile
        .rows
        .iter()
        .map(|r| build_character(r.p, r.i))
        .collect()
}

fn indicator_product(chars: &[OrderCharacter], n: u64) -> Complex64 {
    chars
        .iter()
        .map(|c| c.indicator_sum(n))
        .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSum {
    pub re: f64,
    pub im: f64,
    /// `I_g(x) * sum Lambda(n)` over true powers `n < p_g(x)`
    pub identity_rhs: f64,
    pub p_g: u64,
    pub terms: u64,
    #[serde(with = "crate::decimal")]
    pub i_product: BigUint,
}

impl WeightedSum {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn deviation(&self) -> f64 {
        (self.value() - Complex64::new(self.identity_rhs, 0.0)).norm()
    }
}

/// `S_g = sum_{n < p_g(x)} Lambda(n) prod_p sum_{j=1}^{i_g(p)} chi_p^j(n)`.
pub fn weighted_sum_sg(g: i64, x: u64) -> Result<WeightedSum> {
    let profile = power_profile(g, x)?;
    let p_g = least_pseudopower(g, x, PowerVariant::PG)?;
    let chars = characters_for(&profile)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut rhs_weights = 0.0;
    for n in 1..p_g {
        let lambda = arith::von_mangoldt(n)?;
        if lambda == 0.0 {
            continue;
        }
        value += indicator_product(&chars, n) * lambda;
        if is_true_power_u64(n, g) {
            rhs_weights += lambda;
        }
    }
    let i = profile.i_product.to_f64().unwrap_or(f64::INFINITY);
    Ok(WeightedSum {
        re: value.re,
        im: value.im,
        identity_rhs: i * rhs_weights,
        p_g,
        terms: p_g.saturating_sub(1),
        i_product: profile.i_product,
    })
}

/// Factorizations `a b = rad(g)` with `gcd(a, b) = 1`.
pub fn radical_splittings(g: i64) -> Result<Vec<(u64, u64)>> {
    let primes: Vec<u64> = FactoredInteger::of_signed(g)?.primes().collect();
    let rad: u64 = primes.iter().product();
    Ok((0u32..1 << primes.len())
        .map(|mask| {
            let a: u64 = primes
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .product();
            (a, rad / a)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanIdentity {
    pub re: f64,
    pub im: f64,
    /// `#(P̄_x ∩ window)` by direct membership tests
    #[serde(with = "crate::decimal::u64_str")]
    pub direct: u64,
    #[serde(with = "crate::decimal")]
    pub weight: BigUint,
    pub terms: u64,
}

impl PanIdentity {
    pub fn deviation(&self) -> f64 {
        let target = self.weight.to_f64().unwrap_or(f64::INFINITY) * self.direct as f64;
        (Complex64::new(self.re, self.im) - Complex64::new(target, 0.0)).norm()
    }
}

/// `P_{A,N} = sum_{ab = rad g} sum_{n in window, a | n, n = 1 (b)} prod_p sum_j chi_p^j(n)`,
/// evaluated in complex arithmetic next to the direct count of `P̄_x`.
pub fn p_an_identity(g: i64, x: u64, window: &Window, budget: Budget) -> Result<PanIdentity> {
    check_base(g)?;
    if x < g.unsigned_abs() {
        return invalid(format!("needs x >= |g|, got x = {x}, g = {g}"));
    }
    let profile = power_profile(g, x)?;
    let chars = characters_for(&profile)?;
    let splittings = radical_splittings(g)?;
    let rad: u64 = splittings[0].1;
    let per_term: u128 = profile
        .rows
        .iter()
        .map(|r| r.i as u128)
        .sum::<u128>()
        .max(1);

    let progs = splittings
        .iter()
        .map(|&(a, b)| {
            // n = 0 (mod a), n = 1 (mod b)
            let c = (0..rad)
                .step_by(a as usize)
                .find(|c| c % b == 1 % b)
                .unwrap();
            window.progression(rad, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: u128 = progs.iter().map(|p| p.count as u128).sum();
    budget
        .charge(total * per_term + window.len_u64()? as u128 * profile.rows.len().max(1) as u128)?;

    let primes: Vec<u64> = profile.rows.iter().map(|r| r.p).collect();
    let mut p_an = Complex64::new(0.0, 0.0);
    for prog in &progs {
        p_an += prog.par_fold(
            |lo, hi| {
                let mut cur = prog.cursor(&primes, lo);
                let mut acc = Complex64::new(0.0, 0.0);
                for _ in lo..hi {
                    acc += chars
                        .iter()
                        .zip(&cur.residues)
                        .map(|(c, &r)| c.indicator_sum(r))
                        .fold(Complex64::new(1.0, 0.0), |z, w| z * w);
                    cur.advance();
                }
                acc
            },
            Complex64::new(0.0, 0.0),
            |a, b| a + b,
        );
    }
    let direct = count_pseudopowers(g, x, window, 1, Budget(u64::MAX))?.closure_count;
    Ok(PanIdentity {
        re: p_an.re,
        im: p_an.im,
        direct,
        weight: profile.i_product.clone(),
        terms: total as u64,
    })
}

/// `|X_f| = prod_{p | f} (i_g(p) - 1)`.
pub fn conductor_characters(g: i64, x: u64, f: u64) -> Result<BigUint> {
    let profile = power_profile(g, x)?;
    let m_g = profile.modulus();
    if f == 0 || m_g.clone() % f != BigUint::ZERO {
        return invalid(format!("{f} does not divide M_g(x) = {m_g}"));
    }
    Ok(profile
        .rows
        .iter()
        .filter(|r| f % r.p == 0)
        .fold(BigUint::one(), |acc, r| acc * (r.i - 1)))
}
