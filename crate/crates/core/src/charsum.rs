//! Exact real character sums over windows and the bounds that control them.
//!
//! `S_{A,N}` sums `prod_p (1 + (m/p))` over `m = 1 (mod 8)` coprime to
//! `M_2(x)`; expanding the product splits it into the principal part
//! ([`main_term`]) and one sum `R_f` per divisor `f > 1` of `M_2(x)`
//! ([`r_f`], evaluated through Moebius inversion over the cofactor).

use std::fmt;

use num_bigint::BigUint;
use num_traits::{Pow, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{jacobi_reduced, FactoredInteger, PrimeBasis};
use crate::error::{invalid, Error, Result};
use crate::pseudosquare::scan_closure;
use crate::window::{Budget, Window};
use crate::EULER_GAMMA;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumRecord {
    #[serde(with = "crate::decimal::i128_str")]
    pub value: i128,
    /// Summands evaluated. For unweighted character sums `|value| <= terms`.
    #[serde(with = "crate::decimal::u64_str")]
    pub terms: u64,
    pub modulus_f: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanResult {
    pub sum: SumRecord,
    #[serde(with = "crate::decimal::u64_str")]
    pub count_sbar: u64,
    /// `2^(pi(x)-1) * count_sbar`
    #[serde(with = "crate::decimal::i128_str")]
    pub identity_rhs: i128,
}

impl SanResult {
    pub fn identity_holds(&self) -> bool {
        self.sum.value == self.identity_rhs
    }
}

/// Moduli up to this size get a precomputed symbol table.
const TABLE_LIMIT: u64 = 1 << 22;

/// `(r/f)` for residues `r < f`, tabulated when `f` is small.
struct SymbolLookup {
    f: u64,
    table: Option<Vec<i8>>,
}

impl SymbolLookup {
    fn new(f: u64) -> Self {
        let table = (f <= TABLE_LIMIT).then(|| (0..f).map(|r| jacobi_reduced(r, f)).collect());
        SymbolLookup { f, table }
    }

    #[inline]
    fn get(&self, r: u64) -> i8 {
        match &self.table {
            Some(t) => t[r as usize],
            None => jacobi_reduced(r, self.f),
        }
    }
}

fn m2_u64(basis: &PrimeBasis) -> Result<u64> {
    basis.m2_x.to_u64().ok_or_else(|| {
        Error::InvalidArgument(format!("M_2({}) does not fit a machine word", basis.x))
    })
}

/// `S_{A,N}` by direct evaluation of the symbol product, alongside an
/// independent count of `S̄_x` in the window.
pub fn s_an(x: u64, window: &Window, budget: Budget) -> Result<SanResult> {
    let basis = PrimeBasis::new(x);
    let odd = basis.odd_primes();
    let prog = window.progression(8, 1)?;
    budget.charge(2 * prog.count as u128 * odd.len().max(1) as u128)?;
    let lookups: Vec<SymbolLookup> = odd.iter().map(|&p| SymbolLookup::new(p)).collect();

    let (value, terms) = prog.par_fold(
        |lo, hi| {
            let mut cur = prog.cursor(odd, lo);
            let mut value = 0i128;
            let mut terms = 0u64;
            for _ in lo..hi {
                if cur.residues.iter().all(|&r| r != 0) {
                    terms += 1;
                    value += cur
                        .residues
                        .iter()
                        .zip(&lookups)
                        .map(|(&r, l)| 1 + l.get(r) as i128)
                        .product::<i128>();
                }
                cur.advance();
            }
            (value, terms)
        },
        (0, 0),
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let count_sbar = scan_closure(x, window, 1, Budget(u64::MAX))?.closure;
    let weight = 1i128 << (basis.pi_x.saturating_sub(1));
    Ok(SanResult {
        sum: SumRecord {
            value,
            terms,
            modulus_f: 1,
        },
        count_sbar,
        identity_rhs: weight * count_sbar as i128,
    })
}

/// Squarefree divisors of a product of distinct primes, with their Moebius
/// signs.
fn signed_divisors(primes: &[u64]) -> Vec<(u64, i8)> {
    let mut out = vec![(1u64, 1i8)];
    for &p in primes {
        let next: Vec<(u64, i8)> = out.iter().map(|&(d, s)| (d * p, -s)).collect();
        out.extend(next);
    }
    out
}

/// `R_f = sum_{d | M_2/f} mu(d) sum_{m in window, m = 1 (8), d | m} (m/f)`.
pub fn r_f(x: u64, f: u64, window: &Window, budget: Budget) -> Result<SumRecord> {
    let basis = PrimeBasis::new(x);
    let m2 = m2_u64(&basis)?;
    if f <= 1 {
        return invalid("R_f needs f > 1; the f = 1 part is the main term");
    }
    if m2 % f != 0 {
        return invalid(format!("{f} does not divide M_2({x}) = {m2}"));
    }
    let cofactor: Vec<u64> = basis
        .odd_primes()
        .iter()
        .copied()
        .filter(|&p| f % p != 0)
        .collect();
    let divisors = signed_divisors(&cofactor);
    let progs = divisors
        .iter()
        .map(|&(d, s)| {
            // m = 1 (mod 8) and d | m  <=>  m = d * (d mod 8) (mod 8d), as d^2 = 1 (mod 8)
            window.progression(8 * d, d * (d % 8)).map(|p| (p, s))
        })
        .collect::<Result<Vec<_>>>()?;
    budget.charge(progs.iter().map(|(p, _)| p.count as u128).sum())?;

    let fs = [f];
    let sym = SymbolLookup::new(f);
    let mut value = 0i128;
    let mut terms = 0u64;
    for (prog, sign) in &progs {
        let inner = prog.par_fold(
            |lo, hi| {
                let mut cur = prog.cursor(&fs, lo);
                let mut acc = 0i64;
                for _ in lo..hi {
                    acc += sym.get(cur.residues[0]) as i64;
                    cur.advance();
                }
                acc
            },
            0,
            |a, b| a + b,
        );
        value += *sign as i128 * inner as i128;
        terms += prog.count;
    }
    Ok(SumRecord {
        value,
        terms,
        modulus_f: f,
    })
}

/// The divisors `f > 1` of `M_2(x)`.
pub fn modulus_divisors(x: u64) -> Vec<u64> {
    let basis = PrimeBasis::new(x);
    let mut ds: Vec<u64> = signed_divisors(basis.odd_primes())
        .into_iter()
        .map(|(d, _)| d)
        .filter(|&d| d > 1)
        .collect();
    ds.sort_unstable();
    ds
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    #[serde(with = "crate::decimal::u64_str")]
    pub count: u64,
    /// `N / (4 e^gamma ln x)`
    pub sieve_model: f64,
}

/// Principal (`f = 1`) part of `S_{A,N}`: `m = 1 (mod 8)` coprime to `M_2(x)`.
pub fn main_term(x: u64, window: &Window, budget: Budget) -> Result<MainTerm> {
    let basis = PrimeBasis::new(x);
    let odd = basis.odd_primes();
    let prog = window.progression(8, 1)?;
    budget.charge(prog.count as u128 * odd.len().max(1) as u128)?;
    let count = prog.par_fold(
        |lo, hi| {
            let mut cur = prog.cursor(odd, lo);
            let mut c = 0u64;
            for _ in lo..hi {
                if cur.residues.iter().all(|&r| r != 0) {
                    c += 1;
                }
                cur.advance();
            }
            c
        },
        0,
        |a, b| a + b,
    );
    Ok(MainTerm {
        count,
        sieve_model: sieve_model(x, window),
    })
}

pub fn sieve_model(x: u64, window: &Window) -> f64 {
    window.n_len.to_f64().unwrap_or(f64::INFINITY) / (4.0 * EULER_GAMMA.exp() * (x as f64).ln())
}

fn squarefree_odd_modulus(q: u64) -> Result<FactoredInteger> {
    if q <= 1 {
        return invalid(format!("modulus must exceed 1, got {q}"));
    }
    if q % 2 == 0 {
        return invalid(format!("modulus must be odd, got {q}"));
    }
    let f = FactoredInteger::new(q)?;
    if !f.is_squarefree() {
        return invalid(format!("modulus {q} is not squarefree"));
    }
    Ok(f)
}

/// `sum_{A < n <= A+N} (n/q)` for odd squarefree `q > 1`.
pub fn char_sum(q: u64, window: &Window, budget: Budget) -> Result<SumRecord> {
    squarefree_odd_modulus(q)?;
    let prog = window.progression(1, 0)?;
    budget.charge(prog.count as u128)?;
    let qs = [q];
    let sym = SymbolLookup::new(q);
    let value = prog.par_fold(
        |lo, hi| {
            let mut cur = prog.cursor(&qs, lo);
            let mut acc = 0i64;
            for _ in lo..hi {
                acc += sym.get(cur.residues[0]) as i64;
                cur.advance();
            }
            acc
        },
        0,
        |a, b| a + b,
    );
    Ok(SumRecord {
        value: value as i128,
        terms: prog.count,
        modulus_f: q,
    })
}

/// Slack applied to real-valued right-hand sides before comparing exact
/// integers against them.
const ROUND_UP: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvBounds {
    /// `3 * 2^(pi(x)-2) * sqrt(f) * ln f`
    pub rf_bound: f64,
    /// `sqrt(f) * ln f`
    pub generic_bound: f64,
}

impl PvBounds {
    pub fn admits_rf(&self, value: i128) -> bool {
        value.unsigned_abs() as f64 <= self.rf_bound * ROUND_UP
    }

    pub fn admits_single(&self, value: i128) -> bool {
        value.unsigned_abs() as f64 <= self.generic_bound * ROUND_UP
    }
}

pub fn pv_bounds(x: u64, f: u64) -> Result<PvBounds> {
    if f <= 1 {
        return invalid(format!("Polya-Vinogradov bound needs f > 1, got {f}"));
    }
    let pi = PrimeBasis::new(x).pi_x as i32;
    let generic = (f as f64).sqrt() * (f as f64).ln();
    Ok(PvBounds {
        rf_bound: 3.0 * 2f64.powi(pi - 2) * generic,
        generic_bound: generic,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub q: u64,
    #[serde(with = "crate::decimal")]
    pub n_len: BigUint,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum GrPrecondition {
    /// `q > 1` and squarefree
    ModulusNotSquarefree { q: u64 },
    /// `r >= 1`
    RZero,
    /// every prime factor of `q` is at most `N^(1/9)`
    PrimeFactorTooLarge { p: u64 },
    /// `N^r >= q^3`
    LengthTooShort,
}

impl fmt::Display for GrPrecondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrPrecondition::ModulusNotSquarefree { q } => {
                write!(f, "modulus {q} must be squarefree and > 1")
            }
            GrPrecondition::RZero => write!(f, "r must be at least 1"),
            GrPrecondition::PrimeFactorTooLarge { p } => {
                write!(f, "prime factor {p} of q exceeds N^(1/9)")
            }
            GrPrecondition::LengthTooShort => write!(f, "N^r < q^3"),
        }
    }
}

/// Check the three hypotheses exactly in integers; on failure name the
/// first failed clause (for prime factors, the largest offender).
pub fn gr_preconditions(params: &BoundParams) -> std::result::Result<(), GrPrecondition> {
    let q = params.q;
    let factored = FactoredInteger::new(q)
        .ok()
        .filter(|f| q > 1 && f.is_squarefree());
    let Some(factored) = factored else {
        return Err(GrPrecondition::ModulusNotSquarefree { q });
    };
    if params.r == 0 {
        return Err(GrPrecondition::RZero);
    }
    // p <= N^(1/9)  <=>  p^9 <= N
    if let Some(p) = factored
        .primes()
        .filter(|&p| BigUint::from(p).pow(9u32) > params.n_len)
        .max()
    {
        return Err(GrPrecondition::PrimeFactorTooLarge { p });
    }
    if Pow::pow(&params.n_len, params.r) < BigUint::from(q).pow(3u32) {
        return Err(GrPrecondition::LengthTooShort);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrBound {
    /// `4 N tau(q)^(r/2^r) q^(-1/(r 2^r))`
    pub value: f64,
    /// The bound over `N`.
    pub relative: f64,
    /// Whether the bound is no better than the trivial `N`.
    pub vacuous: bool,
}

pub fn gr_bound(params: &BoundParams) -> Result<GrBound> {
    gr_preconditions(params).map_err(Error::Precondition)?;
    let tau = FactoredInteger::new(params.q)?.functions().tau as f64;
    let r = params.r as f64;
    let two_r = 2f64.powf(r);
    let log_rel = 4f64.ln() + (r / two_r) * tau.ln() - (params.q as f64).ln() / (r * two_r);
    let relative = log_rel.exp();
    let n = params.n_len.to_f64().unwrap_or(f64::INFINITY);
    Ok(GrBound {
        value: relative * n,
        relative,
        vacuous: relative >= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RVariant {
    /// `r 2^r + 2 <= ln x / ln ln x`
    Theorem1,
    /// `r 2^r + 2 <= ln x / (ln ln x)^2`
    Theorem3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RChoice {
    pub r: u32,
    /// Set when `x < 16` or when even `r = 1` violates the inequality.
    pub degenerate: bool,
    pub ceiling: f64,
}

/// Largest `r >= 1` with `r 2^r + 2` below the variant's ceiling.
pub fn choose_r(x: f64, variant: RVariant) -> RChoice {
    choose_r_for_log(x.ln(), variant)
}

pub fn choose_r_for_log(log_x: f64, variant: RVariant) -> RChoice {
    if !(log_x >= 16f64.ln()) {
        return RChoice {
            r: 1,
            degenerate: true,
            ceiling: f64::NAN,
        };
    }
    let ll = log_x.ln();
    let ceiling = match variant {
        RVariant::Theorem1 => log_x / ll,
        RVariant::Theorem3 => log_x / (ll * ll),
    };
    let cost = |r: u32| r as f64 * 2f64.powi(r as i32) + 2.0;
    let mut r = 0u32;
    while r < 60 && cost(r + 1) <= ceiling {
        r += 1;
    }
    RChoice {
        r: r.max(1),
        degenerate: r == 0,
        ceiling,
    }
}

/// The full `S_{A,N} = main + sum_{f > 1} R_f` split for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub s_an: SanResult,
    pub main: MainTerm,
    pub contributions: Vec<SumRecord>,
}

impl Decomposition {
    pub fn rhs(&self) -> i128 {
        self.main.count as i128 + self.contributions.iter().map(|c| c.value).sum::<i128>()
    }

    pub fn holds(&self) -> bool {
        self.s_an.sum.value == self.rhs()
    }
}

pub fn decompose(x: u64, window: &Window, budget: Budget) -> Result<Decomposition> {
    let s_an = s_an(x, window, budget)?;
    let main = main_term(x, window, budget)?;
    let contributions = modulus_divisors(x)
        .into_iter()
        .map(|f| r_f(x, f, window, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition {
        s_an,
        main,
        contributions,
    })
}
