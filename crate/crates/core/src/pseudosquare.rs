//! x-pseudosquares: nonsquare `n = 1 (mod 8)` that are quadratic residues
//! modulo every odd prime up to `x`.
//!
//! The closure `S̄_x` drops the nonsquare condition, so it also holds the
//! squares coprime to `M(x)`. Character-sum identities are stated for the
//! closure and the counts below report both.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    self, is_perfect_square, is_perfect_square_u64, jacobi_biguint, PrimeBasis, PrimeStream, Symbol,
};
use crate::error::{invalid, Error, Result};
use crate::window::{add_counts, Binning, Budget, CountReport, Window};
use crate::EULER_GAMMA;

/// Default number of `n = 1 (mod 8)` candidates per search segment.
pub const DEFAULT_SEGMENT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolVector {
    #[serde(with = "crate::decimal")]
    pub n: BigUint,
    pub basis: Vec<u64>,
    pub symbols: Vec<Symbol>,
    pub residue_mod8: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SieveSearch,
    Pigeonhole,
    Enumeration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudosquareRecord {
    #[serde(with = "crate::decimal")]
    pub n: BigUint,
    pub x: u64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub x: u64,
    pub euler_gamma: f64,
    pub predicted_density: f64,
}

impl DensityModel {
    /// `1 / (2^(pi(x)+1) e^gamma ln x)`
    pub fn new(x: u64) -> Self {
        let pi = PrimeBasis::new(x).pi_x as i32;
        DensityModel {
            x,
            euler_gamma: EULER_GAMMA,
            predicted_density: 1.0 / (2f64.powi(pi + 1) * EULER_GAMMA.exp() * (x as f64).ln()),
        }
    }
}

pub fn symbol_vector(n: &BigUint, x: u64) -> SymbolVector {
    let basis = PrimeBasis::new(x).odd_primes().to_vec();
    let symbols = basis
        .iter()
        .map(|&p| jacobi_biguint(n, p).expect("odd prime modulus"))
        .collect();
    SymbolVector {
        n: n.clone(),
        basis,
        symbols,
        residue_mod8: (n % 8u32).to_u8().unwrap(),
    }
}

/// Membership in `S̄_x`: `n = 1 (mod 8)` and `(n/p) = +1` for odd `p <= x`.
pub fn in_closure(n: &BigUint, x: u64) -> bool {
    let v = symbol_vector(n, x);
    v.residue_mod8 == 1 && v.symbols.iter().all(|&s| s == Symbol::Plus)
}

pub fn is_pseudosquare(n: &BigUint, x: u64) -> bool {
    in_closure(n, x) && !is_perfect_square(n)
}

/// `allowed[r]` iff `r` is a nonzero quadratic residue mod `p`.
fn residue_table(p: u64) -> Vec<bool> {
    let mut t = vec![false; p as usize];
    for r in 1..p {
        t[(r * r % p) as usize] = true;
    }
    t
}

fn check_threshold(x: u64) -> Result<()> {
    if x < 3 {
        return invalid(format!("threshold must be at least 3, got {x}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub search_bound: Option<u64>,
    pub segment: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            search_bound: None,
            segment: DEFAULT_SEGMENT,
        }
    }
}

/// Least x-pseudosquare `N_x` with `N_x <= search_bound`.
pub fn least_pseudosquare(x: u64, search_bound: Option<u64>) -> Result<PseudosquareRecord> {
    least_pseudosquare_with(
        x,
        SearchOptions {
            search_bound,
            ..Default::default()
        },
    )
}

/// Segmented scan over `n = 8k + 1`. Each odd prime `p <= x` crosses off the
/// classes of `k mod p` that make `n` a nonresidue or a multiple of `p`;
/// survivors are checked for squareness last.
pub fn least_pseudosquare_with(x: u64, opts: SearchOptions) -> Result<PseudosquareRecord> {
    check_threshold(x)?;
    let segment = opts.segment.max(1);
    let bound = opts.search_bound.unwrap_or(u64::MAX - 8);
    let max_k = bound.saturating_sub(1) / 8; // n = 8k+1 <= bound
    let basis = PrimeBasis::new(x);
    // classes of k mod p to strike out
    let strikes: Vec<(u64, Vec<u64>)> = basis
        .odd_primes()
        .iter()
        .map(|&p| {
            let qr = residue_table(p);
            let bad = (0..p)
                .filter(|&k| !qr[((8 * k + 1) % p) as usize])
                .collect();
            (p, bad)
        })
        .collect();

    let scan_segment = |k0: u64| -> Option<u64> {
        if k0 > max_k {
            return None;
        }
        let width = segment.min(max_k - k0 + 1) as usize;
        let mut alive = vec![true; width];
        for (p, bad) in &strikes {
            let p = *p;
            let base = k0 % p;
            for &c in bad {
                let mut j = ((c + p - base) % p) as usize;
                while j < width {
                    alive[j] = false;
                    j += p as usize;
                }
            }
        }
        alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(j, _)| 8 * (k0 + j as u64) + 1)
            .find(|&n| !is_perfect_square_u64(n))
    };

    let batch = rayon::current_num_threads().max(1) as u64;
    let mut k0 = 0u64;
    while k0 <= max_k {
        let starts: Vec<u64> = (0..batch)
            .map(|i| k0.saturating_add(i * segment))
            .filter(|&s| s <= max_k)
            .collect();
        let hit = starts.par_iter().filter_map(|&s| scan_segment(s)).min();
        if let Some(n) = hit {
            return Ok(PseudosquareRecord {
                n: BigUint::from(n),
                x,
                provenance: Provenance::SieveSearch,
            });
        }
        k0 = match k0.checked_add(batch * segment) {
            Some(k) => k,
            None => break,
        };
    }
    Err(Error::SearchExhausted {
        bound: bound.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PigeonholeOutcome {
    pub record: PseudosquareRecord,
    pub factors: (u64, u64),
    /// Whether both primes lie in `(x, X]` with `X = 2^pi(x) x`.
    pub within_bound: bool,
    #[serde(with = "crate::decimal")]
    pub bound_x: BigUint,
    pub primes_scanned: u64,
}

/// Scan primes `l > x` upward, keyed by their symbol vector and residue
/// mod 8; the first two primes sharing a key multiply to a pseudosquare.
pub fn pigeonhole_pseudosquare(x: u64, scan_limit: Option<u64>) -> Result<PigeonholeOutcome> {
    check_threshold(x)?;
    let basis = PrimeBasis::new(x);
    let odd = basis.odd_primes();
    let bound_x = BigUint::from(x) << basis.pi_x;
    let mut seen: HashMap<(Vec<bool>, u8), u64> = HashMap::new();
    let mut scanned = 0u64;
    for l in PrimeStream::after(x) {
        if scan_limit.is_some_and(|lim| l > lim) {
            break;
        }
        scanned += 1;
        let symbols: Vec<bool> = odd
            .iter()
            .map(|&p| arith::jacobi_reduced(l % p, p) == 1)
            .collect();
        let key = (symbols, (l % 8) as u8);
        if let Some(&l1) = seen.get(&key) {
            let n = BigUint::from(l1) * l;
            debug_assert!(is_pseudosquare(&n, x));
            return Ok(PigeonholeOutcome {
                record: PseudosquareRecord {
                    n,
                    x,
                    provenance: Provenance::Pigeonhole,
                },
                factors: (l1, l),
                within_bound: BigUint::from(l) <= bound_x,
                bound_x,
                primes_scanned: scanned,
            });
        }
        seen.insert(key, l);
    }
    Err(Error::SearchExhausted {
        bound: scan_limit.map_or_else(|| "u64::MAX".into(), |l| l.to_string()),
    })
}

/// Tally of `S̄_x` and `S_x` over a window, binned by position.
pub(crate) struct ClosureScan {
    pub closure: u64,
    pub proper: u64,
    pub bins: Vec<u64>,
}

pub(crate) fn scan_closure(
    x: u64,
    window: &Window,
    bins: u64,
    budget: Budget,
) -> Result<ClosureScan> {
    let basis = PrimeBasis::new(x);
    let odd = basis.odd_primes();
    let prog = window.progression(8, 1)?;
    budget.charge(prog.count as u128 * odd.len().max(1) as u128)?;
    let len = window.len_u64()?;
    let binning = Binning::new(len.max(1), bins)?;
    let tables: Vec<Vec<bool>> = odd.iter().map(|&p| residue_table(p)).collect();
    let base_t = (&prog.first - &window.a).to_u64().unwrap_or(0);

    let (closure, proper, counts) = prog.par_fold(
        |lo, hi| {
            let mut cur = prog.cursor(odd, lo);
            let mut closure = 0u64;
            let mut proper = 0u64;
            let mut counts = binning.empty();
            for k in lo..hi {
                let member = cur
                    .residues
                    .iter()
                    .zip(&tables)
                    .all(|(&r, t)| t[r as usize]);
                if member {
                    closure += 1;
                    let square = match prog.value_u64(k) {
                        Some(n) => is_perfect_square_u64(n),
                        None => is_perfect_square(&prog.value(k)),
                    };
                    if !square {
                        proper += 1;
                        counts[binning.index(base_t + k * 8)] += 1;
                    }
                }
                cur.advance();
            }
            (closure, proper, counts)
        },
        (0, 0, binning.empty()),
        |a, b| (a.0 + b.0, a.1 + b.1, add_counts(a.2, b.2)),
    );
    Ok(ClosureScan {
        closure,
        proper,
        bins: counts,
    })
}

/// Exact pseudosquare count in `window` with a histogram against the
/// density model `1 / (2^(pi(x)+1) e^gamma ln x)`.
pub fn count_pseudosquares(
    x: u64,
    window: &Window,
    bins: u64,
    budget: Budget,
) -> Result<CountReport> {
    check_threshold(x)?;
    let scan = scan_closure(x, window, bins, budget)?;
    let model = DensityModel::new(x);
    let len = window.len_u64()?;
    let histogram =
        Binning::new(len.max(1), bins)?.into_bins(window, scan.bins, model.predicted_density);
    Ok(CountReport {
        window: window.clone(),
        count: scan.proper,
        closure_count: scan.closure,
        model_density: model.predicted_density,
        model_count: len as f64 * model.predicted_density,
        histogram,
    })
}

/// `prod (p - 1) / 2` over odd `p <= x`: the size of `S̄_x` in one period
/// `(0, 8 M_2(x)]`.
pub fn period_closure_count(x: u64) -> BigUint {
    PrimeBasis::new(x)
        .odd_primes()
        .iter()
        .fold(BigUint::one(), |acc, &p| acc * ((p - 1) / 2))
}

/// The period window `(0, 8 M_2(x)]`.
pub fn period_window(x: u64) -> Window {
    Window::initial(PrimeBasis::new(x).m2_x * 8u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn naive_least(x: u64) -> u64 {
        let odd: Vec<u64> = arith::sieve_primes(x).into_iter().skip(1).collect();
        (1u64..)
            .step_by(8)
            .find(|&n| {
                odd.iter().all(|&p| {
                    let r = n % p;
                    r != 0 && arith::pow_mod(r, (p - 1) / 2, p) == 1
                }) && !is_perfect_square_u64(n)
            })
            .unwrap()
    }

    #[test]
    fn symbol_vectors() {
        let v = symbol_vector(&big(73), 5);
        assert_eq!(v.basis, vec![3, 5]);
        assert_eq!(v.symbols, vec![Symbol::Plus, Symbol::Minus]);
        assert_eq!(v.residue_mod8, 1);
        let v = symbol_vector(&big(1), 7);
        assert!(v.symbols.iter().all(|&s| s == Symbol::Plus));
        let v = symbol_vector(&big(241), 5);
        assert_eq!(v.symbols, vec![Symbol::Plus, Symbol::Plus]);
    }

    #[test]
    fn recognition() {
        assert!(is_pseudosquare(&big(73), 3));
        assert!(!is_pseudosquare(&big(49), 3));
        assert!(is_pseudosquare(&big(241), 5));
        assert!(!is_pseudosquare(&big(73), 5));
        assert!(!is_pseudosquare(&big(0), 3));
    }

    #[test]
    fn least_values() {
        assert_eq!(least_pseudosquare(3, None).unwrap().n, big(73));
        assert_eq!(least_pseudosquare(5, None).unwrap().n, big(241));
        assert_eq!(least_pseudosquare(7, None).unwrap().n, big(1009));
        for x in [3, 5, 7, 11, 13] {
            assert_eq!(least_pseudosquare(x, None).unwrap().n, big(naive_least(x)));
        }
    }

    #[test]
    fn least_independent_of_segment() {
        for seg in [1, 3, 17, 1000] {
            let opts = SearchOptions {
                search_bound: None,
                segment: seg,
            };
            assert_eq!(least_pseudosquare_with(11, opts).unwrap().n, big(2641));
        }
    }

    #[test]
    fn search_bound_exhaustion() {
        assert!(matches!(
            least_pseudosquare(5, Some(240)),
            Err(Error::SearchExhausted { .. })
        ));
        assert_eq!(least_pseudosquare(5, Some(241)).unwrap().n, big(241));
        assert!(least_pseudosquare(2, None).is_err());
    }

    #[test]
    fn pigeonhole_small() {
        let out = pigeonhole_pseudosquare(3, None).unwrap();
        assert_eq!(out.factors, (5, 29));
        assert_eq!(out.record.n, big(145));
        assert!(!out.within_bound);
        assert_eq!(out.bound_x, big(12));
        assert_eq!(out.factors.0 % 8, out.factors.1 % 8);
        assert!(is_pseudosquare(&out.record.n, 3));
        assert!(matches!(
            pigeonhole_pseudosquare(3, Some(28)),
            Err(Error::SearchExhausted { .. })
        ));
    }

    #[test]
    fn counts_small_windows() {
        let r = count_pseudosquares(3, &Window::initial(120u32), 4, Budget::DEFAULT).unwrap();
        assert_eq!((r.count, r.closure_count), (2, 5));
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<u64>(), 2);
        assert!((r.model_count - 7.67).abs() < 0.01);
        let r = count_pseudosquares(5, &Window::initial(240u32), 1, Budget::DEFAULT).unwrap();
        assert_eq!((r.count, r.closure_count), (0, 4));
        let r = count_pseudosquares(5, &Window::new(7u32, 0u32), 3, Budget::DEFAULT).unwrap();
        assert_eq!((r.count, r.closure_count), (0, 0));
    }

    #[test]
    fn count_respects_budget() {
        let err = count_pseudosquares(5, &Window::initial(10_000u32), 1, Budget(10)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn period_counts() {
        for x in [3, 5, 7, 11] {
            let r = count_pseudosquares(x, &period_window(x), 1, Budget::DEFAULT).unwrap();
            assert_eq!(BigUint::from(r.closure_count), period_closure_count(x));
        }
    }

    #[test]
    fn density_model() {
        let m = DensityModel::new(3);
        let expect = 1.0 / (8.0 * EULER_GAMMA.exp() * 3f64.ln());
        assert!((m.predicted_density - expect).abs() < 1e-15);
    }
}
