//! Half-open integer windows `(a, a + len]`, enumeration budgets, and the
//! shared count/histogram report.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Work items handed to one rayon task.
pub(crate) const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    #[serde(with = "crate::decimal")]
    pub a: BigUint,
    #[serde(with = "crate::decimal")]
    pub n_len: BigUint,
}

impl Window {
    pub fn new(a: impl Into<BigUint>, n_len: impl Into<BigUint>) -> Self {
        Window {
            a: a.into(),
            n_len: n_len.into(),
        }
    }

    /// `(0, n]`
    pub fn initial(n: impl Into<BigUint>) -> Self {
        Window::new(BigUint::zero(), n)
    }

    pub fn end(&self) -> BigUint {
        &self.a + &self.n_len
    }

    pub fn is_empty(&self) -> bool {
        self.n_len.is_zero()
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        *n > self.a && *n <= self.end()
    }

    /// Length as a machine word. Windows longer than `u64::MAX` are never
    /// enumerable, so they surface as a budget failure.
    pub fn len_u64(&self) -> Result<u64> {
        self.n_len.to_u64().ok_or(Error::BudgetExceeded {
            needed: u128::MAX,
            budget: u64::MAX,
        })
    }

    /// All members `m = residue (mod modulus)` of the window.
    pub fn progression(&self, modulus: u64, residue: u64) -> Result<Progression> {
        Progression::new(self, modulus, residue)
    }
}

/// Cap on modular-symbol evaluations for one call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(100_000_000);

    pub fn charge(&self, needed: u128) -> Result<()> {
        if needed > self.0 as u128 {
            return Err(Error::BudgetExceeded {
                needed,
                budget: self.0,
            });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

/// The terms `first + k * modulus`, `0 <= k < count`, of a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progression {
    pub first: BigUint,
    pub modulus: u64,
    pub count: u64,
    first_u64: Option<u64>,
}

impl Progression {
    fn new(window: &Window, modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 {
            return crate::error::invalid("progression modulus must be positive");
        }
        let len = window.len_u64()?;
        let a_mod = (&window.a % modulus).to_u64().unwrap();
        let r = residue % modulus;
        // smallest t >= 1 with a + t = r (mod modulus)
        let t = ((r + modulus - a_mod % modulus + modulus - 1) % modulus) + 1;
        let count = if t > len { 0 } else { (len - t) / modulus + 1 };
        let first = &window.a + t;
        let last_fits = (&first + (count.saturating_sub(1) as u128 * modulus as u128))
            .to_u64()
            .is_some();
        Ok(Progression {
            first_u64: if last_fits { first.to_u64() } else { None },
            first,
            modulus,
            count,
        })
    }

    pub fn value(&self, k: u64) -> BigUint {
        &self.first + (k as u128 * self.modulus as u128)
    }

    /// `Some` when every term fits a `u64`.
    pub fn value_u64(&self, k: u64) -> Option<u64> {
        self.first_u64.map(|f| f + k * self.modulus)
    }

    /// Residue of the `k`-th term modulo `p`.
    pub fn residue(&self, k: u64, p: u64) -> u64 {
        let base = (&self.first % p).to_u64().unwrap();
        ((base as u128 + k as u128 * (self.modulus % p) as u128) % p as u128) as u64
    }

    pub fn cursor<'a>(&self, primes: &'a [u64], k: u64) -> Cursor<'a> {
        Cursor {
            primes,
            residues: primes.iter().map(|&p| self.residue(k, p)).collect(),
            strides: primes.iter().map(|&p| self.modulus % p).collect(),
        }
    }

    /// Map each chunk of term indices in parallel and fold the results in
    /// index order, so the outcome does not depend on the thread count.
    pub fn par_fold<T, F, R>(&self, map: F, identity: T, reduce: R) -> T
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
        R: Fn(T, T) -> T + Sync,
    {
        let chunks = self.count.div_ceil(CHUNK);
        let parts: Vec<T> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                map(lo, (lo + CHUNK).min(self.count))
            })
            .collect();
        parts.into_iter().fold(identity, reduce)
    }
}

/// Residues of consecutive progression terms modulo a list of primes.
pub struct Cursor<'a> {
    pub primes: &'a [u64],
    pub residues: Vec<u64>,
    strides: Vec<u64>,
}

impl Cursor<'_> {
    #[inline]
    pub fn advance(&mut self) {
        for ((r, &s), &p) in self.residues.iter_mut().zip(&self.strides).zip(self.primes) {
            *r += s;
            if *r >= p {
                *r -= p;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    #[serde(with = "crate::decimal")]
    pub start: BigUint,
    #[serde(with = "crate::decimal")]
    pub end: BigUint,
    pub count: u64,
    pub model: f64,
}

/// Exact counts in a window set against a density model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub window: Window,
    /// Members of the proper set (pseudosquares or pseudopowers).
    pub count: u64,
    /// Members of the closure that also admits squares or true powers.
    pub closure_count: u64,
    pub model_density: f64,
    pub model_count: f64,
    pub histogram: Vec<Bin>,
}

impl CountReport {
    pub fn ratio_to_model(&self) -> f64 {
        self.count as f64 / self.model_count
    }
}

/// Bin boundaries `a + floor(i * len / bins)`.
#[derive(Debug, Clone)]
pub(crate) struct Binning {
    len: u64,
    bins: u64,
}

impl Binning {
    pub fn new(len: u64, bins: u64) -> Result<Self> {
        if bins == 0 {
            return crate::error::invalid("bins must be positive");
        }
        Ok(Binning { len, bins })
    }

    fn edge(&self, i: u64) -> u64 {
        (i as u128 * self.len as u128 / self.bins as u128) as u64
    }

    /// Bin of a member at offset `t` in `[1, len]` from the window start.
    #[inline]
    pub fn index(&self, t: u64) -> usize {
        ((t as u128 * self.bins as u128).div_ceil(self.len as u128) - 1) as usize
    }

    pub fn empty(&self) -> Vec<u64> {
        vec![0; self.bins as usize]
    }

    pub fn into_bins(self, window: &Window, counts: Vec<u64>, density: f64) -> Vec<Bin> {
        counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| {
                let (lo, hi) = (self.edge(i as u64), self.edge(i as u64 + 1));
                Bin {
                    start: &window.a + lo,
                    end: &window.a + hi,
                    count,
                    model: (hi - lo) as f64 * density,
                }
            })
            .collect()
    }
}

pub(crate) fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// `count` reproducible windows inside `(0, upper]`.
pub fn random_windows(seed: u64, count: usize, upper: u64) -> Vec<Window> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0..upper);
            let len = rng.gen_range(1..=upper - a);
            Window::new(a, len)
        })
        .collect()
}
