mod common;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use pseudo_core::arith::{self, PrimeBasis, Symbol};
use pseudo_core::charsum::{self, BoundParams};
use pseudo_core::pseudopower;
use pseudo_core::pseudosquare;
use pseudo_core::{Budget, CountReport, Error, Window};

use common::*;

fn odd_modulus() -> impl Strategy<Value = u64> {
    (0u64..50_000).prop_map(|k| 2 * k + 1)
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(primes_upto(2000))
}

fn base() -> impl Strategy<Value = i64> {
    (-40i64..=40).prop_filter("|g| >= 2", |g| g.abs() >= 2)
}

fn big_window() -> impl Strategy<Value = Window> {
    (any::<u128>(), 0u32..4, 0u64..5000).prop_map(|(a, scale, len)| {
        let a = BigUint::from(a) << (64 * scale);
        Window::new(a, len)
    })
}

fn small_window(upper: u64) -> impl Strategy<Value = (u64, u64)> {
    (0..upper).prop_flat_map(move |a| (Just(a), 0..=(upper - a).min(20_000)))
}

fn squarefree_odd() -> impl Strategy<Value = u64> {
    (1u64..3000)
        .prop_map(|k| 2 * k + 1)
        .prop_filter("squarefree", |&q| {
            prime_factors(q).iter().all(|p| q % (p * p) != 0)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_multiplicative(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000, m in odd_modulus()) {
        let ab = arith::jacobi(a * b, m).unwrap();
        let prod = arith::jacobi(a, m).unwrap() * arith::jacobi(b, m).unwrap();
        prop_assert_eq!(ab, prod);
    }

    #[test]
    fn jacobi_depends_on_residue(a in any::<i64>(), m in odd_modulus()) {
        let reduced = a.rem_euclid(m as i64);
        prop_assert_eq!(arith::jacobi(a, m).unwrap(), arith::jacobi(reduced, m).unwrap());
        let big = num_bigint::BigInt::from(reduced) - num_bigint::BigInt::from(m) * num_bigint::BigInt::from(u128::MAX);
        prop_assert_eq!(arith::jacobi_big(&big, m).unwrap(), arith::jacobi(a, m).unwrap());
    }

    #[test]
    fn jacobi_matches_euler(a in any::<u32>(), p in small_prime()) {
        prop_assume!(p > 2);
        let want = legendre(a as u64, p);
        prop_assert_eq!(arith::jacobi(a as i64, p).unwrap().value() as i64, want);
    }

    #[test]
    fn jacobi_rejects_even_modulus(a in any::<i64>(), k in 0u64..1000) {
        prop_assert!(arith::jacobi(a, 2 * k).is_err());
    }

    #[test]
    fn order_index_matches_powering(g in base(), p in small_prime()) {
        prop_assume!(!base_divides(g, p));
        let (l, i) = arith::mul_order_index(g, p).unwrap();
        prop_assert_eq!((l, i), order_index(g, p));
        prop_assert_eq!(l * i, p - 1);
    }

    #[test]
    fn discrete_log_inverts(p in small_prime(), n in 1u64..1_000_000) {
        prop_assume!(n % p != 0);
        let root = arith::primitive_root(p).unwrap();
        let e = arith::discrete_log(p, root, n as i64).unwrap();
        prop_assert!(e < p - 1);
        prop_assert_eq!(powmod(root, e, p), n % p);
    }

    #[test]
    fn power_classification(n in 1u64..5_000_000, g in base()) {
        let c = arith::classify_power(&BigUint::from(n), g).unwrap();
        prop_assert_eq!(c.is_square, is_square(n));
        prop_assert_eq!(c.is_g_power, is_power_of(n, g));
    }

    #[test]
    fn pseudosquare_monotone_filtering(k in 0u64..2_000_000, xi in 0usize..8, xj in 0usize..8) {
        let xs = [3u64, 5, 7, 11, 13, 17, 19, 23];
        let (lo, hi) = (xs[xi.min(xj)], xs[xi.max(xj)]);
        let n = BigUint::from(8 * k + 1);
        if pseudosquare::is_pseudosquare(&n, hi) {
            prop_assert!(pseudosquare::is_pseudosquare(&n, lo));
        }
        let n64 = 8 * k + 1;
        prop_assert_eq!(pseudosquare::is_pseudosquare(&n, lo), in_sbar(n64, lo) && !is_square(n64));
    }

    #[test]
    fn symbol_vector_entries(n in any::<u64>(), x in 3u64..60) {
        let v = pseudosquare::symbol_vector(&BigUint::from(n), x);
        prop_assert_eq!(v.residue_mod8 as u64, n % 8);
        prop_assert_eq!(&v.basis, &odd_primes_upto(x));
        for (p, s) in v.basis.iter().zip(&v.symbols) {
            prop_assert_eq!(s.value() as i64, legendre(n, *p));
        }
    }

    #[test]
    fn progression_enumerates_window(w in big_window(), modulus in 1u64..500, residue in any::<u64>()) {
        let prog = w.progression(modulus, residue).unwrap();
        let len = w.n_len.to_u64().unwrap();
        let a_mod = (&w.a % modulus).to_u64().unwrap();
        let expected = (1..=len).filter(|t| (a_mod + t) % modulus == residue % modulus).count() as u64;
        prop_assert_eq!(prog.count, expected);
        for k in [0, prog.count / 2, prog.count.saturating_sub(1)] {
            if k < prog.count {
                let v = prog.value(k);
                prop_assert!(w.contains(&v));
                prop_assert_eq!((&v % modulus).to_u64().unwrap(), residue % modulus);
            }
        }
    }

    #[test]
    fn squarecount_identity((a, len) in small_window(2_000_000), xi in 0usize..5) {
        let x = [3u64, 5, 7, 11, 13][xi];
        let r = charsum::s_an(x, &Window::new(a, len), Budget::DEFAULT).unwrap();
        prop_assert!(r.identity_holds());
        prop_assert_eq!(r.sum.value, naive_s_an(x, a, len));
    }

    #[test]
    fn squarecount_far_windows(w in big_window(), xi in 0usize..4) {
        let x = [3u64, 5, 7, 11][xi];
        let r = charsum::s_an(x, &w, Budget::DEFAULT).unwrap();
        prop_assert!(r.identity_holds());
    }

    #[test]
    fn decomposition_components((a, len) in small_window(500_000), xi in 0usize..3) {
        let x = [3u64, 5, 7][xi];
        let d = charsum::decompose(x, &Window::new(a, len), Budget::DEFAULT).unwrap();
        prop_assert!(d.holds());
        let m2: u64 = odd_primes_upto(x).iter().product();
        let main = (a + 1..=a + len).filter(|&m| m % 8 == 1 && gcd(m, m2) == 1).count() as u64;
        prop_assert_eq!(d.main.count, main);
        for c in &d.contributions {
            prop_assert_eq!(c.value, naive_r_f(x, c.modulus_f, a, len));
            prop_assert!(charsum::pv_bounds(x, c.modulus_f).unwrap().admits_rf(c.value));
        }
    }

    #[test]
    fn char_sum_vanishes_on_periods(q in squarefree_odd(), a in any::<u64>(), reps in 1u64..4) {
        let a = a >> 2;
        let r = charsum::char_sum(q, &Window::new(a, q * reps), Budget::DEFAULT).unwrap();
        prop_assert_eq!(r.value, 0);
    }

    #[test]
    fn char_sum_oracle_and_bound(q in squarefree_odd(), (a, len) in small_window(1_000_000)) {
        let r = charsum::char_sum(q, &Window::new(a, len), Budget::DEFAULT).unwrap();
        prop_assert_eq!(r.value, naive_char_sum(q, a, len));
        prop_assert!(r.value.unsigned_abs() as u64 <= r.terms);
        prop_assert!(charsum::pv_bounds(0, q).unwrap().admits_single(r.value));
    }

    #[test]
    fn gr_accepts_exactly_admissible(q in 1u64..40_000, n_exp in 0u32..80, r in 0u32..6) {
        let n_len = BigUint::from(10u32).pow(n_exp);
        let fs = prime_factors(q);
        let admissible = q > 1
            && r >= 1
            && fs.iter().all(|&p| q % (p * p) != 0)
            && fs.iter().all(|&p| BigUint::from(p).pow(9u32) <= n_len)
            && n_len.pow(r) >= BigUint::from(q).pow(3u32);
        let got = charsum::gr_bound(&BoundParams { q, n_len, r });
        match got {
            Ok(b) => {
                prop_assert!(admissible);
                prop_assert!(b.value > 0.0);
                prop_assert_eq!(b.vacuous, b.relative >= 1.0);
            }
            Err(Error::Precondition(_)) => prop_assert!(!admissible),
            Err(e) => prop_assert!(false, "unexpected {e:?}"),
        }
    }

    #[test]
    fn choose_r_is_largest_admissible(log_x in 0.0f64..5000.0) {
        for variant in [charsum::RVariant::Theorem1, charsum::RVariant::Theorem3] {
            let c = charsum::choose_r_for_log(log_x, variant);
            prop_assert!(c.r >= 1);
            let fits = |r: u32| (r as f64) * 2f64.powi(r as i32) + 2.0 <= c.ceiling;
            if !c.degenerate {
                prop_assert!(fits(c.r));
                prop_assert!(!fits(c.r + 1));
            } else {
                prop_assert_eq!(c.r, 1);
            }
        }
    }

    #[test]
    fn closure_membership(n in 1u64..10_000_000, g in base(), x in 2u64..24) {
        let o = PbarOracle::new(g, x, false);
        prop_assert_eq!(pseudopower::in_closure(&BigUint::from(n), g, x).unwrap(), o.contains(n));
        let ignoring = PbarOracle::new(g, x, true).contains(n) && !is_power_of(n, g);
        prop_assert_eq!(pseudopower::is_pseudopower(&BigUint::from(n), g, x, true).unwrap(), ignoring);
        let strict = o.contains(n) && !is_power_of(n, g);
        prop_assert_eq!(pseudopower::is_pseudopower(&BigUint::from(n), g, x, false).unwrap(), strict);
    }

    #[test]
    fn profile_products(g in base(), x in 2u64..200) {
        let p = pseudopower::power_profile(g, x).unwrap();
        prop_assert_eq!(&p.i_product * &p.l_product, p.totient());
        let expected: Vec<u64> = primes_upto(x).into_iter().filter(|&q| !base_divides(g, q)).collect();
        prop_assert_eq!(p.rows.iter().map(|r| r.p).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn subgroup_test_matches_index(p in prop::sample::select(odd_primes_upto(101)), g in base()) {
        prop_assume!(!base_divides(g, p));
        let (l, i) = order_index(g, p);
        let chi = pseudopower::build_character(p, i).unwrap();
        for n in 1..p {
            let by_power = powmod(n, l, p) == 1;
            prop_assert_eq!(by_power, chi.ind(n).unwrap() % i == 0);
            prop_assert_eq!(by_power, subgroup(g, p).contains(&n));
        }
    }

    #[test]
    fn pseudopower_window_count(g in base(), x in 2u64..14, (a, len) in small_window(200_000)) {
        let w = Window::new(a, len);
        let r = pseudopower::count_pseudopowers(g, x, &w, 4, Budget::DEFAULT).unwrap();
        let o = PbarOracle::new(g, x, false);
        let closure = (a + 1..=a + len).filter(|&n| o.contains(n)).count() as u64;
        let proper = (a + 1..=a + len).filter(|&n| o.contains(n) && !is_power_of(n, g)).count() as u64;
        prop_assert_eq!(r.closure_count, closure);
        prop_assert_eq!(r.count, proper);
        prop_assert_eq!(r.histogram.iter().map(|b| b.count).sum::<u64>(), proper);
    }

    #[test]
    fn pan_identity_windows(g in prop::sample::select(vec![2i64, 3, -3, 5, 6, 10]), x in 2u64..12, seed in any::<u64>()) {
        prop_assume!(x >= g.unsigned_abs());
        let m = primorial(x);
        let w = pseudo_core::window::random_windows(seed, 1, m).remove(0);
        let r = pseudopower::p_an_identity(g, x, &w, Budget::DEFAULT).unwrap();
        let (a, len) = (w.a.to_u64().unwrap(), w.n_len.to_u64().unwrap());
        prop_assert_eq!(r.direct, brute_pbar_count(g, x, a, len));
        prop_assert!(r.deviation() <= 1e-6 * r.terms.max(1) as f64);
    }

    #[test]
    fn pseudosquare_counts_and_bins((a, len) in small_window(300_000), bins in 1u64..20, xi in 0usize..4) {
        let x = [3u64, 5, 7, 11][xi];
        let r = pseudosquare::count_pseudosquares(x, &Window::new(a, len), bins, Budget::DEFAULT).unwrap();
        let closure = (a + 1..=a + len).filter(|&n| in_sbar(n, x)).count() as u64;
        let proper = (a + 1..=a + len).filter(|&n| in_sbar(n, x) && !is_square(n)).count() as u64;
        prop_assert_eq!(r.closure_count, closure);
        prop_assert_eq!(r.count, proper);
        prop_assert_eq!(r.histogram.len() as u64, bins);
        prop_assert_eq!(r.histogram.iter().map(|b| b.count).sum::<u64>(), proper);
        let model: f64 = r.histogram.iter().map(|b| b.model).sum();
        prop_assert!((model - r.model_count).abs() <= 1e-9 * r.model_count.max(1.0));
    }

    #[test]
    fn report_json_round_trip(w in big_window(), bins in 1u64..6) {
        let r = pseudosquare::count_pseudosquares(3, &w, bins, Budget::DEFAULT).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: CountReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert!(v["window"]["a"].is_string());
    }

    #[test]
    fn symbol_values(a in any::<i64>(), m in odd_modulus()) {
        let s = arith::jacobi(a, m).unwrap();
        prop_assert!(matches!(s, Symbol::Minus | Symbol::Zero | Symbol::Plus));
        prop_assert_eq!(s == Symbol::Zero, gcd(a.unsigned_abs() % m, m) != 1 && m > 1);
    }

    #[test]
    fn prime_basis_invariants(x in 0u64..5000) {
        let b = PrimeBasis::new(x);
        prop_assert_eq!(&b.primes, &primes_upto(x));
        prop_assert_eq!(b.pi_x, b.primes.len());
        let m: BigUint = b.primes.iter().map(|&p| BigUint::from(p)).product();
        prop_assert_eq!(&b.m_x, &m);
        if x >= 2 {
            prop_assert_eq!(&b.m2_x * 2u32, m);
        }
    }
}
