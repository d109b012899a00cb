//! Randomized invariants. Each property pins an identity the library relies
//! on and lets proptest hunt for counterexamples in the valid domain.

use bias_moments::constant_j::{constant_j_moment, ConstantJTables};
use bias_moments::dirichlet::{
    character_sum_squares, character_sum_squares_geometric, m2_decomposed, m2_direct,
};
use bias_moments::elliptic::{
    evaluate_record, family_moments_brute_batch, fiber_profile, singular_fiber_count, FamilyId,
    FamilySpec,
};
use bias_moments::modular::{
    euler_phi, jacobi, legendre_by_euler, legendre_symbol, linear_legendre_sum,
    linear_legendre_sum_brute, moebius, quadratic_legendre_sum, quadratic_legendre_sum_brute,
    GaussKind, LegendreTable, PrimeModulus,
};
use bias_moments::petersson::{
    kloosterman, ramanujan_sum, ramanujan_sum_exponential, BumpFunction,
};
use proptest::prelude::*;

const PRIMES_TO_97: &[u64] = &[
    5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];
const PRIMES_TO_61: &[u64] = &[5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61];
const ODD_Q: &[u64] = &[3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

fn prime_to_97() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES_TO_97)
}

fn prime_to_61() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES_TO_61)
}

fn nonzero(v: i64) -> i64 {
    if v == 0 {
        1
    } else {
        v
    }
}

/// Registry tuple with the globally-nonzero slots patched, so only p ∈ {5, 7}
/// can fail a hypothesis.
fn linear_family() -> impl Strategy<Value = FamilySpec> {
    (
        0..4usize,
        prop::array::uniform5(-9..=9i64),
    )
        .prop_map(|(which, raw)| {
            let mut v = raw.to_vec();
            let (id, nz): (FamilyId, &[usize]) = match which {
                0 => (FamilyId::Fam1, &[0, 2]),
                1 => (FamilyId::Fam2, &[0, 3]),
                2 => (FamilyId::Fam3, &[0, 2, 3]),
                _ => (FamilyId::Fam4, &[0, 1, 3]),
            };
            for &i in nz {
                v[i] = nonzero(v[i]);
            }
            v.truncate(id.param_count());
            FamilySpec::registry(id, v).expect("arity is right by construction")
        })
}

fn catalog_row() -> impl Strategy<Value = FamilySpec> {
    prop::sample::select(
        FamilyId::ALL
            .iter()
            .copied()
            .filter(|id| id.param_count() == 0)
            .collect::<Vec<_>>(),
    )
    .prop_map(|id| FamilySpec::registry(id, Vec::new()).expect("no params"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_family_moment_routes_agree(fam in linear_family(), p in prime_to_97()) {
        let pm = PrimeModulus::new(p).unwrap();
        let first = evaluate_record(&fam, 1, pm, false).unwrap();
        let second = evaluate_record(&fam, 2, pm, false).unwrap();
        prop_assert_eq!(first.skipped, second.skipped);
        if !first.skipped {
            prop_assert!(first.consistent());
            prop_assert_eq!(first.brute, Some(0));
            prop_assert!(second.consistent());
            prop_assert!(second.brute.is_some() && second.semi_analytic.is_some()
                && second.closed_form.is_some());
        }
    }

    #[test]
    fn hasse_bound_holds_fiberwise(fam in linear_family(), p in prime_to_97()) {
        let pm = PrimeModulus::new(p).unwrap();
        if fam.hypothesis_check(pm).is_err() {
            return Ok(());
        }
        let bound = 2.0 * (p as f64).sqrt();
        for fp in fiber_profile(&fam, pm).unwrap() {
            prop_assert!((fp.trace as f64).abs() <= bound,
                "p={} t={} trace {} breaks the Hasse bound", p, fp.t, fp.trace);
            if fp.singular {
                prop_assert!(fp.trace.abs() <= 1,
                    "p={} t={}: singular fiber trace {}", p, fp.t, fp.trace);
            }
        }
    }

    #[test]
    fn constant_j_prediction_matches_brute(
        p in prime_to_61(),
        kind in prop::sample::select(&[GaussKind::J0, GaussKind::J1728][..]),
        coeff in 1..=10i64,
        r in 0..=7u32,
        k in 0..=6u32,
    ) {
        if coeff as u64 % p == 0 {
            return Ok(());
        }
        let pm = PrimeModulus::new(p).unwrap();
        let tables = ConstantJTables::build(pm).unwrap();
        let predicted = constant_j_moment(kind, coeff, r, k, pm).unwrap();
        let actual = tables.moment_brute(kind, coeff, r, k).unwrap();
        prop_assert!(predicted.matches(actual),
            "kind={:?} p={} coeff={} r={} k={}: {:?} vs {}", kind, p, coeff, r, k, predicted, actual);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn catalog_row_moment_routes_agree(fam in catalog_row(), p in prime_to_61()) {
        let pm = PrimeModulus::new(p).unwrap();
        for k in [1u32, 2] {
            let rec = evaluate_record(&fam, k, pm, false).unwrap();
            prop_assert!(!rec.skipped);
            prop_assert!(rec.consistent(), "row {:?} p={} k={}", fam.registry_id(), p, k);
        }
    }

    #[test]
    fn zeroth_moment_counts_fibers(fam in catalog_row(), p in prime_to_61()) {
        let pm = PrimeModulus::new(p).unwrap();
        let expected = if fam.is_two_parameter() {
            (p as i128) * (p as i128)
        } else {
            p as i128
        };
        let brute = family_moments_brute_batch(&fam, &[0], pm, false).unwrap()[0];
        prop_assert_eq!(brute, expected);
        if fam.is_two_parameter() {
            prop_assert_eq!(singular_fiber_count(&fam, pm).unwrap(), p);
        }
    }
}

proptest! {
    #[test]
    fn jacobi_is_completely_multiplicative(a in -60..=60i64, b in -60..=60i64, n in 0..=60u64) {
        let n = 2 * n + 1;
        prop_assert_eq!(jacobi(a * b, n), jacobi(a, n) * jacobi(b, n));
    }

    #[test]
    fn legendre_paths_agree(a in -120..=120i64, p in prime_to_97()) {
        let pm = PrimeModulus::new(p).unwrap();
        let table = LegendreTable::build(pm);
        let s = legendre_symbol(a, pm);
        prop_assert_eq!(s, legendre_by_euler(a, pm));
        prop_assert_eq!(s, table.chi_i64(a) as i32);
        prop_assert_eq!(s, jacobi(a, p));
    }

    #[test]
    fn linear_character_sum_vanishes(a in -30..=30i64, b in -30..=30i64, p in prime_to_97()) {
        let pm = PrimeModulus::new(p).unwrap();
        if pm.reduce(a) == 0 {
            return Ok(());
        }
        prop_assert_eq!(linear_legendre_sum(a, b, pm).unwrap(), 0);
        prop_assert_eq!(linear_legendre_sum_brute(a, b, pm), 0);
    }

    #[test]
    fn quadratic_character_sum_closed_form(
        a in -20..=20i64, b in -20..=20i64, c in -20..=20i64, p in prime_to_97(),
    ) {
        let pm = PrimeModulus::new(p).unwrap();
        if pm.reduce(a) == 0 {
            return Ok(());
        }
        prop_assert_eq!(
            quadratic_legendre_sum(a, b, c, pm).unwrap(),
            quadratic_legendre_sum_brute(a, b, c, pm)
        );
    }

    #[test]
    fn character_square_sum_paths_agree(
        q in prop::sample::select(ODD_Q),
        p in prime_to_97(),
    ) {
        prop_assert_eq!(
            character_sum_squares(q, p).unwrap(),
            character_sum_squares_geometric(q, p).unwrap()
        );
    }

    #[test]
    fn euler_phi_is_multiplicative(n in 1..=1500u64, m in 1..=1500u64) {
        fn gcd(mut a: u64, mut b: u64) -> u64 {
            while b != 0 {
                let t = a % b;
                a = b;
                b = t;
            }
            a
        }
        if gcd(n, m) == 1 {
            prop_assert_eq!(euler_phi(n * m), euler_phi(n) * euler_phi(m));
        }
    }

    #[test]
    fn moebius_sum_detects_one(n in 1..=4000u64) {
        let total: i64 = (1..=n).filter(|d| n % d == 0).map(moebius).sum();
        prop_assert_eq!(total, i64::from(n == 1));
    }

    #[test]
    fn ramanujan_paths_agree(m in 1..=300u64, c in 1..=300u64) {
        let int = ramanujan_sum(m, c).unwrap() as f64;
        let exp = ramanujan_sum_exponential(m, c).unwrap();
        prop_assert!((int - exp).abs() < 1e-6, "R({};{}) {} vs {}", m, c, int, exp);
    }

    #[test]
    fn kloosterman_is_symmetric(m in 1..=20u64, n in 1..=20u64, c in 1..=400u64) {
        let a = kloosterman(m, n, c).unwrap();
        let b = kloosterman(n, m, c).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "S({m},{n};{c}) {a} vs {b}");
    }

    #[test]
    fn bump_function_is_a_mollifier(x in -0.5..=1.5f64) {
        let bump = BumpFunction::standard();
        let (lo, hi) = bump.support();
        let v = bump.eval(x);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 1.0 + 1e-12);
        if x <= lo || x >= hi {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert_eq!(bump.derivative(0, x).unwrap(), v);
        for order in 1..=3u32 {
            prop_assert!(bump.derivative(order, x).unwrap().is_finite());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirichlet_moment_paths_agree(
        q in prop::sample::select(&ODD_Q[1..]),
        x in 50..=3000u64,
    ) {
        let direct = m2_direct(q, x).unwrap();
        let dec = m2_decomposed(q, x).unwrap();
        prop_assert_eq!(dec.exact, direct);
        let f = *direct.numer() as f64 / *direct.denom() as f64;
        prop_assert!((f - dec.total).abs() <= 1e-12);
    }
}
