//! Mean squares of Dirichlet character sums over primes, and their exact
//! decomposition into prime-race terms.
//!
//! The central quantity for a modulus q is the averaged square
//! M₂ = (1/π(X)) (1/(q−2)) Σ_{p ≤ X} S(q, p) with
//! S(q, p) = Σ_{χ ≠ χ₀ mod q} χ(p)², an integer: q−2 when p ≡ ±1 mod q,
//! −1 for other p coprime to q, and 0 at p = q. Everything here is computed
//! in exact rational arithmetic, with the floating decomposition kept as a
//! separately evaluated path so the identity test is meaningful.

use crate::error::{Error, Result};
use crate::modular::{is_prime_u64, IndexTable, PrimeModulus, PrimeTable};
use num_rational::Ratio;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn validate_odd_prime(q: u64, what: &str) -> Result<()> {
    if q < 3 || q % 2 == 0 || !is_prime_u64(q) {
        return Err(Error::InvalidInput(format!(
            "{what} must be an odd prime, got {q}"
        )));
    }
    Ok(())
}

/// S(q, p) = Σ_{χ ≠ χ₀ mod q} χ(p)² by the orthogonality shortcut.
pub fn character_sum_squares(q: u64, p: u64) -> Result<i64> {
    validate_odd_prime(q, "modulus")?;
    let r = p % q;
    if r == 0 {
        return Ok(0);
    }
    if r == 1 || r == q - 1 {
        Ok(q as i64 - 2)
    } else {
        Ok(-1)
    }
}

/// Same sum evaluated as a geometric series in the character group: with g a
/// generator mod q and s = 2·ind_g(p) mod (q−1), the sum is q−2 when s = 0
/// and −1 otherwise. Must agree with [`character_sum_squares`] everywhere.
pub fn character_sum_squares_geometric(q: u64, p: u64) -> Result<i64> {
    validate_odd_prime(q, "modulus")?;
    let table = IndexTable::build(PrimeModulus::new(q)?);
    match table.index(p % q) {
        None => Ok(0),
        Some(ind) => {
            let s = (2 * ind as u64) % (q - 1);
            if s == 0 {
                Ok(q as i64 - 2)
            } else {
                Ok(-1)
            }
        }
    }
}

fn prime_table_to(x: u64) -> Result<PrimeTable> {
    let table = PrimeTable::build(x)?;
    if table.count(x)? == 0 {
        return Err(Error::EmptySweep(format!("no primes up to {x}")));
    }
    Ok(table)
}

/// M₂(q, X) as an exact rational by direct summation over primes.
pub fn m2_direct(q: u64, x: u64) -> Result<Ratio<i64>> {
    validate_odd_prime(q, "modulus")?;
    let table = prime_table_to(x)?;
    let mut sum = 0i64;
    for &p in table.primes() {
        sum += character_sum_squares(q, p)?;
    }
    let pi = table.count(x)? as i64;
    Ok(Ratio::new(sum, pi * (q as i64 - 2)))
}

/// Normalized prime-race term for the class a mod q:
/// E(X; q, a) = (φ(q)·π(X; q, a) − π(X)) · ln X / √X.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceStatistic {
    pub x: u64,
    pub q: u64,
    pub a: u64,
    pub pi_x: u64,
    pub count_in_class: u64,
    pub e_value: f64,
    /// Predicted race bias −1 + #{b mod q : b² ≡ a}: negative for
    /// quadratic non-residue classes, which run ahead.
    pub bias_constant: i64,
}

/// E(X; q, a) for any modulus q ≥ 3 (composite allowed) and a coprime to q.
pub fn race_e(x: u64, q: u64, a: u64) -> Result<RaceStatistic> {
    if q < 3 {
        return Err(Error::InvalidInput(format!("modulus must be ≥ 3, got {q}")));
    }
    if gcd(a % q, q) != 1 {
        return Err(Error::InvalidResidue(format!(
            "class {a} is not invertible mod {q}"
        )));
    }
    let table = prime_table_to(x)?;
    race_e_with(&table, x, q, a)
}

/// As [`race_e`] but reusing a prebuilt prime table.
pub fn race_e_with(table: &PrimeTable, x: u64, q: u64, a: u64) -> Result<RaceStatistic> {
    let a = a % q;
    if gcd(a, q) != 1 {
        return Err(Error::InvalidResidue(format!(
            "class {a} is not invertible mod {q}"
        )));
    }
    let pi_x = table.count(x)?;
    let cls = table.count_in_class(x, q, a)?;
    let phi = crate::modular::euler_phi(q);
    let diff = phi as i64 * cls as i64 - pi_x as i64;
    let xf = x as f64;
    let e_value = diff as f64 * xf.ln() / xf.sqrt();
    let squares = (0..q).filter(|b| (b * b) % q == a).count() as i64;
    Ok(RaceStatistic {
        x,
        q,
        a,
        pi_x,
        count_in_class: cls,
        e_value,
        bias_constant: squares - 1,
    })
}

/// M₂(q, X) reassembled from its race decomposition:
/// (1/(q−2)) · [1 + (√X/(π(X) ln X))(E(X;q,1) + E(X;q,−1)) + 1_{q≤X}/π(X)].
///
/// `total` follows the floating route through the E values; `exact` carries
/// the same decomposition in integer counters. Both must reproduce
/// [`m2_direct`]: the float to 1e−12, the rational identically.
#[derive(Debug, Clone, PartialEq)]
pub struct M2Decomposition {
    pub q: u64,
    pub x: u64,
    pub pi_x: u64,
    pub main_term: f64,
    pub race_term: f64,
    pub boundary_term: f64,
    pub total: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub exact: Ratio<i64>,
}

pub fn m2_decomposed(q: u64, x: u64) -> Result<M2Decomposition> {
    validate_odd_prime(q, "modulus")?;
    let table = prime_table_to(x)?;
    let pi_x = table.count(x)?;
    let e_plus = race_e_with(&table, x, q, 1)?;
    let e_minus = race_e_with(&table, x, q, q - 1)?;
    let boundary = u64::from(q <= x);
    let qm2 = q as f64 - 2.0;
    let pif = pi_x as f64;
    let xf = x as f64;
    let main_term = 1.0 / qm2;
    let race_term =
        xf.sqrt() / (pif * xf.ln()) * (e_plus.e_value + e_minus.e_value) / qm2;
    let boundary_term = boundary as f64 / (pif * qm2);
    let diff = |r: &RaceStatistic| {
        (q as i64 - 1) * r.count_in_class as i64 - pi_x as i64
    };
    let exact = Ratio::new(
        pi_x as i64 + diff(&e_plus) + diff(&e_minus) + boundary as i64,
        pi_x as i64 * (q as i64 - 2),
    );
    Ok(M2Decomposition {
        q,
        x,
        pi_x,
        main_term,
        race_term,
        boundary_term,
        total: main_term + race_term + boundary_term,
        e_plus: e_plus.e_value,
        e_minus: e_minus.e_value,
        exact,
    })
}

/// Mean square over the order-ℓ character subfamily mod q (q ≡ 1 mod ℓ):
/// the ℓ−1 nontrivial characters with χ^ℓ = χ₀. Per prime the subfamily sum
/// is ℓ−1 when p is an ℓ-th power residue, −1 otherwise, 0 at p = q, so the
/// decomposition into residue-class counters is an exact rational identity
/// and the main terms cancel to exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionMoment {
    pub q: u64,
    pub ell: u64,
    pub x: u64,
    pub pi_x: u64,
    /// ℓ − 1 characters in the subfamily.
    pub member_count: u64,
    /// (q−1)/ℓ coprime classes consisting of ℓ-th power residues.
    pub residue_class_count: u64,
    pub direct: Ratio<i64>,
    pub decomposed: Ratio<i64>,
    /// Density-weighted main-term coefficient; cancels to 0 exactly.
    pub main_term_coefficient: Ratio<i64>,
}

pub fn m2_torsion(q: u64, ell: u64, x: u64) -> Result<TorsionMoment> {
    validate_odd_prime(q, "modulus").map_err(|_| {
        Error::InvalidTorsion(format!("modulus must be an odd prime, got {q}"))
    })?;
    validate_odd_prime(ell, "order").map_err(|_| {
        Error::InvalidTorsion(format!("order must be an odd prime, got {ell}"))
    })?;
    if q == ell || (q - 1) % ell != 0 {
        return Err(Error::InvalidTorsion(format!(
            "need q ≡ 1 mod ℓ with q ≠ ℓ, got q = {q}, ℓ = {ell}"
        )));
    }
    let index = IndexTable::build(PrimeModulus::new(q)?);
    let table = prime_table_to(x)?;
    let pi_x = table.count(x)?;

    // direct path: the subfamily sum per prime via the discrete logarithm
    let mut sum = 0i64;
    for &p in table.primes() {
        match index.index(p % q) {
            None => {}
            Some(ind) => {
                if ind as u64 % ell == 0 {
                    sum += ell as i64 - 1;
                } else {
                    sum -= 1;
                }
            }
        }
    }
    let direct = Ratio::new(sum, pi_x as i64 * (ell as i64 - 1));

    // decomposed path: residue-class counters
    let counts = table.residue_counts(x, q)?;
    let mut n_res = 0i64;
    let mut n_non = 0i64;
    for a in 1..q {
        match index.index(a) {
            Some(ind) if ind as u64 % ell == 0 => n_res += counts[a as usize] as i64,
            Some(_) => n_non += counts[a as usize] as i64,
            None => {}
        }
    }
    let decomposed = Ratio::new(n_res, pi_x as i64)
        - Ratio::new(n_non, pi_x as i64 * (ell as i64 - 1));

    let rc = (q - 1) / ell;
    let main_term_coefficient = Ratio::new(rc as i64, q as i64 - 1)
        - Ratio::new(
            (q - 1 - rc) as i64,
            (q as i64 - 1) * (ell as i64 - 1),
        );

    Ok(TorsionMoment {
        q,
        ell,
        x,
        pi_x,
        member_count: ell - 1,
        residue_class_count: rc,
        direct,
        decomposed,
        main_term_coefficient,
    })
}

/// Convolved mean square for two distinct moduli:
/// (1/π(X)) (1/((q₁−2)(q₂−2))) Σ_{p ≤ X} S(q₁, p)·S(q₂, p), with its race
/// decomposition across the four joint classes p ≡ ±1 mod both moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionMoment {
    pub q1: u64,
    pub q2: u64,
    pub x: u64,
    pub pi_x: u64,
    /// CRT class ≡ 1 mod q₁, ≡ −1 mod q₂.
    pub r3: u64,
    /// CRT class ≡ −1 mod q₁, ≡ 1 mod q₂.
    pub r4: u64,
    pub direct: Ratio<i64>,
    /// Floating reassembly through the E values; must match `direct` to 1e−12.
    pub decomposed: f64,
    /// The same reassembly in integer counters; equals `direct` identically.
    pub decomposed_exact: Ratio<i64>,
    pub race_term: f64,
}

pub fn m2_convolution(q1: u64, q2: u64, x: u64) -> Result<ConvolutionMoment> {
    validate_odd_prime(q1, "first modulus")?;
    validate_odd_prime(q2, "second modulus")?;
    if q1 == q2 {
        return Err(Error::InvalidInput(format!(
            "convolution needs distinct moduli, got {q1} twice"
        )));
    }
    let table = prime_table_to(x)?;
    let pi_x = table.count(x)?;
    let m = q1 * q2;

    let r3 = (0..m)
        .find(|&r| r % q1 == 1 && r % q2 == q2 - 1)
        .expect("CRT class exists for coprime moduli");
    let r4 = (0..m)
        .find(|&r| r % q1 == q1 - 1 && r % q2 == 1)
        .expect("CRT class exists for coprime moduli");

    let mut sum = 0i64;
    for &p in table.primes() {
        sum += character_sum_squares(q1, p)? * character_sum_squares(q2, p)?;
    }
    let denom = pi_x as i64 * (q1 as i64 - 2) * (q2 as i64 - 2);
    let direct = Ratio::new(sum, denom);

    // joint race terms across the four classes ≡ ±1 mod both moduli
    let joint = table.residue_counts(x, m)?;
    let phi_m = crate::modular::euler_phi(m) as i64;
    let d_joint: i64 = [1, m - 1, r3, r4]
        .iter()
        .map(|&a| phi_m * joint[a as usize] as i64 - pi_x as i64)
        .sum();
    let single = |q: u64| -> Result<i64> {
        let plus = table.count_in_class(x, q, 1)? as i64;
        let minus = table.count_in_class(x, q, q - 1)? as i64;
        Ok((q as i64 - 1) * (plus + minus) - 2 * pi_x as i64)
    };
    let d_single = single(q1)? + single(q2)?;
    let boundary = i64::from(q2 <= x) * character_sum_squares(q1, q2)?
        + i64::from(q1 <= x) * character_sum_squares(q2, q1)?;
    let decomposed_exact = Ratio::new(
        pi_x as i64 + d_joint - d_single + boundary,
        denom,
    );

    // floating path through E = D·lnX/√X and back
    let xf = x as f64;
    let scale = xf.ln() / xf.sqrt();
    let e_joint = d_joint as f64 * scale;
    let e_single = d_single as f64 * scale;
    let race_term = (e_joint - e_single) / scale;
    let decomposed = (pi_x as f64 + race_term + boundary as f64) / denom as f64;

    Ok(ConvolutionMoment {
        q1,
        q2,
        x,
        pi_x,
        r3,
        r4,
        direct,
        decomposed,
        decomposed_exact,
        race_term,
    })
}

/// Logarithmic-density estimate from sign checkpoints: with checkpoints
/// t₁ < t₂ < … < t_n and t₀ = 1, sums (ln tᵢ − ln tᵢ₋₁)/ln t_n over the
/// positive checkpoints. All positive gives 1, an empty series 0.
pub fn bias_sign_series(points: &[(u64, bool)]) -> Result<f64> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut prev = 1u64;
    for &(t, _) in points {
        if t <= prev && !(prev == 1 && t == 1) {
            return Err(Error::InvalidInput(
                "checkpoints must be strictly increasing and ≥ 1".into(),
            ));
        }
        prev = t;
    }
    let t_max = points.last().unwrap().0;
    if t_max <= 1 {
        return Err(Error::InvalidInput(
            "final checkpoint must exceed 1".into(),
        ));
    }
    let ln_max = (t_max as f64).ln();
    let mut prev = 0f64;
    let mut total = 0.0;
    for &(t, positive) in points {
        let lt = (t as f64).ln();
        if positive {
            total += (lt - prev) / ln_max;
        }
        prev = lt;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn character_sum_examples() {
        assert_eq!(character_sum_squares(5, 11).unwrap(), 3);
        assert_eq!(character_sum_squares(5, 2).unwrap(), -1);
        assert_eq!(character_sum_squares(5, 5).unwrap(), 0);
        assert_eq!(character_sum_squares(7, 2).unwrap(), -1);
        assert_eq!(character_sum_squares(7, 13).unwrap(), 5);
        assert!(character_sum_squares(9, 2).is_err());
        assert!(character_sum_squares(2, 3).is_err());
    }

    #[test]
    fn geometric_path_agrees() {
        for q in [5u64, 7, 11, 13, 31] {
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 97] {
                assert_eq!(
                    character_sum_squares(q, p).unwrap(),
                    character_sum_squares_geometric(q, p).unwrap(),
                    "q={q} p={p}"
                );
            }
        }
    }

    #[test]
    fn m2_direct_examples() {
        assert_eq!(m2_direct(5, 10).unwrap(), ratio(-1, 4));
        assert_eq!(m2_direct(5, 11).unwrap(), ratio(0, 1));
        assert_eq!(m2_direct(7, 2).unwrap(), ratio(-1, 5));
    }

    #[test]
    fn race_example() {
        let r = race_e(10, 5, 1).unwrap();
        assert_eq!(r.pi_x, 4);
        assert_eq!(r.count_in_class, 0);
        let expected = -4.0 * (10f64).ln() / (10f64).sqrt();
        assert!((r.e_value - expected).abs() < 1e-12, "{}", r.e_value);
        assert!((r.e_value + 2.9126).abs() < 1e-3);
        assert_eq!(r.bias_constant, 1);
        assert_eq!(race_e(10, 5, 2).unwrap().bias_constant, -1);
        assert!(race_e(10, 10, 5).is_err());
        // composite modulus allowed when the class is invertible
        assert_eq!(race_e(10, 10, 1).unwrap().bias_constant, 1);
    }

    #[test]
    fn decomposition_reproduces_direct() {
        for q in [5u64, 7, 11, 13] {
            for x in [10u64, 50, 100, 1000] {
                let direct = m2_direct(q, x).unwrap();
                let dec = m2_decomposed(q, x).unwrap();
                assert_eq!(dec.exact, direct, "q={q} x={x}");
                let df = *direct.numer() as f64 / *direct.denom() as f64;
                assert!(
                    (dec.total - df).abs() <= 1e-12,
                    "q={q} x={x}: {} vs {df}",
                    dec.total
                );
            }
        }
    }

    #[test]
    fn decomposition_fields() {
        let dec = m2_decomposed(5, 10).unwrap();
        assert_eq!(dec.pi_x, 4);
        assert!((dec.main_term - 1.0 / 3.0).abs() < 1e-15);
        assert!((dec.boundary_term - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(dec.exact, ratio(-1, 4));
    }

    #[test]
    fn torsion_main_term_cancels() {
        for (q, ell) in [(7u64, 3u64), (13, 3), (31, 5), (11, 5)] {
            let t = m2_torsion(q, ell, 1000).unwrap();
            assert_eq!(t.main_term_coefficient, ratio(0, 1), "q={q} ℓ={ell}");
            assert_eq!(t.direct, t.decomposed, "q={q} ℓ={ell}");
            assert_eq!(t.member_count, ell - 1);
            assert_eq!(t.residue_class_count, (q - 1) / ell);
        }
        let t = m2_torsion(7, 3, 100).unwrap();
        assert_eq!(t.residue_class_count, 2);
    }

    #[test]
    fn torsion_validation() {
        assert!(matches!(m2_torsion(7, 5, 100), Err(Error::InvalidTorsion(_))));
        assert!(matches!(m2_torsion(9, 3, 100), Err(Error::InvalidTorsion(_))));
        assert!(matches!(m2_torsion(7, 7, 100), Err(Error::InvalidTorsion(_))));
        assert!(matches!(m2_torsion(7, 2, 100), Err(Error::InvalidTorsion(_))));
    }

    #[test]
    fn convolution_example() {
        let c = m2_convolution(3, 5, 10).unwrap();
        assert_eq!(c.r3, 4);
        assert_eq!(c.r4, 11);
        assert_eq!(c.direct, ratio(-1, 6));
        assert_eq!(c.decomposed_exact, ratio(-1, 6));
        assert!((c.decomposed + 1.0 / 6.0).abs() <= 1e-12);
        assert!(m2_convolution(5, 5, 10).is_err());
    }

    #[test]
    fn convolution_identity_holds() {
        for (q1, q2) in [(3u64, 5u64), (5, 7), (7, 11), (3, 11)] {
            for x in [20u64, 100, 1000] {
                let c = m2_convolution(q1, q2, x).unwrap();
                assert_eq!(c.decomposed_exact, c.direct, "q1={q1} q2={q2} x={x}");
                let df = *c.direct.numer() as f64 / *c.direct.denom() as f64;
                assert!(
                    (c.decomposed - df).abs() <= 1e-12,
                    "q1={q1} q2={q2} x={x}: {} vs {df}",
                    c.decomposed
                );
            }
        }
    }

    #[test]
    fn sign_series_examples() {
        assert_eq!(bias_sign_series(&[]).unwrap(), 0.0);
        let all_pos: Vec<(u64, bool)> = vec![(10, true), (100, true), (1000, true)];
        assert!((bias_sign_series(&all_pos).unwrap() - 1.0).abs() < 1e-12);
        let half = vec![(3u64, false), (9, true)];
        assert!((bias_sign_series(&half).unwrap() - 0.5).abs() < 1e-12);
        assert!(bias_sign_series(&[(5, true), (5, true)]).is_err());
        assert!(bias_sign_series(&[(1, true)]).is_err());
    }
}
