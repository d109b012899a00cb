//! Traces and moments for families with constant j-invariant: y² = x³ + B
//! (j = 0) and y² = x³ − Ax (j = 1728).
//!
//! For these curves the trace at p is pinned by the Gauss decomposition of p
//! (p = a² + 3b² or p = a² + b²) together with the power-residue class of the
//! coefficient. The class determines the trace up to a sign choice the
//! decomposition cannot see; ambiguous predictions are returned as a
//! two-candidate set, and exactly one member matches the true trace.
//!
//! Moments over parameter powers (T^r times the coefficient) reduce to
//! counting how the residue class of t^r walks the quartic or sextic cosets,
//! so they come out in closed form with the same candidate caveat.

use crate::elliptic::{trace, Polynomial};
use crate::error::{Error, Result};
use crate::modular::{
    gauss_decomp_j0, gauss_decomp_j1728, mul_mod, pow_mod, GaussKind, LegendreTable,
    PrimeModulus, QuarticClass, SexticClass,
};

/// Trace of a single curve, either pinned exactly or narrowed to two values
/// of which exactly one is correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePrediction {
    Exact(i64),
    Pair(i64, i64),
}

impl TracePrediction {
    fn normalized(u: i64, v: i64) -> Self {
        if u == v {
            TracePrediction::Exact(u)
        } else {
            TracePrediction::Pair(u, v)
        }
    }

    pub fn candidates(&self) -> Vec<i64> {
        match *self {
            TracePrediction::Exact(v) => vec![v],
            TracePrediction::Pair(u, v) => vec![u, v],
        }
    }

    /// True when the actual trace is consistent with the prediction: equal to
    /// an exact value, or equal to exactly one of the two candidates.
    pub fn matches(&self, actual: i64) -> bool {
        match *self {
            TracePrediction::Exact(v) => v == actual,
            TracePrediction::Pair(u, v) => (u == actual) != (v == actual),
        }
    }
}

/// A moment value, exact or narrowed to two candidates (same convention as
/// [`TracePrediction`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentValue {
    Exact(i128),
    Candidates(i128, i128),
}

impl MomentValue {
    fn normalized(u: i128, v: i128) -> Self {
        if u == v {
            MomentValue::Exact(u)
        } else {
            MomentValue::Candidates(u, v)
        }
    }

    pub fn candidates(&self) -> Vec<i128> {
        match *self {
            MomentValue::Exact(v) => vec![v],
            MomentValue::Candidates(u, v) => vec![u, v],
        }
    }

    pub fn matches(&self, actual: i128) -> bool {
        match *self {
            MomentValue::Exact(v) => v == actual,
            MomentValue::Candidates(u, v) => (u == actual) != (v == actual),
        }
    }

    /// 0 for an exact match, 1 or 2 for the matching candidate, None for a
    /// mismatch. The branch index must stay constant across moment orders of
    /// one family instance.
    pub fn matching_branch(&self, actual: i128) -> Option<u8> {
        match *self {
            MomentValue::Exact(v) => (v == actual).then_some(0),
            MomentValue::Candidates(u, v) => match (u == actual, v == actual) {
                (true, false) => Some(1),
                (false, true) => Some(2),
                _ => None,
            },
        }
    }
}

fn ensure_prime_range(p: PrimeModulus) -> Result<()> {
    if p.get() < 5 {
        return Err(Error::HypothesisViolated(format!(
            "constant-j machinery needs p ≥ 5, got p = {p}"
        )));
    }
    Ok(())
}

fn nonzero_coeff(coeff: i64, p: PrimeModulus) -> Result<u64> {
    let v = p.reduce(coeff);
    if v == 0 {
        return Err(Error::HypothesisViolated(format!(
            "coefficient {coeff} ≡ 0 mod {p} gives the singular curve y² = x³"
        )));
    }
    Ok(v)
}

fn qr_test(v: u64, p: PrimeModulus) -> bool {
    pow_mod(v, (p.get() - 1) / 2, p.get()) == 1
}

fn cube_test(v: u64, p: PrimeModulus) -> bool {
    pow_mod(v, (p.get() - 1) / 3, p.get()) == 1
}

fn quartic_test(v: u64, p: PrimeModulus) -> bool {
    pow_mod(v, (p.get() - 1) / 4, p.get()) == 1
}

/// Sextic coset of v mod p (p ≡ 1 mod 6, v ≢ 0) from the quadratic and cubic
/// power criteria.
fn sextic_class_of(v: u64, p: PrimeModulus) -> SexticClass {
    match (qr_test(v, p), cube_test(v, p)) {
        (true, true) => SexticClass::SexticResidue,
        (false, true) => SexticClass::CubicNonQuadratic,
        (true, false) => SexticClass::QuadraticNonCubic,
        (false, false) => SexticClass::NonResidue,
    }
}

/// Quartic coset of v mod p (p ≡ 1 mod 4, v ≢ 0).
fn quartic_class_of(v: u64, p: PrimeModulus) -> QuarticClass {
    if quartic_test(v, p) {
        QuarticClass::QuarticResidue
    } else if qr_test(v, p) {
        QuarticClass::QuadraticNonQuartic
    } else {
        QuarticClass::NonResidue
    }
}

/// Trace of y² = x³ + coeff (J0) or y² = x³ − coeff·x (J1728) at p, from the
/// Gauss decomposition of p and the residue class of the coefficient alone.
///
/// Supersingular cases (p ≡ 2 mod 3 resp. p ≡ 3 mod 4) are exactly 0. The
/// square-class-only predictions return a [`TracePrediction::Pair`].
pub fn predicted_trace(kind: GaussKind, coeff: i64, p: PrimeModulus) -> Result<TracePrediction> {
    ensure_prime_range(p)?;
    let v = nonzero_coeff(coeff, p)?;
    match kind {
        GaussKind::J0 => {
            if p.get() % 3 == 2 {
                return Ok(TracePrediction::Exact(0));
            }
            let g = gauss_decomp_j0(p)?;
            let (a, b) = (g.a, g.b);
            Ok(match sextic_class_of(v, p) {
                SexticClass::SexticResidue => TracePrediction::Exact(-2 * a),
                SexticClass::CubicNonQuadratic => TracePrediction::Exact(2 * a),
                SexticClass::QuadraticNonCubic => {
                    TracePrediction::normalized(a + 3 * b, a - 3 * b)
                }
                SexticClass::NonResidue => TracePrediction::normalized(-a + 3 * b, -a - 3 * b),
            })
        }
        GaussKind::J1728 => {
            if p.get() % 4 == 3 {
                return Ok(TracePrediction::Exact(0));
            }
            let g = gauss_decomp_j1728(p)?;
            let (a, b) = (g.a, g.b);
            Ok(match quartic_class_of(v, p) {
                QuarticClass::QuarticResidue => TracePrediction::Exact(2 * a),
                QuarticClass::QuadraticNonQuartic => TracePrediction::Exact(-2 * a),
                QuarticClass::NonResidue => TracePrediction::normalized(2 * b, -2 * b),
            })
        }
    }
}

/// All trace values attained by nonzero coefficients at p. Over coeff ∈ F_p*
/// each listed value occurs equally often: (p−1)/6 times for J0 and (p−1)/4
/// for J1728 in the ordinary case, and the single value 0 otherwise.
pub fn trace_spectrum(kind: GaussKind, p: PrimeModulus) -> Result<Vec<i64>> {
    ensure_prime_range(p)?;
    match kind {
        GaussKind::J0 => {
            if p.get() % 3 == 2 {
                return Ok(vec![0]);
            }
            let g = gauss_decomp_j0(p)?;
            let (a, b) = (g.a, g.b);
            Ok(vec![
                -2 * a,
                2 * a,
                a + 3 * b,
                a - 3 * b,
                -a + 3 * b,
                -a - 3 * b,
            ])
        }
        GaussKind::J1728 => {
            if p.get() % 4 == 3 {
                return Ok(vec![0]);
            }
            let g = gauss_decomp_j1728(p)?;
            Ok(vec![2 * g.a, -2 * g.a, 2 * g.b, -2 * g.b])
        }
    }
}

fn powk(base: i128, k: u32) -> Result<i128> {
    base.checked_pow(k)
        .ok_or_else(|| Error::LimitExceeded("moment term overflows 128 bits".into()))
}

fn scaled(scale: i128, value: i128) -> Result<i128> {
    scale
        .checked_mul(value)
        .ok_or_else(|| Error::LimitExceeded("moment value overflows 128 bits".into()))
}

/// k-th moment Σ_{t mod p} a_t(p)^k of the parameter-power family
/// y² = x³ − T^r·coeff (J0) resp. y² = x³ − T^r·coeff·x (J1728),
/// in closed form via the coset walk of t^r.
///
/// r = 0 is the constant family (all p fibers identical, 0^0 = 1); for r ≥ 1
/// the t = 0 fiber is y² = x³ with trace 0. Requires p ≥ 5 and p ∤ coeff.
pub fn constant_j_moment(
    kind: GaussKind,
    coeff: i64,
    r: u32,
    k: u32,
    p: PrimeModulus,
) -> Result<MomentValue> {
    ensure_prime_range(p)?;
    let v = nonzero_coeff(coeff, p)?;
    let m = p.get();
    let pi = m as i128;
    if k == 0 {
        return Ok(MomentValue::Exact(pi));
    }
    let fibers = if r == 0 { pi } else { pi - 1 };
    match kind {
        GaussKind::J1728 => {
            if m % 4 == 3 {
                return Ok(MomentValue::Exact(0));
            }
            let g = gauss_decomp_j1728(p)?;
            let (a2, b2) = (2 * g.a as i128, 2 * g.b as i128);
            match r % 4 {
                1 | 3 => {
                    if k % 2 == 1 {
                        Ok(MomentValue::Exact(0))
                    } else {
                        // t^r walks all four cosets uniformly
                        let s = powk(a2, k)? + powk(b2, k)?;
                        Ok(MomentValue::Exact(scaled((pi - 1) / 2, s)?))
                    }
                }
                2 => {
                    // t^r stays in the square class of coeff; the two cosets
                    // reached carry opposite traces
                    if k % 2 == 1 {
                        Ok(MomentValue::Exact(0))
                    } else {
                        let base = if qr_test(v, p) { a2 } else { b2 };
                        Ok(MomentValue::Exact(scaled(pi - 1, powk(base, k)?)?))
                    }
                }
                _ => {
                    // t^r is always a fourth power: the class of coeff rules
                    Ok(match quartic_class_of(v, p) {
                        QuarticClass::QuarticResidue => {
                            MomentValue::Exact(scaled(fibers, powk(a2, k)?)?)
                        }
                        QuarticClass::QuadraticNonQuartic => {
                            MomentValue::Exact(scaled(fibers, powk(-a2, k)?)?)
                        }
                        QuarticClass::NonResidue => MomentValue::normalized(
                            scaled(fibers, powk(b2, k)?)?,
                            scaled(fibers, powk(-b2, k)?)?,
                        ),
                    })
                }
            }
        }
        GaussKind::J0 => {
            if m % 3 == 2 {
                return Ok(MomentValue::Exact(0));
            }
            let g = gauss_decomp_j0(p)?;
            let (a, b) = (g.a as i128, g.b as i128);
            // effective constant of the fiber is −t^r·coeff
            let w = m - v;
            match r % 6 {
                1 | 5 => {
                    if k % 2 == 1 {
                        Ok(MomentValue::Exact(0))
                    } else {
                        let s = powk(2 * a, k)? + powk(a + 3 * b, k)? + powk(a - 3 * b, k)?;
                        Ok(MomentValue::Exact(scaled((pi - 1) / 3, s)?))
                    }
                }
                2 | 4 => {
                    // t^r covers the three cosets in the square class of −coeff;
                    // both mixed-sign values appear, so every k is exact
                    let s = if qr_test(w, p) {
                        powk(-2 * a, k)? + powk(a + 3 * b, k)? + powk(a - 3 * b, k)?
                    } else {
                        powk(2 * a, k)? + powk(-a - 3 * b, k)? + powk(-a + 3 * b, k)?
                    };
                    Ok(MomentValue::Exact(scaled((pi - 1) / 3, s)?))
                }
                3 => {
                    // t^r is a cube times a square class: the two cosets reached
                    // differ by a quadratic twist, so odd moments vanish exactly
                    if k % 2 == 1 {
                        Ok(MomentValue::Exact(0))
                    } else if cube_test(w, p) {
                        Ok(MomentValue::Exact(scaled(pi - 1, powk(2 * a, k)?)?))
                    } else {
                        Ok(MomentValue::normalized(
                            scaled(pi - 1, powk(a + 3 * b, k)?)?,
                            scaled(pi - 1, powk(a - 3 * b, k)?)?,
                        ))
                    }
                }
                _ => {
                    // t^r is always a sixth power: the class of −coeff rules
                    Ok(match sextic_class_of(w, p) {
                        SexticClass::SexticResidue => {
                            MomentValue::Exact(scaled(fibers, powk(-2 * a, k)?)?)
                        }
                        SexticClass::CubicNonQuadratic => {
                            MomentValue::Exact(scaled(fibers, powk(2 * a, k)?)?)
                        }
                        SexticClass::QuadraticNonCubic => MomentValue::normalized(
                            scaled(fibers, powk(a + 3 * b, k)?)?,
                            scaled(fibers, powk(a - 3 * b, k)?)?,
                        ),
                        SexticClass::NonResidue => MomentValue::normalized(
                            scaled(fibers, powk(-a + 3 * b, k)?)?,
                            scaled(fibers, powk(-a - 3 * b, k)?)?,
                        ),
                    })
                }
            }
        }
    }
}

/// Per-prime trace tables for both constant-j shapes, built once in O(p²) and
/// then answering trace and brute-moment queries by lookup.
pub struct ConstantJTables {
    p: PrimeModulus,
    j0: Vec<i64>,
    j1728: Vec<i64>,
}

impl ConstantJTables {
    pub fn build(p: PrimeModulus) -> Result<Self> {
        ensure_prime_range(p)?;
        let m = p.get();
        if m >= 1 << 22 {
            return Err(Error::LimitExceeded(format!(
                "trace tables are O(p²); refusing p = {p}"
            )));
        }
        let table = LegendreTable::build(p);
        let n = m as usize;
        let mut x3 = vec![0u64; n];
        for x in 0..m {
            x3[x as usize] = mul_mod(mul_mod(x, x, m), x, m);
        }
        let mut j0 = vec![0i64; n];
        for (c, slot) in j0.iter_mut().enumerate() {
            let mut s = 0i64;
            for &v in &x3 {
                s += table.chi((v + c as u64) % m) as i64;
            }
            *slot = -s;
        }
        let mut j1728 = vec![0i64; n];
        for (a4, slot) in j1728.iter_mut().enumerate() {
            let neg = m - a4 as u64;
            let mut s = 0i64;
            for x in 0..m {
                s += table.chi((x3[x as usize] + neg % m * x % m) % m) as i64;
            }
            *slot = -s;
        }
        Ok(ConstantJTables { p, j0, j1728 })
    }

    pub fn p(&self) -> PrimeModulus {
        self.p
    }

    /// Trace of y² = x³ + c.
    pub fn trace_j0(&self, c: i64) -> i64 {
        self.j0[self.p.reduce(c) as usize]
    }

    /// Trace of y² = x³ − a4·x.
    pub fn trace_j1728(&self, a4: i64) -> i64 {
        self.j1728[self.p.reduce(a4) as usize]
    }

    /// Brute k-th moment of the parameter-power family, by table lookup over
    /// all p fibers. Same domain as [`constant_j_moment`].
    pub fn moment_brute(&self, kind: GaussKind, coeff: i64, r: u32, k: u32) -> Result<i128> {
        let v = nonzero_coeff(coeff, self.p)?;
        let m = self.p.get();
        let mut acc = 0i128;
        for t in 0..m {
            let tp = pow_mod(t, r as u64, m);
            let tr = match kind {
                GaussKind::J0 => self.j0[((m - mul_mod(tp, v, m)) % m) as usize],
                GaussKind::J1728 => self.j1728[mul_mod(tp, v, m) as usize],
            };
            acc = acc
                .checked_add(powk(tr as i128, k)?)
                .ok_or_else(|| Error::LimitExceeded("moment sum overflows 128 bits".into()))?;
        }
        Ok(acc)
    }
}

/// Brute-force companion to [`constant_j_moment`].
pub fn constant_j_moment_brute(
    kind: GaussKind,
    coeff: i64,
    r: u32,
    k: u32,
    p: PrimeModulus,
) -> Result<i128> {
    ConstantJTables::build(p)?.moment_brute(kind, coeff, r, k)
}

/// Traces of y² = x³ + Ax + B and its quadratic twist by a non-square d,
/// both computed directly. The twist negates the trace.
pub fn twist_trace(a4: i64, a6: i64, d: i64, p: PrimeModulus) -> Result<(i64, i64)> {
    ensure_prime_range(p)?;
    let dv = p.reduce(d);
    if dv == 0 || qr_test(dv, p) {
        return Err(Error::HypothesisViolated(format!(
            "twist needs a quadratic non-residue, got d = {d} mod {p}"
        )));
    }
    let m = p.get();
    let (a4r, a6r) = (p.reduce(a4), p.reduce(a6));
    let base = trace(
        &Polynomial::new(vec![a6r as i64, a4r as i64, 0, 1]),
        p,
    );
    let d2 = mul_mod(dv, dv, m);
    let d3 = mul_mod(d2, dv, m);
    let twisted = trace(
        &Polynomial::new(vec![
            mul_mod(d3, a6r, m) as i64,
            mul_mod(d2, a4r, m) as i64,
            0,
            1,
        ]),
        p,
    );
    Ok((base, twisted))
}

/// k-th moment of y² = x³ + T²·a4·x + T³·a6: substituting x ↦ tx shows every
/// t ≠ 0 fiber is the base curve or its quadratic twist, so odd moments vanish
/// and even moments are (p−1)·trace^k. Requires p ≥ 5 and good reduction
/// (p ∤ 4·a4³ + 27·a6²).
pub fn general_constant_j_moment(
    a4: i64,
    a6: i64,
    k: u32,
    p: PrimeModulus,
) -> Result<MomentValue> {
    ensure_prime_range(p)?;
    let disc = 4 * (a4 as i128).pow(3) + 27 * (a6 as i128).pow(2);
    if disc.rem_euclid(p.get() as i128) == 0 {
        return Err(Error::HypothesisViolated(format!(
            "4·{a4}³ + 27·{a6}² ≡ 0 mod {p}: singular base curve"
        )));
    }
    let pi = p.get() as i128;
    if k == 0 {
        return Ok(MomentValue::Exact(pi));
    }
    if k % 2 == 1 {
        return Ok(MomentValue::Exact(0));
    }
    let base = trace(
        &Polynomial::new(vec![p.reduce(a6) as i64, p.reduce(a4) as i64, 0, 1]),
        p,
    );
    Ok(MomentValue::Exact(scaled(pi - 1, powk(base as i128, k)?)?))
}

/// Brute-force companion to [`general_constant_j_moment`]: evaluates every
/// fiber's trace by the literal character sum.
pub fn general_constant_j_moment_brute(
    a4: i64,
    a6: i64,
    k: u32,
    p: PrimeModulus,
) -> Result<i128> {
    ensure_prime_range(p)?;
    let m = p.get();
    let table = LegendreTable::build(p);
    let (a4r, a6r) = (p.reduce(a4), p.reduce(a6));
    let mut acc = 0i128;
    for t in 0..m {
        let t2 = mul_mod(t, t, m);
        let t3 = mul_mod(t2, t, m);
        let c1 = mul_mod(t2, a4r, m);
        let c0 = mul_mod(t3, a6r, m);
        let mut s = 0i64;
        for x in 0..m {
            let v = (mul_mod((mul_mod(x, x, m) + c1) % m, x, m) + c0) % m;
            s += table.chi(v) as i64;
        }
        acc = acc
            .checked_add(powk(-s as i128, k)?)
            .ok_or_else(|| Error::LimitExceeded("moment sum overflows 128 bits".into()))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    #[test]
    fn predicted_trace_examples() {
        assert_eq!(
            predicted_trace(GaussKind::J0, 1, p(5)).unwrap(),
            TracePrediction::Exact(0)
        );
        assert_eq!(
            predicted_trace(GaussKind::J1728, 1, p(13)).unwrap(),
            TracePrediction::Exact(6)
        );
        assert_eq!(
            predicted_trace(GaussKind::J0, 2, p(7)).unwrap(),
            TracePrediction::Pair(5, -1)
        );
        assert_eq!(
            predicted_trace(GaussKind::J0, 1, p(7)).unwrap(),
            TracePrediction::Exact(-4)
        );
        assert_eq!(
            predicted_trace(GaussKind::J0, 6, p(7)).unwrap(),
            TracePrediction::Exact(4)
        );
        assert_eq!(
            predicted_trace(GaussKind::J0, 3, p(7)).unwrap(),
            TracePrediction::Pair(1, -5)
        );
        assert_eq!(
            predicted_trace(GaussKind::J1728, 2, p(5)).unwrap(),
            TracePrediction::Pair(4, -4)
        );
        assert_eq!(
            predicted_trace(GaussKind::J1728, 4, p(5)).unwrap(),
            TracePrediction::Exact(2)
        );
        assert!(predicted_trace(GaussKind::J0, 7, p(7)).is_err());
        assert!(predicted_trace(GaussKind::J0, 1, p(3)).is_err());
    }

    #[test]
    fn predictions_match_table_traces() {
        for q in [7u64, 13, 37, 61, 11, 19] {
            let q = p(q);
            let tables = ConstantJTables::build(q).unwrap();
            for c in 1..q.get() {
                let pred = predicted_trace(GaussKind::J0, c as i64, q).unwrap();
                assert!(
                    pred.matches(tables.trace_j0(c as i64)),
                    "J0 p={q} c={c}: {pred:?} vs {}",
                    tables.trace_j0(c as i64)
                );
                let pred = predicted_trace(GaussKind::J1728, c as i64, q).unwrap();
                assert!(
                    pred.matches(tables.trace_j1728(c as i64)),
                    "J1728 p={q} c={c}: {pred:?} vs {}",
                    tables.trace_j1728(c as i64)
                );
            }
        }
    }

    #[test]
    fn candidates_respect_weil_bound() {
        for q in [7u64, 13, 61, 97, 193] {
            let q = p(q);
            let bound = 2.0 * (q.get() as f64).sqrt();
            for kind in [GaussKind::J0, GaussKind::J1728] {
                for v in trace_spectrum(kind, q).unwrap() {
                    assert!((v as f64).abs() <= bound, "{kind:?} p={q} candidate {v}");
                }
            }
        }
    }

    #[test]
    fn spectrum_equidistributes() {
        let q = p(13);
        let tables = ConstantJTables::build(q).unwrap();
        let mut counts = std::collections::HashMap::new();
        for c in 1..13 {
            *counts.entry(tables.trace_j0(c)).or_insert(0u64) += 1;
        }
        let spectrum = trace_spectrum(GaussKind::J0, q).unwrap();
        assert_eq!(spectrum.len(), 6);
        for v in spectrum {
            assert_eq!(counts.get(&v), Some(&2), "J0 value {v}");
        }
        let mut counts = std::collections::HashMap::new();
        for c in 1..13 {
            *counts.entry(tables.trace_j1728(c)).or_insert(0u64) += 1;
        }
        for v in trace_spectrum(GaussKind::J1728, q).unwrap() {
            assert_eq!(counts.get(&v), Some(&3), "J1728 value {v}");
        }
    }

    #[test]
    fn moments_match_brute_small() {
        for q in [7u64, 13] {
            let q = p(q);
            let tables = ConstantJTables::build(q).unwrap();
            for kind in [GaussKind::J0, GaussKind::J1728] {
                for coeff in 1..=6i64 {
                    let mut branch: Option<u8> = None;
                    for r in 0..=7u32 {
                        for k in 0..=4u32 {
                            let predicted = constant_j_moment(kind, coeff, r, k, q).unwrap();
                            let brute = tables.moment_brute(kind, coeff, r, k).unwrap();
                            let b = predicted.matching_branch(brute);
                            assert!(
                                b.is_some(),
                                "{kind:?} p={q} coeff={coeff} r={r} k={k}: {predicted:?} vs {brute}"
                            );
                            // candidate branch must be consistent within (coeff, r)
                            if let Some(b) = b.filter(|&b| b > 0) {
                                match branch {
                                    None => branch = Some(b),
                                    Some(prev) => assert_eq!(
                                        prev, b,
                                        "{kind:?} p={q} coeff={coeff} r={r} k={k}"
                                    ),
                                }
                            }
                        }
                        branch = None;
                    }
                }
            }
        }
    }

    #[test]
    fn supersingular_moments_vanish() {
        for (kind, q) in [(GaussKind::J0, 11u64), (GaussKind::J1728, 7)] {
            let q = p(q);
            for r in 0..=3 {
                for k in 1..=4 {
                    assert_eq!(
                        constant_j_moment(kind, 1, r, k, q).unwrap(),
                        MomentValue::Exact(0)
                    );
                    assert_eq!(constant_j_moment_brute(kind, 1, r, k, q).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn zeroth_moment_is_p() {
        assert_eq!(
            constant_j_moment(GaussKind::J0, 2, 3, 0, p(13)).unwrap(),
            MomentValue::Exact(13)
        );
        assert_eq!(
            constant_j_moment_brute(GaussKind::J0, 2, 3, 0, p(13)).unwrap(),
            13
        );
    }

    #[test]
    fn twist_negates_trace() {
        for (a4, a6, d, q) in [(1i64, 1i64, 2i64, 11u64), (3, 5, 5, 13), (-1, 2, 3, 17)] {
            let q = p(q);
            let (base, twisted) = twist_trace(a4, a6, d, q).unwrap();
            assert_eq!(twisted, -base, "a4={a4} a6={a6} d={d} p={q}");
        }
        // d must be a non-square
        assert!(twist_trace(1, 1, 3, p(11)).is_err());
        assert!(twist_trace(1, 1, 11, p(11)).is_err());
    }

    #[test]
    fn general_moment_matches_brute() {
        for (a4, a6, q) in [(1i64, 1i64, 7u64), (2, 5, 11), (1, 0, 13), (0, 1, 13)] {
            let q = p(q);
            for k in 0..=6u32 {
                let predicted = general_constant_j_moment(a4, a6, k, q).unwrap();
                let brute = general_constant_j_moment_brute(a4, a6, k, q).unwrap();
                assert!(
                    predicted.matches(brute),
                    "a4={a4} a6={a6} k={k} p={q}: {predicted:?} vs {brute}"
                );
            }
        }
        // singular base curve: 4 + 27 = 31 ≡ 0 mod 31
        assert!(general_constant_j_moment(1, 1, 2, p(31)).is_err());
    }

    #[test]
    fn general_moment_dispatches_to_power_families() {
        // a4 = 0: y² = x³ + T³·a6 is the J0 family with coefficient −a6, r = 3
        let q = p(13);
        for a6 in 1..=5i64 {
            for k in (0..=6u32).step_by(2) {
                let general = general_constant_j_moment(0, a6, k, q).unwrap();
                let MomentValue::Exact(gv) = general else {
                    panic!("general moment must be exact")
                };
                let dispatched = constant_j_moment(GaussKind::J0, -a6, 3, k, q).unwrap();
                assert!(dispatched.matches(gv), "a6={a6} k={k}: {dispatched:?} vs {gv}");
            }
        }
        // a6 = 0: y² = x³ + T²·a4·x is the J1728 family with coefficient −a4, r = 2
        for a4 in 1..=5i64 {
            for k in (0..=6u32).step_by(2) {
                let general = general_constant_j_moment(a4, 0, k, q).unwrap();
                let MomentValue::Exact(gv) = general else {
                    panic!("general moment must be exact")
                };
                let dispatched = constant_j_moment(GaussKind::J1728, -a4, 2, k, q).unwrap();
                assert!(dispatched.matches(gv), "a4={a4} k={k}: {dispatched:?} vs {gv}");
            }
        }
    }

    #[test]
    fn moment_hypotheses() {
        assert!(constant_j_moment(GaussKind::J0, 13, 1, 2, p(13)).is_err());
        assert!(constant_j_moment(GaussKind::J1728, 0, 1, 2, p(13)).is_err());
        assert!(constant_j_moment(GaussKind::J0, 1, 1, 2, p(3)).is_err());
    }
}
