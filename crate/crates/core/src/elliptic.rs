//! Moments of Frobenius traces across one-parameter curve families.
//!
//! A family is y² = f_T(x) with f_T a cubic in x whose coefficients depend on
//! the parameter T. Specializing T = t over F_p gives a curve with trace
//! a_t(p) = −Σ_x (f_t(x)/p), and the k-th moment at p is Σ_{t mod p} a_t(p)^k,
//! a complete sum including singular fibers.
//!
//! Three evaluation routes are provided and cross-checked:
//! brute force (the literal double sum), a semi-analytic route collapsing the
//! inner t-sum through the one-variable Legendre sums when f_T is linear in T,
//! and per-family closed forms from the registry. All three are exact integer
//! computations; sweeps surface any disagreement as a nonzero residual.

use crate::error::{Error, Result};
use crate::modular::{legendre_symbol, mul_mod, LegendreTable, PrimeModulus};

/// Fast-path limit: brute and semi-analytic loops use plain u64 products,
/// which are exact only while p² fits in 64 bits with headroom.
const FAST_PRIME_LIMIT: u64 = 1 << 31;

/// Brute-force refusal thresholds (override with the force flag).
const BRUTE_HIGH_K_LIMIT: u64 = 20_000;
const BRUTE_TWO_PARAM_LIMIT: u64 = 2_000;

/// Integer polynomial in one variable, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<i64>,
}

impl Polynomial {
    /// Trims trailing zeros; an empty vector is the zero polynomial.
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Coefficient of x^i (0 beyond the stored degree).
    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Horner evaluation mod p.
    pub fn eval_mod(&self, x: u64, p: PrimeModulus) -> u64 {
        let m = p.get();
        let x = x % m;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mul_mod(acc, x, m) + p.reduce(c)) % m;
        }
        acc
    }

    /// Coefficients reduced into [0, p), padded to the requested length.
    fn reduced(&self, p: PrimeModulus, len: usize) -> Vec<u64> {
        let mut out = vec![0u64; len.max(self.coeffs.len())];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] = p.reduce(c);
        }
        out
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Identifier of a registry family with known closed-form moments.
///
/// `Fam1`–`Fam4` take free coefficient tuples; `Row1`–`Row9` are the fixed
/// catalog curves (see [`FamilyId::equation`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    /// y² = (ax+b)(cx²+dx+e+T), needs p ∤ a, c
    Fam1,
    /// y² = (ax²+bx+c)(dx+e+T), needs p ∤ a, d
    Fam2,
    /// y² = x(ax²+bx+c+dTx), needs p ∤ a, c, d
    Fam3,
    /// y² = x(ax+b)(cx+d+Tx), needs p ∤ a, b, d
    Fam4,
    /// y² = x³ + Sx + T (two free parameters)
    Row1,
    /// y² = x³ − 432(9T+1)²
    Row2,
    /// y² = x³ + 4(4T+2)x
    Row3,
    /// y² = x³ + (T+1)x² + Tx
    Row4,
    /// y² = x³ + x² + 2T + 1
    Row5,
    /// y² = x³ + Tx² + 1
    Row6,
    /// y² = x³ − T²x + T²
    Row7,
    /// y² = x³ − T²x + T⁴
    Row8,
    /// y² = x³ + Tx² − (T+3)x + 1
    Row9,
}

impl FamilyId {
    pub const ALL: [FamilyId; 13] = [
        FamilyId::Fam1,
        FamilyId::Fam2,
        FamilyId::Fam3,
        FamilyId::Fam4,
        FamilyId::Row1,
        FamilyId::Row2,
        FamilyId::Row3,
        FamilyId::Row4,
        FamilyId::Row5,
        FamilyId::Row6,
        FamilyId::Row7,
        FamilyId::Row8,
        FamilyId::Row9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Fam1 => "fam1",
            FamilyId::Fam2 => "fam2",
            FamilyId::Fam3 => "fam3",
            FamilyId::Fam4 => "fam4",
            FamilyId::Row1 => "row1",
            FamilyId::Row2 => "row2",
            FamilyId::Row3 => "row3",
            FamilyId::Row4 => "row4",
            FamilyId::Row5 => "row5",
            FamilyId::Row6 => "row6",
            FamilyId::Row7 => "row7",
            FamilyId::Row8 => "row8",
            FamilyId::Row9 => "row9",
        }
    }

    /// Defining equation, with T the family parameter.
    pub fn equation(self) -> &'static str {
        match self {
            FamilyId::Fam1 => "y^2 = (ax+b)(cx^2+dx+e+T)",
            FamilyId::Fam2 => "y^2 = (ax^2+bx+c)(dx+e+T)",
            FamilyId::Fam3 => "y^2 = x(ax^2+bx+c+dTx)",
            FamilyId::Fam4 => "y^2 = x(ax+b)(cx+d+Tx)",
            FamilyId::Row1 => "y^2 = x^3 + Sx + T",
            FamilyId::Row2 => "y^2 = x^3 - 432(9T+1)^2",
            FamilyId::Row3 => "y^2 = x^3 + 4(4T+2)x",
            FamilyId::Row4 => "y^2 = x^3 + (T+1)x^2 + Tx",
            FamilyId::Row5 => "y^2 = x^3 + x^2 + 2T + 1",
            FamilyId::Row6 => "y^2 = x^3 + Tx^2 + 1",
            FamilyId::Row7 => "y^2 = x^3 - T^2 x + T^2",
            FamilyId::Row8 => "y^2 = x^3 - T^2 x + T^4",
            FamilyId::Row9 => "y^2 = x^3 + Tx^2 - (T+3)x + 1",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            FamilyId::Fam1 | FamilyId::Fam2 => 5,
            FamilyId::Fam3 | FamilyId::Fam4 => 4,
            _ => 0,
        }
    }

    /// The two-parameter catalog entry sums over (S, T) ∈ F_p², not t mod p.
    pub fn is_two_parameter(self) -> bool {
        self == FamilyId::Row1
    }
}

impl std::str::FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown family id \"{s}\"")))
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A parametrized curve family.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// y² = P(x)·T + Q(x). The semi-analytic route applies to this shape.
    LinearInT { p_poly: Polynomial, q_poly: Polynomial },
    /// A registry family with its coefficient tuple (empty for Row1–Row9).
    Registry { id: FamilyId, params: Vec<i64> },
    /// y² = x³ + A(T)x + B(T).
    GeneralWeierstrass { a_of_t: Polynomial, b_of_t: Polynomial },
}

impl FamilySpec {
    pub fn linear(p_poly: Polynomial, q_poly: Polynomial) -> Result<Self> {
        if p_poly.is_zero() {
            return Err(Error::InvalidInput(
                "linear-in-T family needs a nonzero T coefficient polynomial".into(),
            ));
        }
        Ok(FamilySpec::LinearInT { p_poly, q_poly })
    }

    pub fn registry(id: FamilyId, params: Vec<i64>) -> Result<Self> {
        if params.len() != id.param_count() {
            return Err(Error::InvalidInput(format!(
                "family {id} takes {} parameters, got {}",
                id.param_count(),
                params.len()
            )));
        }
        Ok(FamilySpec::Registry { id, params })
    }

    pub fn general(a_of_t: Polynomial, b_of_t: Polynomial) -> Self {
        FamilySpec::GeneralWeierstrass { a_of_t, b_of_t }
    }

    pub fn registry_id(&self) -> Option<FamilyId> {
        match self {
            FamilySpec::Registry { id, .. } => Some(*id),
            _ => None,
        }
    }

    pub fn is_two_parameter(&self) -> bool {
        self.registry_id().is_some_and(FamilyId::is_two_parameter)
    }

    /// Checks the per-prime hypothesis of a registry family. `Err` carries the
    /// human-readable skip reason; non-registry shapes only require p ≥ 5.
    pub fn hypothesis_check(&self, p: PrimeModulus) -> std::result::Result<(), String> {
        if p.get() < 5 {
            return Err(format!("p = {p} is a degenerate reduction for cubic curves"));
        }
        let FamilySpec::Registry { id, params } = self else {
            return Ok(());
        };
        let nonzero = |label: &str, v: i64| -> std::result::Result<(), String> {
            if p.reduce(v) == 0 {
                Err(format!("{id} needs p ∤ {label}, violated at p = {p}"))
            } else {
                Ok(())
            }
        };
        match id {
            FamilyId::Fam1 => {
                nonzero("a", params[0])?;
                nonzero("c", params[2])
            }
            FamilyId::Fam2 => {
                nonzero("a", params[0])?;
                nonzero("d", params[3])
            }
            FamilyId::Fam3 => {
                nonzero("a", params[0])?;
                nonzero("c", params[2])?;
                nonzero("d", params[3])
            }
            FamilyId::Fam4 => {
                nonzero("a", params[0])?;
                nonzero("b", params[1])?;
                nonzero("d", params[3])
            }
            _ => Ok(()),
        }
    }

    /// (P, Q) with f_T = P·T + Q, when the family has that shape.
    pub fn linear_decomposition(&self) -> Option<(Polynomial, Polynomial)> {
        match self {
            FamilySpec::LinearInT { p_poly, q_poly } => {
                Some((p_poly.clone(), q_poly.clone()))
            }
            FamilySpec::Registry { id, params } => registry_linear(*id, params),
            FamilySpec::GeneralWeierstrass { .. } => None,
        }
    }

    pub fn closed_form_available(&self) -> bool {
        matches!(self, FamilySpec::Registry { .. })
    }
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilySpec::LinearInT { p_poly, q_poly } => {
                write!(f, "y^2 = ({p_poly})T + ({q_poly})")
            }
            FamilySpec::Registry { id, params } => {
                if params.is_empty() {
                    write!(f, "{} [{}]", id, id.equation())
                } else {
                    let ps: Vec<String> = params.iter().map(|v| v.to_string()).collect();
                    write!(f, "{}({})", id, ps.join(","))
                }
            }
            FamilySpec::GeneralWeierstrass { a_of_t, b_of_t } => {
                write!(f, "y^2 = x^3 + ({a_of_t})x + ({b_of_t})")
            }
        }
    }
}

fn checked_c(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::InvalidInput("coefficient overflow".into()))
}

/// P, Q for registry families that are linear in T.
fn registry_linear(id: FamilyId, params: &[i64]) -> Option<(Polynomial, Polynomial)> {
    let w = |v: &[i128]| -> Option<Polynomial> {
        let c: Result<Vec<i64>> = v.iter().map(|&x| checked_c(x)).collect();
        c.ok().map(Polynomial::new)
    };
    match id {
        FamilyId::Fam1 => {
            let (a, b, c, d, e) = (
                params[0] as i128,
                params[1] as i128,
                params[2] as i128,
                params[3] as i128,
                params[4] as i128,
            );
            Some((
                w(&[b, a])?,
                w(&[b * e, a * e + b * d, a * d + b * c, a * c])?,
            ))
        }
        FamilyId::Fam2 => {
            let (a, b, c, d, e) = (
                params[0] as i128,
                params[1] as i128,
                params[2] as i128,
                params[3] as i128,
                params[4] as i128,
            );
            Some((
                w(&[c, b, a])?,
                w(&[c * e, b * e + c * d, a * e + b * d, a * d])?,
            ))
        }
        FamilyId::Fam3 => {
            let (a, b, c, d) = (params[0], params[1], params[2], params[3]);
            Some((
                Polynomial::new(vec![0, 0, d]),
                Polynomial::new(vec![0, c, b, a]),
            ))
        }
        FamilyId::Fam4 => {
            let (a, b, c, d) = (
                params[0] as i128,
                params[1] as i128,
                params[2] as i128,
                params[3] as i128,
            );
            Some((
                w(&[0, 0, b, a])?,
                w(&[0, b * d, a * d + b * c, a * c])?,
            ))
        }
        FamilyId::Row3 => Some((
            Polynomial::new(vec![0, 16]),
            Polynomial::new(vec![0, 8, 0, 1]),
        )),
        FamilyId::Row4 => Some((
            Polynomial::new(vec![0, 1, 1]),
            Polynomial::new(vec![0, 0, 1, 1]),
        )),
        FamilyId::Row5 => Some((
            Polynomial::new(vec![2]),
            Polynomial::new(vec![1, 0, 1, 1]),
        )),
        FamilyId::Row6 => Some((
            Polynomial::new(vec![0, 0, 1]),
            Polynomial::new(vec![1, 0, 0, 1]),
        )),
        FamilyId::Row9 => Some((
            Polynomial::new(vec![0, -1, 1]),
            Polynomial::new(vec![1, -3, 0, 1]),
        )),
        _ => None,
    }
}

/// a(p) = −Σ_{x mod p} (f(x)/p).
pub fn trace(f: &Polynomial, p: PrimeModulus) -> i64 {
    trace_with_table(f, &LegendreTable::build(p), p)
}

pub fn trace_with_table(f: &Polynomial, table: &LegendreTable, p: PrimeModulus) -> i64 {
    let mut s = 0i64;
    for x in 0..p.get() {
        s += table.chi(f.eval_mod(x, p)) as i64;
    }
    -s
}

fn ensure_fast_prime(p: PrimeModulus) -> Result<()> {
    if p.get() >= FAST_PRIME_LIMIT {
        return Err(Error::LimitExceeded(format!(
            "moment loops support p < 2^31, got p = {p}"
        )));
    }
    Ok(())
}

/// Coefficient rows [c0, c1, c2, c3] of f_t for t = 0..p−1 (cubics only).
fn coefficient_rows(fam: &FamilySpec, p: PrimeModulus) -> Result<Vec<[u64; 4]>> {
    ensure_fast_prime(p)?;
    let m = p.get();
    if let Some((pp, qq)) = fam.linear_decomposition() {
        if pp.degree().unwrap_or(0) > 3 || qq.degree().map_or(false, |d| d > 3) {
            return Err(Error::InvalidInput(
                "fiber profiling needs cubic fibers (degree ≤ 3)".into(),
            ));
        }
        let pe = pp.reduced(p, 4);
        let qe = qq.reduced(p, 4);
        return Ok((0..m)
            .map(|t| {
                [
                    (pe[0] * t + qe[0]) % m,
                    (pe[1] * t + qe[1]) % m,
                    (pe[2] * t + qe[2]) % m,
                    (pe[3] * t + qe[3]) % m,
                ]
            })
            .collect());
    }
    match fam {
        FamilySpec::GeneralWeierstrass { a_of_t, b_of_t } => Ok((0..m)
            .map(|t| [b_of_t.eval_mod(t, p), a_of_t.eval_mod(t, p), 0, 1])
            .collect()),
        FamilySpec::Registry { id: FamilyId::Row2, .. } => {
            let c432 = p.reduce(-432);
            Ok((0..m)
                .map(|t| {
                    let u = (9 * t + 1) % m;
                    [mul_mod(c432, mul_mod(u, u, m), m), 0, 0, 1]
                })
                .collect())
        }
        FamilySpec::Registry { id: FamilyId::Row7, .. } => Ok((0..m)
            .map(|t| {
                let t2 = (t * t) % m;
                [t2, (m - t2) % m, 0, 1]
            })
            .collect()),
        FamilySpec::Registry { id: FamilyId::Row8, .. } => Ok((0..m)
            .map(|t| {
                let t2 = (t * t) % m;
                [(t2 * t2) % m, (m - t2) % m, 0, 1]
            })
            .collect()),
        FamilySpec::Registry { id: FamilyId::Row1, .. } => Err(Error::InvalidInput(
            "the two-parameter family has no single-parameter fibers".into(),
        )),
        _ => unreachable!("all linear registry families handled above"),
    }
}

/// Traces a_t(p) for t = 0..p−1. Errors on the two-parameter family.
pub fn fiber_traces(fam: &FamilySpec, p: PrimeModulus) -> Result<Vec<i64>> {
    ensure_fast_prime(p)?;
    let m = p.get();
    let table = LegendreTable::build(p);
    if let Some((pp, qq)) = fam.linear_decomposition() {
        // One multiply per (t, x): f_t(x) = P(x)·t + Q(x) with P, Q tabulated.
        let deg = pp.coeffs().len().max(qq.coeffs().len()).max(4);
        let pe_c = pp.reduced(p, deg);
        let qe_c = qq.reduced(p, deg);
        let mut pe = vec![0u64; m as usize];
        let mut qe = vec![0u64; m as usize];
        for x in 0..m {
            let mut ap = 0u64;
            let mut aq = 0u64;
            for i in (0..deg).rev() {
                ap = (ap * x + pe_c[i]) % m;
                aq = (aq * x + qe_c[i]) % m;
            }
            pe[x as usize] = ap;
            qe[x as usize] = aq;
        }
        let mut out = Vec::with_capacity(m as usize);
        for t in 0..m {
            let mut s = 0i64;
            for x in 0..m as usize {
                s += table.chi((pe[x] * t + qe[x]) % m) as i64;
            }
            out.push(-s);
        }
        return Ok(out);
    }
    let rows = coefficient_rows(fam, p)?;
    let mut out = Vec::with_capacity(m as usize);
    for row in rows {
        let [c0, c1, c2, c3] = row;
        let mut s = 0i64;
        for x in 0..m {
            let v = ((((c3 * x + c2) % m) * x + c1) % m * x + c0) % m;
            s += table.chi(v) as i64;
        }
        out.push(-s);
    }
    Ok(out)
}

/// Reduced cubic discriminant of c3x³+c2x²+c1x+c0:
/// 18·c3c2c1c0 − 4c2³c0 + c2²c1² − 4c3c1³ − 27c3²c0².
fn cubic_disc_mod(row: [u64; 4], p: PrimeModulus) -> u64 {
    let m = p.get();
    let [c0, c1, c2, c3] = row;
    let t1 = mul_mod(mul_mod(18 % m, mul_mod(c3, c2, m), m), mul_mod(c1, c0, m), m);
    let t2 = mul_mod(mul_mod(4 % m, mul_mod(mul_mod(c2, c2, m), c2, m), m), c0, m);
    let t3 = mul_mod(mul_mod(c2, c2, m), mul_mod(c1, c1, m), m);
    let t4 = mul_mod(mul_mod(4 % m, c3, m), mul_mod(mul_mod(c1, c1, m), c1, m), m);
    let t5 = mul_mod(mul_mod(27 % m, mul_mod(c3, c3, m), m), mul_mod(c0, c0, m), m);
    (t1 + m - t2 + t3 + 2 * m - t4 - t5 + 2 * m) % m
}

/// Per-fiber view: the trace and whether the specialized cubic is singular
/// (vanishing discriminant or degenerated leading coefficient).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberPoint {
    pub t: u64,
    pub trace: i64,
    pub singular: bool,
}

pub fn fiber_profile(fam: &FamilySpec, p: PrimeModulus) -> Result<Vec<FiberPoint>> {
    let traces = fiber_traces(fam, p)?;
    let rows = coefficient_rows(fam, p)?;
    Ok(traces
        .into_iter()
        .zip(rows)
        .enumerate()
        .map(|(t, (trace, row))| FiberPoint {
            t: t as u64,
            trace,
            singular: row[3] == 0 || cubic_disc_mod(row, p) == 0,
        })
        .collect())
}

/// Number of t mod p with singular specialization. For the two-parameter
/// family this counts (s, t) pairs with vanishing discriminant −4s³−27t².
pub fn singular_fiber_count(fam: &FamilySpec, p: PrimeModulus) -> Result<u64> {
    if fam.is_two_parameter() {
        ensure_fast_prime(p)?;
        let m = p.get();
        let table = LegendreTable::build(p);
        // #{t : 27t² ≡ −4s³} = 1 + chi(−4·27·s³) for each s, plus the s=0 fiber.
        let mut count = 0i64;
        for s in 0..m {
            let s3 = mul_mod(mul_mod(s, s, m), s, m);
            let v = mul_mod(p.reduce(-108), s3, m);
            count += if s == 0 { 1 } else { 1 + table.chi(v) as i64 };
        }
        return Ok(count as u64);
    }
    let rows = coefficient_rows(fam, p)?;
    Ok(rows
        .into_iter()
        .filter(|&row| row[3] == 0 || cubic_disc_mod(row, p) == 0)
        .count() as u64)
}

fn accumulate_power(acc: i128, a: i64, k: u32) -> Result<i128> {
    let term = (a as i128)
        .checked_pow(k)
        .ok_or_else(|| Error::LimitExceeded("moment term overflows 128 bits".into()))?;
    acc.checked_add(term)
        .ok_or_else(|| Error::LimitExceeded("moment sum overflows 128 bits".into()))
}

fn two_param_moments(ks: &[u32], p: PrimeModulus) -> Result<Vec<i128>> {
    ensure_fast_prime(p)?;
    let m = p.get();
    let table = LegendreTable::build(p);
    let mut acc = vec![0i128; ks.len()];
    let mut col = vec![0u64; m as usize];
    for s in 0..m {
        for x in 0..m {
            col[x as usize] = (mul_mod(x, x, m) + s) % m * x % m;
        }
        for t in 0..m {
            let mut sum = 0i64;
            for &v in &col {
                sum += table.chi((v + t) % m) as i64;
            }
            let a = -sum;
            for (i, &k) in ks.iter().enumerate() {
                acc[i] = accumulate_power(acc[i], a, k)?;
            }
        }
    }
    Ok(acc)
}

/// Exact Σ_t a_t(p)^k by the literal double sum.
///
/// Cost O(p²) (O(p³) for the two-parameter family); refuses outsized runs
/// unless `force` is set in [`family_moment_brute_opts`].
pub fn family_moment_brute(fam: &FamilySpec, k: u32, p: PrimeModulus) -> Result<i128> {
    family_moment_brute_opts(fam, k, p, false)
}

pub fn family_moment_brute_opts(
    fam: &FamilySpec,
    k: u32,
    p: PrimeModulus,
    force: bool,
) -> Result<i128> {
    Ok(family_moments_brute_batch(fam, &[k], p, force)?[0])
}

/// Several moment orders from one trace pass.
pub fn family_moments_brute_batch(
    fam: &FamilySpec,
    ks: &[u32],
    p: PrimeModulus,
    force: bool,
) -> Result<Vec<i128>> {
    if !force {
        if fam.is_two_parameter() && p.get() > BRUTE_TWO_PARAM_LIMIT {
            return Err(Error::LimitExceeded(format!(
                "two-parameter brute force is O(p³); refusing p = {p} > {BRUTE_TWO_PARAM_LIMIT} without force"
            )));
        }
        if ks.iter().any(|&k| k >= 3) && p.get() > BRUTE_HIGH_K_LIMIT {
            return Err(Error::LimitExceeded(format!(
                "brute force for k ≥ 3 refuses p = {p} > {BRUTE_HIGH_K_LIMIT} without force"
            )));
        }
    }
    if fam.is_two_parameter() {
        return two_param_moments(ks, p);
    }
    let traces = fiber_traces(fam, p)?;
    let mut acc = vec![0i128; ks.len()];
    for a in traces {
        for (i, &k) in ks.iter().enumerate() {
            acc[i] = accumulate_power(acc[i], a, k)?;
        }
    }
    Ok(acc)
}

/// First moment of y² = P(x)T + Q(x) without the t-loop:
/// only x with P(x) ≡ 0 survive, each contributing −p·(Q(x)/p).
pub fn first_moment_semi_analytic(
    p_poly: &Polynomial,
    q_poly: &Polynomial,
    p: PrimeModulus,
) -> Result<i128> {
    ensure_fast_prime(p)?;
    let table = LegendreTable::build(p);
    let mut s = 0i128;
    for x in 0..p.get() {
        if p_poly.eval_mod(x, p) == 0 {
            s += table.chi(q_poly.eval_mod(x, p)) as i128;
        }
    }
    Ok(-(p.get() as i128) * s)
}

/// Second moment of y² = P(x)T + Q(x) by collapsing the inner t-sum.
///
/// For each residue pair (x, y) the t-sum is a quadratic character sum with
/// leading coefficient P(x)P(y) and square discriminant (P(x)Q(y)−Q(x)P(y))²,
/// so it evaluates to ±1-weighted closed forms; degenerate pairs contribute
/// p·(Q(x)Q(y)/p). Cost O(p²) versus O(p³) for brute force.
pub fn second_moment_semi_analytic(
    p_poly: &Polynomial,
    q_poly: &Polynomial,
    p: PrimeModulus,
) -> Result<i128> {
    ensure_fast_prime(p)?;
    let m = p.get();
    let table = LegendreTable::build(p);
    let n = m as usize;
    let mut pe = vec![0u64; n];
    let mut qe = vec![0u64; n];
    for x in 0..m {
        pe[x as usize] = p_poly.eval_mod(x, p);
        qe[x as usize] = q_poly.eval_mod(x, p);
    }
    let mut total = 0i128;
    for x in 0..n {
        let (px, qx) = (pe[x], qe[x]);
        for y in 0..n {
            let (py, qy) = (pe[y], qe[y]);
            if px == 0 || py == 0 {
                if px == 0 && py == 0 {
                    total += m as i128 * table.chi(qx * qy % m) as i128;
                }
                // exactly one of P(x), P(y) zero: the t-sum is a full linear
                // period when Q≠0 there, and identically zero otherwise
                continue;
            }
            let s = (table.chi(px) * table.chi(py)) as i128;
            if (px * qy) % m == (py * qx) % m {
                total += (m as i128 - 1) * s;
            } else {
                total -= s;
            }
        }
    }
    Ok(total)
}

/// Correction term (−3/p)·p + (3/p)·p entering two catalog second moments.
pub fn correction_c0(p: PrimeModulus) -> i128 {
    (legendre_symbol(-3, p) as i128 + legendre_symbol(3, p) as i128) * p.get() as i128
}

/// Correction term [Σ_x ((x³−x)/p)]².
pub fn correction_c1(p: PrimeModulus) -> i128 {
    let table = LegendreTable::build(p);
    let m = p.get();
    let mut s = 0i128;
    for x in 0..m {
        let v = (mul_mod(x, x, m) + m - 1) % m;
        s += table.chi(mul_mod(x, v, m)) as i128;
    }
    s * s
}

/// Correction term p·Σ_x ((4x³+1)/p).
pub fn correction_c32(p: PrimeModulus) -> i128 {
    let table = LegendreTable::build(p);
    let m = p.get();
    let mut s = 0i128;
    for x in 0..m {
        let v = (mul_mod(4 % m, mul_mod(mul_mod(x, x, m), x, m), m) + 1) % m;
        s += table.chi(v) as i128;
    }
    s * p.get() as i128
}

/// Closed-form k-th moment (k ∈ {1, 2}) for a registry family.
///
/// Returns `SkippedPrime` when the family hypothesis fails at p.
pub fn closed_form_moment(fam: &FamilySpec, k: u32, p: PrimeModulus) -> Result<i128> {
    let FamilySpec::Registry { id, params } = fam else {
        return Err(Error::InvalidInput(
            "closed forms exist only for registry families".into(),
        ));
    };
    if let Err(reason) = fam.hypothesis_check(p) {
        return Err(Error::SkippedPrime { p: p.get(), reason });
    }
    if k != 1 && k != 2 {
        return Err(Error::InvalidInput(format!(
            "closed forms cover k ∈ {{1, 2}}, got k = {k}"
        )));
    }
    let pi = p.get() as i128;
    let chi = |v: i64| legendre_symbol(v, p) as i128;
    if k == 1 {
        return Ok(match id {
            FamilyId::Row6 => -pi,
            FamilyId::Row7 | FamilyId::Row8 => -2 * pi,
            FamilyId::Row9 => {
                if p.get() % 4 == 1 {
                    -2 * pi
                } else {
                    0
                }
            }
            _ => 0,
        });
    }
    Ok(match id {
        FamilyId::Fam1 => {
            let (a, b, c, d) = (
                params[0] as i128,
                params[1] as i128,
                params[2] as i128,
                params[3] as i128,
            );
            let chi_m1 = chi(-1);
            if (a * d - 2 * b * c).rem_euclid(pi) == 0 {
                (pi * pi - pi) * (1 + chi_m1)
            } else {
                pi * pi - pi * (2 + chi_m1)
            }
        }
        FamilyId::Fam2 => {
            let (a, b, c) = (params[0] as i128, params[1] as i128, params[2] as i128);
            let disc = b * b - 4 * a * c;
            if disc.rem_euclid(pi) == 0 {
                pi - 1
            } else {
                let chi_disc = legendre_symbol(disc.rem_euclid(pi) as i64, p) as i128;
                pi * pi - pi * (1 + chi_disc) - 1
            }
        }
        FamilyId::Fam3 => {
            let ac = (params[0] as i128 * params[2] as i128).rem_euclid(pi) as i64;
            pi * pi - pi - 1 - pi * chi(ac)
        }
        FamilyId::Fam4 => pi * pi - 2 * pi - 1,
        FamilyId::Row1 => pi * pi * pi - pi * pi,
        FamilyId::Row2 => {
            if p.get() % 3 == 1 {
                2 * pi * pi - 2 * pi
            } else {
                0
            }
        }
        FamilyId::Row3 => {
            if p.get() % 4 == 1 {
                2 * pi * pi - 2 * pi
            } else {
                0
            }
        }
        FamilyId::Row4 => pi * pi - 2 * pi - 1,
        FamilyId::Row5 => pi * pi - 2 * pi - pi * chi(-3),
        FamilyId::Row6 => {
            let n32 = crate::modular::cube_root_count(2, p) as i128;
            pi * pi - n32 * pi - 1 + correction_c32(p)
        }
        FamilyId::Row7 | FamilyId::Row8 => {
            pi * pi - pi - correction_c1(p) - correction_c0(p)
        }
        FamilyId::Row9 => {
            let lower = if p.get() % 6 == 1 { 4 * pi } else { 0 };
            pi * pi - lower - 1
        }
    })
}

/// Per-prime moment values from every applicable route.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentRecord {
    pub p: u64,
    pub k: u32,
    pub brute: Option<i128>,
    pub semi_analytic: Option<i128>,
    pub closed_form: Option<i128>,
    pub skipped: bool,
    pub reason: Option<String>,
}

impl MomentRecord {
    pub fn skipped(p: u64, k: u32, reason: String) -> Self {
        MomentRecord {
            p,
            k,
            brute: None,
            semi_analytic: None,
            closed_form: None,
            skipped: true,
            reason: Some(reason),
        }
    }

    fn values(&self) -> Vec<i128> {
        [self.brute, self.semi_analytic, self.closed_form]
            .into_iter()
            .flatten()
            .collect()
    }

    /// Max pairwise spread of the present values; 0 when they all agree.
    pub fn residual(&self) -> i128 {
        let vs = self.values();
        match (vs.iter().max(), vs.iter().min()) {
            (Some(a), Some(b)) => a - b,
            _ => 0,
        }
    }

    pub fn consistent(&self) -> bool {
        self.residual() == 0
    }
}

/// Evaluates k-th moment via every route the family supports.
pub fn evaluate_record(
    fam: &FamilySpec,
    k: u32,
    p: PrimeModulus,
    force: bool,
) -> Result<MomentRecord> {
    if let Err(reason) = fam.hypothesis_check(p) {
        return Ok(MomentRecord::skipped(p.get(), k, reason));
    }
    let brute = family_moment_brute_opts(fam, k, p, force)?;
    let semi = match (k, fam.linear_decomposition()) {
        (1, Some((pp, qq))) => Some(first_moment_semi_analytic(&pp, &qq, p)?),
        (2, Some((pp, qq))) => Some(second_moment_semi_analytic(&pp, &qq, p)?),
        _ => None,
    };
    let closed = if fam.closed_form_available() && (k == 1 || k == 2) {
        Some(closed_form_moment(fam, k, p)?)
    } else {
        None
    };
    Ok(MomentRecord {
        p: p.get(),
        k,
        brute: Some(brute),
        semi_analytic: semi,
        closed_form: closed,
        skipped: false,
        reason: None,
    })
}

/// Cheapest exact route for one moment order: closed form, then the
/// semi-analytic collapse, then brute force.
pub fn best_moment(fam: &FamilySpec, k: u32, p: PrimeModulus, force: bool) -> Result<i128> {
    if fam.closed_form_available() && (k == 1 || k == 2) {
        return closed_form_moment(fam, k, p);
    }
    if let Some((pp, qq)) = fam.linear_decomposition() {
        match k {
            1 => return first_moment_semi_analytic(&pp, &qq, p),
            2 => return second_moment_semi_analytic(&pp, &qq, p),
            _ => {}
        }
    }
    family_moment_brute_opts(fam, k, p, force)
}

fn valid_primes_upto(x: u64) -> Vec<PrimeModulus> {
    let mut out = Vec::new();
    crate::modular::for_each_prime(x, |q| {
        if q >= 5 {
            out.push(PrimeModulus::new(q).expect("sieve yields primes"));
        }
    });
    out
}

/// (1/X)·Σ_{p ≤ X} (−A₁(p)/p)·ln p over primes where the family hypothesis
/// holds (p ≥ 5 throughout: smaller primes have no cubic reduction here).
pub fn rank_sum(fam: &FamilySpec, x: u64) -> Result<f64> {
    let mut total = 0.0f64;
    for p in valid_primes_upto(x) {
        if fam.hypothesis_check(p).is_err() {
            continue;
        }
        let a1 = best_moment(fam, 1, p, false)?;
        total += (-(a1 as f64) / p.get() as f64) * (p.get() as f64).ln();
    }
    Ok(total / x as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignCounts {
    pub negative: u64,
    pub zero: u64,
    pub positive: u64,
}

impl SignCounts {
    pub fn push(&mut self, v: f64) {
        if v < 0.0 {
            self.negative += 1;
        } else if v > 0.0 {
            self.positive += 1;
        } else {
            self.zero += 1;
        }
    }
}

/// One unskipped prime in a bias sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasRow {
    pub p: u64,
    pub second_moment: i128,
    /// (A₂(p) − p²)/p, the per-prime lower-order residue.
    pub residual: f64,
    pub singular_fibers: u64,
    /// |A₂ − p²| > 4p^{3/2}, outside the square-root cancellation window
    /// expected of non-constant-j one-parameter families.
    pub michel_excess: bool,
}

/// Sweep summary: averaged main term A₂/p², averaged lower-order residue,
/// residue sign counts, and skipped primes with reasons.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub x: u64,
    pub rows: Vec<BiasRow>,
    pub skipped: Vec<(u64, String)>,
    pub main_term_avg: f64,
    pub lower_term_avg: f64,
    pub sign_counts: SignCounts,
    pub michel_excess_count: u64,
}

/// Per-prime residuals r(p) = (A₂(p) − p²)/p for all valid 5 ≤ p ≤ X,
/// using the cheapest exact route per prime.
pub fn bias_sweep(fam: &FamilySpec, x: u64) -> Result<BiasReport> {
    if x < 5 {
        return Err(Error::EmptySweep(format!("no valid primes up to {x}")));
    }
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for p in valid_primes_upto(x) {
        if let Err(reason) = fam.hypothesis_check(p) {
            skipped.push((p.get(), reason));
            continue;
        }
        let a2 = best_moment(fam, 2, p, false)?;
        let pf = p.get() as f64;
        let residual = (a2 as f64 - pf * pf) / pf;
        let michel_excess = (a2 as f64 - pf * pf).abs() > 4.0 * pf.powf(1.5);
        rows.push(BiasRow {
            p: p.get(),
            second_moment: a2,
            residual,
            singular_fibers: singular_fiber_count(fam, p)?,
            michel_excess,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptySweep(format!(
            "all primes up to {x} skipped by the family hypothesis"
        )));
    }
    let n = rows.len() as f64;
    let mut sign_counts = SignCounts::default();
    let mut main = 0.0;
    let mut lower = 0.0;
    let mut excess = 0u64;
    for row in &rows {
        let pf = row.p as f64;
        main += row.second_moment as f64 / (pf * pf);
        lower += row.residual;
        sign_counts.push(row.residual);
        excess += row.michel_excess as u64;
    }
    Ok(BiasReport {
        x,
        rows,
        skipped,
        main_term_avg: main / n,
        lower_term_avg: lower / n,
        sign_counts,
        michel_excess_count: excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> PrimeModulus {
        PrimeModulus::new(v).unwrap()
    }

    fn registry(id: FamilyId, params: &[i64]) -> FamilySpec {
        FamilySpec::registry(id, params.to_vec()).unwrap()
    }

    #[test]
    fn polynomial_basics() {
        let f = Polynomial::new(vec![1, 0, -3, 2]);
        assert_eq!(f.degree(), Some(3));
        assert_eq!(f.eval_mod(2, p(7)), (2 * 8 - 3 * 4 + 1u64 as i64).rem_euclid(7) as u64);
        assert_eq!(format!("{f}"), "2x^3 - 3x^2 + 1");
        assert!(Polynomial::new(vec![0, 0]).is_zero());
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&Polynomial::new(vec![1, 0, 0, 1]), p(5)), 0);
        assert_eq!(trace(&Polynomial::new(vec![0, -1, 0, 1]), p(5)), -2);
        assert_eq!(trace(&Polynomial::new(vec![0, 0, 0, 1]), p(7)), 0);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("fam3".parse::<FamilyId>().unwrap(), FamilyId::Fam3);
        assert_eq!("row7".parse::<FamilyId>().unwrap(), FamilyId::Row7);
        assert!("row10".parse::<FamilyId>().is_err());
        assert!(FamilySpec::registry(FamilyId::Fam1, vec![1, 2]).is_err());
    }

    #[test]
    fn hypothesis_checks() {
        let fam = registry(FamilyId::Fam1, &[7, 0, 1, 1, 0]);
        assert!(fam.hypothesis_check(p(7)).is_err());
        assert!(fam.hypothesis_check(p(11)).is_ok());
        let fam = registry(FamilyId::Fam4, &[1, 5, 1, 1]);
        assert!(fam.hypothesis_check(p(5)).is_err());
        assert!(fam.hypothesis_check(p(3)).is_err());
    }

    #[test]
    fn fam1_examples() {
        let fam = registry(FamilyId::Fam1, &[1, 0, 1, 1, 0]);
        assert_eq!(closed_form_moment(&fam, 2, p(7)).unwrap(), 42);
        assert_eq!(family_moment_brute(&fam, 2, p(7)).unwrap(), 42);
        let (pp, qq) = fam.linear_decomposition().unwrap();
        assert_eq!(second_moment_semi_analytic(&pp, &qq, p(7)).unwrap(), 42);
        // degenerate tuple: ad − 2bc = 0 for every p
        let fam = registry(FamilyId::Fam1, &[1, 0, 1, 0, 0]);
        assert_eq!(closed_form_moment(&fam, 2, p(5)).unwrap(), 40);
        assert_eq!(family_moment_brute(&fam, 2, p(5)).unwrap(), 40);
    }

    #[test]
    fn fam2_examples() {
        let fam = registry(FamilyId::Fam2, &[1, 1, 0, 1, 0]);
        assert_eq!(closed_form_moment(&fam, 2, p(7)).unwrap(), 34);
        assert_eq!(family_moment_brute(&fam, 2, p(7)).unwrap(), 34);
        // square discriminant branch: b² − 4ac = 0
        let fam = registry(FamilyId::Fam2, &[1, 2, 1, 1, 0]);
        assert_eq!(closed_form_moment(&fam, 2, p(7)).unwrap(), 6);
        assert_eq!(family_moment_brute(&fam, 2, p(7)).unwrap(), 6);
    }

    #[test]
    fn fam3_fam4_examples() {
        let fam = registry(FamilyId::Fam3, &[1, 1, 1, 1]);
        assert_eq!(family_moment_brute(&fam, 2, p(5)).unwrap(), 14);
        assert_eq!(closed_form_moment(&fam, 2, p(5)).unwrap(), 14);
        let fam = registry(FamilyId::Fam4, &[1, 1, 1, 1]);
        assert_eq!(family_moment_brute(&fam, 2, p(5)).unwrap(), 14);
        assert_eq!(closed_form_moment(&fam, 2, p(5)).unwrap(), 14);
        assert_eq!(closed_form_moment(&fam, 2, p(11)).unwrap(), 98);
    }

    #[test]
    fn first_moments_vanish_for_base_families() {
        for (id, params) in [
            (FamilyId::Fam1, vec![2, 3, 1, 1, 4]),
            (FamilyId::Fam2, vec![1, 2, 3, 2, 1]),
            (FamilyId::Fam3, vec![2, 0, 3, 1]),
            (FamilyId::Fam4, vec![1, 2, 3, 4]),
        ] {
            let fam = registry(id, &params);
            for q in [5u64, 7, 11, 13] {
                let q = p(q);
                if fam.hypothesis_check(q).is_err() {
                    continue;
                }
                assert_eq!(family_moment_brute(&fam, 1, q).unwrap(), 0, "{id} p={q}");
                assert_eq!(closed_form_moment(&fam, 1, q).unwrap(), 0);
            }
        }
    }

    #[test]
    fn catalog_row_examples() {
        let cases: [(FamilyId, u64, i128, i128); 12] = [
            (FamilyId::Row2, 5, 0, 0),
            (FamilyId::Row2, 7, 0, 84),
            (FamilyId::Row3, 5, 0, 40),
            (FamilyId::Row3, 7, 0, 0),
            (FamilyId::Row4, 7, 0, 34),
            (FamilyId::Row5, 5, 0, 20),
            (FamilyId::Row5, 7, 0, 28),
            (FamilyId::Row6, 5, -5, 19),
            (FamilyId::Row7, 5, -10, 26),
            (FamilyId::Row7, 7, -14, 42),
            (FamilyId::Row8, 5, -10, 26),
            (FamilyId::Row9, 5, -10, 24),
        ];
        for (id, q, a1, a2) in cases {
            let fam = registry(id, &[]);
            let q = p(q);
            assert_eq!(closed_form_moment(&fam, 1, q).unwrap(), a1, "{id} k=1 p={q}");
            assert_eq!(closed_form_moment(&fam, 2, q).unwrap(), a2, "{id} k=2 p={q}");
            assert_eq!(family_moment_brute(&fam, 1, q).unwrap(), a1, "{id} brute k=1");
            assert_eq!(family_moment_brute(&fam, 2, q).unwrap(), a2, "{id} brute k=2");
        }
    }

    #[test]
    fn two_parameter_moments() {
        let fam = registry(FamilyId::Row1, &[]);
        assert_eq!(family_moment_brute(&fam, 1, p(5)).unwrap(), 0);
        assert_eq!(family_moment_brute(&fam, 2, p(5)).unwrap(), 100);
        assert_eq!(closed_form_moment(&fam, 2, p(5)).unwrap(), 100);
        assert_eq!(family_moment_brute(&fam, 2, p(13)).unwrap(), 13 * 13 * 13 - 13 * 13);
        // k = 0 counts the (s, t) grid
        assert_eq!(family_moment_brute(&fam, 0, p(5)).unwrap(), 25);
    }

    #[test]
    fn zeroth_moment_counts_fibers() {
        for (id, params) in [
            (FamilyId::Fam1, vec![1, 0, 1, 1, 0]),
            (FamilyId::Row6, vec![]),
        ] {
            let fam = registry(id, &params);
            assert_eq!(family_moment_brute(&fam, 0, p(11)).unwrap(), 11);
        }
    }

    #[test]
    fn semi_analytic_matches_brute_on_catalog_rows() {
        for id in [
            FamilyId::Row3,
            FamilyId::Row4,
            FamilyId::Row5,
            FamilyId::Row6,
            FamilyId::Row9,
        ] {
            let fam = registry(id, &[]);
            let (pp, qq) = fam.linear_decomposition().unwrap();
            for q in [5u64, 7, 11, 13, 17, 19, 23] {
                let q = p(q);
                assert_eq!(
                    second_moment_semi_analytic(&pp, &qq, q).unwrap(),
                    family_moment_brute(&fam, 2, q).unwrap(),
                    "{id} p={q}"
                );
                assert_eq!(
                    first_moment_semi_analytic(&pp, &qq, q).unwrap(),
                    family_moment_brute(&fam, 1, q).unwrap(),
                    "{id} k=1 p={q}"
                );
            }
        }
    }

    #[test]
    fn general_weierstrass_brute() {
        // y² = x³ + T²x + T³ at p = 7: fibers are twists of x³ + x + 1
        let fam = FamilySpec::general(
            Polynomial::new(vec![0, 0, 1]),
            Polynomial::new(vec![0, 0, 0, 1]),
        );
        let base = trace(&Polynomial::new(vec![1, 1, 0, 1]), p(7)) as i128;
        assert_eq!(family_moment_brute(&fam, 2, p(7)).unwrap(), 6 * base * base);
        assert_eq!(family_moment_brute(&fam, 1, p(7)).unwrap(), 0);
    }

    #[test]
    fn skipped_prime_surfaces_reason() {
        let fam = registry(FamilyId::Fam3, &[5, 1, 1, 1]);
        match closed_form_moment(&fam, 2, p(5)) {
            Err(Error::SkippedPrime { p: 5, .. }) => {}
            other => panic!("expected skip, got {other:?}"),
        }
        let rec = evaluate_record(&fam, 2, p(5), false).unwrap();
        assert!(rec.skipped);
        assert!(rec.reason.is_some());
    }

    #[test]
    fn moment_record_consistency() {
        let fam = registry(FamilyId::Fam1, &[1, 0, 1, 1, 0]);
        let rec = evaluate_record(&fam, 2, p(13), false).unwrap();
        assert_eq!(rec.brute, rec.closed_form);
        assert_eq!(rec.brute, rec.semi_analytic);
        assert!(rec.consistent());
        assert_eq!(rec.residual(), 0);
    }

    #[test]
    fn brute_force_guards() {
        let fam = registry(FamilyId::Row1, &[]);
        assert!(matches!(
            family_moment_brute(&fam, 2, p(2003)),
            Err(Error::LimitExceeded(_))
        ));
        let fam = registry(FamilyId::Fam4, &[1, 1, 1, 1]);
        assert!(matches!(
            family_moment_brute(&fam, 3, p(20011)),
            Err(Error::LimitExceeded(_))
        ));
    }

    #[test]
    fn hasse_bound_on_nonsingular_fibers() {
        for (id, params) in [
            (FamilyId::Fam1, vec![1, 2, 1, 3, 1]),
            (FamilyId::Row7, vec![]),
            (FamilyId::Row9, vec![]),
        ] {
            let fam = registry(id, &params);
            for q in [5u64, 13, 31, 53] {
                let q = p(q);
                if fam.hypothesis_check(q).is_err() {
                    continue;
                }
                let bound = 2.0 * (q.get() as f64).sqrt();
                for fp in fiber_profile(&fam, q).unwrap() {
                    if !fp.singular {
                        assert!(
                            (fp.trace as f64).abs() <= bound + 1e-9,
                            "{id} p={q} t={} trace={}",
                            fp.t,
                            fp.trace
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn singular_counts_match_profile() {
        for (id, params) in [
            (FamilyId::Fam2, vec![1, 1, 1, 1, 1]),
            (FamilyId::Row2, vec![]),
            (FamilyId::Row8, vec![]),
        ] {
            let fam = registry(id, &params);
            for q in [5u64, 7, 11, 13] {
                let q = p(q);
                let profile = fiber_profile(&fam, q).unwrap();
                let direct = profile.iter().filter(|f| f.singular).count() as u64;
                assert_eq!(singular_fiber_count(&fam, q).unwrap(), direct, "{id} p={q}");
            }
        }
    }

    #[test]
    fn two_param_singular_count_is_p() {
        // #{(s,t) : −4s³ ≡ 27t²} = p for every p ≥ 5
        let fam = registry(FamilyId::Row1, &[]);
        for q in [5u64, 7, 11, 13, 17] {
            assert_eq!(singular_fiber_count(&fam, p(q)).unwrap(), q);
        }
    }

    #[test]
    fn rank_sum_values() {
        let fam = registry(FamilyId::Fam1, &[1, 0, 1, 1, 0]);
        assert!(rank_sum(&fam, 1000).unwrap().abs() < 0.2);
        let fam = registry(FamilyId::Row8, &[]);
        let rs = rank_sum(&fam, 2000).unwrap();
        assert!((rs - 2.0).abs() < 0.2, "rank sum {rs}");
    }

    #[test]
    fn bias_sweep_fam1() {
        let fam = registry(FamilyId::Fam1, &[1, 0, 1, 1, 0]);
        let report = bias_sweep(&fam, 1000).unwrap();
        assert!(report.skipped.is_empty());
        assert!((report.lower_term_avg + 2.0).abs() < 0.25, "{}", report.lower_term_avg);
        assert!((report.main_term_avg - 1.0).abs() < 0.05);
        assert_eq!(report.sign_counts.positive, 0);
        assert_eq!(report.sign_counts.zero, 0);
        assert_eq!(report.michel_excess_count, 0);
        assert!(bias_sweep(&fam, 4).is_err());
    }

    #[test]
    fn bias_sweep_skips_bad_primes() {
        let fam = registry(FamilyId::Fam3, &[5, 1, 7, 1]);
        let report = bias_sweep(&fam, 100).unwrap();
        assert_eq!(report.skipped.len(), 2);
        assert!(report.skipped.iter().any(|(q, _)| *q == 5));
        assert!(report.skipped.iter().any(|(q, _)| *q == 7));
        assert!(report.rows.iter().all(|r| r.p != 5 && r.p != 7));
    }
}
