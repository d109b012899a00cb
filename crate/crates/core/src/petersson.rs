//! Ingredients of Petersson-type averages: Kloosterman and Ramanujan sums,
//! J-Bessel evaluation, smooth bump weights, the discriminant cusp form's
//! coefficients with their Hecke structure, and the prime-power skeleton
//! sums that control symmetric-lift second moments.

use crate::error::{Error, Result};
use crate::modular::{for_each_prime, is_prime_u64, moebius, PrimeTable};
use num_rational::Ratio;
use std::f64::consts::PI;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of a mod c for gcd(a, c) = 1, c ≥ 2.
fn inv_mod(a: u64, c: u64) -> u64 {
    let (mut r0, mut r1) = (c as i128, (a % c) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(c as i128) as u64
}

const KLOOSTERMAN_MODULUS_LIMIT: u64 = 10_000_000;

/// Kloosterman sum S(m, n; c) = Σ_{a mod c, (a,c)=1} cos(2π(ma + n·a⁻¹)/c).
///
/// Real-valued but not an integer in general (S(1,1;5) = 2 + 2cos(4π/5)), so
/// it is returned as a float with no rounding.
pub fn kloosterman(m: u64, n: u64, c: u64) -> Result<f64> {
    if c == 0 || c > KLOOSTERMAN_MODULUS_LIMIT {
        return Err(Error::InvalidInput(format!(
            "modulus must be in 1..={KLOOSTERMAN_MODULUS_LIMIT}, got {c}"
        )));
    }
    if c == 1 {
        return Ok(1.0);
    }
    let (mr, nr) = (m % c, n % c);
    let mut sum = 0.0f64;
    for a in 1..c {
        if gcd(a, c) != 1 {
            continue;
        }
        let abar = inv_mod(a, c);
        let phase = (mr * a + nr * abar) % c;
        sum += (2.0 * PI * phase as f64 / c as f64).cos();
    }
    Ok(sum)
}

/// Ramanujan sum R(m; c) by the divisor formula Σ_{d | (c,m)} μ(c/d)·d,
/// an exact integer.
pub fn ramanujan_sum(m: u64, c: u64) -> Result<i64> {
    if c == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    let g = if m % c == 0 { c } else { gcd(m % c, c) };
    let mut sum = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            sum += moebius(c / d) * d as i64;
            let e = g / d;
            if e != d {
                sum += moebius(c / e) * e as i64;
            }
        }
        d += 1;
    }
    Ok(sum)
}

/// R(m; c) by the exponential definition Σ_{a mod c, (a,c)=1} cos(2π a m/c).
/// Agrees with [`ramanujan_sum`] to floating accuracy.
pub fn ramanujan_sum_exponential(m: u64, c: u64) -> Result<f64> {
    if c == 0 || c > KLOOSTERMAN_MODULUS_LIMIT {
        return Err(Error::InvalidInput(format!(
            "modulus must be in 1..={KLOOSTERMAN_MODULUS_LIMIT}, got {c}"
        )));
    }
    if c == 1 {
        return Ok(1.0);
    }
    let mr = m % c;
    let mut sum = 0.0f64;
    for a in 1..c {
        if gcd(a, c) == 1 {
            sum += (2.0 * PI * ((a * mr % c) as f64) / c as f64).cos();
        }
    }
    Ok(sum)
}

/// J-Bessel function of integer order by the ascending series (small
/// argument) or Miller's backward recurrence with the even-order
/// normalization (large argument). Absolute error below 1e−10 over the
/// supported range (0 ≤ x ≤ 500).
pub fn bessel_j(nu: u32, x: f64) -> Result<f64> {
    if !(0.0..=500.0).contains(&x) {
        return Err(Error::InvalidInput(format!(
            "argument must lie in [0, 500], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    if x <= 10.0 {
        Ok(bessel_series(nu, x))
    } else {
        Ok(bessel_miller(nu, x))
    }
}

fn bessel_series(nu: u32, x: f64) -> f64 {
    // first term (x/2)^ν/ν!; vanishing underflow for huge ν is the truth
    let half = 0.5 * x;
    let mut term = 1.0f64;
    for k in 1..=nu as u64 {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let mut sum = term;
    let mut k = 1u64;
    loop {
        term *= -(half * half) / (k as f64 * (k as f64 + nu as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) || k > 200 {
            break;
        }
        k += 1;
    }
    sum
}

fn bessel_miller(nu: u32, x: f64) -> f64 {
    let mut start = ((2.0 * x) as u32).max(nu + 20) + 40;
    start += start & 1;
    let mut fp1 = 0.0f64;
    let mut f = 1e-280f64;
    let mut target = if nu == start { f } else { 0.0 };
    let mut norm = 0.0f64;
    for k in (1..=start).rev() {
        let fm1 = (2 * k) as f64 / x * f - fp1;
        fp1 = f;
        f = fm1;
        let idx = k - 1;
        if idx % 2 == 0 {
            norm += if idx == 0 { f } else { 2.0 * f };
        }
        if idx == nu {
            target = f;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            fp1 *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    target / norm
}

/// Smooth bump supported on [κ, 1−κ] with κ = 0.05: the rescaling of
/// exp(−1/(u−u²)) from (0, 1), with derivatives through order 3.
#[derive(Debug, Clone, Copy)]
pub struct BumpFunction {
    kappa: f64,
}

impl BumpFunction {
    pub fn standard() -> Self {
        BumpFunction { kappa: 0.05 }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.kappa, 1.0 - self.kappa)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(0, x).expect("order 0 is always available")
    }

    /// d^order/dx^order of the bump, order ≤ 3. Identically 0 outside the
    /// open support, including at the endpoints (all derivatives vanish).
    pub fn derivative(&self, order: u32, x: f64) -> Result<f64> {
        if order > 3 {
            return Err(Error::InvalidInput(format!(
                "derivatives implemented through order 3, got {order}"
            )));
        }
        let width = 1.0 - 2.0 * self.kappa;
        let u = (x - self.kappa) / width;
        if u <= 0.0 || u >= 1.0 {
            return Ok(0.0);
        }
        let v = u - u * u;
        let vp = 1.0 - 2.0 * u;
        // h = 1/v and its u-derivatives; v'' = −2, v''' = 0
        let h1 = -vp / (v * v);
        let h2 = 2.0 / (v * v) + 2.0 * vp * vp / (v * v * v);
        let h3 = -12.0 * vp / (v * v * v) - 6.0 * vp * vp * vp / (v * v * v * v);
        let psi = (-1.0 / v).exp();
        let inner = match order {
            0 => psi,
            1 => -h1 * psi,
            2 => (h1 * h1 - h2) * psi,
            _ => (-h1 * h1 * h1 + 3.0 * h1 * h2 - h3) * psi,
        };
        Ok(inner / width.powi(order as i32))
    }
}

/// Comparison of the even-weight Bessel average against its smooth
/// expansion: lhs = 2 Σ_{2 ≤ k ≤ Y, k even} φ((k−1)/Y)·J_{k−1}(t),
/// normalized so the main term is φ(t/Y) itself (Poisson summation over the
/// odd orders fixes the constant; numerics confirm it), matched against
/// φ(t/Y) alone and with the third-derivative correction
/// φ(t/Y) + t/(6Y³)·φ⁽³⁾(t/Y).
#[derive(Debug, Clone, Copy)]
pub struct BesselAverageCheck {
    pub y: u32,
    pub t: f64,
    pub lhs: f64,
    pub one_term: f64,
    pub two_term: f64,
    pub residual_one: f64,
    pub residual_two: f64,
}

pub fn avg_bessel_check(y: u32, t: f64) -> Result<BesselAverageCheck> {
    if y < 4 {
        return Err(Error::InvalidInput(format!("need Y ≥ 4, got {y}")));
    }
    if !(0.0 < t && t <= 100.0) {
        return Err(Error::InvalidInput(format!(
            "need 0 < t ≤ 100, got {t}"
        )));
    }
    let phi = BumpFunction::standard();
    let yf = y as f64;
    let mut lhs = 0.0f64;
    let mut k = 2u32;
    while k <= y {
        let w = phi.eval((k as f64 - 1.0) / yf);
        if w != 0.0 {
            lhs += w * bessel_j(k - 1, t)?;
        }
        k += 2;
    }
    lhs *= 2.0;
    let one_term = phi.eval(t / yf);
    let two_term = one_term + t / (6.0 * yf * yf * yf) * phi.derivative(3, t / yf)?;
    Ok(BesselAverageCheck {
        y,
        t,
        lhs,
        one_term,
        two_term,
        residual_one: (lhs - one_term).abs(),
        residual_two: (lhs - two_term).abs(),
    })
}

/// Weighted prime average of Kloosterman sums against its Ramanujan main
/// term: lhs = Σ_{p < Y, p ∤ c} S(m, np; c)·ln p, main = (Y/φ(c))·R(m;c)·R(n;c).
#[derive(Debug, Clone, Copy)]
pub struct KloostermanAverage {
    pub m: u64,
    pub n: u64,
    pub c: u64,
    pub y: u64,
    pub lhs: f64,
    pub main_term: f64,
    pub ratio: f64,
}

pub fn avg_kloosterman_empirical(m: u64, n: u64, c: u64, y: u64) -> Result<KloostermanAverage> {
    if c == 0 || c > 10_000 {
        return Err(Error::InvalidInput(format!(
            "modulus must be in 1..=10000, got {c}"
        )));
    }
    if y < 10 {
        return Err(Error::InvalidInput(format!("need Y ≥ 10, got {y}")));
    }
    let table: Vec<f64> = (0..c)
        .map(|j| kloosterman(m, j, c))
        .collect::<Result<_>>()?;
    let mut lhs = 0.0f64;
    let nr = n % c;
    for_each_prime(y - 1, |p| {
        if c == 1 || p % c != 0 {
            lhs += table[((nr * (p % c)) % c) as usize] * (p as f64).ln();
        }
    });
    let phi = crate::modular::euler_phi(c) as f64;
    let main_term =
        y as f64 / phi * ramanujan_sum(m, c)? as f64 * ramanujan_sum(n, c)? as f64;
    if main_term == 0.0 {
        return Err(Error::DegenerateMainTerm(format!(
            "vanishing Ramanujan main term for m = {m}, n = {n}, c = {c}"
        )));
    }
    Ok(KloostermanAverage {
        m,
        n,
        c,
        y,
        lhs,
        main_term,
        ratio: lhs / main_term,
    })
}

const DELTA_N_LIMIT: usize = 100_000;

/// Coefficients τ(1), …, τ(N) of the weight-12 discriminant form
/// Δ = q·Π(1−qⁿ)²⁴, exactly, via eight multiplications by the sparse cube
/// Π(1−qⁿ)³ = Σ (−1)^k (2k+1) q^{k(k+1)/2}.
pub fn delta_qexp(n: usize) -> Result<Vec<i128>> {
    if n == 0 || n > DELTA_N_LIMIT {
        return Err(Error::LimitExceeded(format!(
            "need 1 ≤ N ≤ {DELTA_N_LIMIT}, got {n}"
        )));
    }
    // E24 tracks Π(1−qⁿ)^{3j} truncated at degree n−1 (the q-shift drops it)
    let deg = n - 1;
    let mut cube = Vec::new();
    let mut k = 0u64;
    loop {
        let idx = (k * (k + 1) / 2) as usize;
        if idx > deg {
            break;
        }
        let coeff = if k % 2 == 0 {
            2 * k as i128 + 1
        } else {
            -(2 * k as i128 + 1)
        };
        cube.push((idx, coeff));
        k += 1;
    }
    let mut acc = vec![0i128; deg + 1];
    acc[0] = 1;
    let mut out = vec![0i128; deg + 1];
    for _ in 0..8 {
        out.iter_mut().for_each(|v| *v = 0);
        for &(idx, coeff) in &cube {
            for i in 0..=deg - idx {
                out[i + idx] += acc[i] * coeff;
            }
        }
        std::mem::swap(&mut acc, &mut out);
    }
    Ok(acc)
}

/// τ(1..N) with the normalized Hecke eigenvalues λ(n) = τ(n)/n^{11/2}.
pub struct HeckeSeq {
    tau: Vec<i128>,
}

impl HeckeSeq {
    pub fn new(n: usize) -> Result<Self> {
        Ok(HeckeSeq {
            tau: delta_qexp(n)?,
        })
    }

    pub fn n_max(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self, n: usize) -> Result<i128> {
        if n == 0 || n > self.tau.len() {
            return Err(Error::LimitExceeded(format!(
                "τ({n}) outside the computed range 1..={}",
                self.tau.len()
            )));
        }
        Ok(self.tau[n - 1])
    }

    pub fn lambda(&self, n: usize) -> Result<f64> {
        Ok(self.tau(n)? as f64 / (n as f64).powf(5.5))
    }
}

/// λ(p^r)² against Σ_{ℓ=0}^{r} λ(p^{2ℓ}), both read off the coefficient
/// table. The identity is exact for Hecke eigenvalues; the residual is pure
/// floating error.
#[derive(Debug, Clone, Copy)]
pub struct SymLiftCheck {
    pub p: u64,
    pub r: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn sym_lift_identity_check(seq: &HeckeSeq, r: u32, p: u64) -> Result<SymLiftCheck> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let top = (p as u128).checked_pow(2 * r).ok_or_else(|| {
        Error::LimitExceeded(format!("p^2r overflows for p = {p}, r = {r}"))
    })?;
    if top > seq.n_max() as u128 {
        return Err(Error::LimitExceeded(format!(
            "need τ up to p^2r = {top}, table holds {}",
            seq.n_max()
        )));
    }
    let lam = |e: u32| seq.lambda(p.pow(e) as usize);
    let lhs = lam(r)?.powi(2);
    let mut rhs = 0.0;
    for ell in 0..=r {
        rhs += lam(2 * ell)?;
    }
    Ok(SymLiftCheck {
        p,
        r,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Dimension heuristic (k−1)·φ(q)/12 for even weight k on squarefree level q.
pub fn dim_estimate(k: u32, q: u64) -> Result<Ratio<i64>> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidWeight(format!(
            "weight must be an even integer ≥ 2, got {k}"
        )));
    }
    if q == 0 || moebius(q) == 0 {
        return Err(Error::InvalidInput(format!(
            "level must be squarefree and positive, got {q}"
        )));
    }
    let phi = crate::modular::euler_phi(q) as i64;
    Ok(Ratio::new((k as i64 - 1) * phi, 12))
}

/// Leading term φ(q)/48·X² of Σ_{k ≤ X even} (k−1)·φ(q)/12.
pub fn dim_sum(xdelta: u64, q: u64) -> Result<Ratio<i64>> {
    if q == 0 || moebius(q) == 0 {
        return Err(Error::InvalidInput(format!(
            "level must be squarefree and positive, got {q}"
        )));
    }
    let phi = crate::modular::euler_phi(q) as i64;
    let x = xdelta as i64;
    Ok(Ratio::new(phi * x * x, 48))
}

/// Σ_{p ≤ Y} Σ_{ℓ=0}^{r} p^{−ℓ}: the prime-power skeleton of a symmetric
/// lift's Dirichlet series. Differs from π(Y) + ln ln Y by O(1).
pub fn prime_power_skeleton(r: u32, y: u64) -> Result<f64> {
    if y < 2 {
        return Err(Error::EmptySweep(format!("no primes up to {y}")));
    }
    let mut sum = 0.0f64;
    for_each_prime(y, |p| {
        let mut term = 1.0;
        let mut pk = 1.0;
        for _ in 0..r {
            pk /= p as f64;
            term += pk;
        }
        sum += term;
    });
    Ok(sum)
}

/// Σ_{p ≤ Y} (Σ_{ℓ=0}^{r₁} p^{−ℓ})(Σ_{ℓ=0}^{r₂} p^{−ℓ}), the convolved
/// skeleton. Differs from π(Y) + 2 ln ln Y by O(1).
pub fn conv_skeleton(r1: u32, r2: u32, y: u64) -> Result<f64> {
    if y < 2 {
        return Err(Error::EmptySweep(format!("no primes up to {y}")));
    }
    let mut sum = 0.0f64;
    for_each_prime(y, |p| {
        let geom = |r: u32| {
            let mut term = 1.0;
            let mut pk = 1.0;
            for _ in 0..r {
                pk /= p as f64;
                term += pk;
            }
            term
        };
        sum += geom(r1) * geom(r2);
    });
    Ok(sum)
}

/// Geometric side of the Petersson formula for the (m, n) pair at even
/// weight k ≥ 4: δ(m,n) + 2π·i^{−k}·Σ_c S(m,n;c)/c·J_{k−1}(4π√(mn)/c),
/// truncated once the Bessel factor drops below 1e−14.
#[derive(Debug, Clone, Copy)]
pub struct PeterssonSide {
    pub k: u32,
    pub m: u64,
    pub n: u64,
    pub diagonal: f64,
    pub kloosterman_tail: f64,
    pub total: f64,
    pub terms: usize,
}

pub fn petersson_rhs(k: u32, m: u64, n: u64) -> Result<PeterssonSide> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidWeight(format!(
            "weight must be even and ≥ 4, got {k}"
        )));
    }
    if m == 0 || n == 0 || m > 1000 || n > 1000 {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ m, n ≤ 1000, got {m}, {n}"
        )));
    }
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let arg0 = 4.0 * PI * ((m * n) as f64).sqrt();
    let mut tail = 0.0f64;
    let mut terms = 0usize;
    for c in 1..=200_000u64 {
        let x = arg0 / c as f64;
        if x > 500.0 {
            // the first few moduli can exceed the Bessel range for large mn
            return Err(Error::LimitExceeded(format!(
                "Bessel argument {x} out of range at c = {c}"
            )));
        }
        let j = bessel_j(k - 1, x)?;
        if j.abs() < 1e-14 && (c as f64) > arg0 {
            break;
        }
        tail += kloosterman(m, n, c)? / c as f64 * j;
        terms += 1;
    }
    let diagonal = if m == n { 1.0 } else { 0.0 };
    let total = diagonal + 2.0 * PI * sign * tail;
    Ok(PeterssonSide {
        k,
        m,
        n,
        diagonal,
        kloosterman_tail: 2.0 * PI * sign * tail,
        total,
        terms,
    })
}

/// Σ_{p ≤ Y} 1/p measured against ln ln Y: returns (sum, lnlnY, difference).
/// The difference tends to the Mertens constant ≈ 0.2615.
pub fn mertens_comparison(y: u64) -> Result<(f64, f64, f64)> {
    if y < 3 {
        return Err(Error::EmptySweep(format!("need Y ≥ 3, got {y}")));
    }
    let sum = crate::modular::mertens_sum(y);
    let ll = (y as f64).ln().ln();
    Ok((sum, ll, sum - ll))
}

/// Prime table reuse helper for callers scanning several skeleton ranges.
pub fn skeleton_with_table(table: &PrimeTable, r: u32, y: u64) -> Result<f64> {
    let mut sum = 0.0f64;
    for &p in table.primes() {
        if p > y {
            break;
        }
        let mut term = 1.0;
        let mut pk = 1.0;
        for _ in 0..r {
            pk /= p as f64;
            term += pk;
        }
        sum += term;
    }
    if sum == 0.0 {
        return Err(Error::EmptySweep(format!("no primes up to {y}")));
    }
    Ok(sum)
}
