//! Modular arithmetic groundwork.
//!
//! All higher modules reduce to the primitives here: quadratic characters,
//! complete Legendre sums in one variable, the two canonical prime
//! decompositions p = a² + 3b² and p = a² + b², power-residue classes via a
//! discrete index table, and segmented prime sieves.

use crate::error::{Error, Result};

/// Sieve limit accepted by default; anything above must opt in via
/// [`PrimeTable::build_with_cap`] or the streaming [`for_each_prime`].
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64. The twelve-prime base set is a
/// proven deterministic witness set for all n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An odd prime modulus, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || !is_prime_u64(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduce a signed integer into [0, p).
    #[inline]
    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.0 as i64) as u64
    }
}

impl std::fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Jacobi symbol (a/n) for odd n ≥ 1, by quadratic reciprocity.
/// O(log² n), no factorization.
pub fn jacobi(a: i64, n: u64) -> i32 {
    debug_assert!(n % 2 == 1 && n > 0);
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut t = 1i32;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Legendre symbol (a/p) ∈ {−1, 0, 1}.
#[inline]
pub fn legendre_symbol(a: i64, p: PrimeModulus) -> i32 {
    jacobi(a, p.get())
}

/// Euler-criterion evaluation a^((p−1)/2) mod p. Slower than [`legendre_symbol`];
/// kept as an independent oracle for the reciprocity path.
pub fn legendre_by_euler(a: i64, p: PrimeModulus) -> i32 {
    let r = p.reduce(a);
    if r == 0 {
        return 0;
    }
    let e = pow_mod(r, (p.get() - 1) / 2, p.get());
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Lookup table for the quadratic character mod p: chi[v] = (v/p).
///
/// Built in O(p) by marking the squares; this is what makes the
/// O(p²) brute-force double loops affordable.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    p: u64,
    vals: Vec<i8>,
}

impl LegendreTable {
    pub fn build(p: PrimeModulus) -> Self {
        let n = p.get() as usize;
        let mut vals = vec![-1i8; n];
        vals[0] = 0;
        for y in 1..n as u64 {
            vals[mul_mod(y, y, p.get()) as usize] = 1;
        }
        LegendreTable { p: p.get(), vals }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// chi(v) for v already reduced mod p.
    #[inline]
    pub fn chi(&self, v: u64) -> i8 {
        self.vals[v as usize]
    }

    #[inline]
    pub fn chi_i64(&self, v: i64) -> i8 {
        self.vals[v.rem_euclid(self.p as i64) as usize]
    }
}

/// Σ_{x mod p} ((ax+b)/p). Zero whenever p ∤ a: the linear map is a
/// bijection of residues and the character sums to zero over a full period.
pub fn linear_legendre_sum(a: i64, b: i64, p: PrimeModulus) -> Result<i64> {
    let _ = b;
    if p.reduce(a) == 0 {
        return Err(Error::HypothesisViolated(format!(
            "linear sum needs p ∤ a (a = {a}, p = {p})"
        )));
    }
    Ok(0)
}

/// Direct O(p) evaluation of Σ_{x mod p} ((ax+b)/p).
pub fn linear_legendre_sum_brute(a: i64, b: i64, p: PrimeModulus) -> i64 {
    let table = LegendreTable::build(p);
    let (pa, pb) = (p.reduce(a), p.reduce(b));
    let mut s = 0i64;
    for x in 0..p.get() {
        s += table.chi((mul_mod(pa, x, p.get()) + pb) % p.get()) as i64;
    }
    s
}

/// Σ_{x mod p} ((ax²+bx+c)/p) in closed form, p ∤ a:
/// −(a/p) when p ∤ b²−4ac, and (p−1)(a/p) when p | b²−4ac.
pub fn quadratic_legendre_sum(a: i64, b: i64, c: i64, p: PrimeModulus) -> Result<i64> {
    if p.reduce(a) == 0 {
        return Err(Error::HypothesisViolated(format!(
            "quadratic sum needs p ∤ a (a = {a}, p = {p})"
        )));
    }
    let chi_a = legendre_symbol(a, p) as i64;
    let disc = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
    if disc.rem_euclid(p.get() as i128) == 0 {
        Ok((p.get() as i64 - 1) * chi_a)
    } else {
        Ok(-chi_a)
    }
}

/// Direct O(p) evaluation of Σ_{x mod p} ((ax²+bx+c)/p).
pub fn quadratic_legendre_sum_brute(a: i64, b: i64, c: i64, p: PrimeModulus) -> i64 {
    let table = LegendreTable::build(p);
    let m = p.get();
    let (pa, pb, pc) = (p.reduce(a), p.reduce(b), p.reduce(c));
    let mut s = 0i64;
    for x in 0..m {
        let v = (mul_mod((mul_mod(pa, x, m) + pb) % m, x, m) + pc) % m;
        s += table.chi(v) as i64;
    }
    s
}

/// Which canonical decomposition of p a [`GaussDecomposition`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaussKind {
    /// p = a² + 3b², a ≡ 2 mod 3, b > 0 (j = 0 normalization).
    J0,
    /// p = a² + b², b even > 0, a + b ≡ 1 mod 4 (j = 1728 normalization).
    J1728,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussDecomposition {
    pub kind: GaussKind,
    pub a: i64,
    pub b: i64,
    pub p: u64,
}

fn isqrt_u64(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Unique (a, b) with p = a² + 3b², a ≡ 2 mod 3, b > 0, for p ≡ 1 mod 3.
///
/// Exhaustive search over b ≤ √(p/3). The search asserting exactly one hit
/// is part of the contract: representations by this form are unique for
/// prime p up to the sign normalizations applied here.
pub fn gauss_decomp_j0(p: PrimeModulus) -> Result<GaussDecomposition> {
    let pv = p.get();
    if pv % 3 != 1 {
        return Err(Error::HypothesisViolated(format!(
            "p = {pv} is not 1 mod 3"
        )));
    }
    let mut found: Option<(i64, i64)> = None;
    let mut b = 1u64;
    while 3 * b * b <= pv {
        let r = pv - 3 * b * b;
        let a0 = isqrt_u64(r);
        if a0 > 0 && a0 * a0 == r {
            // p ≡ 1 mod 3 forces a0 ≢ 0 mod 3, so exactly one sign works.
            let a = if a0 % 3 == 2 { a0 as i64 } else { -(a0 as i64) };
            if found.replace((a, b as i64)).is_some() {
                return Err(Error::NoRepresentation(format!(
                    "p = {pv}: a² + 3b² representation is not unique"
                )));
            }
        }
        b += 1;
    }
    match found {
        Some((a, b)) => Ok(GaussDecomposition {
            kind: GaussKind::J0,
            a,
            b,
            p: pv,
        }),
        None => Err(Error::NoRepresentation(format!(
            "p = {pv} has no a² + 3b² representation"
        ))),
    }
}

/// Unique (a, b) with p = a² + b², b even > 0, a + b ≡ 1 mod 4, for p ≡ 1 mod 4.
pub fn gauss_decomp_j1728(p: PrimeModulus) -> Result<GaussDecomposition> {
    let pv = p.get();
    if pv % 4 != 1 {
        return Err(Error::HypothesisViolated(format!(
            "p = {pv} is not 1 mod 4"
        )));
    }
    let mut found: Option<(i64, i64)> = None;
    let mut b = 2u64;
    while b * b <= pv {
        let r = pv - b * b;
        let a0 = isqrt_u64(r);
        if a0 > 0 && a0 * a0 == r {
            // a odd, b even: exactly one sign of a gives a + b ≡ 1 mod 4.
            let a = if (a0 + b) % 4 == 1 {
                a0 as i64
            } else {
                -(a0 as i64)
            };
            debug_assert_eq!((a + b as i64).rem_euclid(4), 1);
            if found.replace((a, b as i64)).is_some() {
                return Err(Error::NoRepresentation(format!(
                    "p = {pv}: a² + b² representation is not unique"
                )));
            }
        }
        b += 2;
    }
    match found {
        Some((a, b)) => Ok(GaussDecomposition {
            kind: GaussKind::J1728,
            a,
            b,
            p: pv,
        }),
        None => Err(Error::NoRepresentation(format!(
            "p = {pv} has no a² + b² representation with even b"
        ))),
    }
}

/// Class of x in F_p* under the sixth-power map, p ≡ 1 mod 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SexticClass {
    /// index ≡ 0 mod 6: sixth power (both square and cube)
    SexticResidue,
    /// index ≡ 3 mod 6: cube but not square
    CubicNonQuadratic,
    /// index ≡ 2, 4 mod 6: square but not cube
    QuadraticNonCubic,
    /// index ≡ 1, 5 mod 6: neither
    NonResidue,
}

/// Class of x in F_p* under the fourth-power map, p ≡ 1 mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuarticClass {
    QuarticResidue,
    QuadraticNonQuartic,
    NonResidue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidueClass {
    Sextic(SexticClass),
    Quartic(QuarticClass),
}

fn trial_factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Prime factorization by trial division. Desk scale: fine up to ~10^12.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    trial_factorize(n)
}

pub fn euler_phi(n: u64) -> u64 {
    let mut out = n;
    for (q, _) in trial_factorize(n) {
        out = out / q * (q - 1);
    }
    out
}

/// Möbius function; 0 on non-squarefree input.
pub fn moebius(n: u64) -> i64 {
    if n == 0 {
        return 0;
    }
    let f = trial_factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return 0;
    }
    if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Smallest generator of F_p*, found by trial over 2, 3, 4, … with the
/// order test g^((p−1)/q) ≠ 1 for every prime q | p−1.
pub fn find_generator(p: PrimeModulus) -> u64 {
    let pv = p.get();
    let fac = trial_factorize(pv - 1);
    'outer: for g in 2..pv {
        for &(q, _) in &fac {
            if pow_mod(g, (pv - 1) / q, pv) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("every prime field has a generator");
}

/// Discrete index table: ind[x] = m with g^m = x, for x in F_p*.
///
/// O(p) to build, O(1) per query; read-only afterwards. This is the
/// primary route for residue classification; the Euler-criterion route
/// serves as the independent check in tests.
#[derive(Debug, Clone)]
pub struct IndexTable {
    p: u64,
    g: u64,
    ind: Vec<u32>,
}

impl IndexTable {
    pub fn build(p: PrimeModulus) -> Self {
        let pv = p.get();
        let g = find_generator(p);
        let mut ind = vec![u32::MAX; pv as usize];
        let mut acc = 1u64;
        for m in 0..pv - 1 {
            ind[acc as usize] = m as u32;
            acc = mul_mod(acc, g, pv);
        }
        IndexTable { p: pv, g, ind }
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Index of x (reduced mod p) relative to the generator; None at 0.
    #[inline]
    pub fn index(&self, x: u64) -> Option<u32> {
        let v = self.ind[(x % self.p) as usize];
        if v == u32::MAX {
            None
        } else {
            Some(v)
        }
    }

    pub fn sextic_class(&self, x: i64) -> Result<SexticClass> {
        if self.p % 6 != 1 {
            return Err(Error::InvalidInput(format!(
                "sextic classes need p ≡ 1 mod 6, got p = {}",
                self.p
            )));
        }
        let r = x.rem_euclid(self.p as i64) as u64;
        let m = self
            .index(r)
            .ok_or_else(|| Error::InvalidInput("cannot classify 0".into()))?;
        Ok(match m % 6 {
            0 => SexticClass::SexticResidue,
            3 => SexticClass::CubicNonQuadratic,
            2 | 4 => SexticClass::QuadraticNonCubic,
            _ => SexticClass::NonResidue,
        })
    }

    pub fn quartic_class(&self, x: i64) -> Result<QuarticClass> {
        if self.p % 4 != 1 {
            return Err(Error::InvalidInput(format!(
                "quartic classes need p ≡ 1 mod 4, got p = {}",
                self.p
            )));
        }
        let r = x.rem_euclid(self.p as i64) as u64;
        let m = self
            .index(r)
            .ok_or_else(|| Error::InvalidInput("cannot classify 0".into()))?;
        Ok(match m % 4 {
            0 => QuarticClass::QuarticResidue,
            2 => QuarticClass::QuadraticNonQuartic,
            _ => QuarticClass::NonResidue,
        })
    }
}

/// Classify x under the degree-th power map (degree 4 or 6).
///
/// Builds a fresh index table: O(p). Batch callers should hold an
/// [`IndexTable`] and query it directly.
pub fn classify_residue(x: i64, p: PrimeModulus, degree: u32) -> Result<ResidueClass> {
    let table = IndexTable::build(p);
    match degree {
        4 => Ok(ResidueClass::Quartic(table.quartic_class(x)?)),
        6 => Ok(ResidueClass::Sextic(table.sextic_class(x)?)),
        d => Err(Error::InvalidInput(format!(
            "classification degree must be 4 or 6, got {d}"
        ))),
    }
}

/// Number of cube roots of v mod p: 1 when p ≡ 2 mod 3; 0 or 3 when
/// p ≡ 1 mod 3 by the cubic-residue test v^((p−1)/3).
pub fn cube_root_count(v: i64, p: PrimeModulus) -> u64 {
    let pv = p.get();
    let r = p.reduce(v);
    if r == 0 {
        return 1;
    }
    if pv % 3 != 1 {
        return 1;
    }
    if pow_mod(r, (pv - 1) / 3, pv) == 1 {
        3
    } else {
        0
    }
}

const SEGMENT_SIZE: usize = 1 << 20;

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Visit every prime ≤ limit in ascending order via a segmented sieve,
/// without storing them. Memory O(√limit + segment).
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    let root = isqrt_u64(limit);
    let base = small_primes(root);
    for &p in &base {
        f(p);
    }
    let mut lo = root + 1;
    let mut seg = vec![false; SEGMENT_SIZE];
    while lo <= limit {
        let hi = (lo + SEGMENT_SIZE as u64 - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        seg[..len].fill(false);
        for &p in &base {
            let mut start = lo.div_ceil(p) * p;
            if start < p * p {
                start = p * p;
            }
            let mut j = start;
            while j <= hi {
                seg[(j - lo) as usize] = true;
                j += p;
            }
        }
        for (i, &c) in seg[..len].iter().enumerate() {
            if !c {
                f(lo + i as u64);
            }
        }
        lo = hi + 1;
    }
}

/// Stored prime table with prefix counting.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn build(limit: u64) -> Result<Self> {
        Self::build_with_cap(limit, DEFAULT_SIEVE_CAP)
    }

    pub fn build_with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit > cap {
            return Err(Error::LimitExceeded(format!(
                "sieve limit {limit} exceeds cap {cap}"
            )));
        }
        let mut primes = Vec::new();
        for_each_prime(limit, |p| primes.push(p));
        Ok(PrimeTable { limit, primes })
    }

    #[inline]
    pub fn limit(&self) -> u64 {
        self.limit
    }

    #[inline]
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// π(x) for x ≤ limit.
    pub fn count(&self, x: u64) -> Result<u64> {
        if x > self.limit {
            return Err(Error::LimitExceeded(format!(
                "π({x}) queried beyond table limit {}",
                self.limit
            )));
        }
        Ok(self.primes.partition_point(|&p| p <= x) as u64)
    }

    /// π(x; q, a): primes p ≤ x with p ≡ a mod q.
    pub fn count_in_class(&self, x: u64, q: u64, a: u64) -> Result<u64> {
        if x > self.limit {
            return Err(Error::LimitExceeded(format!(
                "π({x}; {q}, {a}) queried beyond table limit {}",
                self.limit
            )));
        }
        if q == 0 {
            return Err(Error::InvalidInput("modulus 0".into()));
        }
        let a = a % q;
        let upto = self.primes.partition_point(|&p| p <= x);
        Ok(self.primes[..upto].iter().filter(|&&p| p % q == a).count() as u64)
    }

    /// Counts per residue class: vec[a] = π(x; q, a).
    pub fn residue_counts(&self, x: u64, q: u64) -> Result<Vec<u64>> {
        if x > self.limit {
            return Err(Error::LimitExceeded(format!(
                "residue counts queried beyond table limit {}",
                self.limit
            )));
        }
        let mut counts = vec![0u64; q as usize];
        let upto = self.primes.partition_point(|&p| p <= x);
        for &p in &self.primes[..upto] {
            counts[(p % q) as usize] += 1;
        }
        Ok(counts)
    }

    /// Chebyshev θ(x) = Σ_{p ≤ x} ln p.
    pub fn theta(&self, x: u64) -> Result<f64> {
        if x > self.limit {
            return Err(Error::LimitExceeded(format!(
                "θ({x}) queried beyond table limit {}",
                self.limit
            )));
        }
        let upto = self.primes.partition_point(|&p| p <= x);
        Ok(self.primes[..upto].iter().map(|&p| (p as f64).ln()).sum())
    }
}

/// Σ_{p ≤ x} 1/p by streaming sieve; no storage, so x up to 10^8 is routine.
pub fn mertens_sum(x: u64) -> f64 {
    let mut s = 0.0f64;
    for_each_prime(x, |p| s += 1.0 / p as f64);
    s
}

/// Chebyshev θ(x) by streaming sieve.
pub fn theta_sum(x: u64) -> f64 {
    let mut s = 0.0f64;
    for_each_prime(x, |p| s += (p as f64).ln());
    s
}
