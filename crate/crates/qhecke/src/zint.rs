//! Gaussian integers: exact arithmetic, primary normalization, residue
//! symbols, Gauss sums, factorization, and enumeration of primary primes and
//! square-free family elements.
//!
//! All arithmetic is exact. Intermediates are carried in `i128`; norms are
//! checked against [`NORM_CAP`] where user input enters.

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

/// Largest norm accepted from callers.
pub const NORM_CAP: u64 = 1 << 62;

/// Default residue-count cap for brute-force Gauss sums.
pub const GAUSS_SUM_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZintError {
    #[error("argument {0} is even (divisible by 1+i)")]
    Even(GInt),
    #[error("argument must be nonzero")]
    Zero,
    #[error("modulus {0} is a unit")]
    Unit(GInt),
    #[error("norm of {0} exceeds the cap {1}")]
    Overflow(GInt, u64),
    #[error("{0} residues exceed the brute-force cap {1}")]
    TooManyResidues(u64, u64),
    #[error("sieve cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, ZintError>;

/// An element `re + im·i` of ℤ[i].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct GInt {
    pub re: i64,
    pub im: i64,
}

impl fmt::Display for GInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

fn narrow(re: i128, im: i128) -> GInt {
    let re = i64::try_from(re).expect("Gaussian integer overflow");
    let im = i64::try_from(im).expect("Gaussian integer overflow");
    GInt { re, im }
}

/// Round-to-nearest division for `d > 0` (ties toward +∞).
fn div_round(n: i128, d: i128) -> i128 {
    (2 * n + d).div_euclid(2 * d)
}

impl GInt {
    pub const ZERO: GInt = GInt { re: 0, im: 0 };
    pub const ONE: GInt = GInt { re: 1, im: 0 };
    pub const I: GInt = GInt { re: 0, im: 1 };
    /// The ramified prime 1+i.
    pub const ONE_PLUS_I: GInt = GInt { re: 1, im: 1 };
    /// i·(1+i)⁵ = 4−4i, the twist defining the family characters.
    pub const FAMILY_TWIST: GInt = GInt { re: 4, im: -4 };

    pub const fn new(re: i64, im: i64) -> Self {
        GInt { re, im }
    }

    pub fn norm(self) -> u64 {
        let n = (self.re as i128).pow(2) + (self.im as i128).pow(2);
        u64::try_from(n).expect("norm overflow")
    }

    /// Norm, rejecting values above [`NORM_CAP`].
    pub fn checked_norm(self) -> Result<u64> {
        let n = (self.re as i128).pow(2) + (self.im as i128).pow(2);
        if n > NORM_CAP as i128 {
            return Err(ZintError::Overflow(self, NORM_CAP));
        }
        Ok(n as u64)
    }

    pub fn conj(self) -> Self {
        GInt::new(self.re, -self.im)
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn is_unit(self) -> bool {
        self.norm() == 1
    }

    /// Coprime to 1+i, i.e. odd norm.
    pub fn is_odd(self) -> bool {
        (self.re + self.im).rem_euclid(2) == 1
    }

    /// The closed congruence test for `z ≡ 1 mod (1+i)³`.
    pub fn is_primary(self) -> bool {
        self.re.rem_euclid(2) == 1
            && self.im.rem_euclid(2) == 0
            && (self.re + self.im).rem_euclid(4) == 1
    }

    /// Remainder of rounded Gaussian division; `N(r) ≤ N(m)/2`.
    pub fn rem(self, m: GInt) -> GInt {
        let (a, b) = (self.re as i128, self.im as i128);
        let (c, d) = (m.re as i128, m.im as i128);
        let n = c * c + d * d;
        assert!(n > 0, "division by zero");
        // self · conj(m) = (ac + bd) + (bc − ad)i
        let qr = div_round(a * c + b * d, n);
        let qi = div_round(b * c - a * d, n);
        narrow(a - (qr * c - qi * d), b - (qr * d + qi * c))
    }

    /// Exact quotient if `d | self`.
    pub fn div_exact(self, d: GInt) -> Option<GInt> {
        let (a, b) = (self.re as i128, self.im as i128);
        let (c, e) = (d.re as i128, d.im as i128);
        let n = c * c + e * e;
        if n == 0 {
            return None;
        }
        let re = a * c + b * e;
        let im = b * c - a * e;
        if re % n != 0 || im % n != 0 {
            return None;
        }
        Some(narrow(re / n, im / n))
    }

    pub fn divides(self, z: GInt) -> bool {
        if self.is_zero() {
            return z.is_zero();
        }
        z.rem(self).is_zero()
    }

    pub fn pow(self, mut e: u32) -> GInt {
        let mut base = self;
        let mut acc = GInt::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Canonical ordering: norm, then re, then im.
    pub fn canonical_cmp(&self, other: &GInt) -> Ordering {
        self.norm()
            .cmp(&other.norm())
            .then(self.re.cmp(&other.re))
            .then(self.im.cmp(&other.im))
    }
}

impl Add for GInt {
    type Output = GInt;
    fn add(self, o: GInt) -> GInt {
        narrow(self.re as i128 + o.re as i128, self.im as i128 + o.im as i128)
    }
}

impl Sub for GInt {
    type Output = GInt;
    fn sub(self, o: GInt) -> GInt {
        narrow(self.re as i128 - o.re as i128, self.im as i128 - o.im as i128)
    }
}

impl Neg for GInt {
    type Output = GInt;
    fn neg(self) -> GInt {
        GInt::new(-self.re, -self.im)
    }
}

impl Mul for GInt {
    type Output = GInt;
    fn mul(self, o: GInt) -> GInt {
        let (a, b) = (self.re as i128, self.im as i128);
        let (c, d) = (o.re as i128, o.im as i128);
        narrow(a * c - b * d, a * d + b * c)
    }
}

/// A unit `i^k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Unit(u8);

impl Unit {
    pub const ONE: Unit = Unit(0);
    pub const I: Unit = Unit(1);
    pub const NEG_ONE: Unit = Unit(2);
    pub const NEG_I: Unit = Unit(3);
    pub const ALL: [Unit; 4] = [Unit(0), Unit(1), Unit(2), Unit(3)];

    pub fn from_exponent(k: u32) -> Unit {
        Unit((k % 4) as u8)
    }

    pub fn exponent(self) -> u32 {
        self.0 as u32
    }

    pub fn value(self) -> GInt {
        match self.0 {
            0 => GInt::new(1, 0),
            1 => GInt::new(0, 1),
            2 => GInt::new(-1, 0),
            _ => GInt::new(0, -1),
        }
    }

    pub fn inverse(self) -> Unit {
        Unit((4 - self.0) % 4)
    }

    fn from_gint(z: GInt) -> Option<Unit> {
        Unit::ALL.into_iter().find(|u| u.value() == z)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["1", "i", "-1", "-i"][self.0 as usize])
    }
}

/// Oracle for [`GInt::is_primary`]: direct divisibility of `z − 1` by (1+i)³.
pub fn congruent_one_mod_1pi3(z: GInt) -> bool {
    let m = GInt::ONE_PLUS_I.pow(3);
    m.divides(z - GInt::ONE)
}

/// Unique `(u, p)` with `z = u·p` and `p` primary.
pub fn primary_associate(z: GInt) -> Result<(Unit, GInt)> {
    if z.is_zero() {
        return Err(ZintError::Zero);
    }
    if !z.is_odd() {
        return Err(ZintError::Even(z));
    }
    for u in Unit::ALL {
        let p = u.inverse().value() * z;
        if p.is_primary() {
            return Ok((u, p));
        }
    }
    unreachable!("odd element without a primary associate")
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PrimeKind {
    Split,
    Inert,
}

/// A primary Gaussian prime.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PrimaryPrime {
    pub value: GInt,
    pub norm: u64,
    pub kind: PrimeKind,
}

impl PrimaryPrime {
    /// The rational prime below this prime.
    pub fn rational_prime(&self) -> u64 {
        match self.kind {
            PrimeKind::Split => self.norm,
            PrimeKind::Inert => self.value.re.unsigned_abs(),
        }
    }

    /// For split primes, the image of `i` under ℤ[i]/ϖ ≅ ℤ/p.
    pub fn image_of_i(&self) -> Option<u64> {
        match self.kind {
            PrimeKind::Inert => None,
            PrimeKind::Split => {
                // re + im·ι ≡ 0  ⇒  ι ≡ −re·im⁻¹
                let p = self.norm;
                let re = self.value.re.rem_euclid(p as i64) as u64;
                let im = self.value.im.rem_euclid(p as i64) as u64;
                let inv = pow_mod(im, p - 2, p);
                Some((p - mul_mod(re, inv, p)) % p)
            }
        }
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Jacobi symbol `(a/n)` for odd `n > 0`, binary algorithm.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = (a as i128).rem_euclid(n as i128) as u64;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz & 1 == 1 && matches!(n % 8, 3 | 5) {
            t = -t;
        }
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Some `x` with `x² ≡ −1 mod p` for a prime `p ≡ 1 mod 4`.
pub fn sqrt_minus_one(p: u64) -> u64 {
    debug_assert!(p % 4 == 1);
    let mut n = 2u64;
    while jacobi(n as i64, p) != -1 {
        n += 1;
    }
    pow_mod(n, (p - 1) / 4, p)
}

/// Cornacchia: `(a, b)` with `a² + b² = p`, `a` odd, for prime `p ≡ 1 mod 4`.
pub fn two_squares(p: u64) -> (u64, u64) {
    let mut r0 = p;
    let mut r1 = sqrt_minus_one(p);
    if r1 > p / 2 {
        r1 = p - r1;
    }
    while r1 * r1 > p {
        let r2 = r0 % r1;
        r0 = r1;
        r1 = r2;
    }
    let a = r1;
    let b = isqrt(p - a * a);
    debug_assert_eq!(a * a + b * b, p);
    if a % 2 == 1 {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn is_rational_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The two primary primes above a split rational prime, in canonical order.
pub fn split_pair(p: u64) -> [PrimaryPrime; 2] {
    let (a, b) = two_squares(p);
    let z = GInt::new(a as i64, b as i64);
    let (_, x) = primary_associate(z).expect("odd");
    let (_, y) = primary_associate(z.conj()).expect("odd");
    let mut pair = [x, y].map(|value| PrimaryPrime { value, norm: p, kind: PrimeKind::Split });
    pair.sort_by(|u, v| u.value.canonical_cmp(&v.value));
    pair
}

/// The primary associate of an inert rational prime `q ≡ 3 mod 4`.
pub fn inert_prime(q: u64) -> PrimaryPrime {
    PrimaryPrime { value: GInt::new(-(q as i64), 0), norm: q * q, kind: PrimeKind::Inert }
}

/// All primary primes of norm ≤ `bound`, canonically ordered.
pub fn primary_primes_up_to(bound: u64) -> Vec<PrimaryPrime> {
    let mut out = Vec::new();
    for p in primes_up_to(bound) {
        match p % 4 {
            1 => out.extend(split_pair(p)),
            3 if p.saturating_mul(p) <= bound => out.push(inert_prime(p)),
            _ => {}
        }
    }
    out.sort_by(|u, v| u.value.canonical_cmp(&v.value));
    out
}

/// `z = unit · (1+i)^two_exp · ∏ ϖ^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: Unit,
    pub two_exp: u32,
    pub primes: Vec<(PrimaryPrime, u32)>,
}

impl Factorization {
    pub fn product(&self) -> GInt {
        let mut z = self.unit.value() * GInt::ONE_PLUS_I.pow(self.two_exp);
        for (p, e) in &self.primes {
            z = z * p.value.pow(*e);
        }
        z
    }
}

fn factor_rational(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
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

/// Factor by factoring the norm over ℤ and lifting each rational prime.
pub fn factor(z: GInt) -> Result<Factorization> {
    if z.is_zero() {
        return Err(ZintError::Zero);
    }
    let n = z.checked_norm()?;
    let mut rest = z;
    let mut two_exp = 0;
    let mut primes = Vec::new();
    for (p, e) in factor_rational(n) {
        match p % 4 {
            2 => {
                for _ in 0..e {
                    rest = rest.div_exact(GInt::ONE_PLUS_I).expect("1+i divides");
                }
                two_exp = e;
            }
            3 => {
                let q = inert_prime(p);
                for _ in 0..e / 2 {
                    rest = rest.div_exact(q.value).expect("q divides");
                }
                primes.push((q, e / 2));
            }
            _ => {
                for w in split_pair(p) {
                    let mut k = 0;
                    while let Some(r) = rest.div_exact(w.value) {
                        rest = r;
                        k += 1;
                    }
                    if k > 0 {
                        primes.push((w, k));
                    }
                }
            }
        }
    }
    primes.sort_by(|a, b| a.0.value.canonical_cmp(&b.0.value));
    let unit = Unit::from_gint(rest).expect("cofactor is a unit");
    Ok(Factorization { unit, two_exp, primes })
}

/// Möbius function on odd elements; units are ignored.
pub fn moebius(z: GInt) -> Result<i8> {
    if z.is_zero() {
        return Err(ZintError::Zero);
    }
    if !z.is_odd() {
        return Err(ZintError::Even(z));
    }
    let f = factor(z)?;
    if f.primes.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.primes.len() % 2 == 0 { 1 } else { -1 })
}

fn mul_mod_g(x: GInt, y: GInt, m: GInt) -> GInt {
    let (a, b) = (x.re as i128, x.im as i128);
    let (c, d) = (y.re as i128, y.im as i128);
    let prod = GInt {
        re: i64::try_from(a * c - b * d).expect("overflow"),
        im: i64::try_from(a * d + b * c).expect("overflow"),
    };
    prod.rem(m)
}

fn pow_mod_g(base: GInt, mut e: u64, m: GInt) -> GInt {
    let mut b = base.rem(m);
    let mut acc = GInt::ONE.rem(m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_g(acc, b, m);
        }
        b = mul_mod_g(b, b, m);
        e >>= 1;
    }
    acc
}

/// Generic Euler criterion `a^{(N(ϖ)−1)/2} mod ϖ` mapped to {−1, 0, 1}.
pub fn quad_symbol_euler(a: GInt, w: &PrimaryPrime) -> i8 {
    let m = w.value;
    let r = pow_mod_g(a, (w.norm - 1) / 2, m);
    if r.is_zero() {
        0
    } else if m.divides(r - GInt::ONE) {
        1
    } else if m.divides(r + GInt::ONE) {
        -1
    } else {
        unreachable!("Euler criterion produced a non-sign residue")
    }
}

/// Split fast path: reduce through ℤ[i]/ϖ ≅ ℤ/p, then a rational Jacobi symbol.
pub fn quad_symbol_split(a: GInt, w: &PrimaryPrime) -> i8 {
    let p = w.norm;
    let iota = w.image_of_i().expect("split prime");
    let x = (a.re as i128).rem_euclid(p as i128) as u64;
    let y = (a.im as i128).rem_euclid(p as i128) as u64;
    jacobi(((x + mul_mod(y, iota, p)) % p) as i64, p)
}

/// Inert fast path: `(a/q) = (N(a)/q)` since `a^{q+1} ≡ N(a) mod q`.
pub fn quad_symbol_inert(a: GInt, w: &PrimaryPrime) -> i8 {
    let q = w.rational_prime();
    let n = ((a.re as i128).pow(2) + (a.im as i128).pow(2)).rem_euclid(q as i128);
    jacobi(n as i64, q)
}

/// Quadratic symbol at a prime via the appropriate fast path.
pub fn quad_symbol_prime(a: GInt, w: &PrimaryPrime) -> i8 {
    match w.kind {
        PrimeKind::Split => quad_symbol_split(a, w),
        PrimeKind::Inert => quad_symbol_inert(a, w),
    }
}

fn check_modulus(n: GInt) -> Result<()> {
    if n.is_zero() {
        return Err(ZintError::Zero);
    }
    if !n.is_odd() {
        return Err(ZintError::Even(n));
    }
    if n.is_unit() {
        return Err(ZintError::Unit(n));
    }
    n.checked_norm().map(|_| ())
}

/// Quadratic residue symbol `(a/n)` for odd non-unit `n`, multiplicative in `n`.
pub fn quad_symbol(a: GInt, n: GInt) -> Result<i8> {
    check_modulus(n)?;
    let f = factor(n)?;
    let mut s = 1i8;
    for (w, e) in &f.primes {
        let v = quad_symbol_prime(a, w);
        if v == 0 {
            return Ok(0);
        }
        if e % 2 == 1 {
            s *= v;
        }
    }
    Ok(s)
}

/// Quartic residue symbol; returns 0 or one of the four units.
pub fn quartic_symbol(a: GInt, w: &PrimaryPrime) -> GInt {
    let m = w.value;
    let r = pow_mod_g(a, (w.norm - 1) / 4, m);
    if r.is_zero() {
        return GInt::ZERO;
    }
    Unit::ALL
        .into_iter()
        .map(Unit::value)
        .find(|&u| m.divides(r - u))
        .expect("quartic symbol is a unit")
}

/// Family character `χ_{i(1+i)⁵c}(n)`.
pub fn chi_family(c: GInt, n: GInt) -> Result<i8> {
    quad_symbol(GInt::FAMILY_TWIST * c, n)
}

/// A complete residue system mod `n`: `u + v·i`, `0 ≤ u < N/g`, `0 ≤ v < g`,
/// `g = gcd(re, im)` (Hermite normal form of the lattice nℤ[i]).
pub fn residue_system(n: GInt) -> Vec<GInt> {
    let norm = n.norm();
    let g = gcd(n.re.unsigned_abs(), n.im.unsigned_abs());
    let mut out = Vec::with_capacity(norm as usize);
    for v in 0..g {
        for u in 0..norm / g {
            out.push(GInt::new(u as i64, v as i64));
        }
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Precomputed character values mod `n` for repeated Gauss sums.
pub struct GaussSumTable {
    n: GInt,
    norm: u64,
    residues: Vec<GInt>,
    chars: Vec<i8>,
    roots: Vec<Complex64>,
}

impl GaussSumTable {
    pub fn new(n: GInt, cap: u64) -> Result<Self> {
        check_modulus(n)?;
        let norm = n.norm();
        if norm > cap {
            return Err(ZintError::TooManyResidues(norm, cap));
        }
        let f = factor(n)?;
        let residues = residue_system(n);
        let chars = residues
            .iter()
            .map(|&x| {
                let mut s = 1i8;
                for (w, e) in &f.primes {
                    let v = quad_symbol_prime(x, w);
                    if e % 2 == 1 || v == 0 {
                        s *= v;
                    }
                }
                s
            })
            .collect();
        let roots = (0..norm)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / norm as f64))
            .collect();
        Ok(GaussSumTable { n, norm, residues, chars, roots })
    }

    /// `g(r,n) = Σ_x (x/n) ẽ(rx/n)` with `ẽ(z) = e^{2πi·Im z}`.
    pub fn eval(&self, r: GInt) -> Complex64 {
        let nb = self.n.conj();
        let rn = r * nb;
        let m = self.norm as i128;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &c) in self.residues.iter().zip(&self.chars) {
            if c == 0 {
                continue;
            }
            // Im(r·x·n̄) / N(n), reduced exactly
            let k = (rn.re as i128 * x.im as i128 + rn.im as i128 * x.re as i128).rem_euclid(m);
            let z = self.roots[k as usize];
            if c > 0 {
                acc += z;
            } else {
                acc -= z;
            }
        }
        acc
    }
}

/// Brute-force Gauss sum with the default residue cap.
pub fn gauss_sum(r: GInt, n: GInt) -> Result<Complex64> {
    Ok(GaussSumTable::new(n, GAUSS_SUM_CAP)?.eval(r))
}

/// A square-free odd `c = unit · primary_part`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FamilyElement {
    pub c: GInt,
    pub unit: Unit,
    pub primary_part: GInt,
    pub norm: u64,
}

/// Smallest-prime-factor table on `0..=n`.
fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Square-free test of odd `z` from the factored norm: inert exponents must be
/// 0 or 2, split exponents ≤ 1, or 2 with `p | z` (the product ϖϖ̄).
fn squarefree_from_norm(z: GInt, mut n: u64, spf: &[u32]) -> bool {
    while n > 1 {
        let p = spf[n as usize] as u64;
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        let ok = match (p % 4, e) {
            (3, 2) | (1, 1) => true,
            (1, 2) => z.re % p as i64 == 0 && z.im % p as i64 == 0,
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// All odd square-free elements with norm ≤ `bound`, every associate listed,
/// canonically ordered.
pub fn family_elements(bound: u64) -> Vec<FamilyElement> {
    let spf = spf_table(bound as usize);
    let r = isqrt(bound) as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let n = (a * a + b * b) as u64;
            if n == 0 || n > bound || n.is_multiple_of(2) {
                continue;
            }
            let c = GInt::new(a, b);
            if !squarefree_from_norm(c, n, &spf) {
                continue;
            }
            let (unit, primary_part) = primary_associate(c).expect("odd");
            out.push(FamilyElement { c, unit, primary_part, norm: n });
        }
    }
    out.sort_by(|x, y| x.c.canonical_cmp(&y.c));
    out
}

/// Streaming view of [`family_elements`].
pub fn family_stream(bound: u64) -> impl Iterator<Item = FamilyElement> {
    family_elements(bound).into_iter()
}

const CACHE_MAGIC: &str = "# qhecke primary-prime sieve v1";

/// Write a sieve table as CSV `(re, im, norm, kind)`.
pub fn write_sieve_csv<W: Write>(mut out: W, bound: u64, primes: &[PrimaryPrime]) -> std::io::Result<()> {
    writeln!(out, "{CACHE_MAGIC} bound={bound}")?;
    writeln!(out, "re,im,norm,kind")?;
    for p in primes {
        let kind = match p.kind {
            PrimeKind::Split => "split",
            PrimeKind::Inert => "inert",
        };
        writeln!(out, "{},{},{},{}", p.value.re, p.value.im, p.norm, kind)?;
    }
    Ok(())
}

/// Read and validate a sieve CSV; returns `(bound, primes)`.
pub fn read_sieve_csv<R: BufRead>(input: R) -> Result<(u64, Vec<PrimaryPrime>)> {
    let bad = |m: String| ZintError::Cache(m);
    let mut lines = input.lines();
    let head = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .map_err(|e| bad(e.to_string()))?;
    let bound = head
        .strip_prefix(CACHE_MAGIC)
        .and_then(|s| s.trim().strip_prefix("bound="))
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| bad(format!("bad header: {head}")))?;
    match lines.next() {
        Some(Ok(l)) if l == "re,im,norm,kind" => {}
        _ => return Err(bad("missing column header".into())),
    }
    let mut primes: Vec<PrimaryPrime> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(format!("row {i}: expected 4 fields")));
        }
        let num = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("row {i}: bad integer {s}")));
        let value = GInt::new(num(f[0])?, num(f[1])?);
        let norm = num(f[2])? as u64;
        let kind = match f[3] {
            "split" => PrimeKind::Split,
            "inert" => PrimeKind::Inert,
            k => return Err(bad(format!("row {i}: unknown kind {k}"))),
        };
        let p = PrimaryPrime { value, norm, kind };
        if !value.is_primary() || value.norm() != norm || norm > bound {
            return Err(bad(format!("row {i}: {value} is not primary with norm {norm} ≤ {bound}")));
        }
        let prime_ok = match kind {
            PrimeKind::Split => norm % 4 == 1 && is_rational_prime(norm),
            PrimeKind::Inert => {
                let q = value.re.unsigned_abs();
                value.im == 0 && q % 4 == 3 && is_rational_prime(q)
            }
        };
        if !prime_ok {
            return Err(bad(format!("row {i}: {value} is not a prime of kind {:?}", kind)));
        }
        if let Some(last) = primes.last() {
            if last.value.canonical_cmp(&value) != Ordering::Less {
                return Err(bad(format!("row {i}: rows not in canonical order")));
            }
        }
        primes.push(p);
    }
    Ok((bound, primes))
}

/// Load a sieve cache if present and large enough, else compute and store it.
pub fn cached_primes(path: &Path, bound: u64) -> Result<Vec<PrimaryPrime>> {
    if let Ok(f) = std::fs::File::open(path) {
        let (b, primes) = read_sieve_csv(std::io::BufReader::new(f))?;
        if b >= bound {
            return Ok(primes.into_iter().filter(|p| p.norm <= bound).collect());
        }
    }
    let primes = primary_primes_up_to(bound);
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| ZintError::Cache(e.to_string());
    {
        let f = std::fs::File::create(&tmp).map_err(io)?;
        let mut w = std::io::BufWriter::new(f);
        write_sieve_csv(&mut w, bound, &primes).map_err(io)?;
        w.flush().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)?;
    Ok(primes)
}
