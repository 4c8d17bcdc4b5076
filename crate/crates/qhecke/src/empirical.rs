//! The one-level density by the explicit formula: exact finite character sums
//! over the family, assembled term by term.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quad::adaptive;
use crate::specfun::digamma;
use crate::sum::{Kahan, KahanC};
use crate::transforms::{TestFunction, WeightFunction};
use crate::zint::{
    chi_family, family_elements, jacobi, primary_primes_up_to, quad_symbol, quad_symbol_split, GInt,
    GaussSumTable, PrimaryPrime, PrimeKind, Unit, ZintError, GAUSS_SUM_CAP,
};

#[derive(Debug, Error)]
pub enum EmpiricalError {
    #[error("sieve bound {have} below required prime cutoff {need}")]
    SieveBound { have: u64, need: u64 },
    #[error("X = {0} must be > 1")]
    BadX(f64),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Zint(#[from] ZintError),
}

pub type Result<T> = std::result::Result<T, EmpiricalError>;

/// Primary primes up to `bound`, canonically ordered.
#[derive(Clone, Debug)]
pub struct PrimeSieve {
    pub bound: u64,
    pub primes: Vec<PrimaryPrime>,
}

impl PrimeSieve {
    pub fn new(bound: u64) -> Self {
        PrimeSieve { bound, primes: primary_primes_up_to(bound) }
    }

    /// Wraps primes loaded elsewhere (e.g. a sieve cache), dropping any above `bound`.
    pub fn from_primes(bound: u64, mut primes: Vec<PrimaryPrime>) -> Self {
        primes.retain(|p| p.norm <= bound);
        PrimeSieve { bound, primes }
    }
}

/// Parameters of an explicit-formula run.
#[derive(Clone, Debug)]
pub struct DensityConfig {
    pub x: f64,
    pub test: TestFunction,
    pub weight: Arc<WeightFunction>,
    /// Family elements with N(c) ≤ R·X are included.
    pub weight_cutoff: f64,
    pub threads: usize,
    /// Optional precomputed sieve; built on demand otherwise.
    pub sieve: Option<Arc<PrimeSieve>>,
}

impl DensityConfig {
    pub fn new(x: f64, test: TestFunction, weight: Arc<WeightFunction>) -> Self {
        DensityConfig { x, test, weight, weight_cutoff: 4.0, threads: 1, sieve: None }
    }

    pub fn log_x(&self) -> f64 {
        self.x.ln()
    }

    /// Primes contribute only while N(ϖ) < X^σ.
    pub fn prime_cutoff(&self) -> u64 {
        self.x.powf(self.test.sigma).ceil() as u64
    }

    pub fn family_bound(&self) -> u64 {
        (self.weight_cutoff * self.x).floor() as u64
    }

    fn validate(&self) -> Result<()> {
        if !(self.x > 1.0) {
            return Err(EmpiricalError::BadX(self.x));
        }
        Ok(())
    }

    fn primes(&self) -> Result<Arc<PrimeSieve>> {
        let need = self.prime_cutoff();
        match &self.sieve {
            Some(s) if s.bound >= need => Ok(s.clone()),
            Some(s) => Err(EmpiricalError::SieveBound { have: s.bound, need }),
            None => Ok(Arc::new(PrimeSieve::new(need))),
        }
    }
}

/// Term-by-term breakdown of D(φ; w, X).
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub phi: String,
    pub weight: String,
    #[serde(rename = "W_X")]
    pub w_x: f64,
    pub term_log_conductor: f64,
    pub term_gamma_const: f64,
    pub term_integral: f64,
    #[serde(rename = "S_even")]
    pub s_even: f64,
    #[serde(rename = "S_odd")]
    pub s_odd: f64,
    #[serde(rename = "D_total")]
    pub d_total: f64,
    /// (1/W)Σ w(N(c)/X) log N(c).
    pub avg_log_norm: f64,
    pub family_size: usize,
    pub primes_used: usize,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// Primary representatives of the family grouped by norm.
struct Family {
    xs: Vec<i32>,
    ys: Vec<i32>,
    /// (norm, w(norm/X), start, end) per distinct norm.
    groups: Vec<(u64, f64, usize, usize)>,
    radius: i32,
    size: usize,
}

impl Family {
    fn new(cfg: &DensityConfig) -> Family {
        let all = family_elements(cfg.family_bound());
        let size = all.len();
        let prim: Vec<GInt> = all.iter().filter(|f| f.unit == Unit::ONE).map(|f| f.c).collect();
        let mut xs = Vec::with_capacity(prim.len());
        let mut ys = Vec::with_capacity(prim.len());
        let mut groups = Vec::new();
        for (k, c) in prim.iter().enumerate() {
            let n = c.norm();
            match groups.last_mut() {
                Some((gn, _, _, end)) if *gn == n => *end = k + 1,
                _ => groups.push((n, cfg.weight.w(n as f64 / cfg.x), k, k + 1)),
            }
            xs.push(c.re as i32);
            ys.push(c.im as i32);
        }
        let radius = xs.iter().chain(&ys).map(|v| v.abs()).max().unwrap_or(0);
        Family { xs, ys, groups, radius, size }
    }

    /// Σ over all associates of w(N(c)/X).
    fn total_weight(&self) -> f64 {
        let mut k = Kahan::new();
        for &(_, w, s, e) in &self.groups {
            k.add(w * (e - s) as f64);
        }
        4.0 * k.value()
    }

    fn weighted_log_norm(&self) -> f64 {
        let mut k = Kahan::new();
        for &(n, w, s, e) in &self.groups {
            k.add(w * (e - s) as f64 * (n as f64).ln());
        }
        4.0 * k.value()
    }
}

/// Per-prime sums over all associates: `A = Σ_c w χ_c(ϖ)` and
/// `B = Σ_{ϖ∤c} w`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct PrimeSums {
    a: f64,
    b: f64,
}

fn residue_tables(p: u64, iota: u64, radius: i32, xm: &mut Vec<u32>, ym: &mut Vec<u32>) {
    xm.clear();
    ym.clear();
    let pi = p as i64;
    for v in -radius..=radius {
        let v = v as i64;
        xm.push(v.rem_euclid(pi) as u32);
        ym.push(((v.rem_euclid(pi) as u128 * iota as u128) % p as u128) as u32);
    }
}

fn build_qr(p: u64, bits: &mut Vec<u64>) {
    bits.clear();
    bits.resize((p as usize).div_ceil(64), 0);
    let mut s: u64 = 0;
    for k in 1..=(p - 1) / 2 {
        s += 2 * k - 1;
        if s >= p {
            s -= p;
        }
        bits[(s / 64) as usize] |= 1 << (s % 64);
    }
}

#[derive(Default)]
struct Scratch {
    bits: Vec<u64>,
    xm: Vec<u32>,
    ym: Vec<u32>,
}

fn prime_sums(fam: &Family, w_total: f64, pr: &PrimaryPrime, need_a: bool, need_b: bool, sc: &mut Scratch) -> PrimeSums {
    let r = fam.radius;
    let mut a = 0.0;
    let mut divisible = Kahan::new();
    match pr.kind {
        PrimeKind::Split => {
            let p = pr.norm;
            let iota = pr.image_of_i().expect("split");
            residue_tables(p, iota, r, &mut sc.xm, &mut sc.ym);
            // Σ_u (u/ϖ) = 2(1 + (i/ϖ)) vanishes unless p ≡ 1 mod 8.
            let a_needed = need_a && p % 8 == 1;
            if !a_needed && !need_b {
                return PrimeSums { a: 0.0, b: 0.0 };
            }
            if a_needed {
                build_qr(p, &mut sc.bits);
            }
            let twist = quad_symbol_split(GInt::FAMILY_TWIST, pr) as f64;
            let mut acc = Kahan::new();
            for &(_, w, s, e) in &fam.groups {
                let mut chi_sum: i64 = 0;
                let mut zeros: i64 = 0;
                for k in s..e {
                    let mut v = sc.xm[(fam.xs[k] + r) as usize] + sc.ym[(fam.ys[k] + r) as usize];
                    if v as u64 >= p {
                        v -= p as u32;
                    }
                    if v == 0 {
                        zeros += 1;
                    } else if a_needed {
                        chi_sum += if sc.bits[(v / 64) as usize] >> (v % 64) & 1 == 1 { 1 } else { -1 };
                    }
                }
                if chi_sum != 0 {
                    acc.add(w * chi_sum as f64);
                }
                if zeros != 0 {
                    divisible.add(w * zeros as f64);
                }
            }
            if a_needed {
                a = 4.0 * twist * acc.value();
            }
        }
        PrimeKind::Inert => {
            let q = pr.rational_prime();
            let mut acc = Kahan::new();
            for &(n, w, s, e) in &fam.groups {
                let cnt = (e - s) as f64;
                if n % q == 0 {
                    // q | N(c) with c square-free forces q | c.
                    divisible.add(w * cnt);
                } else if need_a {
                    acc.add(w * cnt * jacobi(((32 * (n % q)) % q) as i64, q) as f64);
                }
            }
            a = 4.0 * acc.value();
        }
    }
    let b = if need_b { w_total - 4.0 * divisible.value() } else { 0.0 };
    PrimeSums { a, b }
}

/// (odd-j, even-j) contributions of one prime to Σ_c w Σ_j S_j.
fn prime_terms(pr: &PrimaryPrime, sums: PrimeSums, test: &TestFunction, l: f64, cut: f64) -> (f64, f64) {
    let n = pr.norm as f64;
    let ln = n.ln();
    let mut odd = 0.0;
    let mut even = 0.0;
    let mut j = 1;
    while (j as f64) * ln < cut {
        let f = test.phi_hat(j as f64 * ln / l);
        let t = ln * (-(j as f64) * ln / 2.0).exp() * f;
        if j % 2 == 1 {
            odd += t * sums.a;
        } else {
            even += t * sums.b;
        }
        j += 1;
    }
    (odd, even)
}

/// Sum of ln N / N^{j/2} · φ̂(j ln N / L) · (A or B) over primes, split by parity,
/// with the prime loop outermost.
fn prime_outer(cfg: &DensityConfig, fam: &Family, sieve: &PrimeSieve) -> Result<(f64, f64, usize)> {
    let l = cfg.log_x();
    let cut = cfg.test.sigma * l;
    let w_total = fam.total_weight();
    let primes: Vec<&PrimaryPrime> = sieve.primes.iter().filter(|p| (p.norm as f64).ln() < cut).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| EmpiricalError::Threads(e.to_string()))?;
    let terms: Vec<(f64, f64)> = pool.install(|| {
        primes
            .par_iter()
            .map_init(Scratch::default, |sc, pr| {
                let ln = (pr.norm as f64).ln();
                let need_b = 2.0 * ln < cut;
                let sums = prime_sums(fam, w_total, pr, true, need_b, sc);
                prime_terms(pr, sums, &cfg.test, l, cut)
            })
            .collect()
    });
    let mut odd = Kahan::new();
    let mut even = Kahan::new();
    for (o, e) in terms {
        odd.add(o);
        even.add(e);
    }
    Ok((odd.value(), even.value(), primes.len()))
}

/// (2/L)∫₀^∞ e^{−t/2}/(1−e^{−t}) (φ̂(0) − φ̂(t/L)) dt.
pub fn digamma_integral_term(test: &TestFunction, l: f64) -> f64 {
    let kernel = |t: f64| (-t / 2.0).exp() / -(-t).exp_m1();
    let f0 = test.phi_hat(0.0);
    let top = test.sigma * l;
    let body = adaptive(
        |t| {
            if t == 0.0 {
                // e^{−t/2}/(1−e^{−t})·(φ̂(0) − φ̂(t/L)) → −φ̂'(0⁺)/L as t → 0
                -test.phi_hat_deriv(0.0, 1) / l
            } else {
                kernel(t) * (f0 - test.phi_hat(t / l))
            }
        },
        0.0,
        top,
        1e-15,
        1e-13,
    )
    .value;
    // ∫_T^∞ e^{−t/2}/(1−e^{−t}) dt = 2 artanh(e^{−T/2})
    let tail = f0 * 2.0 * (-top / 2.0).exp().atanh();
    2.0 / l * (body + tail)
}

/// W(X) = Σ w(N(c)/X) over the family (all associates).
pub fn total_weight(cfg: &DensityConfig) -> f64 {
    Family::new(cfg).total_weight()
}

/// S_j(χ_c; φ̂) for one family element.
pub fn s_j_sum(c: GInt, j: u32, cfg: &DensityConfig) -> Result<f64> {
    let sieve = cfg.primes()?;
    let l = cfg.log_x();
    let cut = cfg.test.sigma * l;
    let twisted = GInt::FAMILY_TWIST * c;
    let mut acc = Kahan::new();
    for pr in &sieve.primes {
        let ln = (pr.norm as f64).ln();
        if j as f64 * ln >= cut {
            break;
        }
        let chi = crate::zint::quad_symbol_prime(twisted, pr) as f64;
        let chi_j = if j.is_multiple_of(2) { chi * chi } else { chi };
        acc.add(ln * (-(j as f64) * ln / 2.0).exp() * chi_j * cfg.test.phi_hat(j as f64 * ln / l));
    }
    Ok(acc.value())
}

fn assemble(cfg: &DensityConfig, fam: &Family, odd: f64, even: f64, primes_used: usize, start: Instant) -> DensityReport {
    let l = cfg.log_x();
    let w_x = fam.total_weight();
    let f0 = cfg.test.phi_hat(0.0);
    let avg_log_norm = fam.weighted_log_norm() / w_x;
    let psi_half = digamma(Complex64::new(0.5, 0.0)).unwrap().re;
    let term_log_conductor = f0 / l * avg_log_norm;
    let term_gamma_const = f0 / l * ((32.0 / (PI * PI)).ln() + 2.0 * psi_half);
    let term_integral = digamma_integral_term(&cfg.test, l);
    let s_odd = -2.0 / (l * w_x) * odd;
    let s_even = -2.0 / (l * w_x) * even;
    DensityReport {
        x: cfg.x,
        l,
        phi: cfg.test.spec(),
        weight: cfg.weight.spec().to_string(),
        w_x,
        term_log_conductor,
        term_gamma_const,
        term_integral,
        s_even,
        s_odd,
        d_total: term_log_conductor + term_gamma_const + term_integral + s_even + s_odd,
        avg_log_norm,
        family_size: fam.size,
        primes_used,
        elapsed_ms: start.elapsed().as_millis(),
    }
}

/// D(φ; w, X) by the explicit formula, prime loop outermost.
pub fn one_level_density(cfg: &DensityConfig) -> Result<DensityReport> {
    cfg.validate()?;
    let start = Instant::now();
    let sieve = cfg.primes()?;
    let fam = Family::new(cfg);
    let (odd, even, used) = prime_outer(cfg, &fam, &sieve)?;
    Ok(assemble(cfg, &fam, odd, even, used, start))
}

/// Reference implementation: family loop outermost, every associate handled
/// separately, symbols from the generic composite-modulus routine.
pub fn one_level_density_reference(cfg: &DensityConfig) -> Result<DensityReport> {
    cfg.validate()?;
    let start = Instant::now();
    let sieve = cfg.primes()?;
    let fam = Family::new(cfg);
    let l = cfg.log_x();
    let cut = cfg.test.sigma * l;
    let primes: Vec<&PrimaryPrime> = sieve.primes.iter().filter(|p| (p.norm as f64).ln() < cut).collect();
    let mut odd = Kahan::new();
    let mut even = Kahan::new();
    for el in family_elements(cfg.family_bound()) {
        let w = cfg.weight.w(el.norm as f64 / cfg.x);
        for pr in &primes {
            let chi = chi_family(el.c, pr.value)? as f64;
            let ln = (pr.norm as f64).ln();
            let mut j = 1;
            while j as f64 * ln < cut {
                let t = ln * (-(j as f64) * ln / 2.0).exp() * cfg.test.phi_hat(j as f64 * ln / l);
                if j % 2 == 1 {
                    odd.add(w * t * chi);
                } else {
                    even.add(w * t * chi * chi);
                }
                j += 1;
            }
        }
    }
    Ok(assemble(cfg, &fam, odd.value(), even.value(), primes.len(), start))
}

/// S_odd alone.
pub fn s_odd(cfg: &DensityConfig) -> Result<f64> {
    Ok(one_level_density(cfg)?.s_odd)
}

/// S_even alone.
pub fn s_even(cfg: &DensityConfig) -> Result<f64> {
    Ok(one_level_density(cfg)?.s_even)
}

/// The c-independent form −(2/L)Σ_{ϖ,j≥1} log N/N^j (1+1/N)^{−1} φ̂(2j log N/L).
pub fn s_even_main(test: &TestFunction, l: f64, sieve: &PrimeSieve) -> Result<f64> {
    let cut = test.sigma * l;
    let need = (cut / 2.0).exp().ceil() as u64;
    if sieve.bound < need {
        return Err(EmpiricalError::SieveBound { have: sieve.bound, need });
    }
    let mut acc = Kahan::new();
    for pr in &sieve.primes {
        let n = pr.norm as f64;
        let ln = n.ln();
        if 2.0 * ln >= cut {
            break;
        }
        let mut j = 1;
        while 2.0 * j as f64 * ln < cut {
            acc.add(ln * (-(j as f64) * ln).exp() / (1.0 + 1.0 / n) * test.phi_hat(2.0 * j as f64 * ln / l));
            j += 1;
        }
    }
    Ok(-2.0 / l * acc.value())
}

/// Residuals of the prime-sum asymptotics up to `b`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PrimeSumResidual {
    pub b: u64,
    /// (Σ χ(ϖ) log N(ϖ) − δ_χ·B) / (√B log²B).
    pub chebyshev: f64,
    /// Σ log N(ϖ)/N(ϖ) − log B.
    pub mertens: f64,
}

/// With `modulus = None` the principal character; otherwise χ(ϖ) = (ϖ/m).
pub fn prime_sum_check(b: u64, modulus: Option<GInt>, sieve: &PrimeSieve) -> Result<PrimeSumResidual> {
    if sieve.bound < b {
        return Err(EmpiricalError::SieveBound { have: sieve.bound, need: b });
    }
    let mut cheb = Kahan::new();
    let mut mert = Kahan::new();
    for pr in sieve.primes.iter().take_while(|p| p.norm <= b) {
        let ln = (pr.norm as f64).ln();
        let chi = match modulus {
            None => 1.0,
            Some(m) => quad_symbol(pr.value, m)? as f64,
        };
        cheb.add(chi * ln);
        mert.add(ln / pr.norm as f64);
    }
    let bf = b as f64;
    let delta = if modulus.is_none() { bf } else { 0.0 };
    Ok(PrimeSumResidual {
        b,
        chebyshev: (cheb.value() - delta) / (bf.sqrt() * bf.ln().powi(2)),
        mertens: mert.value() - bf.ln(),
    })
}

/// Both sides of a Poisson summation identity.
#[derive(Clone, Copy, Debug)]
pub struct PoissonCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

/// Σ_m χ(m)W(N(m)/X) against (X/N(n))Σ_k g(k,n) W̃(√(N(k)X/N(n))) with
/// χ = (·/n) and W = w; with `n = None`, the untwisted version
/// Σ_m W(N(m)/X) = X Σ_k W̃(√(N(k)X)).
pub fn poisson_check(w: &WeightFunction, n: Option<GInt>, x: f64) -> Result<PoissonCheck> {
    // w(t) < 1e-30 beyond t = 4.7; w̃(t) < 1e-16 beyond t = 9.5.
    let (nn, table) = match n {
        Some(n) => (n.norm() as f64, Some(GaussSumTable::new(n, GAUSS_SUM_CAP)?)),
        None => (1.0, None),
    };
    let lattice = |bound: f64| -> Vec<GInt> {
        let r = bound.sqrt().ceil() as i64;
        let mut v = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if ((a * a + b * b) as f64) <= bound {
                    v.push(GInt::new(a, b));
                }
            }
        }
        v
    };
    let mut lhs = KahanC::new();
    for m in lattice(4.7 * x) {
        let chi = match n {
            Some(n) if m.is_zero() => {
                if n.is_unit() {
                    1.0
                } else {
                    0.0
                }
            }
            Some(n) => quad_symbol(m, n)? as f64,
            None => 1.0,
        };
        if chi != 0.0 {
            lhs.add(Complex64::new(chi * w.w(m.norm() as f64 / x), 0.0));
        }
    }
    let mut rhs = KahanC::new();
    for k in lattice(9.5f64.powi(2) * nn / x) {
        let wt = w.w_tilde((k.norm() as f64 * x / nn).sqrt());
        let g = match &table {
            Some(t) => t.eval(k),
            None => Complex64::new(1.0, 0.0),
        };
        rhs.add(g * wt);
    }
    Ok(PoissonCheck { lhs: lhs.value(), rhs: rhs.value() * (x / nn) })
}
