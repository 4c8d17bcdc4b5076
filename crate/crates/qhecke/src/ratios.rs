//! The ratios-conjecture prediction for the one-level density: the full
//! t-integral, its first-order closed form, and the comparison harness.
//!
//! On the line r = it the integrand is
//! `S(r) + log(32N(c)/π²) + ψ(½−r) + ψ(½+r) + D(r)·N(c)^{−r}` with
//! `S(r) = 2ζ'_K/ζ_K(1+2r) + 2A_α(r,r)` and
//! `D(r) = −(8/π)·Γ(½−r)/Γ(½+r)·(π²/32)^r·ζ_K(1−2r)·A(−r,r)`.
//! S has a −1/r pole and D a +1/r pole; their sum is analytic at 0. The
//! integrand satisfies f(−t) = conj f(t), so only its real part contributes.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::empirical::{digamma_integral_term, one_level_density, s_even_main, DensityConfig, EmpiricalError, PrimeSieve};
use crate::expansion::{
    conductor_constant, expansion_coefficients, j_constant_closed, theorem11_prediction, ExpansionError, Kernels,
    DEFAULT_ORDER,
};
use crate::quad::{adaptive, GaussLegendre};
use crate::specfun::{digamma, ln_gamma, x_c, zeta_k, zeta_k_log_deriv, SpecError, Truncated, ZetaKContext, C64};
use crate::sum::{Kahan, KahanC};
use crate::transforms::TestFunction;
use crate::zint::family_elements;

#[derive(Debug, Error)]
pub enum RatiosError {
    #[error("r = {0} is inside the Laurent radius; use the series branch")]
    NearPole(C64),
    #[error("the prime-sum identity needs Re r > 0, got {0}")]
    Domain(C64),
    #[error("support σ = {0} must be < 2 for the comparison")]
    Support(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Empirical(#[from] EmpiricalError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}

pub type Result<T> = std::result::Result<T, RatiosError>;

/// Radius ε₀ below which the integrand is taken from its Taylor series.
pub const LAURENT_RADIUS: f64 = 1e-3;

/// Family weights grouped by norm.
#[derive(Clone, Debug)]
pub struct FamilyNorms {
    norms: Vec<f64>,
    logs: Vec<f64>,
    /// w(N/X) times the number of elements of that norm.
    weights: Vec<f64>,
    total: f64,
}

impl FamilyNorms {
    /// One entry per distinct norm.
    pub fn new(cfg: &DensityConfig) -> Self {
        let mut counts: Vec<(u64, u64)> = Vec::new();
        let mut all: Vec<u64> = family_elements(cfg.family_bound()).iter().map(|e| e.norm).collect();
        all.sort_unstable();
        for n in all {
            match counts.last_mut() {
                Some((m, k)) if *m == n => *k += 1,
                _ => counts.push((n, 1)),
            }
        }
        Self::from_pairs(counts.into_iter().map(|(n, k)| (n as f64, k as f64 * cfg.weight.w(n as f64 / cfg.x))))
    }

    /// One entry per family element, in enumeration order.
    pub fn ungrouped(cfg: &DensityConfig) -> Self {
        Self::from_pairs(
            family_elements(cfg.family_bound()).iter().map(|e| (e.norm as f64, cfg.weight.w(e.norm as f64 / cfg.x))),
        )
    }

    /// A single conductor of norm `n` with unit weight.
    pub fn single(n: f64) -> Self {
        Self::from_pairs(std::iter::once((n, 1.0)))
    }

    fn from_pairs<I: Iterator<Item = (f64, f64)>>(it: I) -> Self {
        let (norms, weights): (Vec<f64>, Vec<f64>) = it.unzip();
        let logs = norms.iter().map(|n| n.ln()).collect();
        let mut k = Kahan::new();
        for w in &weights {
            k.add(*w);
        }
        FamilyNorms { norms, logs, weights, total: k.value() }
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// W(X).
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    /// (1/W)Σ w log N(c).
    pub fn avg_log_norm(&self) -> f64 {
        let mut k = Kahan::new();
        for (w, l) in self.weights.iter().zip(&self.logs) {
            k.add(w * l);
        }
        k.value() / self.total
    }

    /// (1/W)Σ w N(c)^{−r}.
    pub fn mellin(&self, r: C64) -> C64 {
        let mut k = KahanC::new();
        for (w, l) in self.weights.iter().zip(&self.logs) {
            k.add(*w * (-r * *l).exp());
        }
        k.value() / self.total
    }
}

/// 2ζ'_K/ζ_K(1+2r) + 2A_α(r,r) = −2Σ_ϖ N log N/((N+1)(N^{1+2r}−1)) by the prime
/// sum (Re r > 0), truncated at the context's Euler cutoff with an integral tail.
pub fn combined_prime_term(ctx: &ZetaKContext, r: C64) -> Result<Truncated> {
    if r.re <= 0.0 {
        return Err(RatiosError::Domain(r));
    }
    let t = ctx.combined_prime_sum(r)?;
    Ok(Truncated { value: 2.0 * t.value, tail: 2.0 * t.tail, error: 2.0 * t.error })
}

/// 2ζ'_K/ζ_K(1+2r) + 2A_α(r,r) through ζ_K and the absolutely convergent A_α
/// series; valid for Re r > −¼ away from r = 0.
pub fn singular_term(ctx: &ZetaKContext, r: C64) -> Result<C64> {
    Ok(2.0 * zeta_k_log_deriv(1.0 + 2.0 * r)? + 2.0 * ctx.a_alpha_series(r)?)
}

/// D(r), the dual term for N(c) = 1.
pub fn dual_factor(ctx: &ZetaKContext, r: C64) -> Result<C64> {
    let gamma_ratio = (ln_gamma(0.5 - r)? - ln_gamma(0.5 + r)? + r * (PI * PI / 32.0).ln()).exp();
    Ok(-8.0 / PI * gamma_ratio * zeta_k(1.0 - 2.0 * r)? * ctx.a_closed_antidiag(r)?)
}

/// −(8/π)X_c(½+r)ζ_K(1−2r)A(−r,r).
pub fn dual_term(ctx: &ZetaKContext, r: C64, norm_c: f64) -> Result<C64> {
    if r.norm() < LAURENT_RADIUS {
        return Err(RatiosError::NearPole(r));
    }
    Ok(-8.0 / PI * x_c(0.5 + r, norm_c)? * zeta_k(1.0 - 2.0 * r)? * ctx.a_closed_antidiag(r)?)
}

/// Taylor coefficients of Q(r) = r·f(r) at 0, from a Cauchy integral, for an f
/// with at most a simple pole at 0.
#[derive(Clone, Debug)]
pub struct LaurentBranch {
    /// q_0, q_1, …; f(r) = q_0/r + q_1 + q_2 r + ….
    pub coeffs: Vec<C64>,
}

impl LaurentBranch {
    const POINTS: usize = 32;
    const RADIUS: f64 = 0.05;

    pub fn new<F: Fn(C64) -> Result<C64>>(f: F) -> Result<Self> {
        let n = Self::POINTS;
        let mut vals = Vec::with_capacity(n);
        for k in 0..n {
            let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let r = Self::RADIUS * e;
            vals.push((r * f(r)?, e));
        }
        let coeffs = (0..n / 2)
            .map(|j| {
                let mut acc = KahanC::new();
                for &(q, e) in &vals {
                    acc.add(q / e.powu(j as u32));
                }
                acc.value() / (n as f64 * Self::RADIUS.powi(j as i32))
            })
            .collect();
        Ok(LaurentBranch { coeffs })
    }

    /// Branch for S(r) + D(r)·Φ_fam(r).
    pub fn for_family(ctx: &ZetaKContext, fam: &FamilyNorms) -> Result<Self> {
        Self::new(|r| Ok(singular_term(ctx, r)? + dual_factor(ctx, r)? * fam.mellin(r)))
    }

    /// Residue q_0 (0 when the poles cancel).
    pub fn residue(&self) -> C64 {
        self.coeffs[0]
    }

    /// The regular part q_1 + q_2 r + q_3 r², i.e. second order in r.
    pub fn regular(&self, r: C64) -> C64 {
        self.coeffs[1] + self.coeffs[2] * r + self.coeffs[3] * r * r
    }
}

/// The bracketed Theorem 1.2 integrand at r = it for one conductor norm, times
/// φ(tL/2π); the real part, which is all that survives t ↦ −t symmetrisation.
/// Inside |t| < ε₀ the pole-free sum S + D comes from `branch`, which must be
/// [`LaurentBranch::for_family`] of `FamilyNorms::single(norm_c)`.
pub fn ratios_integrand(
    ctx: &ZetaKContext,
    t: f64,
    norm_c: f64,
    test: &TestFunction,
    l: f64,
    branch: &LaurentBranch,
) -> Result<f64> {
    let r = C64::new(0.0, t);
    let regular = if t.abs() < LAURENT_RADIUS {
        branch.regular(r)
    } else {
        singular_term(ctx, r)? + dual_term(ctx, r, norm_c)?
    };
    let psi = digamma(0.5 - r)? + digamma(0.5 + r)?;
    let bracket = regular + (32.0 * norm_c / (PI * PI)).ln() + psi;
    Ok(bracket.re * test.phi(t * l / (2.0 * PI)))
}

/// Quadrature settings for the prediction integral.
#[derive(Clone, Copy, Debug)]
pub struct RatiosOptions {
    /// The t-integral runs to T with T·L/2π = `x_max`.
    pub x_max: f64,
    /// The dual term is dropped beyond this |t|, where Φ_fam is negligible.
    pub dual_cut: f64,
    /// Absolute tolerance per unit-length chunk.
    pub chunk_tol: f64,
    /// Keep the dual term (switch off for ablation).
    pub include_dual: bool,
}

impl Default for RatiosOptions {
    fn default() -> Self {
        RatiosOptions { x_max: 200.0, dual_cut: f64::INFINITY, chunk_tol: 1e-10, include_dual: true }
    }
}

/// The six labelled terms of the first-order expansion.
#[derive(Clone, Debug, Serialize)]
pub struct FirstOrderTerms {
    /// φ̂(0).
    pub leading: f64,
    /// ∫₁^∞ φ̂.
    pub tail_integral: f64,
    /// (φ̂(0)/L)(log(32/π²) + 2ψ(½) + (2/ŵ(0))∫w log).
    pub conductor: f64,
    /// (2/L)∫₀^∞ e^{−t/2}/(1−e^{−t})(φ̂(0) − φ̂(t/L)) dt.
    pub digamma: f64,
    /// −(2/L)Σ_{ϖ,j≥1} log N/N^j (1+1/N)^{−1} φ̂(2j log N/L).
    pub even_prime: f64,
    /// (φ̂(1)/L)(2γ + log(π²/2^{7/3}) + 2ζ'_K/ζ_K(2) − (8/π)γ_K − Mw'(1)/Mw(1)).
    pub j_term: f64,
}

impl FirstOrderTerms {
    pub fn sum(&self) -> f64 {
        self.leading + self.tail_integral + self.conductor + self.digamma + self.even_prime + self.j_term
    }
}

/// Pieces and diagnostics of the full prediction integral.
#[derive(Clone, Debug, Serialize)]
pub struct IntegralBreakdown {
    /// (φ̂(0)/L)·(1/W)Σ w log(32N(c)/π²), integrated in closed form.
    pub conductor: f64,
    /// (1/2π)∫(ψ(½−it)+ψ(½+it))φ(tL/2π)dt, in closed form.
    pub digamma_pair: f64,
    /// (1/2π)∫ Re[S + D·Φ_fam](it) φ(tL/2π) dt, by quadrature.
    pub regular: f64,
    pub points: usize,
    pub max_error: f64,
    /// Bound on the neglected |t| > T.
    pub tail_bound: f64,
    pub t_max: f64,
    /// |D·Φ_fam| at the dual cut.
    pub dual_cut_residual: f64,
    /// |q₀| of the Laurent branch: the uncancelled residue at r = 0.
    pub pole_residue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictionReport {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub phi: String,
    pub weight: String,
    #[serde(rename = "D_ratios_integral")]
    pub d_ratios_integral: Option<f64>,
    #[serde(rename = "D_ratios_first_order")]
    pub d_ratios_first_order: f64,
    pub terms: FirstOrderTerms,
    pub integral: Option<IntegralBreakdown>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

fn first_order_terms(cfg: &DensityConfig, ctx: &ZetaKContext, sieve: &PrimeSieve) -> Result<FirstOrderTerms> {
    let test = &cfg.test;
    let l = cfg.log_x();
    let f0 = test.phi_hat(0.0);
    Ok(FirstOrderTerms {
        leading: f0,
        tail_integral: test.tail_from_one(),
        conductor: f0 / l * conductor_constant(&cfg.weight),
        digamma: digamma_integral_term(test, l),
        even_prime: s_even_main(test, l, sieve)?,
        j_term: test.phi_hat(1.0) / l * j_constant_closed(&ctx.constants, &cfg.weight),
    })
}

fn sieve_for(cfg: &DensityConfig) -> Arc<PrimeSieve> {
    let need = (cfg.test.sigma * cfg.log_x() / 2.0).exp().ceil() as u64 + 1;
    match &cfg.sieve {
        Some(s) if s.bound >= need => s.clone(),
        _ => Arc::new(PrimeSieve::new(need)),
    }
}

/// Theorem 1.4's six-term first-order expansion.
pub fn ratios_first_order(cfg: &DensityConfig, ctx: &ZetaKContext) -> Result<PredictionReport> {
    let start = Instant::now();
    let terms = first_order_terms(cfg, ctx, &sieve_for(cfg))?;
    Ok(PredictionReport {
        x: cfg.x,
        l: cfg.log_x(),
        phi: cfg.test.spec(),
        weight: cfg.weight.spec().to_string(),
        d_ratios_integral: None,
        d_ratios_first_order: terms.sum(),
        terms,
        integral: None,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// The full prediction integral, plus the first-order form for reference.
pub fn ratios_density(cfg: &DensityConfig, ctx: &ZetaKContext, opts: &RatiosOptions) -> Result<PredictionReport> {
    let start = Instant::now();
    let fam = FamilyNorms::new(cfg);
    let integral = prediction_integral(cfg, ctx, &fam, opts)?;
    let terms = first_order_terms(cfg, ctx, &sieve_for(cfg))?;
    Ok(PredictionReport {
        x: cfg.x,
        l: cfg.log_x(),
        phi: cfg.test.spec(),
        weight: cfg.weight.spec().to_string(),
        d_ratios_integral: Some(integral.conductor + integral.digamma_pair + integral.regular),
        d_ratios_first_order: terms.sum(),
        terms,
        integral: Some(integral),
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Evaluates the prediction integral for a given family (grouped or not).
pub fn prediction_integral(
    cfg: &DensityConfig,
    ctx: &ZetaKContext,
    fam: &FamilyNorms,
    opts: &RatiosOptions,
) -> Result<IntegralBreakdown> {
    let test = &cfg.test;
    let l = cfg.log_x();
    let f0 = test.phi_hat(0.0);
    let psi_half = digamma(C64::new(0.5, 0.0))?.re;
    let conductor = f0 / l * ((32.0 / (PI * PI)).ln() + fam.avg_log_norm());
    let digamma_pair = 2.0 * psi_half * f0 / l + digamma_integral_term(test, l);

    let branch = if opts.include_dual {
        LaurentBranch::for_family(ctx, fam)?
    } else {
        LaurentBranch::new(|r| singular_term(ctx, r))?
    };
    let t_max = opts.x_max * 2.0 * PI / l;
    let eval = |t: f64| -> f64 {
        let r = C64::new(0.0, t);
        let v = if t < LAURENT_RADIUS {
            Ok(branch.regular(r))
        } else {
            singular_term(ctx, r).and_then(|s| {
                if opts.include_dual && t <= opts.dual_cut {
                    Ok(s + dual_factor(ctx, r)? * fam.mellin(r))
                } else {
                    Ok(s)
                }
            })
        };
        match v {
            Ok(z) => z.re * test.phi(t * l / (2.0 * PI)),
            Err(_) => f64::NAN,
        }
    };
    let mut edges = vec![0.0, LAURENT_RADIUS];
    let mut e = 1.0;
    while e < t_max {
        edges.push(e);
        e += 1.0;
    }
    edges.push(t_max);
    let parts: Vec<(f64, f64, usize)> = edges
        .par_windows(2)
        .map(|w| {
            let count = std::cell::Cell::new(0usize);
            let q = adaptive(
                |t| {
                    count.set(count.get() + 1);
                    eval(t)
                },
                w[0],
                w[1],
                opts.chunk_tol,
                1e-12,
            );
            (q.value, q.error, count.get())
        })
        .collect();
    let mut acc = Kahan::new();
    let mut points = 0;
    let mut max_error: f64 = 0.0;
    for (v, err, n) in parts {
        acc.add(v);
        points += n;
        max_error = max_error.max(err);
    }
    // f(−t) = conj f(t): the integral over ℝ is twice the real part over t > 0
    let regular = acc.value() / PI;
    if !regular.is_finite() {
        return Err(RatiosError::NonFinite("prediction integral"));
    }
    // |S(it)| at the cut times ∫_T^∞ |φ(tL/2π)| dt ≤ (2π/L)·φ-tail, for φ ≲ σ/(πσx)²
    let s_cut = singular_term(ctx, C64::new(0.0, t_max))?.norm();
    let tail_bound = s_cut * 2.0 / (l * PI * test.sigma * opts.x_max) / PI;
    let dual_cut_residual = if opts.include_dual {
        let r = C64::new(0.0, opts.dual_cut.min(t_max));
        (dual_factor(ctx, r)? * fam.mellin(r)).norm()
    } else {
        0.0
    };
    Ok(IntegralBreakdown {
        conductor,
        digamma_pair,
        regular,
        points,
        max_error,
        tail_bound,
        t_max,
        dual_cut_residual,
        pole_residue: branch.residue().norm(),
    })
}

/// The prime-sum side of the bridging identity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BridgingCheck {
    /// Re r of the integration line.
    pub contour: f64,
    /// (1/2πi)∫ (combined prime term)·φ(iLr/2π) dr.
    pub integral: f64,
    /// −(2/L)Σ log N/N^j (1+1/N)^{−1} φ̂(2j log N/L).
    pub even_prime_sum: f64,
    pub residual: f64,
}

/// Integrates −2Σ_ϖ N log N/((N+1)(N^{1+2r}−1)) against φ(iLr/2π) along
/// Re r = a' (default 1.5/L, capped at 0.2). Primes with 2 log N ≥ σL
/// integrate to zero exactly and are left out.
pub fn bridging_check(test: &TestFunction, l: f64, sieve: &PrimeSieve, contour: Option<f64>) -> Result<BridgingCheck> {
    let a = contour.unwrap_or((1.5 / l).min(0.2));
    let cut = test.sigma * l;
    let primes: Vec<(f64, f64)> = sieve
        .primes
        .iter()
        .map(|p| (p.norm as f64, (p.norm as f64).ln()))
        .take_while(|(_, ln)| 2.0 * ln < cut)
        .collect();
    let f = |t: f64| -> f64 {
        let r = C64::new(a, t);
        let s = 1.0 + 2.0 * r;
        let mut acc = KahanC::new();
        for &(n, ln) in &primes {
            acc.add(-2.0 * n * ln / ((n + 1.0) * ((s * ln).exp() - 1.0)));
        }
        let z = C64::new(0.0, l / (2.0 * PI)) * r;
        (acc.value() * test.phi_c(z)).re
    };
    let x_max = 2000.0;
    let t_max = x_max * 2.0 * PI / l;
    let gl = GaussLegendre::new(16);
    let panels = (t_max / 0.1).ceil() as usize;
    let chunks: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let lo = t_max * k as f64 / panels as f64;
            let hi = t_max * (k + 1) as f64 / panels as f64;
            gl.integrate(f, lo, hi)
        })
        .collect();
    let mut acc = Kahan::new();
    for c in chunks {
        acc.add(c);
    }
    let integral = acc.value() / PI;
    let even_prime_sum = s_even_main(test, l, sieve)?;
    Ok(BridgingCheck { contour: a, integral, even_prime_sum, residual: (integral - even_prime_sum).abs() })
}

/// Principal value on the real axis:
/// (1/2π)PV∫ S(it)φ(tL/2π) dt, which equals the even-prime sum plus φ(0)/2.
pub fn principal_value_prime_term(ctx: &ZetaKContext, test: &TestFunction, l: f64, x_max: f64) -> Result<f64> {
    let branch = LaurentBranch::new(|r| singular_term(ctx, r))?;
    let t_max = x_max * 2.0 * PI / l;
    let eval = |t: f64| -> f64 {
        let r = C64::new(0.0, t);
        let v = if t < LAURENT_RADIUS { Ok(branch.regular(r)) } else { singular_term(ctx, r) };
        v.map(|z| z.re * test.phi(t * l / (2.0 * PI))).unwrap_or(f64::NAN)
    };
    let mut edges = vec![0.0, LAURENT_RADIUS];
    let mut e = 1.0;
    while e < t_max {
        edges.push(e);
        e += 1.0;
    }
    edges.push(t_max);
    let parts: Vec<f64> =
        edges.par_windows(2).map(|w| adaptive(eval, w[0], w[1], 1e-10, 1e-12).value).collect();
    let v = parts.into_iter().sum::<f64>() / PI;
    if !v.is_finite() {
        return Err(RatiosError::NonFinite("principal value"));
    }
    Ok(v)
}

/// One row of the comparison table.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "D_emp")]
    pub d_emp: f64,
    #[serde(rename = "D_int")]
    pub d_int: f64,
    #[serde(rename = "D_fo")]
    pub d_fo: f64,
    #[serde(rename = "D_thm11")]
    pub d_thm11: f64,
    pub r_emp_int: f64,
    pub r_emp_fo: f64,
    #[serde(rename = "rL2_emp_fo")]
    pub rl2_emp_fo: f64,
}

pub const COMPARISON_HEADER: &str = "X,L,D_emp,D_int,D_fo,D_thm11,r_emp_int,r_emp_fo,rL2_emp_fo";

impl ComparisonRow {
    pub fn csv(&self) -> String {
        [self.x, self.l, self.d_emp, self.d_int, self.d_fo, self.d_thm11, self.r_emp_int, self.r_emp_fo, self.rl2_emp_fo]
            .iter()
            .map(|v| crate::cli::fmt_float(*v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Empirical, ratios-integral, first-order and Theorem 1.1 values over a grid
/// of X; `base` supplies the test function, weight and threading.
pub fn compare(
    grid: &[f64],
    base: &DensityConfig,
    ctx: &ZetaKContext,
    opts: &RatiosOptions,
    kernels: &Kernels,
    d_sieve: &PrimeSieve,
) -> Result<Vec<ComparisonRow>> {
    if base.test.sigma >= 2.0 {
        return Err(RatiosError::Support(base.test.sigma));
    }
    let coeffs = expansion_coefficients(DEFAULT_ORDER, &base.test, kernels, d_sieve)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        let mut cfg = base.clone();
        cfg.x = x;
        let emp = one_level_density(&cfg)?;
        let pred = ratios_density(&cfg, ctx, opts)?;
        let l = cfg.log_x();
        let d_int = pred.d_ratios_integral.unwrap_or(f64::NAN);
        let d_fo = pred.d_ratios_first_order;
        let r_fo = emp.d_total - d_fo;
        rows.push(ComparisonRow {
            x,
            l,
            d_emp: emp.d_total,
            d_int,
            d_fo,
            d_thm11: theorem11_prediction(x, &cfg.test, &coeffs, DEFAULT_ORDER),
            r_emp_int: emp.d_total - d_int,
            r_emp_fo: r_fo,
            rl2_emp_fo: r_fo * l * l,
        });
    }
    Ok(rows)
}
