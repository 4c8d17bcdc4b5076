//! Lower-order terms in descending powers of log X: the kernels h₁ and h₂, the
//! integral J(X), the coefficients d_m, c_{w,m}, R_{w,m}, and the assembled
//! expansion of the one-level density.
//!
//! Notation used throughout:
//! * `M(n)` is the sum of μ_[i](l) over primary l of norm n (multiplicative;
//!   M(p) = −2, M(p²) = 1 for p ≡ 1 mod 4, M(q²) = −1 for q ≡ 3 mod 4).
//! * `F(y) = ½g(y/2) − g(y)` and `Λ(a) = Σ_{m≥1} r₂(m)F(ma)`, so the lattice
//!   sum of h₂ is `C·Σ_n M(n)/n²·Λ(y/n)`.
//! * `Λ₁(b) = Σ_{m≥1} r₂(m)(g₁(2mb) − g₁(mb))`; Poisson summation gives
//!   `Λ(a) = −F(0) + Λ₁(1/a)/a`, and the lattice sum of h₁ is
//!   `C·Σ_n M(n)/n·Λ₁(ny)`.

use std::f64::consts::{E, LN_2, PI};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::empirical::{digamma_integral_term, PrimeSieve};
use crate::quad::GaussLegendre;
use crate::specfun::{digamma, zeta, zeta_k, zeta_k_log_deriv, Constants, SpecError, C64, EULER_GAMMA};
use crate::sum::{Kahan, KahanC};
use crate::transforms::{r2_table, TestFunction, WeightFunction};

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("{what}: tail estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    Tail { what: &'static str, estimate: f64, tol: f64 },
    #[error("expansion order {0} exceeds the maximum {MAX_ORDER}")]
    Order(usize),
    #[error("kernel tables cover norms up to {have}, need {need}")]
    TableRange { have: usize, need: usize },
    #[error("X = {0} must exceed e")]
    BadX(f64),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

pub type Result<T> = std::result::Result<T, ExpansionError>;

/// Largest supported expansion order.
pub const MAX_ORDER: usize = 3;
/// Default expansion order.
pub const DEFAULT_ORDER: usize = 2;
/// Default truncation N(l) ≤ L_max for single kernel evaluations.
pub const DEFAULT_L_MAX: usize = 10_000;

/// M(n) for n ≤ `nmax` via a smallest-prime-factor sieve.
pub fn norm_mobius(nmax: usize) -> Vec<i8> {
    let mut spf = vec![0u32; nmax + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=nmax {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let q = i * p as usize;
            if p > spf[i] || q > nmax {
                break;
            }
            spf[q] = p;
        }
    }
    let mut m = vec![0i8; nmax + 1];
    if nmax >= 1 {
        m[1] = 1;
    }
    for n in 2..=nmax {
        let p = spf[n] as usize;
        let (mut k, mut e) = (n / p, 1);
        while k % p == 0 {
            k /= p;
            e += 1;
        }
        let local = match (p % 4, e) {
            (1, 1) => -2,
            (1, 2) => 1,
            (3, 2) => -1,
            _ => 0,
        };
        m[n] = local * m[k];
    }
    m
}

/// A truncated kernel value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelValue {
    pub value: f64,
    /// Bound on the neglected terms N(l) > L_max.
    pub tail: f64,
}

impl KernelValue {
    pub fn checked(self, what: &'static str, tol: f64) -> Result<f64> {
        if self.tail > tol {
            return Err(ExpansionError::Tail { what, estimate: self.tail, tol });
        }
        Ok(self.value)
    }
}

/// Tables shared by h₁, h₂ and everything built on them.
pub struct Kernels {
    weight: Arc<WeightFunction>,
    prefactor: f64,
    mobius: Vec<i8>,
    phi_prefix: Vec<f64>,
    phi_limit: f64,
    r2: Vec<u32>,
    f0: f64,
    f_slope: f64,
}

impl Kernels {
    /// Tables for norms up to `nmax`; the h₂ lattice sum at y needs
    /// `nmax ≥ g₁-support·y`.
    pub fn new(weight: Arc<WeightFunction>, nmax: usize) -> Result<Self> {
        let zk2 = zeta_k(C64::new(2.0, 0.0))?.re;
        let nmax = nmax.max(weight.g1_support() as usize + 1);
        let mobius = norm_mobius(nmax);
        let mut phi_prefix = Vec::with_capacity(nmax + 1);
        let mut acc = Kahan::new();
        phi_prefix.push(0.0);
        for (n, &m) in mobius.iter().enumerate().skip(1) {
            acc.add(m as f64 / (n as f64 * n as f64));
            phi_prefix.push(acc.value());
        }
        let rmax = (4.0 * weight.g_support()).max(weight.g1_support()) as usize + 2;
        let f = |y: f64| 0.5 * weight.g(y / 2.0) - weight.g(y);
        let h = 1.0 / 64.0;
        let top = 2.0 * weight.g_support();
        let f_slope = (0..(top / h) as usize)
            .map(|k| ((f((k + 1) as f64 * h) - f(k as f64 * h)) / h).abs())
            .fold(0.0, f64::max);
        Ok(Kernels {
            prefactor: 3.0 * zk2 / (PI * weight.w_hat0()),
            f0: -weight.g(0.0) / 2.0,
            weight,
            mobius,
            phi_prefix,
            phi_limit: 4.0 / (3.0 * zk2),
            r2: r2_table(rmax),
            f_slope,
        })
    }

    /// Tables sized for J(X) with the h₂ branch integrated up to `tau_max`.
    pub fn for_tau(weight: Arc<WeightFunction>, tau_max: f64) -> Result<Self> {
        let need = (weight.g1_support() * (tau_max / 2.0).exp()).ceil() as usize + 1;
        Self::new(weight, need)
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn nmax(&self) -> usize {
        self.mobius.len() - 1
    }

    /// 3ζ_K(2)/(πŵ(0)).
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn big_m(&self, n: usize) -> i8 {
        self.mobius[n]
    }

    /// Φ(B) = Σ_{N(l) ≤ B} μ_[i](l)/N(l)².
    pub fn phi_partial(&self, b: usize) -> f64 {
        self.phi_prefix[b.min(self.nmax())]
    }

    /// 4/(3ζ_K(2)).
    pub fn phi_limit(&self) -> f64 {
        self.phi_limit
    }

    /// F(0) = −g(0)/2.
    pub fn f_zero(&self) -> f64 {
        self.f0
    }

    fn f(&self, y: f64) -> f64 {
        0.5 * self.weight.g(y / 2.0) - self.weight.g(y)
    }

    fn g1_diff(&self, y: f64) -> f64 {
        self.weight.g1(2.0 * y) - self.weight.g1(y)
    }

    /// Λ₁(b) = Σ r₂(m)(g₁(2mb) − g₁(mb)); exactly 0 for b beyond the g₁ support.
    pub fn lambda1(&self, b: f64) -> f64 {
        let top = self.weight.g1_support();
        let mut s = 0.0;
        let mut m = 1;
        while (m as f64) * b < top {
            let r = self.r2[m];
            if r != 0 {
                s += r as f64 * self.g1_diff(m as f64 * b);
            }
            m += 1;
        }
        s
    }

    /// Λ(a) = Σ r₂(m)F(ma), directly for a ≥ ½ and via Poisson below.
    pub fn lambda(&self, a: f64) -> f64 {
        if a >= 0.5 {
            self.lambda_direct(a)
        } else {
            let b = 1.0 / a;
            -self.f0 + b * self.lambda1(b)
        }
    }

    /// Λ(a) by the defining sum (a > 0).
    pub fn lambda_direct(&self, a: f64) -> f64 {
        let top = 2.0 * self.weight.g_support();
        let mut s = 0.0;
        let mut m = 1;
        while (m as f64) * a < top {
            let r = self.r2[m];
            if r != 0 {
                s += r as f64 * self.f(m as f64 * a);
            }
            m += 1;
        }
        s
    }

    pub fn h1(&self, x: f64) -> KernelValue {
        self.h1_with(x, DEFAULT_L_MAX)
    }

    /// h₁(x) = C·Σ_l μ(l)/N(l)·(g₁(2N(l)x) − g₁(N(l)x)), N(l) ≤ L_max.
    pub fn h1_with(&self, x: f64, l_max: usize) -> KernelValue {
        let top = self.weight.g1_support();
        let reach = (top / x).floor() as usize;
        let last = reach.min(l_max).min(self.nmax());
        let mut acc = Kahan::new();
        for n in 1..=last {
            let m = self.mobius[n];
            if m != 0 {
                acc.add(m as f64 / n as f64 * self.g1_diff(n as f64 * x));
            }
        }
        let mut tail = 0.0;
        if reach > last {
            // sup |g₁| beyond x·L_max times Σ|M(n)|/n over the neglected range
            let lo = (last + 1) as f64 * x;
            let steps = ((top - lo) * 16.0).ceil().max(1.0) as usize;
            let sup = (0..=steps)
                .map(|k| self.weight.g1(lo + k as f64 / 16.0).abs())
                .fold(0.0, f64::max);
            let covered = reach.min(self.nmax());
            let mut weight: f64 = (last + 1..=covered).map(|n| self.mobius[n].unsigned_abs() as f64 / n as f64).sum();
            if reach > covered {
                weight += 2.0 * (reach as f64 / covered as f64).ln();
            }
            tail = self.prefactor * 2.0 * sup * weight;
        }
        KernelValue { value: self.prefactor * acc.value(), tail }
    }

    pub fn h2(&self, x: f64) -> KernelValue {
        self.h2_with(x, DEFAULT_L_MAX)
    }

    /// h₂(x) = C·Σ_l μ(l)/N(l)²·F(x/N(l)), N(l) ≤ L_max, with the remaining
    /// l replaced by F(0)·(Φ(∞) − Φ(L_max)).
    pub fn h2_with(&self, x: f64, l_max: usize) -> KernelValue {
        let last = l_max.min(self.nmax());
        let mut acc = Kahan::new();
        for n in 1..=last {
            let m = self.mobius[n];
            if m != 0 {
                acc.add(m as f64 / (n as f64 * n as f64) * self.f(x / n as f64));
            }
        }
        acc.add(self.f0 * (self.phi_limit - self.phi_prefix[last]));
        // |F(x/n) − F(0)| ≤ sup|F'|·x/n and Σ_{n>L}|M(n)|/n³ ≤ (1 + log L)/L²
        let lf = last as f64;
        let tail = self.prefactor * self.f_slope * x * (1.0 + lf.ln()) / (lf * lf);
        KernelValue { value: self.prefactor * acc.value(), tail }
    }

    /// Σ_{j ≠ 0} h₁(N(j)y).
    pub fn h1_lattice(&self, y: f64) -> Result<f64> {
        let reach = (self.weight.g1_support() / y).floor() as usize;
        if reach > self.nmax() {
            return Err(ExpansionError::TableRange { have: self.nmax(), need: reach });
        }
        let mut acc = Kahan::new();
        for n in 1..=reach {
            let m = self.mobius[n];
            if m != 0 {
                acc.add(m as f64 / n as f64 * self.lambda1(n as f64 * y));
            }
        }
        Ok(self.prefactor * acc.value())
    }

    /// Σ_{k ≠ 0} h₂(N(k)y). Terms with N(l) > g₁-support·y have Λ = −F(0)
    /// exactly and are summed through Φ.
    pub fn h2_lattice(&self, y: f64) -> Result<f64> {
        let n1 = (self.weight.g1_support() * y).floor() as usize;
        if n1 > self.nmax() {
            return Err(ExpansionError::TableRange { have: self.nmax(), need: n1 });
        }
        let mut acc = Kahan::new();
        for n in 1..=n1 {
            let m = self.mobius[n];
            if m != 0 {
                acc.add(m as f64 / (n as f64 * n as f64) * self.lambda(y / n as f64));
            }
        }
        acc.add(-self.f0 * (self.phi_limit - self.phi_prefix[n1]));
        Ok(self.prefactor * acc.value())
    }
}

/// Composite Gauss–Legendre nodes on consecutive segments, each split into
/// panels no wider than `width`.
fn panel_nodes(edges: &[f64], width: f64, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for seg in edges.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        for p in 0..panels {
            let lo = a + (b - a) * p as f64 / panels as f64;
            let hi = a + (b - a) * (p + 1) as f64 / panels as f64;
            out.extend(gl.mapped(lo, hi));
        }
    }
    out
}

fn integrate_nodes<F>(nodes: &[(f64, f64)], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = nodes.par_iter().map(|&(t, w)| f(t).map(|v| w * v)).collect::<Result<_>>()?;
    let mut acc = Kahan::new();
    for v in vals {
        acc.add(v);
    }
    Ok(acc.value())
}

/// Quadrature settings for J(X).
#[derive(Clone, Copy, Debug)]
pub struct JOptions {
    /// Upper limit of the h₂ branch; the rest is bounded by a fitted
    /// A·y^{−3/2} envelope.
    pub tau_max: f64,
    /// Maximum panel width in τ.
    pub panel: f64,
}

impl Default for JOptions {
    fn default() -> Self {
        JOptions { tau_max: 16.0, panel: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct JValue {
    pub value: f64,
    pub h1_part: f64,
    pub h2_part: f64,
    /// |GL16 − GL8| on the same panels.
    pub quad_error: f64,
    /// Envelope bound for τ > tau_max.
    pub tail: f64,
}

/// J(X) = (1/L)∫₀^∞ [φ̂(1+τ/L)e^{τ/2}Σh₁(N(j)e^{τ/2}) + φ̂(1−τ/L)Σh₂(N(k)e^{τ/2})] dτ.
pub fn j_x(x: f64, test: &TestFunction, kernels: &Kernels, opts: &JOptions) -> Result<JValue> {
    if !(x > E) {
        return Err(ExpansionError::BadX(x));
    }
    let l = x.ln();
    let s = test.sigma;
    let hi = GaussLegendre::new(16);
    let lo = GaussLegendre::new(8);

    let t1 = ((s - 1.0) * l).min(2.0 * kernels.weight.g1_support().ln()).max(0.0);
    let f1 = |t: f64| -> Result<f64> {
        let y = (t / 2.0).exp();
        Ok(test.phi_hat(1.0 + t / l) * y * kernels.h1_lattice(y)?)
    };
    let (a1, b1) = if t1 > 0.0 {
        (integrate_nodes(&panel_nodes(&[0.0, t1], opts.panel, &hi), f1)?, integrate_nodes(&panel_nodes(&[0.0, t1], opts.panel, &lo), f1)?)
    } else {
        (0.0, 0.0)
    };

    let support = (1.0 + s) * l;
    let t2 = support.min(opts.tau_max);
    let edges: Vec<f64> = if l < t2 { vec![0.0, l, t2] } else { vec![0.0, t2] };
    let f2 = |t: f64| -> Result<f64> { Ok(test.phi_hat(1.0 - t / l) * kernels.h2_lattice((t / 2.0).exp())?) };
    let nodes2 = panel_nodes(&edges, opts.panel, &hi);
    let a2 = integrate_nodes(&nodes2, f2)?;
    let b2 = integrate_nodes(&panel_nodes(&edges, opts.panel, &lo), f2)?;

    let mut tail = 0.0;
    if support > t2 {
        let amp = nodes2
            .iter()
            .filter(|(t, _)| *t > t2 - 2.0)
            .map(|&(t, _)| kernels.h2_lattice((t / 2.0).exp()).map(|h| h.abs() * (0.75 * t).exp()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        tail = amp * 4.0 / 3.0 * (-0.75 * t2).exp() * test.phi_hat(0.0) / l;
    }
    Ok(JValue {
        value: (a1 + a2) / l,
        h1_part: a1 / l,
        h2_part: a2 / l,
        quad_error: ((a1 - b1).abs() + (a2 - b2).abs()) / l,
        tail,
    })
}

/// 2γ + 2log4 + log(π²/32) + 2ζ'_K/ζ_K(2) − (4/3)log2 − (8/π)γ_K − Mw'(1)/Mw(1).
pub fn j_constant(consts: &Constants, weight: &WeightFunction) -> f64 {
    2.0 * consts.gamma + 2.0 * 4f64.ln() + (PI * PI / 32.0).ln() + 2.0 * consts.zeta_k_logderiv_2
        - 4.0 / 3.0 * LN_2
        - 8.0 / PI * consts.gamma_k
        - weight.mellin_log_deriv_1()
}

/// The same constant written as 2γ + log(π²/2^{7/3}) + 2ζ'_K/ζ_K(2) − (8/π)γ_K − Mw'(1)/Mw(1).
pub fn j_constant_closed(consts: &Constants, weight: &WeightFunction) -> f64 {
    2.0 * consts.gamma + (PI * PI / 2f64.powf(7.0 / 3.0)).ln() + 2.0 * consts.zeta_k_logderiv_2
        - 8.0 / PI * consts.gamma_k
        - weight.mellin_log_deriv_1()
}

/// First-order form of J(X): (φ̂(1)/L)·[`j_constant`].
pub fn j_first_order(x: f64, test: &TestFunction, consts: &Constants, weight: &WeightFunction) -> f64 {
    test.phi_hat(1.0) / x.ln() * j_constant(consts, weight)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// D^{(j)}(2), j < n, for D(s) = Σ M(n)n^{−s} = 1/((1−2^{−s})ζ_K(s)), by a
/// Cauchy integral on |s − 2| = ½.
fn mobius_series_derivatives(n: usize) -> Result<Vec<f64>> {
    const POINTS: usize = 64;
    const RADIUS: f64 = 0.5;
    let mut vals = Vec::with_capacity(POINTS);
    for k in 0..POINTS {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / POINTS as f64);
        let s = C64::new(2.0, 0.0) + RADIUS * e;
        let d = 1.0 / ((1.0 - (-s * LN_2).exp()) * zeta_k(s)?);
        vals.push((d, e));
    }
    Ok((0..n)
        .map(|j| {
            let mut acc = KahanC::new();
            for &(d, e) in &vals {
                acc.add(d / e.powu(j as u32));
            }
            factorial(j) * acc.value().re / (POINTS as f64 * RADIUS.powi(j as i32))
        })
        .collect())
}

/// c_{w,m}, m = 1..order, with its h₁ and h₂ parts.
#[derive(Clone, Debug, Serialize)]
pub struct CwCoefficients {
    pub value: Vec<f64>,
    pub h1_part: Vec<f64>,
    pub h2_part: Vec<f64>,
    /// Difference between quadratures with panel widths ¼ and ½.
    pub error: Vec<f64>,
}

/// c_{w,m} = (1/(m−1)!)∫₀^∞ [τ^{m−1}e^{τ/2}Σh₁ + (−τ)^{m−1}Σh₂] dτ.
///
/// The h₂ part is summed over l outside the integral: for N(l) = n beyond the
/// g₁ support n₀ the τ-integral is an explicit polynomial in log n, so the
/// sum over all n reduces to derivatives of Σ M(n)n^{−s} at s = 2 plus a
/// finite correction over n ≤ n₀.
pub fn c_w_coefficients(kernels: &Kernels, order: usize) -> Result<CwCoefficients> {
    if order > MAX_ORDER {
        return Err(ExpansionError::Order(order));
    }
    let fine = c_w_raw(kernels, order, 0.25)?;
    let coarse = c_w_raw(kernels, order, 0.5)?;
    let value: Vec<f64> = fine.0.iter().zip(&fine.1).map(|(a, b)| a + b).collect();
    let error = (0..order)
        .map(|m| ((fine.0[m] + fine.1[m]) - (coarse.0[m] + coarse.1[m])).abs().max(1e-12 * value[m].abs()))
        .collect();
    Ok(CwCoefficients { value, h1_part: fine.0, h2_part: fine.1, error })
}

fn c_w_raw(k: &Kernels, order: usize, panel: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let gl = GaussLegendre::new(16);
    let n0 = k.weight.g1_support() as usize;
    let lam_top = 2.0 * k.weight.g_support();

    let nodes = panel_nodes(&[0.0, 2.0 * (n0 as f64).ln()], panel, &gl);
    let mut h1 = Vec::with_capacity(order);
    let h1_vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, _)| {
            let y = (t / 2.0).exp();
            k.h1_lattice(y).map(|h| y * h)
        })
        .collect::<Result<_>>()?;
    for m in 1..=order {
        let mut acc = Kahan::new();
        for (&(t, w), v) in nodes.iter().zip(&h1_vals) {
            acc.add(w * t.powi(m as i32 - 1) * v);
        }
        h1.push(acc.value() / factorial(m - 1));
    }

    // μ_j(n) = ∫₀^∞ τ^j Λ(e^{τ/2}/n) dτ; Λ vanishes beyond a = 2·g-support.
    let moments = |n: usize| -> Vec<f64> {
        let end = 2.0 * (lam_top * n as f64).ln();
        let nodes = panel_nodes(&[0.0, end], panel, &gl);
        let vals: Vec<f64> = nodes.iter().map(|&(t, _)| k.lambda((t / 2.0).exp() / n as f64)).collect();
        (0..order)
            .map(|j| {
                let mut acc = Kahan::new();
                for (&(t, w), v) in nodes.iter().zip(&vals) {
                    acc.add(w * t.powi(j as i32) * v);
                }
                acc.value()
            })
            .collect()
    };
    let small: Vec<(usize, Vec<f64>)> =
        (1..=n0).into_par_iter().filter(|&n| k.mobius[n] != 0).map(|n| (n, moments(n))).collect();
    let mu0 = moments(n0);
    let nu: Vec<f64> = (0..order).map(|j| if j % 2 == 0 { mu0[j] } else { -mu0[j] }).collect();
    let dser = mobius_series_derivatives(order + 1)?;
    let lambda0 = (n0 as f64).ln();

    let mut h2 = Vec::with_capacity(order);
    for m in 1..=order {
        let sign = if (m - 1) % 2 == 0 { 1.0 } else { -1.0 };
        // asymptotic K_m as a polynomial in τ₁ = 2 log(n/n₀)
        let mut q = vec![0.0; m + 1];
        q[m] += -k.f0 * sign / m as f64;
        for kk in 0..m {
            let s = if (m - 1 - kk) % 2 == 0 { 1.0 } else { -1.0 };
            q[m - 1 - kk] += binom(m - 1, kk) * s * nu[kk];
        }
        let asym = |n: usize| -> f64 {
            let t = 2.0 * (n as f64 / n0 as f64).ln();
            q.iter().rev().fold(0.0, |acc, c| acc * t + c)
        };
        // same polynomial in log n
        let p: Vec<f64> = (0..=m)
            .map(|j| (j..=m).map(|i| q[i] * 2f64.powi(i as i32) * binom(i, j) * (-lambda0).powi((i - j) as i32)).sum())
            .collect();
        let mut acc = Kahan::new();
        for (n, mu) in &small {
            let kn = sign * mu[m - 1];
            acc.add(k.mobius[*n] as f64 / (*n as f64 * *n as f64) * (kn - asym(*n)));
        }
        for (j, pj) in p.iter().enumerate() {
            let sj = if j % 2 == 0 { dser[j] } else { -dser[j] };
            acc.add(pj * sj);
        }
        h2.push(k.prefactor * acc.value() / factorial(m - 1));
    }
    Ok((h1, h2))
}

/// ∫_B^∞ (log t)^n t^{−a} dt for a > 1.
fn log_power_tail(n: usize, a: f64, b: f64) -> f64 {
    let lb = b.ln();
    let mut s = 0.0;
    let mut ff = 1.0;
    for j in 0..=n {
        s += ff * lb.powi((n - j) as i32) / (a - 1.0).powi(j as i32 + 1);
        ff *= (n - j) as f64;
    }
    b.powf(1.0 - a) * s
}

/// Antiderivative of (log t)^k t^{−2}.
fn anti_inv_sq(k: usize, t: f64) -> f64 {
    let lt = t.ln();
    let mut s = 0.0;
    let mut ff = 1.0;
    for j in 0..=k {
        s += ff * lt.powi((k - j) as i32);
        ff *= (k - j) as f64;
    }
    -s / t
}

/// d_m with the pieces they are built from.
#[derive(Clone, Debug, Serialize)]
pub struct DCoefficients {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    /// d_m with the E(t) integrals taken from the Laurent expansion of ζ'_K/ζ_K at 1.
    pub laurent: Vec<f64>,
    pub cutoff: u64,
    /// Σ_{ϖ, j≥2} log N (2j log N)^k N^{−j}(1+1/N)^{−1}.
    pub even_sums: Vec<f64>,
    /// C₁(k) = −Σ_ϖ (2 log N)^{k+1}/(N(N+1)).
    pub c1: Vec<f64>,
    /// ∫₁^∞ E(t)(log t)^k t^{−2} dt from sieve data.
    pub e_integrals: Vec<f64>,
    pub e_integrals_error: Vec<f64>,
    pub e_integrals_laurent: Vec<f64>,
}

/// d_1..d_order such that S_even = −φ(0)/2 + Σ d_m φ̂^{(m−1)}(0)/L^m + ….
///
/// With E(t) = Σ_{N(ϖ)≤t} log N(ϖ) − t and I_k = ∫₁^∞ E(t)(log t)^k t^{−2} dt,
/// d_{k+1} = −(2E_k + C₁(k))/k! − 2δ_{k0} − 2^{k+1}(I_k/k! − I_{k−1}/(k−1)!).
/// The −2δ_{k0} is the partial-summation boundary term at t = 1 (E(1) = −1).
/// I_k uses exact sieve data up to the cutoff; beyond it E is modelled with
/// zero mean and its contribution bounded by a fitted c·√t·log²t envelope.
pub fn d_coefficients(order: usize, sieve: &PrimeSieve) -> Result<DCoefficients> {
    if order > MAX_ORDER {
        return Err(ExpansionError::Order(order));
    }
    let bound = sieve.bound;
    let b = bound as f64;
    let ps: Vec<u64> = sieve.primes.iter().map(|p| p.norm).take_while(|&n| n <= bound).collect();

    // prime-power sums
    let mut even = vec![Kahan::new(); order];
    let mut c1 = vec![Kahan::new(); order];
    for &nrm in &ps {
        let n = nrm as f64;
        let ln = n.ln();
        let damp = 1.0 / (1.0 + 1.0 / n);
        for k in 0..order {
            let mut j = 2;
            loop {
                let t = ln * (2.0 * j as f64 * ln).powi(k as i32) * (-(j as f64) * ln).exp() * damp;
                even[k].add(t);
                if t < 1e-20 {
                    break;
                }
                j += 1;
            }
            c1[k].add(-(2.0 * ln).powi(k as i32 + 1) / (n * (n + 1.0)));
        }
    }
    // Σ_{N>B} log N·f(N) ≈ ∫_B^∞ f(t) dt, relative error ~ B^{−1/2}log²B
    let pnt_rel = b.sqrt().recip() * b.ln().powi(2);
    let even_tail: Vec<f64> = (0..order).map(|k| 4f64.powi(k as i32) * log_power_tail(k, 2.0, b)).collect();
    let c1_tail: Vec<f64> = (0..order).map(|k| -(2f64.powi(k as i32 + 1)) * log_power_tail(k, 2.0, b)).collect();
    let even_sums: Vec<f64> = (0..order).map(|k| even[k].value() + even_tail[k]).collect();
    let c1v: Vec<f64> = (0..order).map(|k| c1[k].value() + c1_tail[k]).collect();

    // E(t) integrals, exact between consecutive prime norms
    let mut acc = vec![Kahan::new(); order];
    let mut theta = 0.0;
    let mut prev = 1.0;
    let mut envelope: f64 = 0.0;
    let mut i = 0;
    let piece = |acc: &mut Vec<Kahan>, theta: f64, a: f64, t: f64| {
        for (k, s) in acc.iter_mut().enumerate() {
            let da = anti_inv_sq(k, t) - anti_inv_sq(k, a);
            let db = (t.ln().powi(k as i32 + 1) - a.ln().powi(k as i32 + 1)) / (k as f64 + 1.0);
            s.add(theta * da - db);
        }
    };
    while i < ps.len() {
        let nrm = ps[i];
        let t = nrm as f64;
        piece(&mut acc, theta, prev, t);
        let before = theta;
        while i < ps.len() && ps[i] == nrm {
            theta += t.ln();
            i += 1;
        }
        if t >= 100.0 {
            let scale = t.sqrt() * t.ln().powi(2);
            envelope = envelope.max((before - t).abs() / scale).max((theta - t).abs() / scale);
        }
        prev = t;
    }
    piece(&mut acc, theta, prev, b);
    let e_integrals: Vec<f64> = acc.iter().map(|s| s.value()).collect();
    let e_integrals_error: Vec<f64> = (0..order).map(|k| envelope * log_power_tail(k + 2, 1.5, b)).collect();
    let e_integrals_laurent = e_integrals_by_laurent(order, &ps, b)?;

    let assemble = |ik: &[f64]| -> Vec<f64> {
        (0..order)
            .map(|k| {
                let fk = factorial(k);
                let mut d = -(2.0 * even_sums[k] + c1v[k]) / fk - 2f64.powi(k as i32 + 1) * ik[k] / fk;
                if k == 0 {
                    d -= 2.0;
                } else {
                    d += 2f64.powi(k as i32 + 1) * ik[k - 1] / factorial(k - 1);
                }
                d
            })
            .collect()
    };
    let value = assemble(&e_integrals);
    let laurent = assemble(&e_integrals_laurent);
    let error = (0..order)
        .map(|k| {
            let fk = factorial(k);
            let mut e = (2.0 * even_tail[k].abs() + c1_tail[k].abs()) * pnt_rel / fk
                + 2f64.powi(k as i32 + 1) * e_integrals_error[k] / fk;
            if k > 0 {
                e += 2f64.powi(k as i32 + 1) * e_integrals_error[k - 1] / factorial(k - 1);
            }
            e
        })
        .collect();
    Ok(DCoefficients {
        value,
        error,
        laurent,
        cutoff: bound,
        even_sums,
        c1: c1v,
        e_integrals,
        e_integrals_error,
        e_integrals_laurent,
    })
}

/// I_k = (−1)^k G^{(k)}(0) with G(δ) = P(1+δ)/(1+δ) − 1/δ and
/// P(s) = Σ_ϖ log N·N^{−s} = −ζ'_K/ζ_K(s) − log2/(2^s−1) − Σ_{ϖ,j≥2} log N·N^{−js}.
fn e_integrals_by_laurent(order: usize, norms: &[u64], b: f64) -> Result<Vec<f64>> {
    const POINTS: usize = 32;
    const RADIUS: f64 = 0.25;
    let logs: Vec<(f64, f64)> = norms.iter().map(|&n| (n as f64, (n as f64).ln())).collect();
    let mut vals = Vec::with_capacity(POINTS);
    for k in 0..POINTS {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / POINTS as f64);
        let delta = RADIUS * e;
        let s = 1.0 + delta;
        let mut q = KahanC::new();
        for &(_, ln) in &logs {
            let x = (-s * ln).exp();
            q.add(ln * x * x / (1.0 - x));
        }
        // Σ_{N>B} log N·N^{−2s} ≈ ∫_B^∞ t^{−2s} dt
        q.add((b.ln() * (1.0 - 2.0 * s)).exp() / (2.0 * s - 1.0));
        let p = -zeta_k_log_deriv(s)? - LN_2 / ((s * LN_2).exp() - 1.0) - q.value();
        vals.push((p / s - 1.0 / delta, e));
    }
    Ok((0..order)
        .map(|j| {
            let mut acc = KahanC::new();
            for &(g, e) in &vals {
                acc.add(g / e.powu(j as u32));
            }
            let gj = factorial(j) * acc.value().re / (POINTS as f64 * RADIUS.powi(j as i32));
            if j % 2 == 0 {
                gj
            } else {
                -gj
            }
        })
        .collect())
}

/// ∫₀^∞ e^{−x/2}x^{m−1}/(1−e^{−x}) dx = (m−1)!(2^m−1)ζ(m) for m ≥ 2. The
/// integral diverges at m = 1, where the digamma term contributes nothing
/// at order 1/L; 0 is returned.
pub fn digamma_moment(m: usize) -> Result<f64> {
    if m < 2 {
        return Ok(0.0);
    }
    let z = zeta(C64::new(m as f64, 0.0))?.0.re;
    Ok(factorial(m - 1) * (2f64.powi(m as i32) - 1.0) * z)
}

/// log(32/π²) + 2ψ(½) + (2/ŵ(0))∫₀^∞ w(x) log x dx.
pub fn conductor_constant(weight: &WeightFunction) -> f64 {
    let psi = digamma(C64::new(0.5, 0.0)).map(|z| z.re).unwrap_or(-EULER_GAMMA - 2.0 * LN_2);
    (32.0 / (PI * PI)).ln() + 2.0 * psi + 2.0 / weight.w_hat0() * weight.log_moment()
}

/// Everything needed for the expansion of D(φ; w, X) to a given order.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionCoefficients {
    #[serde(rename = "M")]
    pub order: usize,
    pub phi: String,
    pub weight: String,
    pub d: Vec<f64>,
    pub d_error: Vec<f64>,
    pub d_laurent: Vec<f64>,
    pub c_w: Vec<f64>,
    pub c_w_error: Vec<f64>,
    pub digamma_moment: Vec<f64>,
    pub conductor_constant: f64,
    #[serde(rename = "R_w")]
    pub r_w: Vec<f64>,
    #[serde(rename = "R_w_error")]
    pub r_w_error: Vec<f64>,
    pub prime_cutoff: u64,
}

/// R_{w,1} = c_{w,1}φ̂(1) + (d₁ + κ)φ̂(0) with κ the conductor constant, and for
/// m ≥ 2, R_{w,m} = c_{w,m}φ̂^{(m−1)}(1) + d_mφ̂^{(m−1)}(0) − 2φ̂^{(m−1)}(0)/(m−1)!·I_m.
pub fn r_w_m(test: &TestFunction, d: &DCoefficients, c: &CwCoefficients, kappa: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let order = d.value.len().min(c.value.len());
    let mut r = Vec::with_capacity(order);
    let mut err = Vec::with_capacity(order);
    for m in 1..=order {
        let at1 = test.phi_hat_deriv(1.0, m - 1);
        let at0 = test.phi_hat_deriv(0.0, m - 1);
        let mut v = c.value[m - 1] * at1 + d.value[m - 1] * at0;
        if m == 1 {
            v += kappa * at0;
        } else {
            v -= 2.0 * at0 / factorial(m - 1) * digamma_moment(m)?;
        }
        r.push(v);
        err.push(c.error[m - 1] * at1.abs() + d.error[m - 1] * at0.abs());
    }
    Ok((r, err))
}

pub fn expansion_coefficients(
    order: usize,
    test: &TestFunction,
    kernels: &Kernels,
    sieve: &PrimeSieve,
) -> Result<ExpansionCoefficients> {
    let d = d_coefficients(order, sieve)?;
    let c = c_w_coefficients(kernels, order)?;
    let kappa = conductor_constant(kernels.weight());
    let (r_w, r_w_error) = r_w_m(test, &d, &c, kappa)?;
    Ok(ExpansionCoefficients {
        order,
        phi: test.spec(),
        weight: kernels.weight().spec().to_string(),
        digamma_moment: (1..=order).map(digamma_moment).collect::<Result<_>>()?,
        d: d.value,
        d_error: d.error,
        d_laurent: d.laurent,
        c_w: c.value,
        c_w_error: c.error,
        conductor_constant: kappa,
        r_w,
        r_w_error,
        prime_cutoff: d.cutoff,
    })
}

/// φ̂(0) − ½∫_{−1}^{1}φ̂ + Σ_{m ≤ upto} R_{w,m}/L^m.
pub fn theorem11_prediction(x: f64, test: &TestFunction, coeffs: &ExpansionCoefficients, upto: usize) -> f64 {
    let l = x.ln();
    let mut v = test.phi_hat(0.0) - 0.5 * test.central_integral();
    for (m, r) in coeffs.r_w.iter().enumerate().take(upto) {
        v += r / l.powi(m as i32 + 1);
    }
    v
}

/// The intermediate five-term form: leading terms, conductor constant, J(X),
/// the digamma integral, and Σ d_m φ̂^{(m−1)}(0)/L^m.
pub fn precise_assembly(x: f64, test: &TestFunction, weight: &WeightFunction, j: f64, d: &[f64]) -> f64 {
    let l = x.ln();
    let mut v = test.phi_hat(0.0) - 0.5 * test.central_integral()
        + test.phi_hat(0.0) / l * conductor_constant(weight)
        + j
        + digamma_integral_term(test, l);
    for (m, dm) in d.iter().enumerate() {
        v += dm * test.phi_hat_deriv(0.0, m) / l.powi(m as i32 + 1);
    }
    v
}

/// −φ(0)/2 + Σ_{m ≤ order} d_m φ̂^{(m−1)}(0)/L^m, the expansion of S_even.
pub fn s_even_expansion(test: &TestFunction, l: f64, d: &[f64]) -> f64 {
    let mut v = -test.phi(0.0) / 2.0;
    for (m, dm) in d.iter().enumerate() {
        v += dm * test.phi_hat_deriv(0.0, m) / l.powi(m as i32 + 1);
    }
    v
}
