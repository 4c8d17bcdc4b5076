//! The test-function pair (φ, w) and the transforms applied to it: Fourier
//! φ̂, the 2-D radial transform w̃, the kernels g and g₁, and Mellin
//! transforms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::quad::{adaptive, adaptive_c, GaussLegendre};
use crate::specfun::{digamma, ln_gamma, zeta_k, EULER_GAMMA};

type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("support radius {0} outside (0, 2)")]
    Sigma(f64),
    #[error("unrecognised test-function spec `{0}` (expected fejer:<σ> or bump:<σ>)")]
    TestSpec(String),
    #[error("unrecognised weight spec `{0}` (expected gaussian)")]
    WeightSpec(String),
    #[error("argument {arg} beyond table range {max}")]
    TableRange { arg: f64, max: f64 },
    #[error("quadrature did not converge (error estimate {0:.3e})")]
    NoConvergence(f64),
}

pub type Result<T> = std::result::Result<T, TransformError>;

/// J₀ by its power series below 12 and the Hankel asymptotic expansion above.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 12.0 {
        let q = -0.25 * x * x;
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        let mut k = 1.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) || k < 4.0 {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
            if k > 80.0 {
                break;
            }
        }
        sum
    } else {
        // a_k = ∏_{j≤k} (−(2j−1)²) / (k! 8^k)
        let mut p = 0.0;
        let mut q = 0.0;
        let mut a: f64 = 1.0;
        let mut xp: f64 = 1.0;
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let t = a / xp;
            if t.abs() > prev {
                break;
            }
            prev = t.abs();
            match k % 4 {
                0 => p += t,
                1 => q += t,
                2 => p -= t,
                _ => q -= t,
            }
            if t.abs() < 1e-17 {
                break;
            }
            let j = (2 * k + 1) as f64;
            a *= -(j * j) / ((k + 1) as f64 * 8.0);
            xp *= x;
        }
        // With a_k signed, P = Σ(−1)^k a_{2k}x^{−2k}, Q = Σ(−1)^k a_{2k+1}x^{−2k−1}.
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestKind {
    Fejer,
    Bump,
}

/// An even test function with φ̂ supported in [−σ, σ].
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub kind: TestKind,
    pub sigma: f64,
    /// Quadrature nodes on [0, σ] with weights pre-multiplied by 2φ̂(u).
    nodes: Vec<(f64, f64)>,
}

pub fn make_fejer(sigma: f64) -> Result<TestFunction> {
    check_sigma(sigma)?;
    Ok(TestFunction { kind: TestKind::Fejer, sigma, nodes: Vec::new() })
}

pub fn make_bump(sigma: f64) -> Result<TestFunction> {
    check_sigma(sigma)?;
    let gl = GaussLegendre::new(16);
    let panels = 256;
    let mut nodes = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let a = sigma * p as f64 / panels as f64;
        let b = sigma * (p + 1) as f64 / panels as f64;
        for (x, w) in gl.mapped(a, b) {
            nodes.push((x, 2.0 * w * bump_hat(x, sigma)));
        }
    }
    Ok(TestFunction { kind: TestKind::Bump, sigma, nodes })
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(TransformError::Sigma(sigma));
    }
    Ok(())
}

fn bump_hat(u: f64, sigma: f64) -> f64 {
    let v = u / sigma;
    if v.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - v * v)).exp()
    }
}

fn bump_hat_c(u: C64, sigma: f64) -> C64 {
    let v = u / sigma;
    (1.0 - 1.0 / (1.0 - v * v)).exp()
}

impl TestFunction {
    /// Parse `fejer:1.5` or `bump:1.2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, s) = spec.split_once(':').ok_or_else(|| TransformError::TestSpec(spec.into()))?;
        let sigma: f64 = s.trim().parse().map_err(|_| TransformError::TestSpec(spec.into()))?;
        match kind.trim() {
            "fejer" => make_fejer(sigma),
            "bump" => make_bump(sigma),
            _ => Err(TransformError::TestSpec(spec.into())),
        }
    }

    pub fn spec(&self) -> String {
        match self.kind {
            TestKind::Fejer => format!("fejer:{}", self.sigma),
            TestKind::Bump => format!("bump:{}", self.sigma),
        }
    }

    /// φ̂(u); exactly 0 for |u| ≥ σ.
    pub fn phi_hat(&self, u: f64) -> f64 {
        let a = u.abs();
        if a >= self.sigma {
            return 0.0;
        }
        match self.kind {
            TestKind::Fejer => 1.0 - a / self.sigma,
            TestKind::Bump => bump_hat(a, self.sigma),
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self.kind {
            TestKind::Fejer => {
                let y = PI * self.sigma * x;
                if y.abs() < 1e-4 {
                    self.sigma * (1.0 - y * y / 3.0)
                } else {
                    let s = y.sin() / y;
                    self.sigma * s * s
                }
            }
            TestKind::Bump => self.nodes.iter().map(|&(u, w)| w * (2.0 * PI * u * x).cos()).sum(),
        }
    }

    /// φ continued to complex arguments (entire, since φ̂ has compact support).
    pub fn phi_c(&self, z: C64) -> C64 {
        match self.kind {
            TestKind::Fejer => {
                let y = PI * self.sigma * z;
                if y.norm() < 1e-4 {
                    self.sigma * (1.0 - y * y / 3.0)
                } else {
                    let s = y.sin() / y;
                    self.sigma * s * s
                }
            }
            TestKind::Bump => self.nodes.iter().map(|&(u, w)| (2.0 * PI * u * z).cos() * w).sum(),
        }
    }

    /// m-th derivative of φ̂ at u ≥ 0. Fejér uses the right derivative at 0
    /// and the left derivative at σ; bump derivatives come from a Cauchy
    /// integral.
    pub fn phi_hat_deriv(&self, u: f64, m: usize) -> f64 {
        if m == 0 {
            return self.phi_hat(u);
        }
        match self.kind {
            TestKind::Fejer => {
                if m == 1 && u >= 0.0 && u <= self.sigma {
                    -1.0 / self.sigma
                } else {
                    0.0
                }
            }
            TestKind::Bump => {
                if u.abs() >= self.sigma {
                    return 0.0;
                }
                let rad = (0.5 * (self.sigma - u.abs())).min(0.25);
                let n = 96;
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                    acc += bump_hat_c(u + rad * e, self.sigma) / e.powu(m as u32);
                }
                let fact: f64 = (1..=m).map(|k| k as f64).product();
                fact * acc.re / (n as f64 * rad.powi(m as i32))
            }
        }
    }

    /// ∫_a^b φ̂(u) du for 0 ≤ a ≤ b.
    pub fn integral_hat(&self, a: f64, b: f64) -> f64 {
        let s = self.sigma;
        let (a, b) = (a.clamp(0.0, s), b.clamp(0.0, s));
        if b <= a {
            return 0.0;
        }
        match self.kind {
            TestKind::Fejer => (b - a) - (b * b - a * a) / (2.0 * s),
            TestKind::Bump => GaussLegendre::new(24).composite(|u| bump_hat(u, s), a, b, 32),
        }
    }

    /// ∫₁^∞ φ̂(u) du.
    pub fn tail_from_one(&self) -> f64 {
        self.integral_hat(1.0, self.sigma)
    }

    /// ∫_{−1}^{1} φ̂(u) du.
    pub fn central_integral(&self) -> f64 {
        2.0 * self.integral_hat(0.0, 1.0)
    }
}

const WT_RMAX: f64 = 2.4;
const G_MAX: f64 = 14.0;
const G_STEP: f64 = 1.0 / 1024.0;
const G1_RHO_MAX: f64 = 2.7;
const G1_MAX: f64 = 120.0;
const G1_STEP: f64 = 1.0 / 128.0;

/// Uniform table with 4-point Lagrange interpolation; zero beyond the end.
#[derive(Clone, Debug)]
pub struct Table {
    step: f64,
    values: Vec<f64>,
}

impl Table {
    pub fn build<F: Fn(f64) -> f64>(f: F, max: f64, step: f64) -> Self {
        let n = (max / step).ceil() as usize + 3;
        Table { step, values: (0..n).map(|k| f(k as f64 * step)).collect() }
    }

    pub fn max(&self) -> f64 {
        (self.values.len() - 3) as f64 * self.step
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x.abs() / self.step;
        let k = t.floor() as usize;
        if k + 2 >= self.values.len() {
            return 0.0;
        }
        let k0 = k.max(1) - 1;
        let f = t - k0 as f64;
        let v = &self.values[k0..k0 + 4];
        // nodes at 0,1,2,3 relative to k0
        let l0 = -(f - 1.0) * (f - 2.0) * (f - 3.0) / 6.0;
        let l1 = f * (f - 2.0) * (f - 3.0) / 2.0;
        let l2 = -f * (f - 1.0) * (f - 3.0) / 2.0;
        let l3 = f * (f - 1.0) * (f - 2.0) / 6.0;
        v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
    }
}

/// Fixed-node quadrature for a 2-D radial transform
/// `2π∫₀^R W(r)J₀(2πtr)r dr`, with `W(r)` absorbed into the weights.
#[derive(Clone, Debug)]
pub struct RadialRule {
    nodes: Vec<(f64, f64)>,
}

impl RadialRule {
    pub fn new<F: Fn(f64) -> f64>(profile: F, rmax: f64, panels: usize, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let mut nodes = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = rmax * p as f64 / panels as f64;
            let b = rmax * (p + 1) as f64 / panels as f64;
            for (r, w) in gl.mapped(a, b) {
                nodes.push((r, 2.0 * PI * w * r * profile(r)));
            }
        }
        RadialRule { nodes }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.nodes.iter().map(|&(r, w)| w * bessel_j0(2.0 * PI * t * r)).sum()
    }
}

#[derive(Debug)]
struct WeightTables {
    g: Table,
    g1: Table,
}

/// The weight w(x) = exp(−πx²) with its transforms.
#[derive(Debug)]
pub struct WeightFunction {
    wt_rule: RadialRule,
    tables: OnceLock<WeightTables>,
    log_moment: f64,
}

pub fn make_gaussian_weight() -> WeightFunction {
    make_gaussian_weight_with(24, 16)
}

/// Gaussian weight with an explicit w̃ quadrature grid (panels × order nodes).
pub fn make_gaussian_weight_with(panels: usize, order: usize) -> WeightFunction {
    let wt_rule = RadialRule::new(|r| (-PI * r.powi(4)).exp(), WT_RMAX, panels, order);
    let lo = adaptive(|x| (-PI * x * x).exp() * x.ln(), 0.0, 1.0, 1e-15, 1e-13).value;
    let hi = adaptive(|x| (-PI * x * x).exp() * x.ln(), 1.0, 7.0, 1e-15, 1e-13).value;
    WeightFunction { wt_rule, tables: OnceLock::new(), log_moment: lo + hi }
}

impl WeightFunction {
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "gaussian" => Ok(make_gaussian_weight()),
            _ => Err(TransformError::WeightSpec(spec.into())),
        }
    }

    pub fn spec(&self) -> &'static str {
        "gaussian"
    }

    pub fn w(&self, x: f64) -> f64 {
        (-PI * x * x).exp()
    }

    pub fn w_hat0(&self) -> f64 {
        1.0
    }

    /// Mw(s) = Γ(s/2)/(2π^{s/2}).
    pub fn mellin(&self, s: C64) -> C64 {
        let lg = ln_gamma(s / 2.0).expect("Mw evaluated at a pole");
        (lg - s / 2.0 * PI.ln()).exp() / 2.0
    }

    /// Mw'(1)/Mw(1) = (ψ(½) − log π)/2.
    pub fn mellin_log_deriv_1(&self) -> f64 {
        (digamma(C64::new(0.5, 0.0)).unwrap().re - PI.ln()) / 2.0
    }

    /// ∫₀^∞ w(x) log x dx by quadrature.
    pub fn log_moment(&self) -> f64 {
        self.log_moment
    }

    /// w̃(t) = 2π∫₀^∞ w(r²)J₀(2πtr) r dr.
    pub fn w_tilde(&self, t: f64) -> f64 {
        self.wt_rule.eval(t.abs())
    }

    fn tables(&self) -> &WeightTables {
        self.tables.get_or_init(|| {
            let g = Table::build(|y| self.w_tilde(2f64.sqrt() * y), G_MAX, G_STEP);
            let rule = RadialRule::new(|rho| self.w_tilde(2f64.sqrt() * rho * rho), G1_RHO_MAX, 60, 16);
            let g1 = Table::build(|y| rule.eval(y.sqrt()), G1_MAX, G1_STEP);
            WeightTables { g, g1 }
        })
    }

    /// g(y) = w̃(√2·y), interpolated.
    pub fn g(&self, y: f64) -> f64 {
        self.tables().g.eval(y)
    }

    /// g₁(y) = g̃(√y), interpolated.
    pub fn g1(&self, y: f64) -> f64 {
        self.tables().g1.eval(y)
    }

    pub fn g_support(&self) -> f64 {
        G_MAX
    }

    pub fn g1_support(&self) -> f64 {
        G1_MAX
    }

    /// g₁ computed directly by the nested radial quadrature (no table).
    pub fn g1_direct(&self, y: f64, panels: usize) -> f64 {
        let rule = RadialRule::new(|rho| self.w_tilde(2f64.sqrt() * rho * rho), G1_RHO_MAX, panels, 16);
        rule.eval(y.sqrt())
    }
}

/// Mellin transform ∫₀^{t_max} f(t)t^{s−1} dt, split at 1; the caller asserts
/// convergence at 0 (Re s > 0 or f vanishing there) and that f is negligible
/// beyond `t_max`.
pub fn mellin_num<F: Fn(f64) -> f64>(f: F, s: C64, t_max: f64) -> Result<C64> {
    let upper = if s.re > 0.0 { (60.0 / s.re).min(700.0) } else { 700.0 };
    let lo = adaptive_c(|u| (-s * u).exp() * f((-u).exp()), 0.0, upper, 1e-14, 1e-11);
    let hi = if t_max > 1.0 {
        adaptive_c(|t| (s * t.ln()).exp() / t * f(t), 1.0, t_max, 1e-14, 1e-11)
    } else {
        crate::quad::Quad { value: C64::new(0.0, 0.0), error: 0.0, converged: true }
    };
    if !lo.converged || !hi.converged {
        return Err(TransformError::NoConvergence(lo.error + hi.error));
    }
    Ok(lo.value + hi.value)
}

/// Writes `t,value` rows for t = 0, step, …, ≤ max (plot-ready CSV).
pub fn write_table_csv<W: std::io::Write, F: Fn(f64) -> f64>(
    mut out: W,
    name: &str,
    f: F,
    max: f64,
    step: f64,
) -> std::io::Result<()> {
    writeln!(out, "t,{name}")?;
    let n = (max / step).floor() as usize;
    for k in 0..=n {
        let t = k as f64 * step;
        writeln!(out, "{t},{}", f(t))?;
    }
    Ok(())
}

/// r₂(m) = #{k ∈ ℤ[i] : N(k) = m} for m ≤ `max`.
pub fn r2_table(max: usize) -> Vec<u32> {
    let mut r = vec![0u32; max + 1];
    let b = (max as f64).sqrt() as i64 + 1;
    for x in -b..=b {
        for y in -b..=b {
            let m = (x * x + y * y) as usize;
            if m >= 1 && m <= max {
                r[m] += 1;
            }
        }
    }
    r
}

/// Both sides of ζ_K(z+1)·Mg₁(z+1) = ζ_K(−z)·Mg(−z).
#[derive(Clone, Copy, Debug)]
pub struct MellinCheck {
    /// ζ_K(z+1)·Mg₁(z+1) by direct quadrature.
    pub lhs: C64,
    /// ζ_K(s)·Mg(s) at s = −z from the lattice-sum continuation.
    pub rhs: C64,
    pub residual: f64,
}

/// Checks the Mellin identity at z with Re(z) > 0: the left side by direct
/// Mellin quadrature of g₁, the right side by the theta-function continuation
///
/// ζ_K(s)Mg(s) = −g(0)/(4s) + g̃(0)/(4(s−1)) + ¼∫₁^∞ Θ_g(t)t^{s−1}dt + ¼∫₁^∞ Θ_{g₁}(t)t^{−s}dt,
///
/// where Θ_f(t) = Σ_{k≠0} f(N(k)t).
pub fn mellin_identity_check(w: &WeightFunction, z: C64) -> Result<MellinCheck> {
    let lhs = zeta_k(z + 1.0).map_err(|_| TransformError::NoConvergence(f64::NAN))?
        * mellin_num(|t| w.g1(t), z + 1.0, w.g1_support())?;
    let s = -z;
    let r2 = r2_table(w.g1_support().ceil() as usize);
    let theta = |f: &dyn Fn(f64) -> f64, t: f64, supp: f64| -> f64 {
        let mmax = (supp / t).floor() as usize;
        (1..=mmax.min(r2.len() - 1)).filter(|&m| r2[m] > 0).map(|m| r2[m] as f64 * f(m as f64 * t)).sum()
    };
    let gl = GaussLegendre::new(16);
    let i1 = gl.composite_c(
        |t| (s * t.ln()).exp() / t * theta(&|y| w.g(y), t, w.g_support()),
        1.0,
        w.g_support(),
        256,
    );
    let i2 = gl.composite_c(
        |t| (-s * t.ln()).exp() * theta(&|y| w.g1(y), t, w.g1_support()),
        1.0,
        w.g1_support(),
        1024,
    );
    let g0 = w.g(0.0);
    let gt0 = w.g1(0.0);
    let rhs = -g0 / (4.0 * s) + gt0 / (4.0 * (s - 1.0)) + (i1 + i2) / 4.0;
    Ok(MellinCheck { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// Euler's constant, re-exported for callers assembling closed forms.
pub const GAMMA: f64 = EULER_GAMMA;
