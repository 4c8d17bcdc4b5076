use std::f64::consts::PI;

use proptest::prelude::*;
use qhecke::specfun::*;
use qhecke::zint::primary_primes_up_to;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Catalan's constant from π/8·log(2+√3) + (3/8)Σ 1/((2n+1)²·C(2n,n)).
fn catalan() -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for n in 0..40 {
        if n > 0 {
            binom *= (2 * n) as f64 * (2 * n - 1) as f64 / (n as f64 * n as f64);
        }
        let k = (2 * n + 1) as f64;
        sum += 1.0 / (k * k * binom);
    }
    PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 3.0 / 8.0 * sum
}

#[test]
fn zeta_k_at_two_is_zeta2_times_catalan() {
    let expect = PI * PI / 6.0 * catalan();
    let v = zeta_k(c(2.0)).unwrap();
    assert!((v.re - expect).abs() < 1e-13, "{v} vs {expect}");
    assert!((expect - 1.5067030).abs() < 1e-7);
    assert_eq!(v.im, 0.0);
}

#[test]
fn zeta_k_at_zero() {
    assert!((zeta_k(c(0.0)).unwrap().re + 0.25).abs() < 1e-8);
}

#[test]
fn residue_at_one() {
    let eps = 1e-6;
    let v = eps * zeta_k(c(1.0 + eps)).unwrap().re;
    assert!((v - PI / 4.0).abs() < 1e-5, "{v}");
    assert!(zeta_k(c(1.0)).is_err());
}

#[test]
fn log_derivative_matches_finite_difference() {
    let h = 1e-4;
    let lz = |s: f64| zeta_k(c(s)).unwrap().re.ln();
    let fd = (lz(2.0 + h) - lz(2.0 - h)) / (2.0 * h);
    let v = zeta_k_log_deriv(c(2.0)).unwrap().re;
    assert!((v - fd).abs() < 1e-6, "{v} vs {fd}");
}

#[test]
fn log_derivative_simple_pole_at_one() {
    let mut prev: Option<f64> = None;
    for eps in [1e-2, 1e-3] {
        let v = zeta_k_log_deriv(c(1.0 + eps)).unwrap().re + 1.0 / eps;
        assert!(v.abs() < 10.0);
        if let Some(p) = prev {
            assert!((v - p).abs() < 0.1);
        }
        prev = Some(v);
    }
    assert!(zeta_k_log_deriv(c(1.0 + 1e-5)).is_err(), "inside the guard distance");
}

#[test]
fn gamma_k_identities() {
    let k = Constants::compute().unwrap();
    let lhs = -k.zeta_k_0_prime;
    let rhs = -k.gamma_k / PI + EULER_GAMMA / 2.0 + PI.ln() / 2.0;
    assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    assert!((k.zeta_k_0 + 0.25).abs() < 1e-8);
    assert!((k.residue - PI / 4.0).abs() < 1e-12);

    let (a, b) = (l_chi4_prime_at_one(40), l_chi4_prime_at_one(60));
    assert!((a - b).abs() < 1e-8);

    let eps = 1e-4;
    let approx = zeta_k(c(1.0 + eps)).unwrap().re - PI / 4.0 / eps;
    assert!((approx - gamma_k()).abs() < 1e-4, "{approx} vs {}", gamma_k());
}

#[test]
fn digamma_values() {
    let half = digamma(c(0.5)).unwrap().re;
    assert!((half + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-10);
    assert!((half + 1.963_510_026_021_423).abs() < 1e-12);
    assert!((digamma(c(1.0)).unwrap().re + EULER_GAMMA).abs() < 1e-12);
    let step = digamma(c(1.5)).unwrap() - digamma(c(0.5)).unwrap();
    assert!((step.re - 2.0).abs() < 1e-12);
    assert!(digamma(c(0.0)).is_err());
    assert!(digamma(c(-3.0)).is_err());
}

#[test]
fn x_c_values() {
    assert!((x_c(c(0.5), 5.0).unwrap() - 1.0).norm() < 1e-15);
    assert!((x_c(c(0.5), 1234.0).unwrap() - 1.0).norm() < 1e-15);
    let s = C64::new(0.3, 1.7);
    let prod = x_c(s, 13.0).unwrap() * x_c(1.0 - s, 13.0).unwrap();
    assert!((prod - 1.0).norm() < 1e-12);
    let expect = libm::tgamma(0.4) / libm::tgamma(0.6) * (PI * PI / 160.0).powf(0.1);
    let v = x_c(c(0.6), 5.0).unwrap();
    assert!((v.re - expect).abs() < 1e-10, "{v} vs {expect}");
    assert!(x_c(c(1.0), 5.0).is_err());
}

#[test]
fn a_euler_diagonal_and_antidiagonal() {
    let ctx = ZetaKContext::new(EULER_CUTOFF).unwrap();
    for r in [c(0.0), c(0.1), C64::new(0.1, 0.2)] {
        let a = ctx.a_euler(r, r).unwrap();
        assert_eq!(a.value, c(1.0), "r = {r}");
    }
    let r = c(0.1);
    let e = ctx.a_euler(-r, r).unwrap();
    let two = 2f64.powf(0.2);
    let closed = 3.0 * (2.0 - two) / (4.0 - two) * zeta_k(c(2.0)).unwrap().re / zeta_k(c(1.8)).unwrap().re;
    assert!((e.value.re - closed).abs() < 1e-6, "{} vs {closed}", e.value);
    assert!((ctx.a_closed_antidiag(r).unwrap().re - closed).abs() < 1e-12);
}

#[test]
fn a_euler_truncation_within_tail_estimate() {
    let small = ZetaKContext::new(250_000).unwrap();
    let big = ZetaKContext::new(500_000).unwrap();
    let r = c(0.1);
    let (a, b) = (small.a_euler(-r, r).unwrap(), big.a_euler(-r, r).unwrap());
    let tail_small = a.tail.norm();
    assert!((a.value - b.value).norm() < tail_small, "{} vs {} (tail {tail_small:e})", a.value, b.value);
}

#[test]
fn a_euler_rejects_outside_domain() {
    let ctx = ZetaKContext::new(10_000).unwrap();
    assert!(ctx.a_euler(c(-0.3), c(0.1)).is_err());
}

#[test]
fn a_alpha_two_methods_agree() {
    let ctx = ZetaKContext::new(EULER_CUTOFF).unwrap();
    let d = ctx.a_alpha_diag(c(0.25)).unwrap();
    assert!((d.finite_difference - d.identity.unwrap()).norm() < 1e-5, "{d:?}");
    assert!((d.value - d.finite_difference).norm() < 1e-5);

    let r = C64::new(0.2, 0.7);
    let (p, m) = (ctx.a_alpha_diag(r).unwrap().value, ctx.a_alpha_diag(r.conj()).unwrap().value);
    assert!((p - m.conj()).norm() < 1e-14);
}

#[test]
fn alpha_derivative_regular_but_combined_value_has_half_pole() {
    // A_α(r,r) converges as r → 0⁺; ζ'_K/ζ_K(1+2r) ~ −1/(2r), so the sum does too
    let ctx = ZetaKContext::new(EULER_CUTOFF).unwrap();
    let rs = [0.01, 0.005, 0.0025];
    let alpha: Vec<f64> = rs.iter().map(|&r| ctx.a_alpha_series(c(r)).unwrap().re).collect();
    assert!((alpha[1] - alpha[2]).abs() < 0.6 * (alpha[0] - alpha[1]).abs() + 1e-12, "{alpha:?}");
    assert!(ctx.a_alpha_series(c(0.0)).unwrap().re.is_finite());
    for &r in &rs {
        let sum = ctx.a_alpha_series(c(r)).unwrap().re + zeta_k_log_deriv(c(1.0 + 2.0 * r)).unwrap().re;
        assert!((sum * r + 0.5).abs() < 2.0 * r, "r = {r}: r·sum = {}", sum * r);
    }
}

#[test]
fn context_counts_prime_ideals() {
    let ctx = ZetaKContext::new(10_000).unwrap();
    assert_eq!(ctx.prime_count(), primary_primes_up_to(10_000).len());
}

proptest! {
    #[test]
    fn zeta_k_real_on_axis(s in 0.05f64..6.0) {
        prop_assume!((s - 1.0).abs() > 1e-3);
        let v = zeta_k(c(s)).unwrap();
        prop_assert_eq!(v.im, 0.0);
    }

    #[test]
    fn zeta_k_conjugate_symmetric(re in 0.1f64..4.0, im in 0.1f64..40.0) {
        let s = C64::new(re, im);
        let (a, b) = (zeta_k(s).unwrap(), zeta_k(s.conj()).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
        let (a, b) = (zeta_k_log_deriv(s).unwrap(), zeta_k_log_deriv(s.conj()).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn x_c_unimodular_on_critical_line(t in -60f64..60.0, n in 1u32..100_000) {
        let v = x_c(C64::new(0.5, t), n as f64).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn digamma_recurrence(re in 0.05f64..10.0, im in -30f64..30.0) {
        let s = C64::new(re, im);
        let d = digamma(s + 1.0).unwrap() - digamma(s).unwrap() - 1.0 / s;
        prop_assert!(d.norm() < 1e-11);
    }
}
