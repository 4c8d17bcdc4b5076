use std::f64::consts::PI;

use proptest::prelude::*;
use qhecke::specfun::{C64, EULER_GAMMA};
use qhecke::transforms::*;

/// Composite Simpson rule, independent of the library's quadrature.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// w̃(t) = 2π∫ e^{−πr⁴} J₀(2πtr) r dr with libm's J₀.
fn w_tilde_oracle(t: f64) -> f64 {
    2.0 * PI * simpson(|r| (-PI * r.powi(4)).exp() * libm::j0(2.0 * PI * t * r) * r, 0.0, 3.0, 20_000)
}

#[test]
fn fejer_examples() {
    let f = make_fejer(1.5).unwrap();
    assert_eq!(f.phi_hat(0.0), 1.0);
    assert!((f.phi(0.0) - 1.5).abs() < 1e-15);
    assert!((f.tail_from_one() - 1.0 / 12.0).abs() < 1e-15);
    assert!((f.phi_hat(1.0) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(f.phi_hat(1.5), 0.0);
    assert_eq!(f.phi_hat(-1.7), 0.0);
    assert!(make_fejer(2.0).is_err());
    assert!(make_fejer(0.0).is_err());
    assert!(make_bump(-1.0).is_err());
}

#[test]
fn fejer_derivative_conventions() {
    let f = make_fejer(1.5).unwrap();
    assert_eq!(f.phi_hat_deriv(0.0, 1), -1.0 / 1.5);
    assert_eq!(f.phi_hat_deriv(1.5, 1), -1.0 / 1.5);
    assert_eq!(f.phi_hat_deriv(0.7, 2), 0.0);
}

#[test]
fn bump_examples() {
    let b = make_bump(1.2).unwrap();
    assert_eq!(b.phi_hat(0.0), 1.0);
    assert_eq!(b.phi_hat(1.2), 0.0);
    assert_eq!(b.phi_hat(-1.2), 0.0);
    // one-sided differences at the edge vanish
    for h in [1e-2, 3e-3, 1e-3] {
        assert!(b.phi_hat(1.2 - h) / h < 1e-10, "h = {h}");
    }
    for x in [0.0, 0.3, 1.1, 2.7, 6.0] {
        let (p, m) = (b.phi(x), b.phi(-x));
        assert!((p - m).abs() < 1e-10);
        assert_eq!(b.phi_c(C64::new(x, 0.0)).im, 0.0);
    }
    // Cauchy-integral derivative vs central difference
    let h = 1e-4;
    let fd = (b.phi_hat(0.5 + h) - b.phi_hat(0.5 - h)) / (2.0 * h);
    assert!((b.phi_hat_deriv(0.5, 1) - fd).abs() < 1e-7);
}

#[test]
fn fourier_consistency() {
    for spec in ["fejer:1.5", "bump:1.2", "fejer:0.8"] {
        let f = TestFunction::parse(spec).unwrap();
        for x in [0.0, 0.37, 1.0, 2.5] {
            let direct = 2.0 * simpson(|u| f.phi_hat(u) * (2.0 * PI * u * x).cos(), 0.0, f.sigma, 20_000);
            assert!((direct - f.phi(x)).abs() < 1e-9, "{spec} x={x}: {direct} vs {}", f.phi(x));
        }
    }
}

#[test]
fn parseval() {
    for spec in ["fejer:1.5", "bump:1.2"] {
        let f = TestFunction::parse(spec).unwrap();
        let hat = 2.0 * simpson(|u| f.phi_hat(u).powi(2), 0.0, f.sigma, 20_000);
        let mut space = 2.0 * simpson(|x| f.phi(x).powi(2), 0.0, 400.0, 400_000);
        if spec.starts_with("fejer") {
            // ∫_T^∞ σ²(πσx)^{-4}·(3/8) dx tail of the sinc⁴ envelope
            let t: f64 = 400.0;
            space += 2.0 * f.sigma.powi(2) * 3.0 / 8.0 / (PI * f.sigma).powi(4) / (3.0 * t.powi(3));
        }
        assert!((hat - space).abs() < 1e-6, "{spec}: {hat} vs {space}");
    }
}

#[test]
fn gaussian_weight_closed_forms() {
    let w = make_gaussian_weight();
    assert!((w.mellin(C64::new(1.0, 0.0)).re - 0.5).abs() < 1e-14);
    assert!((w.mellin(C64::new(1.0, 0.0)).re - w.w_hat0() / 2.0).abs() < 1e-14);
    let expect = (-EULER_GAMMA - 2.0 * 2f64.ln() - PI.ln()) / 2.0;
    assert!((w.mellin_log_deriv_1() - expect).abs() < 1e-12);
    let h = 1e-5;
    let lm = |s: f64| w.mellin(C64::new(s, 0.0)).re.ln();
    let fd = (lm(1.0 + h) - lm(1.0 - h)) / (2.0 * h);
    assert!((fd - expect).abs() < 1e-8);
}

#[test]
fn log_moment_regression() {
    let w = make_gaussian_weight();
    // frozen from a 10⁻¹² adaptive quadrature; equals −(γ + log 4π)/4
    const FROZEN: f64 = -0.777_059_977_967_705_9;
    let closed = -(EULER_GAMMA + (4.0 * PI).ln()) / 4.0;
    assert!((FROZEN - closed).abs() < 1e-15);
    assert!((w.log_moment() - FROZEN).abs() < 1e-12, "{}", w.log_moment());
    // x = e^{−u} removes the log singularity on (0, 1]
    let simpson_value = -simpson(|u| u * (-u).exp() * w.w((-u).exp()), 0.0, 60.0, 200_000)
        + simpson(|x| w.w(x) * x.ln(), 1.0, 8.0, 20_000);
    assert!((simpson_value - FROZEN).abs() < 1e-9, "{simpson_value}");
}

#[test]
fn w_tilde_values() {
    let w = make_gaussian_weight();
    assert!((w.w_tilde(0.0) - PI / 2.0).abs() < 1e-8);
    assert!((w.w_tilde(0.0) - PI / 2.0 * w.w_hat0()).abs() < 1e-8);
    for t in [0.25, 0.5, 1.0, 2.0, 3.5] {
        let o = w_tilde_oracle(t);
        assert!((w.w_tilde(t) - o).abs() < 1e-8, "t={t}: {} vs {o}", w.w_tilde(t));
        assert_eq!(w.w_tilde(-t), w.w_tilde(t));
    }
}

#[test]
fn w_tilde_grid_refinement() {
    let coarse = make_gaussian_weight_with(40, 16);
    let fine = make_gaussian_weight_with(80, 16);
    for t in [0.5, 1.0, 2.0] {
        assert!((coarse.w_tilde(t) - fine.w_tilde(t)).abs() < 1e-8);
    }
}

#[test]
fn g_and_g1() {
    let w = make_gaussian_weight();
    assert!((w.g(0.0) - PI / 2.0).abs() < 1e-8);
    for y in [0.3, 1.0, 2.2] {
        assert!((w.g(y) - w.w_tilde(2f64.sqrt() * y)).abs() < 1e-9);
        assert!(w.g(y).is_finite() && w.g1(y).is_finite());
    }
    assert_eq!(w.g(w.g_support() + 1.0), 0.0);
    assert_eq!(w.g1(w.g1_support() + 1.0), 0.0);
    assert!(w.g(w.g_support() - 0.5).abs() < 1e-12);
    for y in [0.5, 4.0, 30.0] {
        assert!((w.g1(y) - w.g1_direct(y, 120)).abs() < 1e-7, "y={y}");
    }
}

#[test]
fn decay_beyond_table_cutoffs() {
    let w = make_gaussian_weight();
    // fitted C in |g₁(y)| ≤ C·y^{−3} over the outer half of the table
    let c = (60..120).map(|y| w.g1(y as f64).abs() * (y as f64).powi(3)).fold(0.0, f64::max);
    assert!(c < 1e3, "C = {c}");
    assert!(w.g1(119.0).abs() < 1e-3);
    let cg = (7..14).map(|y| w.g(y as f64).abs() * (y as f64).powi(3)).fold(0.0, f64::max);
    assert!(cg < 1e-6, "C = {cg}");
}

#[test]
fn mellin_num_examples() {
    let w = make_gaussian_weight();
    let v = mellin_num(|t| w.w(t), C64::new(2.0, 0.0), 10.0).unwrap();
    assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-12);

    let s = C64::new(1.5, 0.3);
    let h = 1e-4;
    let m = |z: C64| mellin_num(|t| w.w(t), z, 10.0).unwrap();
    let dx = (m(s + h) - m(s - h)) / (2.0 * h);
    let dy = (m(s + C64::new(0.0, h)) - m(s - C64::new(0.0, h))) / (2.0 * h);
    // Cauchy–Riemann: u_x = v_y, u_y = −v_x
    assert!((dx.re - dy.im).abs() < 1e-6 && (dy.re + dx.im).abs() < 1e-6);
    assert!((m(s) - w.mellin(s)).norm() < 1e-10);

    let mg = mellin_num(|t| w.g(t), C64::new(1.0, 0.0), w.g_support()).unwrap();
    let direct = simpson(|t| w.g(t), 0.0, w.g_support(), 200_000);
    assert!((mg.re - direct).abs() < 1e-8);
}

#[test]
fn mellin_identity() {
    let w = make_gaussian_weight();
    for z in [C64::new(0.5, 0.0), C64::new(0.5, 1.0)] {
        let c = mellin_identity_check(&w, z).unwrap();
        assert!(c.residual < 1e-4, "z={z}: {c:?}");
        let cc = mellin_identity_check(&w, z.conj()).unwrap();
        assert!((cc.lhs - c.lhs.conj()).norm() < 1e-10 && (cc.rhs - c.rhs.conj()).norm() < 1e-10);
    }
}

#[test]
fn table_csv_export() {
    let w = make_gaussian_weight();
    let mut buf = Vec::new();
    write_table_csv(&mut buf, "g", |t| w.g(t), 1.0, 0.25).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,g");
    assert_eq!(lines.len(), 6);
    let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - PI / 2.0).abs() < 1e-8);
}

#[test]
fn spec_strings() {
    assert_eq!(TestFunction::parse("fejer:1.5").unwrap().spec(), "fejer:1.5");
    assert_eq!(TestFunction::parse("bump:1.2").unwrap().kind, TestKind::Bump);
    assert!(TestFunction::parse("gauss:1").is_err());
    assert!(TestFunction::parse("fejer:2.5").is_err());
    assert_eq!(WeightFunction::parse("gaussian").unwrap().spec(), "gaussian");
    assert!(WeightFunction::parse("box").is_err());
}

#[test]
fn r2_counts() {
    let r = r2_table(25);
    assert_eq!(&r[..6], &[0, 4, 4, 0, 4, 8], "k = 0 is excluded");
    assert_eq!(r[25], 12);
}

#[test]
fn bessel_matches_libm_across_the_switch() {
    for k in 0..400 {
        let x = k as f64 * 0.07;
        assert!((bessel_j0(x) - libm::j0(x)).abs() < 1e-12, "x={x}");
    }
}

proptest! {
    #[test]
    fn phi_hat_even_and_supported(sigma in 0.05f64..1.99, u in -3f64..3.0, bump in any::<bool>()) {
        let f = if bump { make_bump(sigma).unwrap() } else { make_fejer(sigma).unwrap() };
        prop_assert_eq!(f.phi_hat(u), f.phi_hat(-u));
        if u.abs() >= sigma {
            prop_assert_eq!(f.phi_hat(u), 0.0);
        }
        prop_assert!(f.phi_hat(u) >= 0.0);
    }

    #[test]
    fn fejer_phi_nonnegative_even(sigma in 0.05f64..1.99, x in -50f64..50.0) {
        let f = make_fejer(sigma).unwrap();
        prop_assert!(f.phi(x) >= 0.0);
        prop_assert_eq!(f.phi(x), f.phi(-x));
    }

    #[test]
    fn weight_even_nonnegative(x in -5f64..5.0) {
        let w = make_gaussian_weight();
        prop_assert!(w.w(x) >= 0.0);
        prop_assert_eq!(w.w(x), w.w(-x));
    }
}
