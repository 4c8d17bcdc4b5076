use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use proptest::prelude::*;
use qhecke::empirical::{one_level_density, DensityConfig, PrimeSieve};
use qhecke::expansion::*;
use qhecke::specfun::{zeta_k, Constants, C64};
use qhecke::transforms::{make_fejer, make_gaussian_weight, WeightFunction};

fn weight() -> Arc<WeightFunction> {
    Arc::new(make_gaussian_weight())
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Least-squares slope of log|y| against log x.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.abs().ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn h1_decays_rapidly() {
    let k = Kernels::new(weight(), 20_000).unwrap();
    // the g₁ table is compactly supported, so h₁ vanishes identically past it
    let cut = (1..400).map(|i| i as f64 * 0.5).find(|&x| {
        (0..40).all(|j| k.h1(x + j as f64 * 0.5).value.abs() < 1e-8)
    });
    let cut = cut.expect("h₁ never drops below 1e-8");
    assert!(cut <= k.weight().g1_support(), "cutoff {cut}");
    assert!(k.h1(0.5).value.abs() > 1e-8);
}

#[test]
fn h2_decay_exponent() {
    let k = Kernels::new(weight(), 20_000).unwrap();
    let pts: Vec<(f64, f64)> = (0..12).map(|i| 2f64.powf(3.0 + 0.5 * i as f64)).map(|x| (x, k.h2(x).value)).collect();
    assert!(pts.iter().all(|p| p.1 != 0.0));
    let slope = loglog_slope(&pts);
    assert!(slope <= -1.4, "slope {slope}");
}

#[test]
fn h2_truncation_stability() {
    let k = Kernels::new(weight(), 20_000).unwrap();
    let a = k.h2_with(1.0, 10_000);
    let b = k.h2_with(1.0, 20_000);
    assert!((a.value - b.value).abs() <= a.tail, "{a:?} vs {b:?}");
    let a = k.h1_with(0.01, 2_000);
    let b = k.h1_with(0.01, 20_000);
    assert!((a.value - b.value).abs() <= a.tail, "{a:?} vs {b:?}");
}

#[test]
fn mobius_partial_sums_converge() {
    let k = Kernels::new(weight(), 100_000).unwrap();
    let zk2 = zeta_k(C64::new(2.0, 0.0)).unwrap().re;
    assert!((k.phi_limit() - 4.0 / (3.0 * zk2)).abs() < 1e-15);
    let gaps: Vec<f64> = [10, 100, 1_000, 10_000, 100_000].iter().map(|&b| (k.phi_partial(b) - k.phi_limit()).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] < 1e-4);
}

#[test]
fn odd_sum_matches_kernel_form() {
    let w = weight();
    let test = make_fejer(1.5).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).unwrap();
    let x = 2000.0;
    let j = j_x(x, &test, &kernels, &JOptions::default()).unwrap();
    let r = one_level_density(&DensityConfig::new(x, test.clone(), w)).unwrap();
    let gap = r.s_odd - test.tail_from_one() - j.value;
    assert!(gap.abs() < 0.05, "gap {gap}");
    assert!(j.quad_error < 1e-6 && j.tail < 1e-4, "{j:?}");
}

#[test]
fn small_support_odd_sum_decays() {
    let w = weight();
    let test = make_fejer(0.9).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).unwrap();
    let mut odd = Vec::new();
    for x in [500.0, 2000.0, 8000.0] {
        let j = j_x(x, &test, &kernels, &JOptions::default()).unwrap();
        assert_eq!(j.h1_part, 0.0, "φ̂(1 + τ/L) branch is outside the support");
        assert!(j.value.abs() < 0.05);
        odd.push(one_level_density(&DensityConfig::new(x, test.clone(), w.clone())).unwrap().s_odd.abs());
    }
    assert!(odd[2] < odd[0], "{odd:?}");
}

#[test]
fn first_order_constant() {
    let consts = Constants::compute().unwrap();
    let w = make_gaussian_weight();
    let lhs = 2.0 * 4f64.ln() + (PI * PI / 32.0).ln() - 4.0 / 3.0 * LN_2;
    assert!((lhs - (PI * PI / 2f64.powf(7.0 / 3.0)).ln()).abs() < 1e-12);
    assert!((j_constant(&consts, &w) - j_constant_closed(&consts, &w)).abs() < 1e-12);
    // regression: 0.7732257193 from the closed form
    assert!((j_constant(&consts, &w) - 0.773_225_719_3).abs() < 1e-9);
    assert_eq!(j_first_order(2000.0, &make_fejer(0.9).unwrap(), &consts, &w), 0.0);
}

#[test]
fn first_order_error_is_second_order() {
    let w = weight();
    let test = make_fejer(1.5).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).unwrap();
    let consts = Constants::compute().unwrap();
    let scaled: Vec<f64> = [500.0f64, 2000.0, 8000.0]
        .iter()
        .map(|&x| {
            let j = j_x(x, &test, &kernels, &JOptions::default()).unwrap().value;
            (j - j_first_order(x, &test, &consts, &w)) * x.ln().powi(2)
        })
        .collect();
    // frozen: −1.991, −2.042, −2.036
    for (v, f) in scaled.iter().zip([-1.991, -2.042, -2.036]) {
        assert!((v - f).abs() < 2e-3, "{scaled:?}");
    }
}

#[test]
fn c_w_first_coefficient_is_the_j_constant() {
    let kernels = Kernels::for_tau(weight(), 16.0).unwrap();
    let c = c_w_coefficients(&kernels, 2).unwrap();
    let consts = Constants::compute().unwrap();
    let k = j_constant(&consts, kernels.weight());
    assert!((c.value[0] - k).abs() < 1e-8, "{} vs {k}", c.value[0]);
    assert!(c.error[0] < 1e-8);
    assert!((c.h1_part[0] + c.h2_part[0] - c.value[0]).abs() < 1e-14);
}

#[test]
fn d_coefficients_and_even_sum() {
    let sieve = Arc::new(PrimeSieve::new(1_000_000));
    let d = d_coefficients(2, &sieve).unwrap();
    // Laurent cross-check
    for m in 0..2 {
        assert!((d.value[m] - d.laurent[m]).abs() <= 2.0 * d.error[m], "m={}: {d:?}", m + 1);
    }
    let test = make_fejer(1.5).unwrap();
    let w = weight();
    let mut scaled = Vec::new();
    for x in [500.0f64, 2000.0, 8000.0] {
        let mut cfg = DensityConfig::new(x, test.clone(), w.clone());
        cfg.sieve = Some(sieve.clone());
        let r = one_level_density(&cfg).unwrap();
        let l = x.ln();
        let m0 = s_even_expansion(&test, l, &[]);
        assert_eq!(m0, -test.phi(0.0) / 2.0);
        scaled.push((r.s_even - s_even_expansion(&test, l, &d.value)) * l.powi(3));
    }
    assert!(scaled.iter().all(|v| v.abs() < 25.0), "{scaled:?}");
    assert!(d_coefficients(MAX_ORDER + 1, &sieve).is_err());
}

#[test]
fn d1_stable_under_cutoff() {
    let a = d_coefficients(1, &PrimeSieve::new(1_000_000)).unwrap();
    let b = d_coefficients(1, &PrimeSieve::new(4_000_000)).unwrap();
    assert!((a.value[0] - b.value[0]).abs() <= a.error[0] + b.error[0], "{:?} vs {:?}", a.value, b.value);
}

#[test]
fn digamma_moments() {
    assert_eq!(digamma_moment(1).unwrap(), 0.0);
    let f = |x: f64| if x == 0.0 { 1.0 } else { (-x / 2.0).exp() * x / (1.0 - (-x).exp()) };
    let coarse = simpson(f, 0.0, 80.0, 40_000);
    let fine = simpson(f, 0.0, 80.0, 80_000);
    assert!((coarse - fine).abs() < 1e-10);
    let m2 = digamma_moment(2).unwrap();
    assert!((m2 - fine).abs() < 1e-8, "{m2} vs {fine}");
    assert!((m2 - PI * PI / 2.0).abs() < 1e-12);
}

#[test]
fn small_support_drops_c_terms() {
    let kernels = Kernels::for_tau(weight(), 16.0).unwrap();
    let sieve = PrimeSieve::new(1_000_000);
    let test = make_fejer(0.9).unwrap();
    let c = expansion_coefficients(2, &test, &kernels, &sieve).unwrap();
    assert_eq!(c.r_w[0], (c.d[0] + c.conductor_constant) * test.phi_hat(0.0));
    let expect = c.d[1] * test.phi_hat_deriv(0.0, 1) - 2.0 * test.phi_hat_deriv(0.0, 1) * c.digamma_moment[1];
    assert!((c.r_w[1] - expect).abs() < 1e-14);
}

#[test]
fn expansion_tracks_empirical_density() {
    let w = weight();
    let test = make_fejer(1.5).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).unwrap();
    let sieve = Arc::new(PrimeSieve::new(1_000_000));
    let c = expansion_coefficients(2, &test, &kernels, &sieve).unwrap();
    let mut res = Vec::new();
    for x in [500.0f64, 2000.0, 8000.0] {
        let mut cfg = DensityConfig::new(x, test.clone(), w.clone());
        cfg.sieve = Some(sieve.clone());
        let r = one_level_density(&cfg).unwrap();
        let l = x.ln();
        res.push(((r.d_total - theorem11_prediction(x, &test, &c, 1)).abs(), l));

        if x == 2000.0 {
            let j = j_x(x, &test, &kernels, &JOptions::default()).unwrap().value;
            let d = d_coefficients(2, &sieve).unwrap();
            let precise = precise_assembly(x, &test, &w, j, &d.value);
            let budget = (r.s_odd - test.tail_from_one() - j).abs()
                + (r.s_even - s_even_expansion(&test, l, &d.value)).abs()
                + (r.term_log_conductor - test.phi_hat(0.0) * (1.0 + 2.0 * w.log_moment() / l)).abs();
            assert!((r.d_total - precise).abs() <= budget + 1e-10, "{} vs {precise}", r.d_total);
            assert!((r.d_total - precise).abs() < 0.05);
        }
    }
    // residual·L² of the M = 1 truncation stays bounded
    assert!(res.iter().all(|&(e, l)| e * l * l < 10.0), "{res:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn lambda_branches_agree(a in 0.35f64..0.7) {
        let k = Kernels::new(weight(), 1_000).unwrap();
        let b = 1.0 / a;
        let poisson = -k.f_zero() + b * k.lambda1(b);
        prop_assert!((poisson - k.lambda_direct(a)).abs() < 1e-7);
    }

    #[test]
    fn mobius_is_multiplicative_on_coprime_norms(m in 1usize..200, n in 1usize..200) {
        let mu = norm_mobius(40_000);
        prop_assume!(gcd(m, n) == 1);
        prop_assert_eq!(mu[m * n], mu[m] * mu[n]);
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}
