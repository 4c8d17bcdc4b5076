//! The acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any fails. Runs at full size; expect a few minutes in release mode.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use qhecke::cli::{render, CommandKind, Flags, RunConfig};
use qhecke::empirical::{one_level_density, poisson_check, total_weight, DensityConfig, PrimeSieve};
use qhecke::expansion::{j_x, JOptions, Kernels};
use qhecke::ratios::{bridging_check, ratios_first_order};
use qhecke::specfun::{digamma, zeta_k, Constants, ZetaKContext, C64, EULER_GAMMA};
use qhecke::transforms::{make_fejer, make_gaussian_weight, mellin_identity_check, WeightFunction};
use qhecke::zint::*;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn weight() -> Arc<WeightFunction> {
    Arc::new(make_gaussian_weight())
}

fn odd_up_to(bound: u64) -> Vec<GInt> {
    let r = (bound as f64).sqrt() as i64 + 1;
    let mut v = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let z = GInt::new(a, b);
            if z.norm() <= bound && z.is_odd() {
                v.push(z);
            }
        }
    }
    v
}

fn c1_symbols() -> Outcome {
    let start = Instant::now();
    let primes = primary_primes_up_to(10_000);
    let odd = odd_up_to(1_000);
    let mut pairs = 0usize;
    let mut bad = 0usize;
    for p in &primes {
        for &a in &odd {
            let e = quad_symbol_euler(a, p);
            let fast = match p.kind {
                PrimeKind::Split => quad_symbol_split(a, p),
                PrimeKind::Inert => quad_symbol_inert(a, p),
            };
            if e != fast || e != quad_symbol_prime(a, p) {
                bad += 1;
            }
            pairs += 1;
        }
    }
    let mut square_bad = 0usize;
    for p in primary_primes_up_to(200) {
        let res = residue_system(p.value);
        let squares: HashSet<GInt> = res.iter().map(|&x| (x * x).rem(p.value)).filter(|r| !r.is_zero()).collect();
        for &a in &res {
            let r = a.rem(p.value);
            let s = quad_symbol_prime(a, &p);
            let expect = if r.is_zero() { 0 } else if squares.contains(&r) { 1 } else { -1 };
            if s != expect {
                square_bad += 1;
            }
        }
    }
    let t = start.elapsed();
    check(
        bad == 0 && square_bad == 0 && t <= Duration::from_secs(60),
        format!("{pairs} pairs, {bad} mismatches, {square_bad} square-set mismatches, {:.1} s", t.as_secs_f64()),
    )
}

fn ggcd_norm(a: GInt, b: GInt) -> u64 {
    let (mut x, mut y) = ((a.re, a.im), (b.re, b.im));
    while y != (0, 0) {
        let r = common::grem(x, y);
        x = y;
        y = r;
    }
    (x.0 * x.0 + x.1 * x.1) as u64
}

fn c2_reciprocity() -> Outcome {
    let prim: Vec<GInt> = odd_up_to(500).into_iter().filter(|z| z.is_primary() && !z.is_unit()).collect();
    let mut pairs = 0usize;
    let mut bad = 0usize;
    for &m in &prim {
        for &n in &prim {
            if ggcd_norm(m, n) != 1 {
                continue;
            }
            pairs += 1;
            if quad_symbol(m, n).unwrap() != quad_symbol(n, m).unwrap() {
                bad += 1;
            }
        }
    }
    check(bad == 0 && pairs > 0, format!("{pairs} coprime pairs, {bad} failures"))
}

fn c3_gauss_sums() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for p in primary_primes_up_to(1_000) {
        let table = GaussSumTable::new(p.value, GAUSS_SUM_CAP).unwrap();
        let root = (p.norm as f64).sqrt();
        for r in residue_system(p.value) {
            let g = table.eval(r);
            let rhs = quad_symbol(GInt::I * r, p.value).unwrap() as f64 * root;
            worst = worst.max((g - C64::new(rhs, 0.0)).norm());
            count += 1;
        }
    }
    check(worst < 1e-9, format!("{count} sums, max residual {worst:.2e}"))
}

fn c4_poisson() -> Outcome {
    let w = make_gaussian_weight();
    let mut worst: f64 = 0.0;
    for n in [Some(GInt::new(-1, -2)), Some(GInt::new(1, 4)), Some(GInt::new(1, -8)), None] {
        for x in [1.0, 10.0] {
            let p = poisson_check(&w, n, x).unwrap();
            worst = worst.max((p.lhs - p.rhs).norm());
        }
    }
    check(worst < 1e-6, format!("max |LHS − RHS| = {worst:.2e}"))
}

fn c5_constants() -> Outcome {
    let k = Constants::compute().unwrap();
    let e0 = (k.zeta_k_0 + 0.25).abs();
    let eps = 1e-6;
    let e1 = (eps * zeta_k(C64::new(1.0 + eps, 0.0)).unwrap().re - PI / 4.0).abs();
    let e2 = (digamma(C64::new(0.5, 0.0)).unwrap().re + EULER_GAMMA + 2.0 * 2f64.ln()).abs();
    let e3 = (-k.zeta_k_0_prime - (-k.gamma_k / PI + EULER_GAMMA / 2.0 + PI.ln() / 2.0)).abs();
    check(
        e0 < 1e-8 && e1 < 1e-5 && e2 < 1e-10 && e3 < 1e-6,
        format!("ζ_K(0) {e0:.1e}, residue {e1:.1e}, ψ(½) {e2:.1e}, ζ'_K(0) {e3:.1e}"),
    )
}

fn c6_a_function() -> Outcome {
    let ctx = ZetaKContext::new(1_000_000).unwrap();
    let diag = [C64::new(0.0, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.2)]
        .iter()
        .map(|&r| (ctx.a_euler(r, r).unwrap().value - 1.0).norm())
        .fold(0.0, f64::max);
    let r = C64::new(0.1, 0.0);
    let anti = (ctx.a_euler(-r, r).unwrap().value - ctx.a_closed_antidiag(r).unwrap()).norm();
    check(diag <= f64::EPSILON && anti < 1e-6, format!("|A(r,r) − 1| = {diag:.1e}, Euler vs closed {anti:.2e}"))
}

fn c7_mellin() -> Outcome {
    let w = make_gaussian_weight();
    let m1 = mellin_identity_check(&w, C64::new(0.5, 0.0)).unwrap().residual;
    let m2 = mellin_identity_check(&w, C64::new(0.5, 1.0)).unwrap().residual;
    let wt = (w.w_tilde(0.0) - PI / 2.0 * w.w_hat0()).abs();
    check(m1 < 1e-4 && m2 < 1e-4 && wt < 1e-8, format!("residuals {m1:.1e}, {m2:.1e}; w̃(0) {wt:.1e}"))
}

fn c8_total_weight() -> Outcome {
    let start = Instant::now();
    let x = 1e5;
    let w = weight();
    let main = PI / (3.0 * zeta_k(C64::new(2.0, 0.0)).unwrap().re) * w.w_hat0();
    let dev = total_weight(&DensityConfig::new(x, make_fejer(1.5).unwrap(), w)) / x / main - 1.0;
    let t = start.elapsed();
    check(dev.abs() < 0.01 && t <= Duration::from_secs(60), format!("relative deviation {dev:.2e}, {:.1} s", t.as_secs_f64()))
}

fn c9_odd_bridge() -> Outcome {
    let w = weight();
    let test = make_fejer(1.5).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).unwrap();
    let j = j_x(2000.0, &test, &kernels, &JOptions::default()).unwrap().value;
    let s_odd = one_level_density(&DensityConfig::new(2000.0, test.clone(), w)).unwrap().s_odd;
    let gap = (s_odd - test.tail_from_one() - j).abs();
    check(gap <= 0.05, format!("|S_odd − ∫₁^∞φ̂ − J| = {gap:.4}"))
}

fn c10_prime_bridge() -> Outcome {
    let l = 2000f64.ln();
    let sieve = PrimeSieve::new(1_000_000);
    let b = bridging_check(&make_fejer(1.5).unwrap(), l, &sieve, None).unwrap();
    check(b.residual < 1e-4, format!("residual {:.2e} on Re r = {:.3}", b.residual, b.contour))
}

fn c11_end_to_end(ctx: &ZetaKContext) -> Outcome {
    let start = Instant::now();
    let w = weight();
    let test = make_fejer(1.5).unwrap();
    let sieve = Arc::new(PrimeSieve::new(8000f64.powf(1.5).ceil() as u64));
    let mut rows = Vec::new();
    for x in [500.0f64, 2000.0, 8000.0] {
        let mut cfg = DensityConfig::new(x, test.clone(), w.clone());
        cfg.threads = 8;
        cfg.sieve = Some(sieve.clone());
        let emp = one_level_density(&cfg).unwrap().d_total;
        let fo = ratios_first_order(&cfg, ctx).unwrap().d_ratios_first_order;
        let l = x.ln();
        rows.push(((emp - fo).abs(), (emp - fo) * l * l));
    }
    let at2000 = rows[1].0;
    let bounded = rows.iter().all(|r| r.1.abs() <= 10.0);
    let trend = rows.windows(2).all(|w| w[1].0 <= w[0].0);
    let t = start.elapsed();
    check(
        at2000 <= 0.1 && bounded && trend && t <= Duration::from_secs(600),
        format!(
            "|D_emp − D_fo| = {:.4}/{:.4}/{:.4}, r·L² = {:+.2}/{:+.2}/{:+.2}, {:.1} s",
            rows[0].0,
            rows[1].0,
            rows[2].0,
            rows[0].1,
            rows[1].1,
            rows[2].1,
            t.as_secs_f64()
        ),
    )
}

fn c12_small_support(ctx: &ZetaKContext) -> Outcome {
    let w = weight();
    let test = make_fejer(0.8).unwrap();
    let mut odd = Vec::new();
    let mut gap = 0.0;
    for x in [500.0, 2000.0, 8000.0] {
        let cfg = DensityConfig::new(x, test.clone(), w.clone());
        let r = one_level_density(&cfg).unwrap();
        odd.push(r.s_odd.abs());
        if x == 8000.0 {
            // φ̂(0) + (φ̂(0)/L)·conductor + digamma term + even-prime sum; with
            // σ < 1 the even sum carries −½∫φ̂ and the ∫₁^∞, J terms vanish
            let fo = ratios_first_order(&cfg, ctx).unwrap();
            assert_eq!(fo.terms.tail_integral + fo.terms.j_term, 0.0);
            gap = (r.d_total - fo.d_ratios_first_order).abs();
        }
    }
    let decreasing = odd.windows(2).all(|w| w[1] < w[0]);
    check(
        decreasing && gap <= 0.05,
        format!("|S_odd| = {:.2e}/{:.2e}/{:.2e}, gap at 8000 = {gap:.4}", odd[0], odd[1], odd[2]),
    )
}

fn c13_determinism() -> Outcome {
    let cfg = RunConfig::resolve(CommandKind::Compare, &Flags::default(), &BTreeMap::new()).unwrap();
    let a = render(&cfg).unwrap().body;
    let b = render(&cfg).unwrap().body;
    check(a == b && a.lines().count() == 4, format!("{} bytes, identical = {}", a.len(), a == b))
}

fn main() {
    let ctx = ZetaKContext::new(qhecke::specfun::EULER_CUTOFF).unwrap();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("symbol oracle equivalence", Box::new(c1_symbols)),
        ("reciprocity", Box::new(c2_reciprocity)),
        ("Gauss sums", Box::new(c3_gauss_sums)),
        ("Poisson summation", Box::new(c4_poisson)),
        ("constants", Box::new(c5_constants)),
        ("A(α,β) diagonal and antidiagonal", Box::new(c6_a_function)),
        ("Mellin identity", Box::new(c7_mellin)),
        ("family weight asymptotic", Box::new(c8_total_weight)),
        ("odd-prime bridge", Box::new(c9_odd_bridge)),
        ("prime-sum bridging", Box::new(c10_prime_bridge)),
        ("end-to-end", Box::new(|| c11_end_to_end(&ctx))),
        ("small support", Box::new(|| c12_small_support(&ctx))),
        ("determinism", Box::new(c13_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
