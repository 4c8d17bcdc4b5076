//! Ratios-conjecture prediction: the full integral and its first-order form.

use std::sync::Arc;

use qhecke::empirical::DensityConfig;
use qhecke::ratios::{ratios_density, RatiosOptions};
use qhecke::specfun::{ZetaKContext, EULER_CUTOFF};
use qhecke::transforms::{make_gaussian_weight, TestFunction};

fn main() {
    let x: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let ctx = ZetaKContext::new(EULER_CUTOFF).expect("context");
    let cfg = DensityConfig::new(x, TestFunction::parse("fejer:1.5").unwrap(), Arc::new(make_gaussian_weight()));
    let p = ratios_density(&cfg, &ctx, &RatiosOptions::default()).expect("prediction");
    let int = p.integral.as_ref().unwrap();
    println!("X = {x}: integral {:.10}, first order {:.10}", p.d_ratios_integral.unwrap(), p.d_ratios_first_order);
    println!("  pieces: conductor {:+.8}, ψ pair {:+.8}, regular {:+.8}", int.conductor, int.digamma_pair, int.regular);
    println!("  {} integrand evaluations, residue at 0: {:.1e}", int.points, int.pole_residue);
    println!("{}", serde_json::to_string_pretty(&p.terms).unwrap());
}
