//! Empirical one-level density of the family at a given X.
//!
//!     cargo run --release --example density -- 2000 fejer:1.5

use std::sync::Arc;

use qhecke::empirical::{one_level_density, DensityConfig};
use qhecke::transforms::{make_gaussian_weight, TestFunction};

fn main() {
    let mut args = std::env::args().skip(1);
    let x: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let test = TestFunction::parse(&args.next().unwrap_or_else(|| "fejer:1.5".into())).expect("test function");
    let cfg = DensityConfig::new(x, test, Arc::new(make_gaussian_weight()));
    let r = one_level_density(&cfg).expect("density");
    println!("X = {x}, L = {:.6}, family size {}, primes {}", r.l, r.family_size, r.primes_used);
    println!("  conductor term  {:+.10}", r.term_log_conductor);
    println!("  Γ constant      {:+.10}", r.term_gamma_const);
    println!("  Γ integral      {:+.10}", r.term_integral);
    println!("  even primes     {:+.10}", r.s_even);
    println!("  odd primes      {:+.10}", r.s_odd);
    println!("  D(φ; w, X)      {:+.10}", r.d_total);
}
