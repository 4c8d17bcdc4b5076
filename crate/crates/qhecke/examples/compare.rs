//! Empirical density against the ratios integral, its first-order form and
//! the lower-order expansion; prints the comparison CSV.

use std::sync::Arc;

use qhecke::empirical::{DensityConfig, PrimeSieve};
use qhecke::expansion::Kernels;
use qhecke::ratios::{compare, RatiosOptions, COMPARISON_HEADER};
use qhecke::specfun::{ZetaKContext, EULER_CUTOFF};
use qhecke::transforms::{make_gaussian_weight, TestFunction};

fn main() {
    let grid: Vec<f64> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|v| v.parse().expect("X value")).collect())
        .unwrap_or_else(|| vec![500.0, 2000.0]);
    let w = Arc::new(make_gaussian_weight());
    let base = DensityConfig::new(grid[0], TestFunction::parse("fejer:1.5").unwrap(), w.clone());
    let ctx = ZetaKContext::new(EULER_CUTOFF).expect("context");
    let kernels = Kernels::new(w, 0).expect("kernels");
    let rows = compare(&grid, &base, &ctx, &RatiosOptions::default(), &kernels, &PrimeSieve::new(1_000_000))
        .expect("comparison");
    println!("{COMPARISON_HEADER}");
    for r in rows {
        println!("{}", r.csv());
    }
}
