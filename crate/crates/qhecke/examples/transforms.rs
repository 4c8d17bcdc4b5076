//! Test-function and weight transforms; prints a plot-ready CSV of φ̂ and φ.
//!
//!     cargo run --release --example transforms -- bump:1.2 > table.csv

use qhecke::specfun::C64;
use qhecke::transforms::{mellin_identity_check, make_gaussian_weight, TestFunction};

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "fejer:1.5".into());
    let test = TestFunction::parse(&spec).expect("test function spec");
    let w = make_gaussian_weight();

    eprintln!("{spec}: φ(0) = {:.12}, ∫₁^∞ φ̂ = {:.12}", test.phi(0.0), test.tail_from_one());
    eprintln!("gaussian: ŵ(0) = {:.12}, Mw'(1)/Mw(1) = {:.12}", w.w_hat0(), w.mellin_log_deriv_1());
    for y in [0.0, 1.0, 4.0, 10.0] {
        eprintln!("  g({y}) = {:+.6e}  g₁({y}) = {:+.6e}", w.g(y), w.g1(y));
    }
    let m = mellin_identity_check(&w, C64::new(0.5, 1.0)).expect("mellin check");
    eprintln!("Mellin identity at 1/2+i: residual {:.2e}", m.residual);

    println!("t,phi_hat,phi");
    for k in 0..=80 {
        let t = k as f64 * 0.05;
        println!("{t},{},{}", test.phi_hat(t), test.phi(t));
    }
}
