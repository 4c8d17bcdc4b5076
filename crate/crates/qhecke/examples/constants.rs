//! Field constants, ζ_K on the real line, and the ratios Euler factor A.

use qhecke::specfun::{zeta_k, Constants, ZetaKContext, C64};

fn main() {
    let k = Constants::compute().expect("constants");
    println!("{}", serde_json::to_string_pretty(&k).unwrap());

    for s in [0.0, 0.5, 2.0, 3.0] {
        println!("ζ_K({s}) = {:.15}", zeta_k(C64::new(s, 0.0)).unwrap().re);
    }
    let eps = 1e-6;
    println!("(s-1)ζ_K(s) at 1+1e-6: {:.10}", eps * zeta_k(C64::new(1.0 + eps, 0.0)).unwrap().re);

    let ctx = ZetaKContext::new(1_000_000).expect("context");
    for r in [C64::new(0.1, 0.0), C64::new(0.1, 0.2)] {
        let diag = ctx.a_euler(r, r).unwrap().value;
        let anti = ctx.a_euler(-r, r).unwrap();
        let closed = ctx.a_closed_antidiag(r).unwrap();
        println!("r = {r}: |A(r,r) - 1| = {:.1e}  A(-r,r) Euler {:.10} ± {:.1e}, closed {closed:.10}", (diag - 1.0).norm(), anti.value, anti.error);
    }
}
