//! Lower-order terms: the coefficients d_m, c_{w,m}, R_{w,m} and the assembled
//! prediction, next to the O(1/L²) behaviour of J(X).

use std::sync::Arc;

use qhecke::empirical::PrimeSieve;
use qhecke::expansion::{expansion_coefficients, j_first_order, j_x, theorem11_prediction, JOptions, Kernels};
use qhecke::specfun::Constants;
use qhecke::transforms::{make_fejer, make_gaussian_weight};

fn main() {
    let w = Arc::new(make_gaussian_weight());
    let test = make_fejer(1.5).unwrap();
    let kernels = Kernels::for_tau(w.clone(), 16.0).expect("kernel tables");
    let sieve = PrimeSieve::new(1_000_000);
    let c = expansion_coefficients(2, &test, &kernels, &sieve).expect("coefficients");
    for m in 0..c.order {
        println!(
            "m = {}: d = {:+.6} ± {:.1e}  c_w = {:+.9}  R_w = {:+.6} ± {:.1e}",
            m + 1,
            c.d[m],
            c.d_error[m],
            c.c_w[m],
            c.r_w[m],
            c.r_w_error[m]
        );
    }
    let consts = Constants::compute().unwrap();
    for x in [500.0, 2000.0, 8000.0] {
        let j = j_x(x, &test, &kernels, &JOptions::default()).expect("J(X)");
        let fo = j_first_order(x, &test, &consts, &w);
        let l = f64::ln(x);
        println!(
            "X = {x}: D_M=2 = {:.8}  J = {:+.6}  first order {:+.6}  (J - fo)·L² = {:+.3}",
            theorem11_prediction(x, &test, &c, 2),
            j.value,
            fo,
            (j.value - fo) * l * l
        );
    }
}
