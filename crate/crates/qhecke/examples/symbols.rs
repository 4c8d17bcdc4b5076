//! Quadratic residue symbols, reciprocity, Gauss sums and the family character.

use qhecke::zint::{chi_family, gauss_sum, primary_primes_up_to, quad_symbol, quad_symbol_euler, quad_symbol_prime, GInt};

fn main() {
    let primes = primary_primes_up_to(60);
    let a = GInt::new(3, 2);
    println!("(a/ϖ) for a = {a}:");
    for w in &primes {
        let fast = quad_symbol_prime(a, w);
        assert_eq!(fast, quad_symbol_euler(a, w));
        println!("  ϖ = {:>6}  N = {:>3}  {:+}", w.value.to_string(), w.norm, fast);
    }

    let (m, n) = (GInt::new(-1, -2), GInt::new(3, 8));
    println!("(m/n) = {:+}, (n/m) = {:+}", quad_symbol(m, n).unwrap(), quad_symbol(n, m).unwrap());

    let w = GInt::new(1, 4);
    for r in [GInt::ONE, GInt::new(2, 1), GInt::new(0, 3)] {
        let g = gauss_sum(r, w).unwrap();
        let expect = quad_symbol(GInt::I * r, w).unwrap() as f64 * 17f64.sqrt();
        println!("g({r}, {w}) = {:.12} (expect {expect:.12})", g);
    }

    let c = GInt::new(1, 2);
    let row: Vec<i8> = primes.iter().map(|p| chi_family(c, p.value).unwrap()).collect();
    println!("χ_c(ϖ) for c = {c}: {row:?}");
}
