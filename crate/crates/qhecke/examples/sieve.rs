//! Primary Gaussian primes up to a norm bound, with a cache round trip.
//!
//!     cargo run --release --example sieve -- 100000

use qhecke::zint::{factor, primary_primes_up_to, read_sieve_csv, write_sieve_csv, GInt, PrimeKind};

fn main() {
    let bound: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let primes = primary_primes_up_to(bound);
    let split = primes.iter().filter(|p| p.kind == PrimeKind::Split).count();
    println!("primary primes with N <= {bound}: {} ({split} split, {} inert)", primes.len(), primes.len() - split);
    for p in primes.iter().take(8) {
        println!("  {:>8}  N = {:<5} over p = {}", p.value.to_string(), p.norm, p.rational_prime());
    }

    let mut buf = Vec::new();
    write_sieve_csv(&mut buf, bound, &primes).expect("in-memory write");
    let (b, back) = read_sieve_csv(buf.as_slice()).expect("cache reads back");
    assert_eq!((b, back.len()), (bound, primes.len()));
    println!("cache round trip: {} bytes", buf.len());

    let z = GInt::new(-51, 138);
    let f = factor(z).expect("nonzero");
    println!("{z} = {f:?}");
}
