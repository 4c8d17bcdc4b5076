//! Brute-force Gaussian-integer oracles shared by integration tests.
#![allow(dead_code)]

/// Euclidean remainder in ℤ[i] by rounding.
pub fn grem(a: (i64, i64), m: (i64, i64)) -> (i64, i64) {
    let n = (m.0 * m.0 + m.1 * m.1) as f64;
    let qr = ((a.0 * m.0 + a.1 * m.1) as f64 / n).round() as i64;
    let qi = ((a.1 * m.0 - a.0 * m.1) as f64 / n).round() as i64;
    (a.0 - (qr * m.0 - qi * m.1), a.1 - (qr * m.1 + qi * m.0))
}

pub fn gmul(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn gpow_mod(a: (i64, i64), mut e: u64, m: (i64, i64)) -> (i64, i64) {
    let mut r = (1, 0);
    let mut b = grem(a, m);
    while e > 0 {
        if e & 1 == 1 {
            r = grem(gmul(r, b), m);
        }
        b = grem(gmul(b, b), m);
        e >>= 1;
    }
    r
}

/// (a/ϖ) by Euler's criterion a^{(N−1)/2} mod ϖ.
pub fn legendre(a: (i64, i64), w: (i64, i64)) -> i8 {
    let n = (w.0 * w.0 + w.1 * w.1) as u64;
    let r = gpow_mod(a, (n - 1) / 2, w);
    if grem(r, w) == (0, 0) {
        0
    } else if grem((r.0 - 1, r.1), w) == (0, 0) {
        1
    } else {
        -1
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// z ≡ 1 mod (1+i)³.
pub fn primary(z: (i64, i64)) -> bool {
    let (a, b) = (z.0 - 1, z.1);
    (a + b).rem_euclid(4) == 0 && (b - a).rem_euclid(4) == 0
}

/// Primary Gaussian primes of norm ≤ `bound`, by trial division, with their norms.
pub fn primary_primes(bound: u64) -> Vec<((i64, i64), u64)> {
    let r = (bound as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let n = (a * a + b * b) as u64;
            if n == 0 || n > bound || n.is_multiple_of(2) || !primary((a, b)) {
                continue;
            }
            let split = is_prime(n) && n % 4 == 1;
            let q = (n as f64).sqrt().round() as u64;
            let inert = (a == 0 || b == 0) && q * q == n && is_prime(q) && q % 4 == 3;
            if split || inert {
                out.push(((a, b), n));
            }
        }
    }
    out.sort_by_key(|&(_, n)| n);
    out
}
