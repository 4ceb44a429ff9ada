//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

/// μ(n) by trial division.
pub fn mobius(mut n: u64) -> i8 {
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Λ(n) by trial division.
pub fn mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return if m == 1 { (p as f64).ln() } else { 0.0 };
        }
        p += 1;
    }
    (n as f64).ln()
}

/// Primes up to `n` by the plain sieve of Eratosthenes.
pub fn eratosthenes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// ψ(x) summed over prime powers `p^k <= x`.
pub fn psi_from_primes(x: u64) -> f64 {
    let mut total = 0.0;
    for p in eratosthenes(x) {
        let lp = (p as f64).ln();
        let mut q = p;
        while q <= x {
            total += lp;
            q = match q.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
    }
    total
}
