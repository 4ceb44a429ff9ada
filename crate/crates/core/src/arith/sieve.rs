//! Segmented sieve for μ and Λ.
//!
//! `[1, n_max]` is cut into blocks of `block_size` integers. Every block is
//! sieved on its own with the base primes `p <= sqrt(n_max)`: for each `n` we
//! track the sign of μ and the product of the distinct small primes dividing
//! `n`. After all base primes have been applied, a square-free `n` whose
//! product falls short of `n` has exactly one prime factor above the base
//! range, which flips the sign once more. Blocks write disjoint slices, so they
//! run in parallel and the result does not depend on the block size.

use rayon::prelude::*;

/// Primes `<= limit`, by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

/// Fills `mu[1..=n_max]` and `lambda[1..=n_max]`; index 0 is left untouched.
pub(crate) fn sieve_into(n_max: u64, block_size: u64, mu: &mut [i8], lambda: &mut [f64]) {
    debug_assert_eq!(mu.len() as u64, n_max + 1);
    let primes = primes_up_to(isqrt(n_max));
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let bs = block_size.max(1) as usize;

    mu[1..].par_chunks_mut(bs).zip(lambda[1..].par_chunks_mut(bs)).enumerate().for_each_init(
        Vec::new,
        |prod, (block, (mu_blk, lam_blk))| {
            let lo = 1 + (block * bs) as u64;
            sieve_block(lo, &primes, &logs, mu_blk, lam_blk, prod);
        },
    );
}

fn sieve_block(lo: u64, primes: &[u64], logs: &[f64], mu: &mut [i8], lambda: &mut [f64], prod: &mut Vec<u64>) {
    let len = mu.len();
    let hi = lo + len as u64 - 1;
    prod.clear();
    prod.resize(len, 1);
    mu.fill(1);
    lambda.fill(0.0);

    for (&p, &lp) in primes.iter().zip(logs) {
        if p * p > hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            mu[i] = -mu[i];
            prod[i] *= p;
            m += p;
        }
        let p2 = p * p;
        let mut m = lo.div_ceil(p2) * p2;
        while m <= hi {
            mu[(m - lo) as usize] = 0;
            m += p2;
        }
        let mut q = p;
        loop {
            if q >= lo {
                lambda[(q - lo) as usize] = lp;
            }
            match q.checked_mul(p) {
                Some(next) if next <= hi => q = next,
                _ => break,
            }
        }
    }

    for i in 0..len {
        let n = lo + i as u64;
        if prod[i] != n && mu[i] != 0 {
            mu[i] = -mu[i];
        }
        if prod[i] == 1 && n > 1 {
            lambda[i] = (n as f64).ln();
        }
    }
}
