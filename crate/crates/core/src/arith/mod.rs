//! Tables of the Möbius and von Mangoldt functions, square-free and
//! ℬ-free indicators, and their summatory functions.

mod cache;
mod sieve;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use sieve::{isqrt, primes_up_to};

use crate::error::{check_range, Error, Result};
use crate::set::IndexSet;
use crate::sum::NeumaierSum;

/// Bytes per integer held by an [`ArithTable`]: μ, Λ, the Mertens prefix and
/// the square-free bit.
const BYTES_PER_ENTRY: f64 = 1.0 + 8.0 + 4.0 + 0.125;

/// Default memory budget for a table: 8 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

/// Sieve tuning knobs.
#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub block_size: u64,
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { block_size: 1 << 16, memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

/// μ, Λ and the square-free indicator on `[1, n_max]`.
///
/// Immutable once built; share it across threads freely.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithTable {
    n_max: u64,
    mu: Vec<i8>,
    lambda: Vec<f64>,
    sqfree: IndexSet,
    mertens_prefix: Vec<i32>,
}

impl ArithTable {
    fn from_parts(n_max: u64, mu: Vec<i8>, lambda: Vec<f64>) -> Self {
        let sqfree = IndexSet::from_predicate(n_max, |n| mu[n as usize] != 0);
        let mut mertens_prefix = Vec::with_capacity(mu.len());
        let mut acc = 0i32;
        mertens_prefix.push(0);
        for &m in &mu[1..] {
            acc += m as i32;
            mertens_prefix.push(acc);
        }
        ArithTable { n_max, mu, lambda, sqfree, mertens_prefix }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// μ(n). Panics outside `[1, n_max]`.
    #[inline]
    pub fn mu(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.n_max, "μ({n}) outside table");
        self.mu[n as usize]
    }

    /// Λ(n) in natural-log units. Panics outside `[1, n_max]`.
    #[inline]
    pub fn lambda(&self, n: u64) -> f64 {
        assert!(n >= 1 && n <= self.n_max, "Λ({n}) outside table");
        self.lambda[n as usize]
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        self.sqfree.contains(n)
    }

    pub fn squarefree_set(&self) -> &IndexSet {
        &self.sqfree
    }

    /// μ values for `n = 1..=n_max`.
    pub fn mu_values(&self) -> &[i8] {
        &self.mu[1..]
    }

    /// Λ values for `n = 1..=n_max`.
    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda[1..]
    }

    /// `M(x) = sum_{n<=x} μ(n)`.
    pub fn mertens(&self, x: u64) -> Result<i64> {
        check_range(x, 1, self.n_max)?;
        Ok(self.mertens_prefix[x as usize] as i64)
    }

    /// `M(x)` for a real argument, `M(x) = M(floor x)` and `M(x) = 0` for `x < 1`.
    pub fn mertens_real(&self, x: f64) -> Result<i64> {
        if x < 1.0 {
            return Ok(0);
        }
        self.mertens(x.floor() as u64)
    }

    /// `ψ(x) = sum_{n<=x} Λ(n)`, compensated.
    pub fn chebyshev_psi(&self, x: u64) -> Result<f64> {
        check_range(x, 1, self.n_max)?;
        Ok(self.lambda[1..=x as usize].iter().copied().collect::<NeumaierSum>().value())
    }
}

/// Builds the table with the default memory budget.
pub fn build_arith_table(n_max: u64, block_size: u64) -> Result<ArithTable> {
    build_arith_table_with(n_max, &SieveConfig { block_size, ..SieveConfig::default() })
}

pub fn build_arith_table_with(n_max: u64, config: &SieveConfig) -> Result<ArithTable> {
    if n_max == 0 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    if config.block_size == 0 {
        return Err(Error::Domain("block_size must be at least 1".into()));
    }
    let bytes = (n_max as f64 * BYTES_PER_ENTRY).ceil() as u64;
    if bytes > config.memory_budget || n_max > i32::MAX as u64 {
        return Err(Error::Capacity { requested: n_max, bytes, budget: config.memory_budget });
    }
    let mut mu = vec![0i8; n_max as usize + 1];
    let mut lambda = vec![0f64; n_max as usize + 1];
    sieve::sieve_into(n_max, config.block_size, &mut mu, &mut lambda);
    Ok(ArithTable::from_parts(n_max, mu, lambda))
}

/// A finite generating set ℬ for a set of multiples.
///
/// Generators are sorted and deduplicated on construction. Infinite
/// descriptions ("all prime squares") are truncated: only generators up to
/// the queried range can affect membership there.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultipleBase {
    generators: Vec<u64>,
}

impl MultipleBase {
    pub fn new<I: IntoIterator<Item = u64>>(generators: I) -> Result<Self> {
        let mut generators: Vec<u64> = generators.into_iter().collect();
        if let Some(&bad) = generators.iter().find(|&&g| g < 2) {
            return Err(Error::Invalid(format!("generator {bad} must be at least 2")));
        }
        generators.sort_unstable();
        generators.dedup();
        Ok(MultipleBase { generators })
    }

    /// `{p² : p prime, p² <= limit}`.
    pub fn prime_squares(limit: u64) -> Self {
        let generators = primes_up_to(isqrt(limit)).into_iter().map(|p| p * p).collect();
        MultipleBase { generators }
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Drops generators that are multiples of a smaller generator; the
    /// ℬ-free set is unchanged.
    pub fn primitive(&self) -> Self {
        let mut kept: Vec<u64> = Vec::new();
        for &g in &self.generators {
            if !kept.iter().any(|&k| g % k == 0) {
                kept.push(g);
            }
        }
        MultipleBase { generators: kept }
    }

    /// Generators `<= n_max` only.
    pub fn truncated(&self, n_max: u64) -> Self {
        MultipleBase { generators: self.generators.iter().copied().filter(|&g| g <= n_max).collect() }
    }
}

/// The ℬ-free integers in `[1, n_max]`: those with no divisor in ℬ.
pub fn bfree_set(base: &MultipleBase, n_max: u64) -> IndexSet {
    let mut set = IndexSet::full(n_max);
    for &g in base.truncated(n_max).generators() {
        let mut m = g;
        while m <= n_max {
            set.remove(m);
            m += g;
        }
    }
    set
}
