use serde_json::json;

use super::{diagonalize_sets, DensityCertificate};
use crate::averaging::CheckpointGrid;
use crate::error::{Error, Result};
use crate::set::IndexSet;

/// `{n <= horizon : floor(n/m) ∈ A}`.
pub fn scaled_set(a: &IndexSet, m: u64, horizon: u64) -> Result<IndexSet> {
    if m == 0 {
        return Err(Error::Invalid("scale factor must be at least 1".into()));
    }
    Ok(IndexSet::from_predicate(horizon, |n| a.contains(n / m)))
}

/// Diagonalizes `A_1, A_1 ∩ A_2, ..., A_1 ∩ ... ∩ A_{m_max}`, where `A_k` is
/// [`scaled_set`]`(A, k)`. The switch point for `m` is recorded as the `N_m`
/// beyond which the result lies inside every `A_k`, `k <= m`.
pub fn nested_scaled_set(a: &IndexSet, m_max: u64, grid: &CheckpointGrid) -> Result<DensityCertificate> {
    if m_max == 0 {
        return Err(Error::Invalid("m_max must be at least 1".into()));
    }
    let family = (1..=m_max).map(|k| scaled_set(a, k, grid.horizon())).collect::<Result<Vec<_>>>()?;
    Ok(diagonalize_sets(&family, grid)?.with_witness("m_max", json!(m_max)))
}

/// Least `X` in `[2, horizon]` such that every integer `x` in `[X, horizon]`
/// lying in `Ã` has `sum_{n<=a} |U(x/n)| <= eps x`, or `None`.
///
/// `U` must be constant on `[m, m+1)` after division, as summatory
/// functions evaluated through `floor` are; then integer `x` are the worst
/// case on each unit interval and the scan is exhaustive.
pub fn mertens_dilate_check<U: Fn(f64) -> f64>(
    a_tilde: &IndexSet,
    u: U,
    a: u64,
    eps: f64,
    horizon: u64,
) -> Result<Option<u64>> {
    if a == 0 {
        return Err(Error::Invalid("a must be at least 1".into()));
    }
    if horizon > a_tilde.horizon() || horizon < 2 {
        return Err(Error::Range { value: horizon, min: 2, max: a_tilde.horizon() });
    }
    let violates = |x: u64| {
        let xf = x as f64;
        let total: f64 = (1..=a).map(|n| u(xf / n as f64).abs()).sum();
        total > eps * xf
    };
    let last_bad = (2..=horizon).rev().find(|&x| a_tilde.contains(x) && violates(x));
    let x = last_bad.map_or(2, |b| b + 1);
    Ok((x <= horizon).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_arith_table;

    #[test]
    fn scaled_examples() {
        let evens = IndexSet::from_predicate(100, |n| n % 2 == 0);
        assert_eq!(scaled_set(&evens, 1, 100).unwrap(), evens);
        let s = scaled_set(&evens, 2, 100).unwrap();
        assert_eq!(s.iter().take_while(|&n| n <= 9).collect::<Vec<_>>(), vec![4, 5, 8, 9]);
        let all = scaled_set(&IndexSet::full(100), 7, 100).unwrap();
        assert!((7..=100).all(|n| all.contains(n)));
        assert!(!all.contains(6));
        assert!(scaled_set(&evens, 0, 100).is_err());
    }

    #[test]
    fn nested_of_everything_is_cofinite() {
        let h = 100_000;
        let g = CheckpointGrid::geometric(100, h, 4).unwrap();
        let c = nested_scaled_set(&IndexSet::full(h), 6, &g).unwrap();
        assert!(c.succeeded());
        assert!((6..=h).all(|n| c.set.contains(n)));
        let sparse = nested_scaled_set(&IndexSet::from_predicate(h, |n| n % 3 == 0), 3, &g).unwrap();
        assert!(sparse.failure.is_some());
    }

    #[test]
    fn dilate_examples() {
        let all = IndexSet::full(1000);
        assert_eq!(mertens_dilate_check(&all, |_| 0.0, 10, 0.01, 1000).unwrap(), Some(2));
        // a = 1 is the single condition |U(x)| <= eps x
        let t = build_arith_table(10_000, 1024).unwrap();
        let all = IndexSet::full(10_000);
        let u = |x: f64| t.mertens_real(x).unwrap() as f64;
        let x = mertens_dilate_check(&all, u, 1, 0.05, 10_000).unwrap().unwrap();
        assert!((x..=10_000).all(|n| (t.mertens(n).unwrap() as f64).abs() <= 0.05 * n as f64));
        assert!((t.mertens(x - 1).unwrap() as f64).abs() > 0.05 * (x - 1) as f64);
        assert_eq!(mertens_dilate_check(&all, |_| 1.0, 1, 1e-9, 10_000).unwrap(), None);
    }
}
