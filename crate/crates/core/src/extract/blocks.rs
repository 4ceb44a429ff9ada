use serde::{Deserialize, Serialize};

use super::ExtractionFailure;
use crate::dynsys::BlockPartition;
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// One completed induction stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStage {
    pub ell: usize,
    /// `K_ℓ`: blocks `1..=K_ℓ` are fixed after this stage.
    pub blocks: usize,
    /// `N_ℓ`: index shift into family `ℓ` (0 at the first stage).
    pub shift: usize,
    /// `b_{K_ℓ + 1}`
    pub end: u64,
    /// `(1/log b_{K_ℓ+1}) sum_{k<=K_ℓ} g(b_k, b_{k+1})` on the stitched sequence.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagonalization {
    /// `b_1 < b_2 < ... < b_{K+1}` for the last completed stage.
    pub starts: Vec<u64>,
    pub stages: Vec<BlockStage>,
    pub gamma: f64,
    pub failure: Option<ExtractionFailure>,
}

impl BlockDiagonalization {
    pub fn partition(&self) -> Result<BlockPartition> {
        BlockPartition::new(self.starts.clone())
    }

    /// Gap growth: blocks added at stage `s` have length at least `s`.
    pub fn gaps_hold(&self) -> bool {
        let mut from = 0;
        for st in &self.stages {
            if (from..st.blocks).any(|k| self.starts[k + 1] - self.starts[k] < st.ell as u64) {
                return false;
            }
            from = st.blocks;
        }
        true
    }

    /// Every completed stage reads at least `gamma / 2`.
    pub fn values_hold(&self) -> bool {
        self.stages.iter().all(|st| st.value >= self.gamma / 2.0)
    }
}

/// Stitches the block families `families[ℓ-1] = (b_{k,ℓ})_k` into one
/// sequence whose log-normalized `g`-sum stays at least `gamma / 2` at each
/// stage while block lengths grow.
///
/// Stage 1 takes the least `K_1` with reading at least `gamma / 2` on family 1.
/// Stage `ℓ+1` takes the least shift `N` such that `b_{K_ℓ+2+N, ℓ+1}` clears
/// `b_{K_ℓ+1} + ℓ + 1` and every later gap of family `ℓ+1` is at least
/// `ℓ + 1`, then the least `K_{ℓ+1} > K_ℓ + 2` whose family-`ℓ+1` reading over
/// the new blocks is at least `gamma / 2`, and sets
/// `b_k = b_{k+N, ℓ+1}` for `k = K_ℓ+2, ..., K_{ℓ+1}+1`. Families are finite,
/// so "every later gap" means every gap present in the list.
pub fn diagonalize_blocks<G>(families: &[Vec<u64>], g: G, gamma: f64) -> Result<BlockDiagonalization>
where
    G: Fn(u64, u64) -> f64,
{
    if families.is_empty() {
        return Err(Error::Invalid("need at least one block family".into()));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    for (l, fam) in families.iter().enumerate() {
        if fam.len() < 2 || fam[0] == 0 || fam.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!(
                "family {} must be increasing, positive, with two or more terms",
                l + 1
            )));
        }
    }
    let target = gamma / 2.0;
    let mut out = BlockDiagonalization { starts: Vec::new(), stages: Vec::new(), gamma, failure: None };

    // 1-based b_{k,ℓ} with k >= 1
    let b = |fam: &Vec<u64>, k: usize| fam[k - 1];

    // stage 1
    let fam = &families[0];
    let mut acc = NeumaierSum::new();
    let mut found = None;
    for k in 1..fam.len() {
        acc.add(g(b(fam, k), b(fam, k + 1)));
        if acc.value() / (b(fam, k + 1) as f64).ln() >= target {
            found = Some(k);
            break;
        }
    }
    let Some(k1) = found else {
        out.failure = Some(ExtractionFailure { stage: 1, reason: "no K_1 reaches gamma/2 within family 1".into() });
        return Ok(out);
    };
    out.starts = fam[..=k1].to_vec();
    push_stage(&mut out, &g, 1, k1, 0);

    for (l0, fam) in families.iter().enumerate().skip(1) {
        let ell = l0 + 1;
        let step = ell as u64;
        let k_prev = out.stages.last().unwrap().blocks;
        let last = out.starts[k_prev];
        let len = fam.len();
        // least index whose value clears last + ell
        let clear = fam.partition_point(|&x| x < last + step) + 1;
        // least index from which every gap is at least ell
        let mut gaps_from = len;
        while gaps_from > 1 && b(fam, gaps_from) - b(fam, gaps_from - 1) >= step {
            gaps_from -= 1;
        }
        let first = clear.max(gaps_from).max(k_prev + 2);
        let shift = first - (k_prev + 2);

        let mut acc = NeumaierSum::new();
        let mut found = None;
        // K ranges over k_prev + 3 ..; the sum covers k = first ..= K + shift
        let mut k = first;
        while k < len {
            acc.add(g(b(fam, k), b(fam, k + 1)));
            let big_k = k - shift;
            if big_k > k_prev + 2 && acc.value() / (b(fam, k + 1) as f64).ln() >= target {
                found = Some(big_k);
                break;
            }
            k += 1;
        }
        let Some(k_next) = found else {
            out.failure = Some(ExtractionFailure {
                stage: ell,
                reason: format!("no K_{ell} reaches gamma/2 within family {ell}"),
            });
            return Ok(out);
        };
        for k in k_prev + 2..=k_next + 1 {
            out.starts.push(b(fam, k + shift));
        }
        push_stage(&mut out, &g, ell, k_next, shift);
    }
    Ok(out)
}

fn push_stage<G: Fn(u64, u64) -> f64>(out: &mut BlockDiagonalization, g: &G, ell: usize, blocks: usize, shift: usize) {
    let s = &out.starts;
    let sum: NeumaierSum = (0..blocks).map(|k| g(s[k], s[k + 1])).collect();
    let end = s[blocks];
    out.stages.push(BlockStage { ell, blocks, shift, end, value: sum.value() / (end as f64).ln() });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::harmonic;

    // sum_{n <= j < m} 1/j: the block sums of 1/j reproduce log b_{K+1}
    fn harmonic_block(n: u64, m: u64) -> f64 {
        harmonic(m - 1) - harmonic(n - 1)
    }

    #[test]
    fn single_family_is_a_prefix() {
        let fam: Vec<u64> = (1..=1000).collect();
        let d = diagonalize_blocks(std::slice::from_ref(&fam), harmonic_block, 0.5).unwrap();
        assert!(d.failure.is_none());
        assert_eq!(d.stages.len(), 1);
        assert_eq!(d.starts, fam[..d.starts.len()].to_vec());
        assert!(d.values_hold());
    }

    #[test]
    fn zero_g_fails_at_stage_one() {
        let fam: Vec<u64> = (1..=100).collect();
        let d = diagonalize_blocks(&[fam], |_, _| 0.0, 0.1).unwrap();
        assert_eq!(d.failure.unwrap().stage, 1);
        assert!(d.starts.is_empty());
    }

    #[test]
    fn arithmetic_families_stitch() {
        let families: Vec<Vec<u64>> = (1..=4u64).map(|l| (0..20_000u64).map(|k| 1 + k * (l + 1)).collect()).collect();
        let d = diagonalize_blocks(&families, harmonic_block, 0.5).unwrap();
        assert!(d.failure.is_none(), "{:?}", d.failure);
        assert_eq!(d.stages.len(), 4);
        assert!(d.gaps_hold());
        assert!(d.values_hold());
        let p = d.partition().unwrap();
        assert_eq!(p.blocks(), d.stages.last().unwrap().blocks);
        for w in d.stages.windows(2) {
            assert!(w[1].blocks > w[0].blocks + 2);
        }
    }

    #[test]
    fn bad_input() {
        assert!(diagonalize_blocks(&[], harmonic_block, 0.5).is_err());
        assert!(diagonalize_blocks(&[vec![3, 2]], harmonic_block, 0.5).is_err());
        assert!(diagonalize_blocks(&[vec![1, 2]], harmonic_block, 0.0).is_err());
    }
}
