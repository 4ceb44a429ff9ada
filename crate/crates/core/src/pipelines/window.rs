//! Extraction driven by the windowed moment: one member set per `H`, pruned
//! and diagonalized into a single set, plus the checks that the Cesàro
//! averages along it obey the bound chain.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::averaging::CheckpointGrid;
use crate::error::{Error, Result};
use crate::extract::{assemble_full_density_set, cesaro_threshold_set_at, DensityCertificate};
use crate::momo::{report_from_norms, window_norms, Phi, WindowStatConfig, WindowStatReport};
use crate::set::IndexSet;
use crate::sum::{ComplexSum, NeumaierSum};

use super::report::Trajectory;

/// Number of random members re-verified by every pipeline.
pub const REVERIFY_SAMPLES: usize = 1000;

/// Absolute slack for inequalities that hold exactly in real arithmetic.
pub const BOUND_SLACK: f64 = 1e-12;

pub struct WindowExtraction {
    pub phi: Phi,
    pub h_schedule: Vec<u64>,
    pub h0_schedule: Vec<u64>,
    pub reports: Vec<WindowStatReport>,
    pub members: Vec<DensityCertificate>,
    pub assembled: DensityCertificate,
}

impl WindowExtraction {
    /// `(H, R(H))` with `R` the maximum reading over the checkpoints.
    pub fn r(&self) -> Vec<(u64, f64)> {
        self.h_schedule.iter().zip(&self.reports).map(|(&h, r)| (h, r.limsup)).collect()
    }

    /// Rows `H, N, R_N(H)` for every checkpoint.
    pub fn window_trajectory(&self) -> Trajectory {
        let mut t = Trajectory::new(&["H", "N", "R"]);
        for r in &self.reports {
            for (n, v) in r.checkpoints.iter().zip(&r.values) {
                t.push(vec![r.h as f64, *n as f64, *v]);
            }
        }
        t
    }

    /// `H0` of the diagonalization piece containing `n`.
    pub fn h0_for(&self, n: u64) -> u64 {
        let sp: Vec<u64> =
            serde_json::from_value(self.assembled.witnesses["switch_points"].clone()).unwrap_or_default();
        let used = sp.len().max(1);
        let piece = sp.iter().take(used - 1).filter(|&&p| p <= n).count();
        self.h0_schedule[piece]
    }
}

/// `values[n-1] = v_n`; needs `values.len() >= horizon + max H`.
pub fn window_extraction(
    values: &[Complex64],
    phi: Phi,
    h_schedule: &[u64],
    h0_schedule: &[u64],
    grid: &CheckpointGrid,
) -> Result<WindowExtraction> {
    let horizon = grid.horizon();
    let max_h = *h_schedule.last().ok_or_else(|| Error::Invalid("empty H schedule".into()))?;
    if (values.len() as u64) < horizon + max_h {
        return Err(Error::Range { value: horizon + max_h, min: 1, max: values.len() as u64 });
    }
    let v = |n: u64| values[n as usize - 1];
    let per_h: Vec<(WindowStatReport, DensityCertificate)> = h_schedule
        .par_iter()
        .map(|&h| -> Result<_> {
            let norms = window_norms(&[v], h, horizon)?;
            let cfg = WindowStatConfig::new(h, phi, grid.points().to_vec())?;
            let report = report_from_norms(&norms, &cfg);
            let member = cesaro_threshold_set_at(|n| phi.apply(norms[n as usize - 1]), report.limsup.sqrt(), grid)?
                .with_witness("gamma", report.limsup)
                .with_witness("H", h);
            Ok((report, member))
        })
        .collect::<Result<_>>()?;
    let (reports, members): (Vec<_>, Vec<_>) = per_h.into_iter().unzip();
    let r: Vec<(u64, f64)> = h_schedule.iter().zip(&reports).map(|(&h, rep)| (h, rep.limsup)).collect();
    let assembled = assemble_full_density_set(&r, &members, h0_schedule, grid)?;
    Ok(WindowExtraction {
        phi,
        h_schedule: h_schedule.to_vec(),
        h0_schedule: h0_schedule.to_vec(),
        reports,
        members,
        assembled,
    })
}

/// `prefix[N] = (1/N) sum_{n<=N} v_n` for `N = 1..=horizon` (`prefix[0]` unused).
pub fn cesaro_prefix(values: &[Complex64], horizon: u64) -> Vec<Complex64> {
    let mut acc = ComplexSum::new();
    let mut out = Vec::with_capacity(horizon as usize + 1);
    out.push(Complex64::new(0.0, 0.0));
    for n in 1..=horizon {
        acc.add(values[n as usize - 1]);
        out.push(acc.value() / n as f64);
    }
    out
}

/// Members reported in bound tables: the largest member not above each
/// checkpoint, plus the ten largest members.
pub fn reported_members(set: &IndexSet, grid: &CheckpointGrid) -> Vec<u64> {
    let mut out: Vec<u64> =
        grid.points().iter().filter_map(|&n| if set.contains(n) { Some(n) } else { set.predecessor(n) }).collect();
    out.extend(set.largest(10));
    out.sort_unstable();
    out.dedup();
    out
}

/// Rows `N, |cesaro_N|, H, bound_H, proof_bound` and the number of rows
/// violating either inequality.
///
/// With `N` in the `H` member set and `N >= H²`,
/// `|cesaro_N| <= ψ(R(H)) + 2HM/N <= sup_{H'>=H0} ψ(R(H')) + 2M/H0`.
pub fn bound_chain(
    extraction: &WindowExtraction,
    prefix: &[Complex64],
    sup_v: f64,
    members: &[u64],
) -> (Trajectory, u64) {
    let mut t = Trajectory::new(&["N", "abs_cesaro", "H", "bound", "proof_bound"]);
    let mut violations = 0;
    let r = extraction.r();
    for &n in members {
        let h0 = extraction.h0_for(n);
        let witness = r
            .iter()
            .zip(&extraction.members)
            .filter(|((h, _), m)| *h >= h0 && h * h <= n && m.set.contains(n))
            .map(|((h, rh), _)| (*h, extraction.phi.rate(*rh) + 2.0 * *h as f64 * sup_v / n as f64))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let proof_bound =
            r.iter().filter(|(h, _)| *h >= h0).map(|(_, rh)| extraction.phi.rate(*rh)).fold(0.0, f64::max)
                + 2.0 * sup_v / h0 as f64;
        let c = prefix[n as usize].norm();
        let (h, bound) = witness.unwrap_or((0, f64::NAN));
        if !(c <= bound + BOUND_SLACK && bound <= proof_bound + BOUND_SLACK) {
            violations += 1;
        }
        t.push(vec![n as f64, c, h as f64, bound, proof_bound]);
    }
    (t, violations)
}

/// Re-verifies membership of up to [`REVERIFY_SAMPLES`] seeded random members
/// of the assembled set with an independent pass: window averages summed
/// directly, no sliding updates. A member passes if some `H >= H0` of its
/// piece has `N >= H²` and running mean of `φ(|window|)` at most `sqrt(R(H))`.
pub fn reverify_members(extraction: &WindowExtraction, values: &[Complex64], seed: u64) -> u64 {
    let set = &extraction.assembled.set;
    let horizon = set.horizon();
    let all: Vec<u64> = set.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<u64> = all.choose_multiple(&mut rng, REVERIFY_SAMPLES).copied().collect();
    sample.sort_unstable();
    let r = extraction.r();
    let passes: Vec<Vec<bool>> = r
        .par_iter()
        .map(|&(h, rh)| {
            let threshold = rh.sqrt();
            let mut acc = NeumaierSum::new();
            let mut ok = Vec::with_capacity(sample.len());
            let mut next = sample.iter().peekable();
            for n in 1..=horizon {
                let mut w = Complex64::new(0.0, 0.0);
                for j in 1..=h {
                    w += values[(n + j) as usize - 1];
                }
                acc.add(extraction.phi.apply(w.norm() / h as f64));
                while next.peek() == Some(&&n) {
                    ok.push(h * h <= n && acc.value() / n as f64 <= threshold);
                    next.next();
                }
            }
            ok
        })
        .collect();
    sample
        .iter()
        .enumerate()
        .filter(|&(i, &n)| {
            let h0 = extraction.h0_for(n);
            !r.iter().zip(&passes).any(|((h, _), p)| *h >= h0 && p[i])
        })
        .count() as u64
}
