//! Average `|d̂(k)|` profiles under an alternative, used to choose between
//! the `S4` (weight on small `k`) and `S5` (weight on larger `k`) schemes.

use alloc::vec::Vec;
use core::fmt;

use crate::alternatives::{AltSampler, AlternativeSpec};
use crate::dhat::dhat_prefix;
use crate::error::{Error, Result};
use crate::family::{estimate_moments, FamilySpec, FittedParams};
use crate::rng::substream;
use crate::sample::CountSample;

/// Indices `0..=8` are the ones reported in tables.
pub const REPORTED_K: usize = 9;
/// The profile extends this far past the largest observed count.
pub const EXTRA_PAST_M1: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Recommendation {
    S4,
    S5,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recommendation::S4 => "S4",
            Recommendation::S5 => "S5",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightDiagnostics {
    /// Average `|d̂(k)|` for `k = 0..=K`, `K = max(8, max M1 + 10)`.
    pub avg_abs_d: Vec<f64>,
    pub max_value: f64,
    pub argmax_k: usize,
    pub recommendation: Recommendation,
    pub replicates: usize,
    /// Replicates skipped because moment estimation failed.
    pub skipped: usize,
}

impl WeightDiagnostics {
    /// The `k = 0..=8` slice.
    pub fn reported(&self) -> &[f64] {
        &self.avg_abs_d[..REPORTED_K.min(self.avg_abs_d.len())]
    }
}

/// `S5` when `avg|d̂(0)|` is below half the maximum and the maximum sits at
/// `k > 2`; `S4` otherwise.
pub fn recommend(avg_abs_d: &[f64]) -> (f64, usize, Recommendation) {
    let (argmax, max) =
        avg_abs_d
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| {
                if v > best.1 {
                    (k, v)
                } else {
                    best
                }
            });
    let rec = if avg_abs_d[0] < 0.5 * max && argmax > 2 {
        Recommendation::S5
    } else {
        Recommendation::S4
    };
    (max, argmax, rec)
}

/// One diagnostic replicate: a sample from the alternative and its null fit,
/// or `None` when the fit fails.
pub fn diagnostic_replicate(
    spec: FamilySpec,
    alt: &AltSampler,
    n: usize,
    seed: u64,
    index: usize,
) -> Option<(CountSample, FittedParams)> {
    let mut rng = substream(seed, &[index as u64]);
    let sample = alt.sample(n, &mut rng).ok()?;
    let params = estimate_moments(spec, &sample).ok()?;
    Some((sample, params))
}

/// Averages `|d̂(k)|` over the successful replicates.
pub fn summarize(
    spec: FamilySpec,
    replicates: &[Option<(CountSample, FittedParams)>],
) -> Result<WeightDiagnostics> {
    let ok: Vec<&(CountSample, FittedParams)> = replicates.iter().flatten().collect();
    if ok.is_empty() {
        return Err(Error::Estimation(
            "moment estimation failed in every replicate",
        ));
    }
    let len = ok
        .iter()
        .map(|(s, _)| s.m1() + EXTRA_PAST_M1 + 1)
        .max()
        .unwrap_or(0)
        .max(REPORTED_K);
    let mut sums = alloc::vec![0.0; len];
    for (sample, params) in &ok {
        let d = dhat_prefix(sample, spec, params, len)?;
        for (acc, v) in sums.iter_mut().zip(&d) {
            *acc += v.abs();
        }
    }
    let count = ok.len() as f64;
    let avg_abs_d: Vec<f64> = sums.into_iter().map(|s| s / count).collect();
    let (max_value, argmax_k, recommendation) = recommend(&avg_abs_d);
    Ok(WeightDiagnostics {
        avg_abs_d,
        max_value,
        argmax_k,
        recommendation,
        replicates: ok.len(),
        skipped: replicates.len() - ok.len(),
    })
}

pub fn diagnostics(
    spec: FamilySpec,
    alt: &AlternativeSpec,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<WeightDiagnostics> {
    if n < 2 {
        return Err(Error::Precondition("diagnostics need n >= 2"));
    }
    if reps == 0 {
        return Err(Error::Precondition(
            "diagnostics need at least one replicate",
        ));
    }
    let sampler = alt.sampler()?;
    let reps: Vec<_> = (0..reps)
        .map(|i| diagnostic_replicate(spec, &sampler, n, seed, i))
        .collect();
    summarize(spec, &reps)
}
