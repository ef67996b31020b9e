//! Parametric bootstrap calibration.
//!
//! The null law is fitted by moments, `b` samples of the original size are
//! drawn from the fitted law, each is re-fitted and the statistic recomputed.
//! Replicate `i` draws from its own substream of `seed`, so any execution
//! order gives the same draws.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dhat::{dhat, DEFAULT_TRUNC_TOL};
use crate::edf::{ad_from_table, cvm_from_table, AD_DENOMINATOR_CUTOFF};
use crate::error::{Error, Result};
use crate::family::{estimate_moments, estimate_moments_or_fallback, FamilySpec, FittedParams};
use crate::pmf::{pmf_table, Sampler, DEFAULT_MASS_TOL};
use crate::rng::substream;
use crate::sample::CountSample;
use crate::weights::WeightScheme;

/// A statistic that can be calibrated by the bootstrap.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Statistic {
    Weighted(WeightScheme),
    AndersonDarling,
    CramerVonMises,
}

impl Statistic {
    /// `S1`..`S7`, `AD`, `CvM`.
    pub fn all() -> Vec<Statistic> {
        let mut v: Vec<Statistic> = WeightScheme::PRESETS
            .iter()
            .map(|&w| Statistic::Weighted(w))
            .collect();
        v.push(Statistic::AndersonDarling);
        v.push(Statistic::CramerVonMises);
        v
    }

    pub fn weighted_preset(index: usize) -> Option<Statistic> {
        WeightScheme::preset(index).map(Statistic::Weighted)
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Weighted(w) => write!(f, "{w}"),
            Statistic::AndersonDarling => f.write_str("ad"),
            Statistic::CramerVonMises => f.write_str("cvm"),
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ad" => Ok(Statistic::AndersonDarling),
            "cvm" => Ok(Statistic::CramerVonMises),
            other => other
                .parse::<WeightScheme>()
                .map(Statistic::Weighted)
                .map_err(|_| {
                    Error::Parse(format!(
                        "unknown statistic `{s}` (expected s1..s7, ad or cvm)"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GofTestResult {
    pub statistic: Statistic,
    pub fitted: FittedParams,
    pub observed: f64,
    /// `(1 + #{draws >= observed}) / (b + 1)`.
    pub p_value: f64,
    /// `inf{x : #{draws >= x} / b <= alpha}`.
    pub critical_value: f64,
    pub alpha: f64,
    pub b: usize,
    pub draws: Vec<f64>,
    /// Replicates whose re-estimation needed clamping or the fallback fit.
    pub degenerate_replicates: usize,
}

pub fn p_value(observed: f64, draws: &[f64]) -> f64 {
    let exceed = draws.iter().filter(|&&d| d >= observed).count();
    (1 + exceed) as f64 / (draws.len() + 1) as f64
}

/// Bootstrap critical value: with draws sorted ascending and
/// `m = floor(alpha b)`, the infimum is the `(b - m)`-th order statistic.
pub fn critical_value(draws: &[f64], alpha: f64) -> f64 {
    if draws.is_empty() {
        return f64::INFINITY;
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    // guard against alpha * b landing a hair below an integer
    let m = ((alpha * b as f64) + 1e-9).floor() as usize;
    sorted[b - 1 - m.min(b - 1)]
}

/// Rejection is governed by `p_value <= alpha`; the critical value is
/// reported for information and agrees except on ties.
pub fn reject(result: &GofTestResult, alpha: f64) -> bool {
    result.p_value <= alpha
}

impl GofTestResult {
    pub fn from_draws(
        statistic: Statistic,
        fitted: FittedParams,
        observed: f64,
        draws: Vec<f64>,
        alpha: f64,
        degenerate_replicates: usize,
    ) -> Self {
        GofTestResult {
            statistic,
            fitted,
            observed,
            p_value: p_value(observed, &draws),
            critical_value: critical_value(&draws, alpha),
            alpha,
            b: draws.len(),
            draws,
            degenerate_replicates,
        }
    }

    pub fn rejected(&self) -> bool {
        reject(self, self.alpha)
    }
}

/// Every statistic in `stats` evaluated on one sample. Weighted statistics
/// share one residual vector (truncated for constant weights, which dominates
/// every scheme with `w_k <= 1`); EDF statistics share one pmf table.
pub fn evaluate(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
    stats: &[Statistic],
) -> Result<Vec<f64>> {
    let needs_dhat = stats.iter().any(|s| matches!(s, Statistic::Weighted(_)));
    let needs_table = stats.iter().any(|s| !matches!(s, Statistic::Weighted(_)));
    let d = if needs_dhat {
        Some(dhat(
            sample,
            spec,
            params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )?)
    } else {
        None
    };
    let table = if needs_table {
        Some(pmf_table(spec, params, DEFAULT_MASS_TOL)?)
    } else {
        None
    };
    Ok(stats
        .iter()
        .map(|s| match (s, &d, &table) {
            (Statistic::Weighted(w), Some(d), _) => d.weighted_sum(w),
            (Statistic::AndersonDarling, _, Some(t)) => {
                ad_from_table(sample, t, AD_DENOMINATOR_CUTOFF).value
            }
            (Statistic::CramerVonMises, _, Some(t)) => cvm_from_table(sample, t).value,
            _ => unreachable!("inputs prepared for every requested statistic"),
        })
        .collect())
}

/// Outcome of one bootstrap replicate: one value per requested statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub values: Vec<f64>,
    pub degenerate: bool,
}

/// A fitted bootstrap problem whose replicates can be evaluated in any order.
#[derive(Debug, Clone)]
pub struct BootstrapSetup {
    spec: FamilySpec,
    stats: Vec<Statistic>,
    n: usize,
    b: usize,
    alpha: f64,
    seed: u64,
    fitted: FittedParams,
    sampler: Sampler,
    observed: Vec<f64>,
}

impl BootstrapSetup {
    pub fn new(
        sample: &CountSample,
        spec: FamilySpec,
        stats: &[Statistic],
        b: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        if b == 0 {
            return Err(Error::Precondition("bootstrap cycles must be at least 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Precondition("alpha must lie in (0, 1)"));
        }
        if stats.is_empty() {
            return Err(Error::Precondition("no statistic requested"));
        }
        let fitted = estimate_moments(spec, sample)?;
        let observed = evaluate(sample, spec, &fitted, stats)?;
        let sampler = Sampler::new(spec, &fitted)?;
        Ok(BootstrapSetup {
            spec,
            stats: stats.to_vec(),
            n: sample.n() as usize,
            b,
            alpha,
            seed,
            fitted,
            sampler,
            observed,
        })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn fitted(&self) -> &FittedParams {
        &self.fitted
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn replicate(&self, index: usize) -> Replicate {
        let mut rng = substream(self.seed, &[index as u64]);
        let resample = self.sampler.fill(self.n, &mut rng);
        let refit = estimate_moments_or_fallback(self.spec, &resample);
        match evaluate(&resample, self.spec, &refit, &self.stats) {
            Ok(values) => Replicate {
                values,
                degenerate: refit.clamped,
            },
            // A refit the pmf table cannot represent. Count it against the
            // observed statistic.
            Err(_) => Replicate {
                values: alloc::vec![f64::INFINITY; self.stats.len()],
                degenerate: true,
            },
        }
    }

    /// Assembles results from replicates given in index order.
    pub fn finish(self, replicates: Vec<Replicate>) -> Vec<GofTestResult> {
        let degenerate = replicates.iter().filter(|r| r.degenerate).count();
        self.stats
            .iter()
            .enumerate()
            .map(|(j, &stat)| {
                let draws: Vec<f64> = replicates.iter().map(|r| r.values[j]).collect();
                GofTestResult::from_draws(
                    stat,
                    self.fitted,
                    self.observed[j],
                    draws,
                    self.alpha,
                    degenerate,
                )
            })
            .collect()
    }

    pub fn run(self) -> Vec<GofTestResult> {
        let reps = (0..self.b).map(|i| self.replicate(i)).collect();
        self.finish(reps)
    }
}

pub fn bootstrap_test(
    sample: &CountSample,
    spec: FamilySpec,
    statistic: Statistic,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<GofTestResult> {
    let mut results = bootstrap_test_many(sample, spec, &[statistic], b, alpha, seed)?;
    Ok(results.remove(0))
}

/// Calibrates several statistics against one shared set of resamples.
pub fn bootstrap_test_many(
    sample: &CountSample,
    spec: FamilySpec,
    stats: &[Statistic],
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<GofTestResult>> {
    Ok(BootstrapSetup::new(sample, spec, stats, b, alpha, seed)?.run())
}
