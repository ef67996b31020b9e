//! Anderson-Darling and Cramér-von Mises statistics for a fitted discrete law.
//!
//! `AD_n = n Σ_{j≥1} (F_n(j) - F(j))² f(j) / (F(j)(1 - F(j)))`, summed up to
//! `min(30, k0)` where `k0` is the first `j` whose denominator falls below the
//! cutoff; the term at `k0` itself is excluded.
//!
//! `C_n = n Σ_{j=0}^{max(30, M1)} (F_n(j) - F(j))² f(j)`.

use crate::error::Result;
use crate::family::{FamilySpec, FittedParams};
use crate::pmf::{pmf_table, PmfTable, DEFAULT_MASS_TOL};
use crate::sample::CountSample;

pub const AD_MAX_TERMS: usize = 30;
pub const CVM_MIN_TERMS: usize = 30;
pub const AD_DENOMINATOR_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdfStatistic {
    pub value: f64,
    /// The model puts (numerically) all its mass at zero, so no term could be
    /// summed.
    pub degenerate: bool,
}

pub fn ad_statistic(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
) -> Result<EdfStatistic> {
    let table = pmf_table(spec, params, DEFAULT_MASS_TOL)?;
    Ok(ad_from_table(sample, &table, AD_DENOMINATOR_CUTOFF))
}

pub fn cvm_statistic(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
) -> Result<EdfStatistic> {
    let table = pmf_table(spec, params, DEFAULT_MASS_TOL)?;
    Ok(cvm_from_table(sample, &table))
}

pub fn ad_from_table(sample: &CountSample, table: &PmfTable, cutoff: f64) -> EdfStatistic {
    let survival = table.survival();
    let tail = table.cdf_tail();
    let n = sample.n() as f64;
    let freq = sample.frequencies();
    let mut below = freq[0];
    let mut acc = 0.0;
    let mut terms = 0usize;
    for j in 1..=AD_MAX_TERMS {
        let f_model = table.cdf(j);
        let s_model = survival.get(j).copied().unwrap_or(tail);
        let denom = f_model * s_model;
        if denom < cutoff {
            break;
        }
        below += freq.get(j).copied().unwrap_or(0);
        let diff = below as f64 / n - f_model;
        acc += diff * diff * table.pmf(j) / denom;
        terms += 1;
    }
    EdfStatistic {
        value: n * acc,
        degenerate: terms == 0,
    }
}

pub fn cvm_from_table(sample: &CountSample, table: &PmfTable) -> EdfStatistic {
    let n = sample.n() as f64;
    let freq = sample.frequencies();
    let upper = CVM_MIN_TERMS.max(sample.m1());
    let mut below = 0u64;
    let mut acc = 0.0;
    for j in 0..=upper {
        below += freq.get(j).copied().unwrap_or(0);
        let diff = below as f64 / n - table.cdf(j);
        acc += diff * diff * table.pmf(j);
    }
    EdfStatistic {
        value: n * acc,
        degenerate: table.cdf(0) >= 1.0,
    }
}
