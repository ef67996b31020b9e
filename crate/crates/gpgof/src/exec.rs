//! Serial and rayon-parallel drivers for the core's replicate-indexed
//! computations. Each replicate owns an RNG substream derived from its index,
//! so both modes produce identical results.

use gpgof_core::bootstrap::{BootstrapSetup, Replicate};
use gpgof_core::diagnostics::{diagnostic_replicate, summarize};
use gpgof_core::{
    AlternativeSpec, CountSample, Error, FamilySpec, GofTestResult, Statistic, WeightDiagnostics,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Maps `f` over `0..len` in index order.
pub(crate) fn map_indices<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Serial => (0..len).map(f).collect(),
        Execution::Parallel => (0..len).into_par_iter().map(f).collect(),
    }
}

/// Bootstrap calibration of every statistic in `stats` on shared resamples.
pub fn bootstrap(
    sample: &CountSample,
    spec: FamilySpec,
    stats: &[Statistic],
    b: usize,
    alpha: f64,
    seed: u64,
    exec: Execution,
) -> gpgof_core::Result<Vec<GofTestResult>> {
    let setup = BootstrapSetup::new(sample, spec, stats, b, alpha, seed)?;
    let reps: Vec<Replicate> = map_indices(exec, setup.b(), |i| setup.replicate(i));
    Ok(setup.finish(reps))
}

/// Average `|d̂(k)|` profile of `alt` against the `spec` null.
pub fn diagnostics(
    spec: FamilySpec,
    alt: &AlternativeSpec,
    n: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> gpgof_core::Result<WeightDiagnostics> {
    if n < 2 {
        return Err(Error::Precondition("diagnostics need n >= 2"));
    }
    if reps == 0 {
        return Err(Error::Precondition(
            "diagnostics need at least one replicate",
        ));
    }
    let sampler = alt.sampler()?;
    let fits = map_indices(exec, reps, |i| {
        diagnostic_replicate(spec, &sampler, n, seed, i)
    });
    summarize(spec, &fits)
}
