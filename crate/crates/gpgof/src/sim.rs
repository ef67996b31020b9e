//! Monte Carlo size and power experiments.
//!
//! A cell is one `(alternative, n)` pair. Each of its `mc_replicates`
//! datasets is drawn from the alternative and bootstrap-tested against the
//! null family; every requested statistic is calibrated on the same
//! bootstrap resamples. Rejection counts are integers, so results do not
//! depend on the order in which replicates finish.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use gpgof_core::rng::{derive_seed, fnv1a, substream};
use gpgof_core::{AlternativeSpec, FamilySpec, Statistic, WeightDiagnostics};
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::exec::{self, map_indices, Execution};
use crate::text;

/// A cell whose share of failed replicates exceeds this is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.10;

fn default_statistics() -> Vec<Statistic> {
    Statistic::all()
}

fn default_mc_replicates() -> usize {
    1000
}

fn default_bootstrap_cycles() -> usize {
    750
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(with = "text")]
    pub null_family: FamilySpec,
    #[serde(with = "text::list")]
    pub alternatives: Vec<AlternativeSpec>,
    pub n_values: Vec<usize>,
    #[serde(with = "text::statistics", default = "default_statistics")]
    pub statistics: Vec<Statistic>,
    #[serde(default = "default_mc_replicates")]
    pub mc_replicates: usize,
    #[serde(default = "default_bootstrap_cycles")]
    pub bootstrap_cycles: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub master_seed: u64,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SimConfig =
            toml::from_str(text).map_err(|e| GofError::Config(describe_toml_error(text, &e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| GofError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(GofError::Config(format!("`{key}` {why}")));
        if self.alternatives.is_empty() {
            return bad("alternatives", "must list at least one alternative");
        }
        if self.n_values.is_empty() {
            return bad("n_values", "must list at least one sample size");
        }
        if self.n_values.iter().any(|&n| n < 2) {
            return bad("n_values", "entries must be at least 2");
        }
        if self.statistics.is_empty() {
            return bad("statistics", "must list at least one statistic");
        }
        if self.mc_replicates == 0 {
            return bad("mc_replicates", "must be at least 1");
        }
        if self.bootstrap_cycles == 0 {
            return bad("bootstrap_cycles", "must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha", "must lie in (0, 1)");
        }
        for alt in &self.alternatives {
            alt.validate()
                .map_err(|e| GofError::Config(format!("`alternatives` entry `{alt}`: {e}")))?;
        }
        Ok(())
    }

    /// RNG seeds for the data and the bootstrap of replicate `r` in a cell.
    pub fn replicate_seeds(&self, alt: &AlternativeSpec, n: usize, r: usize) -> (u64, u64) {
        let key = fnv1a(alt.to_string().as_bytes());
        (
            derive_seed(self.master_seed, &[key, n as u64, r as u64, 0]),
            derive_seed(self.master_seed, &[key, n as u64, r as u64, 1]),
        )
    }
}

/// One-line description of a TOML error, quoting the offending line.
fn describe_toml_error(text: &str, e: &toml::de::Error) -> String {
    let message = e.message().trim();
    match e.span() {
        Some(span) => {
            let start = text[..span.start.min(text.len())]
                .rfind('\n')
                .map_or(0, |i| i + 1);
            let end = text[start..].find('\n').map_or(text.len(), |i| start + i);
            let line = text[..start].matches('\n').count() + 1;
            format!("line {line} `{}`: {message}", text[start..end].trim())
        }
        None => message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimCell {
    #[serde(with = "text")]
    pub alternative: AlternativeSpec,
    pub n: usize,
    #[serde(with = "text")]
    pub statistic: Statistic,
    pub rejections: usize,
    /// Replicates whose test could be carried out.
    pub completed: usize,
    /// Replicates where the null could not be fitted to the data.
    pub failures: usize,
    /// Bootstrap resamples, summed over the cell, whose refit was clamped or
    /// fell back.
    pub degenerate_bootstrap_replicates: usize,
    /// `rejections / completed`, absent when nothing completed.
    pub rejection_rate: Option<f64>,
    /// More than 10% of the replicates failed.
    pub flagged: bool,
}

impl SimCell {
    /// Rejection percentage rounded to the nearest integer.
    pub fn rejection_pct(&self) -> Option<u32> {
        self.rejection_rate.map(|r| (100.0 * r).round() as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub cells: Vec<SimCell>,
}

impl SimResult {
    pub fn cell(&self, alt: &AlternativeSpec, n: usize, stat: Statistic) -> Option<&SimCell> {
        self.cells
            .iter()
            .find(|c| c.alternative == *alt && c.n == n && c.statistic == stat)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let out = |e: csv::Error| GofError::Output(e.to_string());
        w.write_record(["alternative", "n", "statistic", "rejection_pct", "failures"])
            .map_err(out)?;
        for c in &self.cells {
            let pct = c.rejection_pct().map(|p| p.to_string()).unwrap_or_default();
            w.write_record([
                c.alternative.to_string(),
                c.n.to_string(),
                c.statistic.to_string(),
                pct,
                c.failures.to_string(),
            ])
            .map_err(out)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| GofError::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GofError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| GofError::Output(e.to_string()))
    }

    /// Writes `results.csv` and `results.json` into `dir`, creating it if
    /// needed.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| GofError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, body) in [
            ("results.csv", self.to_csv()?),
            ("results.json", self.to_json()? + "\n"),
        ] {
            let path = dir.join(name);
            let mut f = fs::File::create(&path).map_err(|source| GofError::Io {
                path: path.clone(),
                source,
            })?;
            f.write_all(body.as_bytes())
                .map_err(|source| GofError::Io { path, source })?;
        }
        Ok(())
    }
}

/// Outcome of one Monte Carlo replicate.
struct Outcome {
    rejected: Vec<bool>,
    degenerate: usize,
}

fn run_replicate(
    config: &SimConfig,
    sampler: &gpgof_core::alternatives::AltSampler,
    alt: &AlternativeSpec,
    n: usize,
    r: usize,
    exec: Execution,
) -> Option<Outcome> {
    let (data_seed, boot_seed) = config.replicate_seeds(alt, n, r);
    let data = sampler.sample(n, &mut substream(data_seed, &[])).ok()?;
    let results = exec::bootstrap(
        &data,
        config.null_family,
        &config.statistics,
        config.bootstrap_cycles,
        config.alpha,
        boot_seed,
        exec,
    )
    .ok()?;
    Some(Outcome {
        degenerate: results.first().map_or(0, |r| r.degenerate_replicates),
        rejected: results.iter().map(|r| r.rejected()).collect(),
    })
}

pub fn run_experiment(config: &SimConfig, exec: Execution) -> Result<SimResult> {
    run_experiment_with(config, exec, |_, _| {})
}

/// Like [`run_experiment`], calling `on_cell` with each finished
/// `(alternative, n)` group of cells and its wall time.
pub fn run_experiment_with<F>(
    config: &SimConfig,
    exec: Execution,
    mut on_cell: F,
) -> Result<SimResult>
where
    F: FnMut(&[SimCell], Duration),
{
    config.validate()?;
    let mut cells = Vec::new();
    for alt in &config.alternatives {
        let sampler = alt.sampler()?;
        for &n in &config.n_values {
            let start = Instant::now();
            let outcomes = map_indices(exec, config.mc_replicates, |r| {
                run_replicate(config, &sampler, alt, n, r, exec)
            });
            let completed: Vec<&Outcome> = outcomes.iter().flatten().collect();
            let failures = outcomes.len() - completed.len();
            let degenerate: usize = completed.iter().map(|o| o.degenerate).sum();
            let group_start = cells.len();
            for (j, &statistic) in config.statistics.iter().enumerate() {
                let rejections = completed.iter().filter(|o| o.rejected[j]).count();
                cells.push(SimCell {
                    alternative: *alt,
                    n,
                    statistic,
                    rejections,
                    completed: completed.len(),
                    failures,
                    degenerate_bootstrap_replicates: degenerate,
                    rejection_rate: (!completed.is_empty())
                        .then(|| rejections as f64 / completed.len() as f64),
                    flagged: failures as f64 > FAILURE_FLAG_FRACTION * outcomes.len() as f64,
                });
            }
            on_cell(&cells[group_start..], start.elapsed());
        }
    }
    Ok(SimResult {
        config: config.clone(),
        cells,
    })
}

/// Weight diagnostics with the harness's execution policy.
pub fn run_diagnostics(
    null_spec: FamilySpec,
    alt: &AlternativeSpec,
    n: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<WeightDiagnostics> {
    Ok(exec::diagnostics(null_spec, alt, n, reps, seed, exec)?)
}
