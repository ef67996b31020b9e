//! Reports printed by the command line tool, in JSON, CSV or plain text.

use std::fmt::Write as _;

use gpgof_core::{
    AlternativeSpec, CountSample, FamilySpec, FittedParams, GofTestResult, Statistic,
    WeightDiagnostics,
};
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticRow {
    #[serde(with = "text")]
    pub statistic: Statistic,
    pub observed: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    #[serde(with = "text")]
    pub family: FamilySpec,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub fitted: FittedParams,
    pub alpha: f64,
    pub bootstrap: usize,
    pub seed: u64,
    /// Bootstrap resamples whose refit was clamped or fell back.
    pub degenerate_replicates: usize,
    pub results: Vec<StatisticRow>,
}

impl TestReport {
    pub fn new(
        sample: &CountSample,
        family: FamilySpec,
        seed: u64,
        results: &[GofTestResult],
    ) -> Self {
        let first = &results[0];
        TestReport {
            family,
            n: sample.n(),
            mean: sample.mean(),
            variance: sample.variance(),
            fitted: first.fitted,
            alpha: first.alpha,
            bootstrap: first.b,
            seed,
            degenerate_replicates: first.degenerate_replicates,
            results: results
                .iter()
                .map(|r| StatisticRow {
                    statistic: r.statistic,
                    observed: r.observed,
                    p_value: r.p_value,
                    critical_value: r.critical_value,
                    reject: r.rejected(),
                })
                .collect(),
        }
    }

    fn decision(&self, index: usize) -> Option<bool> {
        let stat = Statistic::weighted_preset(index)?;
        self.results
            .iter()
            .find(|r| r.statistic == stat)
            .map(|r| r.reject)
    }

    /// A note when `S4` and `S5` reach different decisions.
    pub fn weight_hint(&self) -> Option<String> {
        match (self.decision(4), self.decision(5)) {
            (Some(s4), Some(s5)) if s4 != s5 => Some(format!(
                "note: s4 and s5 disagree (s4 {}, s5 {}); s4 is more sensitive to departures at small counts, \
                 s5 at larger ones. `gpgof diagnose` against a suspected alternative recommends one.",
                verdict(s4),
                verdict(s5)
            )),
            _ => None,
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "statistic",
                    "observed",
                    "p_value",
                    "critical_value",
                    "reject",
                    "lambda",
                    "theta",
                ])
                .map_err(csv_err)?;
                for r in &self.results {
                    w.write_record([
                        r.statistic.to_string(),
                        r.observed.to_string(),
                        r.p_value.to_string(),
                        r.critical_value.to_string(),
                        r.reject.to_string(),
                        self.fitted.lambda.to_string(),
                        self.fitted.theta.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                finish_csv(w)
            }
            OutputFormat::Text => {
                let mut s = String::new();
                let theta_name = match self.family {
                    FamilySpec::PoissonBinomial { .. } => "p",
                    _ => "theta",
                };
                let _ = writeln!(
                    s,
                    "family {}   n = {}   mean = {:.6}   variance = {:.6}",
                    self.family, self.n, self.mean, self.variance
                );
                let _ = writeln!(
                    s,
                    "fitted lambda = {:.6}   {theta_name} = {:.6}{}",
                    self.fitted.lambda,
                    self.fitted.theta,
                    if self.fitted.clamped {
                        "   (clamped)"
                    } else {
                        ""
                    }
                );
                let _ = writeln!(
                    s,
                    "bootstrap B = {}   alpha = {}   seed = {}   degenerate resamples = {}",
                    self.bootstrap, self.alpha, self.seed, self.degenerate_replicates
                );
                let _ = writeln!(s);
                let _ = writeln!(
                    s,
                    "{:<10} {:>14} {:>10} {:>14}  decision",
                    "statistic", "observed", "p-value", "critical"
                );
                for r in &self.results {
                    let _ = writeln!(
                        s,
                        "{:<10} {:>14.6e} {:>10.4} {:>14.6e}  {}",
                        r.statistic.to_string(),
                        r.observed,
                        r.p_value,
                        r.critical_value,
                        verdict(r.reject)
                    );
                }
                if let Some(hint) = self.weight_hint() {
                    let _ = writeln!(s);
                    let _ = writeln!(s, "{hint}");
                }
                Ok(s)
            }
        }
    }
}

fn verdict(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "do not reject"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    #[serde(with = "text")]
    pub family: FamilySpec,
    #[serde(with = "text")]
    pub alternative: AlternativeSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub diagnostics: WeightDiagnostics,
}

impl DiagnoseReport {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let d = &self.diagnostics;
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["k", "avg_abs_d"]).map_err(csv_err)?;
                for (k, v) in d.avg_abs_d.iter().enumerate() {
                    w.write_record([k.to_string(), v.to_string()])
                        .map_err(csv_err)?;
                }
                finish_csv(w)
            }
            OutputFormat::Text => {
                let mut s = String::new();
                let _ = writeln!(
                    s,
                    "null {}   alternative {}   n = {}   replicates = {} ({} skipped)   seed = {}",
                    self.family, self.alternative, self.n, d.replicates, d.skipped, self.seed
                );
                let _ = writeln!(s);
                let _ = writeln!(s, "  k   avg |d(k)|");
                for (k, v) in d.reported().iter().enumerate() {
                    let _ = writeln!(s, "{k:>3}   {v:.3}");
                }
                let _ = writeln!(s);
                let _ = writeln!(s, "max {:.3} at k = {}", d.max_value, d.argmax_k);
                let _ = writeln!(s, "recommended weights: {}", d.recommendation);
                Ok(s)
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| GofError::Output(e.to_string()))
}

fn csv_err(e: csv::Error) -> GofError {
    GofError::Output(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| GofError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| GofError::Output(e.to_string()))
}
