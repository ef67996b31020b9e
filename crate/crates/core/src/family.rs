//! The supported GP families, their `q_k(θ)` sequences, closed-form moments
//! and moment estimators.
//!
//! | family            | `q_k(θ)`                                    | parameter θ |
//! |-------------------|---------------------------------------------|-------------|
//! | Katz              | `θ^k`                                       | `0 < θ < 1` |
//! | Poisson-Poisson   | `e^{-θ} θ^{k+1} / k!`                       | `θ > 0`     |
//! | Poisson-Binomial  | `C(ν-1, k) ν p^{k+1} (1-p)^{ν-1-k}`, `k<ν`  | `0 < p < 1` |

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sample::CountSample;

/// Lower clamp for probabilities and `θ`.
pub const PARAM_FLOOR: f64 = 1e-6;
/// Upper clamp for probabilities and the Katz `θ`.
pub const PROB_CEIL: f64 = 1.0 - 1e-6;
/// Lower clamp for `λ`.
pub const LAMBDA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FamilySpec {
    Katz,
    PoissonPoisson,
    /// Poisson-stopped sum of `Binomial(nu, p)` variables; `nu` is known.
    PoissonBinomial {
        nu: u32,
    },
}

/// Rate `λ` and shape `θ` of a GP law. For Poisson-Binomial `theta` is the
/// success probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedParams {
    pub lambda: f64,
    pub theta: f64,
    /// Set when an estimate had to be clamped into the open parameter domain.
    pub clamped: bool,
}

impl FittedParams {
    pub fn new(lambda: f64, theta: f64) -> Self {
        FittedParams {
            lambda,
            theta,
            clamped: false,
        }
    }
}

impl FamilySpec {
    pub fn validate(&self, params: &FittedParams) -> Result<()> {
        let FittedParams { lambda, theta, .. } = *params;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain("lambda must be positive and finite"));
        }
        match *self {
            FamilySpec::Katz => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::Domain("Katz theta must satisfy 0 < theta < 1"));
                }
            }
            FamilySpec::PoissonPoisson => {
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::Domain("Poisson-Poisson theta must be positive"));
                }
            }
            FamilySpec::PoissonBinomial { nu } => {
                if nu == 0 {
                    return Err(Error::Domain("Poisson-Binomial nu must be at least 1"));
                }
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::Domain("Poisson-Binomial p must satisfy 0 < p < 1"));
                }
            }
        }
        Ok(())
    }

    /// Closed form `p_0 = g(0)`.
    pub fn p0(&self, params: &FittedParams) -> f64 {
        self.ln_p0(params).exp()
    }

    pub(crate) fn ln_p0(&self, params: &FittedParams) -> f64 {
        let FittedParams { lambda, theta, .. } = *params;
        match *self {
            FamilySpec::Katz => lambda / theta * (-theta).ln_1p(),
            FamilySpec::PoissonPoisson => lambda * (-theta).exp_m1(),
            FamilySpec::PoissonBinomial { nu } => lambda * (nu as f64 * (-theta).ln_1p()).exp_m1(),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Katz => f.write_str("katz"),
            FamilySpec::PoissonPoisson => f.write_str("pp"),
            FamilySpec::PoissonBinomial { nu } => write!(f, "pb:{nu}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// Accepts `katz`, `pp` and `pb:ν`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "katz" => Ok(FamilySpec::Katz),
            "pp" => Ok(FamilySpec::PoissonPoisson),
            _ => {
                if let Some(nu) = s.strip_prefix("pb:") {
                    let nu: u32 = nu
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("invalid pb size in family `{s}`")))?;
                    if nu == 0 {
                        return Err(Error::Parse(format!("pb size must be >= 1 in `{s}`")));
                    }
                    Ok(FamilySpec::PoissonBinomial { nu })
                } else {
                    Err(Error::Parse(format!(
                        "unknown family `{s}` (expected katz, pp or pb:<nu>)"
                    )))
                }
            }
        }
    }
}

/// `q_k(θ)` evaluated directly.
pub fn q_coeff(spec: FamilySpec, params: &FittedParams, k: usize) -> Result<f64> {
    spec.validate(params)?;
    let theta = params.theta;
    let kf = k as f64;
    Ok(match spec {
        FamilySpec::Katz => theta.powi(k as i32),
        FamilySpec::PoissonPoisson => {
            (-theta + (kf + 1.0) * theta.ln() - libm::lgamma(kf + 1.0)).exp()
        }
        FamilySpec::PoissonBinomial { nu } => {
            if k >= nu as usize {
                0.0
            } else {
                let nu = nu as f64;
                let ln_choose = libm::lgamma(nu) - libm::lgamma(kf + 1.0) - libm::lgamma(nu - kf);
                nu * (ln_choose + (kf + 1.0) * theta.ln() + (nu - 1.0 - kf) * (-theta).ln_1p())
                    .exp()
            }
        }
    })
}

/// Lazily grown `q_0, q_1, ...` computed by the ratio `q_{k+1}/q_k`.
///
/// Once the sequence reaches exact zero (Poisson-Binomial past `ν-1`, or
/// floating-point underflow) it stops growing and `len()` is the number of
/// nonzero terms.
#[derive(Debug, Clone)]
pub(crate) struct QSequence {
    spec: FamilySpec,
    theta: f64,
    values: Vec<f64>,
    exhausted: bool,
}

impl QSequence {
    pub(crate) fn new(spec: FamilySpec, params: &FittedParams) -> Self {
        let theta = params.theta;
        let q0 = match spec {
            FamilySpec::Katz => 1.0,
            FamilySpec::PoissonPoisson => theta * (-theta).exp(),
            FamilySpec::PoissonBinomial { nu } => {
                nu as f64 * theta * ((nu as f64 - 1.0) * (-theta).ln_1p()).exp()
            }
        };
        let mut values = Vec::with_capacity(32);
        values.push(q0);
        QSequence {
            spec,
            theta,
            values,
            exhausted: q0 == 0.0,
        }
    }

    /// Grows the sequence to at least `len` terms unless it is exhausted.
    pub(crate) fn ensure(&mut self, len: usize) {
        while !self.exhausted && self.values.len() < len {
            let k = self.values.len() - 1;
            let last = self.values[k];
            let next = match self.spec {
                FamilySpec::Katz => last * self.theta,
                FamilySpec::PoissonPoisson => last * self.theta / (k as f64 + 1.0),
                FamilySpec::PoissonBinomial { nu } => {
                    let nu = nu as usize;
                    if k + 1 >= nu {
                        0.0
                    } else {
                        last * (nu - 1 - k) as f64 / (k as f64 + 1.0) * self.theta
                            / (1.0 - self.theta)
                    }
                }
            };
            if next == 0.0 {
                self.exhausted = true;
            } else {
                self.values.push(next);
            }
        }
    }

    #[inline]
    pub(crate) fn get(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }

    #[inline]
    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// `p_0 = exp(-λ Σ_k q_k/(k+1))`, truncating once an increment drops below 1e-15.
pub fn p0_series(spec: FamilySpec, params: &FittedParams) -> Result<f64> {
    spec.validate(params)?;
    let mut q = QSequence::new(spec, params);
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        q.ensure(k + 1);
        let inc = q.get(k) / (k as f64 + 1.0);
        sum += inc;
        if inc < 1e-15 && (k as f64) > params.theta {
            break;
        }
        k += 1;
        if k > 10_000_000 {
            return Err(Error::PmfCap { cap: k });
        }
    }
    Ok((-params.lambda * sum).exp())
}

/// Mean and variance in closed form.
pub fn moments(spec: FamilySpec, params: &FittedParams) -> Result<(f64, f64)> {
    spec.validate(params)?;
    let FittedParams { lambda, theta, .. } = *params;
    Ok(match spec {
        FamilySpec::Katz => (
            lambda / (1.0 - theta),
            lambda / ((1.0 - theta) * (1.0 - theta)),
        ),
        FamilySpec::PoissonPoisson => (lambda * theta, lambda * theta * (1.0 + theta)),
        FamilySpec::PoissonBinomial { nu } => {
            let nu = nu as f64;
            (
                lambda * nu * theta,
                lambda * nu * theta * (1.0 - theta + nu * theta),
            )
        }
    })
}

/// Moment estimator `(λ̂, θ̂)` using the unbiased sample variance.
///
/// Estimates outside the open domain are clamped (see [`PARAM_FLOOR`],
/// [`PROB_CEIL`], [`LAMBDA_FLOOR`]) and flagged; `λ̂` is then recomputed so the
/// fitted mean still equals the sample mean.
pub fn estimate_moments(spec: FamilySpec, sample: &CountSample) -> Result<FittedParams> {
    if sample.n() < 2 {
        return Err(Error::Estimation("at least two observations are required"));
    }
    if sample.has_zero_variance() {
        return Err(Error::Estimation("sample has zero variance"));
    }
    let mean = sample.mean();
    if mean <= 0.0 {
        return Err(Error::Estimation("sample mean is zero"));
    }
    if let FamilySpec::PoissonBinomial { nu: 1 } = spec {
        return Err(Error::Estimation(
            "Poisson-Binomial with nu = 1 is not identifiable by moments",
        ));
    }
    Ok(invert_moments(spec, mean, sample.variance()))
}

fn invert_moments(spec: FamilySpec, mean: f64, var: f64) -> FittedParams {
    let dispersion = var / mean;
    let (raw_theta, theta_hi) = match spec {
        FamilySpec::Katz => (1.0 - 1.0 / dispersion, PROB_CEIL),
        FamilySpec::PoissonPoisson => (dispersion - 1.0, f64::INFINITY),
        FamilySpec::PoissonBinomial { nu } => ((dispersion - 1.0) / (nu as f64 - 1.0), PROB_CEIL),
    };
    let theta = raw_theta.clamp(PARAM_FLOOR, theta_hi);
    let mut clamped = theta != raw_theta || !raw_theta.is_finite();
    let raw_lambda = match spec {
        FamilySpec::Katz => mean * (1.0 - theta),
        FamilySpec::PoissonPoisson => mean / theta,
        FamilySpec::PoissonBinomial { nu } => mean / (nu as f64 * theta),
    };
    let lambda = raw_lambda.max(LAMBDA_FLOOR);
    clamped |= lambda != raw_lambda;
    FittedParams {
        lambda,
        theta,
        clamped,
    }
}

/// Like [`estimate_moments`] but never fails: degenerate samples (zero mean,
/// zero variance, a single observation) fall back to clamped parameters with
/// the flag set. Used inside bootstrap replicates.
pub fn estimate_moments_or_fallback(spec: FamilySpec, sample: &CountSample) -> FittedParams {
    match estimate_moments(spec, sample) {
        Ok(p) => p,
        Err(_) => {
            let mean = sample.mean().max(LAMBDA_FLOOR);
            let mut p = invert_moments(spec, mean, mean);
            p.clamped = true;
            p
        }
    }
}
