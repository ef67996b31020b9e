//! Empirical recurrence residuals `d̂(k)` and the weighted statistic
//! `S_{n,w} = Σ_k w_k d̂(k)²`.
//!
//! `d̂(k) = (k+1) p̂_{k+1} - λ̂ Σ_{u=0}^{k} p̂_u q_{k-u}(θ̂)`. For `k >= M1` the
//! leading term vanishes and the sum only runs over the observed support, so
//! the sequence decays like the family's `q_k` and the infinite sum can be
//! truncated with an explicit bound on the discarded tail.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{FamilySpec, FittedParams, QSequence};
use crate::sample::CountSample;
use crate::weights::WeightScheme;

pub const DEFAULT_TRUNC_TOL: f64 = 1e-14;
/// Number of consecutive negligible terms past `M1` that ends the sum.
const STOP_RUN: usize = 5;
/// Hard cap on the number of terms past `M1`.
const MAX_TERMS_PAST_M1: usize = 10_000;

/// `d̂(0), ..., d̂(K)` plus a bound on `Σ_{k>K} w_k d̂(k)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DhatVector {
    values: Vec<f64>,
    tail_bound: f64,
}

impl DhatVector {
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn k_trunc(&self) -> usize {
        self.values.len() - 1
    }

    /// Upper bound on the discarded tail, valid for every weight scheme with
    /// `w_k <= 1`.
    #[inline]
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn weighted_sum(&self, weights: &WeightScheme) -> f64 {
        let w = weights.weights(self.values.len());
        self.values.iter().zip(&w).map(|(d, w)| w * d * d).sum()
    }
}

/// Evaluates `d̂(k)` for one sample and one parameter point.
pub(crate) struct Residuals<'a> {
    sample: &'a CountSample,
    p_hat: Vec<f64>,
    spec: FamilySpec,
    lambda: f64,
    theta: f64,
    q: QSequence,
}

impl<'a> Residuals<'a> {
    pub(crate) fn new(
        sample: &'a CountSample,
        spec: FamilySpec,
        params: &FittedParams,
    ) -> Result<Self> {
        spec.validate(params)?;
        Ok(Residuals {
            sample,
            p_hat: sample.rel_freqs(),
            spec,
            lambda: params.lambda,
            theta: params.theta,
            q: QSequence::new(spec, params),
        })
    }

    fn m1(&self) -> usize {
        self.sample.m1()
    }

    pub(crate) fn at(&mut self, k: usize) -> f64 {
        let m1 = self.m1();
        let lead = if k < m1 {
            (k as f64 + 1.0) * self.p_hat[k + 1]
        } else {
            0.0
        };
        self.q.ensure(k + 1);
        let q = self.q.as_slice();
        let hi = k.min(m1);
        let lo = (k + 1).saturating_sub(q.len());
        let mut conv = 0.0;
        if lo <= hi {
            for u in lo..=hi {
                conv += self.p_hat[u] * q[k - u];
            }
        }
        lead - self.lambda * conv
    }

    /// Bound on `Σ_{k>last} d̂(k)²` given `d̂(last)`, or `None` when `last` is
    /// not yet far enough past `M1` for the family's majorant to hold.
    fn tail_majorant(&mut self, last: usize, d_last: f64) -> Option<f64> {
        let m1 = self.m1();
        if last < m1 {
            return None;
        }
        match self.spec {
            // d̂(k+1) = θ d̂(k) exactly for k >= M1.
            FamilySpec::Katz => {
                let t2 = self.theta * self.theta;
                Some(d_last * d_last * t2 / (1.0 - t2))
            }
            // |d̂(k)| <= λ q_{k-M1} once q is decreasing on [k-M1, ∞), i.e.
            // k - M1 + 1 >= θ, and q_{j+1}/q_j = θ/(j+1) gives a geometric bound.
            FamilySpec::PoissonPoisson => {
                let j = last - m1 + 1;
                let ratio = self.theta / (j as f64 + 1.0);
                if ratio >= 1.0 {
                    return None;
                }
                self.q.ensure(j + 1);
                let qj = self.q.get(j);
                Some(self.lambda * self.lambda * qj * qj / (1.0 - ratio * ratio))
            }
            // q_j = 0 for j >= ν, so d̂(k) = 0 for k >= M1 + ν.
            FamilySpec::PoissonBinomial { nu } => (last + 1 >= m1 + nu as usize).then_some(0.0),
        }
    }
}

/// Residuals up to the truncation point selected for `weights`.
///
/// Past `M1` the sum stops at the first index closing a run of five
/// consecutive terms with `w_k d̂(k)² < trunc_tol`, provided the family's tail
/// majorant already applies; the hard cap is `M1 + 10⁴` terms.
pub fn dhat(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
    weights: &WeightScheme,
    trunc_tol: f64,
) -> Result<DhatVector> {
    if !(trunc_tol > 0.0) {
        return Err(Error::Precondition("trunc_tol must be positive"));
    }
    let mut res = Residuals::new(sample, spec, params)?;
    let m1 = sample.m1();
    let cap = m1 + MAX_TERMS_PAST_M1;
    let mut values = Vec::with_capacity(m1 + 32);
    let mut w = weights.weights(m1 + 32);
    let mut run = 0usize;
    let mut k = 0usize;
    loop {
        let d = res.at(k);
        values.push(d);
        if k >= m1 {
            if k >= w.len() {
                w = weights.weights(2 * w.len());
            }
            if w[k] * d * d < trunc_tol {
                run += 1;
            } else {
                run = 0;
            }
            if run >= STOP_RUN {
                if let Some(bound) = res.tail_majorant(k, d) {
                    return Ok(DhatVector {
                        values,
                        tail_bound: bound,
                    });
                }
            }
            if k >= cap {
                let tail_bound = res.tail_majorant(k, d).unwrap_or(f64::INFINITY);
                return Ok(DhatVector { values, tail_bound });
            }
        }
        k += 1;
    }
}

/// `d̂(0), ..., d̂(len-1)` without truncation logic.
pub fn dhat_prefix(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
    len: usize,
) -> Result<Vec<f64>> {
    let mut res = Residuals::new(sample, spec, params)?;
    Ok((0..len).map(|k| res.at(k)).collect())
}

/// `S_{n,w}(λ̂, θ̂)`, within `dhat(..).tail_bound()` of the infinite sum.
pub fn statistic(
    sample: &CountSample,
    spec: FamilySpec,
    params: &FittedParams,
    weights: &WeightScheme,
    trunc_tol: f64,
) -> Result<f64> {
    Ok(dhat(sample, spec, params, weights, trunc_tol)?.weighted_sum(weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn katz(lambda: f64, theta: f64) -> (FamilySpec, FittedParams) {
        (FamilySpec::Katz, FittedParams::new(lambda, theta))
    }

    #[test]
    fn hand_computed_residuals() {
        let s = CountSample::from_values(&[0, 0, 1, 1]).unwrap();
        let (spec, params) = katz(1.0, 0.5);
        let d = dhat(
            &s,
            spec,
            &params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        assert!(d.values()[0].abs() < 1e-15);
        assert!((d.values()[1] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_statistic() {
        let s = CountSample::from_values(&[0, 0, 1, 1]).unwrap();
        let (spec, params) = katz(1.0, 0.5);
        let stat = statistic(
            &s,
            spec,
            &params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        // d̂(k) = -0.75 * 0.5^(k-1) for k >= 1, so S = 0.5625 / (1 - 0.25).
        assert!((stat - 0.75).abs() < 1e-13, "{stat}");
        // brute force to k = 200
        let brute: f64 = dhat_prefix(&s, spec, &params, 201)
            .unwrap()
            .iter()
            .map(|d| d * d)
            .sum();
        assert!((stat - brute).abs() < 1e-13);
    }

    #[test]
    fn lambda_solving_first_residual() {
        let s = CountSample::from_values(&[0, 0, 0, 1, 1, 3, 4]).unwrap();
        for spec in [
            FamilySpec::Katz,
            FamilySpec::PoissonPoisson,
            FamilySpec::PoissonBinomial { nu: 3 },
        ] {
            let theta = 0.4;
            let q0 = crate::family::q_coeff(spec, &FittedParams::new(1.0, theta), 0).unwrap();
            let lambda = s.rel_freq(1) / (q0 * s.rel_freq(0));
            let d = dhat_prefix(&s, spec, &FittedParams::new(lambda, theta), 1).unwrap();
            assert!(d[0].abs() < 1e-15, "{spec}");
        }
    }

    #[test]
    fn weight_scaling_is_linear() {
        let s = CountSample::from_values(&[0, 1, 1, 2, 5]).unwrap();
        let (spec, params) = katz(1.2, 0.3);
        let d = dhat(
            &s,
            spec,
            &params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        let base: f64 = d.values().iter().map(|x| x * x).sum();
        let scaled: f64 = d.values().iter().map(|x| 0.25 * x * x).sum();
        assert!((scaled - 0.25 * base).abs() <= 1e-15 * base);
    }

    #[test]
    fn katz_tail_is_geometric() {
        let s = CountSample::from_values(&[0, 1, 3, 3, 6]).unwrap();
        let (spec, params) = katz(0.8, 0.6);
        let d = dhat_prefix(&s, spec, &params, 60).unwrap();
        let m1 = s.m1();
        for k in m1..59 {
            // -λ Σ_{u=k-M1}^{k} p̂_{k-u} θ^u
            let closed: f64 = -params.lambda
                * (k - m1..=k)
                    .map(|u| s.rel_freq(k - u) * params.theta.powi(u as i32))
                    .sum::<f64>();
            assert!((d[k] - closed).abs() < 1e-14);
            assert!((d[k + 1] - params.theta * d[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn poisson_binomial_tail_is_finite() {
        let s = CountSample::from_values(&[0, 1, 2, 2, 4]).unwrap();
        let spec = FamilySpec::PoissonBinomial { nu: 3 };
        let params = FittedParams::new(1.0, 0.6);
        let d = dhat(
            &s,
            spec,
            &params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        assert_eq!(d.tail_bound(), 0.0);
        let long = dhat_prefix(&s, spec, &params, 40).unwrap();
        assert!(long[s.m1() + 3..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn poisson_poisson_large_theta_does_not_stop_early() {
        // q_j is tiny for small j when θ is large; the sum must continue
        // past the mode of q.
        let s = CountSample::from_values(&[0, 1, 1, 2]).unwrap();
        let params = FittedParams::new(0.5, 40.0);
        let d = dhat(
            &s,
            FamilySpec::PoissonPoisson,
            &params,
            &WeightScheme::Constant,
            DEFAULT_TRUNC_TOL,
        )
        .unwrap();
        assert!(d.k_trunc() > s.m1() + 40);
        let stat = d.weighted_sum(&WeightScheme::Constant);
        let brute: f64 = dhat_prefix(&s, FamilySpec::PoissonPoisson, &params, 400)
            .unwrap()
            .iter()
            .map(|x| x * x)
            .sum();
        assert!((stat - brute).abs() <= d.tail_bound() + 1e-12);
    }

    #[test]
    fn zero_residuals_give_zero_statistic() {
        let d = DhatVector {
            values: alloc::vec![0.0; 10],
            tail_bound: 0.0,
        };
        for w in WeightScheme::PRESETS {
            assert_eq!(d.weighted_sum(&w), 0.0);
        }
    }

    #[test]
    fn bad_tolerance_rejected() {
        let s = CountSample::from_values(&[0, 1]).unwrap();
        let (spec, params) = katz(1.0, 0.5);
        assert!(dhat(&s, spec, &params, &WeightScheme::Constant, 0.0).is_err());
    }
}
