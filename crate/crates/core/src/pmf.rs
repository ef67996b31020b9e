//! Probability tables built from the characterizing recurrence
//! `(k+1) p_{k+1} = λ Σ_{u=0}^{k} p_u q_{k-u}(θ)`, and inverse-cdf sampling
//! against them.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::family::{FamilySpec, FittedParams, QSequence};
use crate::sample::CountSample;

pub const DEFAULT_MASS_TOL: f64 = 1e-12;
/// Hard cap on the number of tabled probabilities.
pub const PMF_HARD_CAP: usize = 1_000_000;

/// `p_0, ..., p_K` with the mass left out of the table.
#[derive(Debug, Clone)]
pub struct PmfTable {
    spec: FamilySpec,
    params: FittedParams,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    // Neumaier-compensated running sum of probs.
    sum: f64,
    comp: f64,
    q: QSequence,
    // Katz only: Σ_{u≤k} p_u θ^{k-u}, updated in O(1) per step.
    katz_conv: f64,
}

/// Builds the table until the untabled mass drops below `mass_tol`.
pub fn pmf_table(spec: FamilySpec, params: &FittedParams, mass_tol: f64) -> Result<PmfTable> {
    if !(mass_tol > 0.0 && mass_tol <= 1e-6) {
        return Err(Error::Precondition("mass_tol must lie in (0, 1e-6]"));
    }
    let mut table = PmfTable::start(spec, params)?;
    table.extend_to_tail(mass_tol)?;
    Ok(table)
}

impl PmfTable {
    fn start(spec: FamilySpec, params: &FittedParams) -> Result<Self> {
        spec.validate(params)?;
        let p0 = spec.p0(params);
        if !(p0 >= f64::MIN_POSITIVE) {
            return Err(Error::PmfUnderflow);
        }
        let mut t = PmfTable {
            spec,
            params: *params,
            probs: Vec::with_capacity(64),
            cdf: Vec::with_capacity(64),
            sum: 0.0,
            comp: 0.0,
            q: QSequence::new(spec, params),
            katz_conv: 0.0,
        };
        t.push(p0);
        Ok(t)
    }

    fn push(&mut self, p: f64) {
        let t = self.sum + p;
        if self.sum.abs() >= p.abs() {
            self.comp += (self.sum - t) + p;
        } else {
            self.comp += (p - t) + self.sum;
        }
        self.sum = t;
        self.probs.push(p);
        self.cdf.push(self.sum + self.comp);
        if let FamilySpec::Katz = self.spec {
            self.katz_conv = self.katz_conv * self.params.theta + p;
        }
    }

    /// λ Σ_{u=0}^{k} p_u q_{k-u} with k the last tabled index.
    fn convolution(&mut self) -> f64 {
        let k = self.probs.len() - 1;
        let conv = match self.spec {
            FamilySpec::Katz => self.katz_conv,
            _ => {
                self.q.ensure(k + 1);
                let q = self.q.as_slice();
                let terms = q.len().min(k + 1);
                let mut acc = 0.0;
                for (j, &qj) in q[..terms].iter().enumerate() {
                    acc += self.probs[k - j] * qj;
                }
                acc
            }
        };
        self.params.lambda * conv
    }

    fn next_prob(&mut self) -> f64 {
        let k = self.probs.len() - 1;
        self.convolution() / (k as f64 + 1.0)
    }

    /// Extends the table until `cdf_tail() < tol`.
    pub fn extend_to_tail(&mut self, tol: f64) -> Result<()> {
        let mut peak = 0.0f64;
        while self.cdf_tail() >= tol {
            if self.probs.len() >= PMF_HARD_CAP {
                return Err(Error::PmfCap { cap: PMF_HARD_CAP });
            }
            let p = self.next_prob();
            let last = *self.probs.last().unwrap_or(&0.0);
            peak = peak.max(last);
            // Past the mode, terms below double resolution cannot move the
            // running sum any further.
            if p < last && p < f64::EPSILON * 1e-3 * peak.max(f64::MIN_POSITIVE) && p < tol {
                if p > 0.0 {
                    self.push(p);
                }
                break;
            }
            self.push(p);
        }
        Ok(())
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn params(&self) -> &FittedParams {
        &self.params
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Last tabled index `K`.
    #[inline]
    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `1 - Σ p_k`, never negative.
    #[inline]
    pub fn cdf_tail(&self) -> f64 {
        (1.0 - (self.sum + self.comp)).max(0.0)
    }

    #[inline]
    pub fn pmf(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// `F(k)`; beyond the table the untabled tail is treated as lying past `k`.
    #[inline]
    pub fn cdf(&self, k: usize) -> f64 {
        self.cdf
            .get(k)
            .copied()
            .unwrap_or_else(|| self.cdf.last().copied().unwrap_or(0.0))
    }

    /// Survival `1 - F(k)` summed from the upper tail, which keeps relative
    /// accuracy where `F(k)` is close to one.
    pub fn survival(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.probs.len()];
        let mut acc = self.cdf_tail();
        for k in (0..self.probs.len()).rev() {
            out[k] = acc;
            acc += self.probs[k];
        }
        out
    }

    /// Smallest tabled `k` with `F(k) > u`.
    fn quantile_tabled(&self, u: f64) -> Option<usize> {
        let idx = self.cdf.partition_point(|&c| c <= u);
        (idx < self.cdf.len()).then_some(idx)
    }
}

/// Inverse-cdf sampler for a fixed GP law.
#[derive(Debug, Clone)]
pub struct Sampler {
    table: PmfTable,
}

impl Sampler {
    pub fn new(spec: FamilySpec, params: &FittedParams) -> Result<Self> {
        Ok(Sampler {
            table: pmf_table(spec, params, DEFAULT_MASS_TOL)?,
        })
    }

    pub fn from_table(table: PmfTable) -> Self {
        Sampler { table }
    }

    pub fn table(&self) -> &PmfTable {
        &self.table
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        if let Some(k) = self.table.quantile_tabled(u) {
            return k as u64;
        }
        // u landed in the untabled tail (probability < mass_tol).
        let mut ext = self.table.clone();
        while ext.cdf.last().is_some_and(|&c| c <= u) {
            if ext.probs.len() >= PMF_HARD_CAP {
                break;
            }
            let p = ext.next_prob();
            if p <= 0.0 {
                break;
            }
            ext.push(p);
        }
        ext.quantile_tabled(u).unwrap_or(ext.k_max()) as u64
    }

    /// Draws `n` observations into a frequency table.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<CountSample> {
        if n == 0 {
            return Err(Error::Precondition("sample size must be at least 1"));
        }
        Ok(self.fill(n, rng))
    }

    /// `n` must be positive.
    pub(crate) fn fill<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> CountSample {
        let mut freq: Vec<u64> = alloc::vec![0; self.table.probs.len()];
        for _ in 0..n {
            let k = self.draw(rng) as usize;
            if k >= freq.len() {
                freq.resize(k + 1, 0);
            }
            freq[k] += 1;
        }
        while freq.last() == Some(&0) {
            freq.pop();
        }
        CountSample::from_freq_unchecked(freq, n as u64)
    }
}

/// Draws an iid sample of size `n` from the GP law.
pub fn sample<R: Rng + ?Sized>(
    spec: FamilySpec,
    params: &FittedParams,
    n: usize,
    rng: &mut R,
) -> Result<CountSample> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1"));
    }
    Sampler::new(spec, params)?.sample(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::q_coeff;
    use crate::rng::substream;

    fn p(lambda: f64, theta: f64) -> FittedParams {
        FittedParams::new(lambda, theta)
    }

    /// Negative binomial pmf with real size `r` and success probability `s`,
    /// evaluated from its closed form.
    fn nb_pmf(r: f64, s: f64, k: usize) -> f64 {
        let kf = k as f64;
        (libm::lgamma(kf + r) - libm::lgamma(r) - libm::lgamma(kf + 1.0)
            + r * s.ln()
            + kf * (1.0 - s).ln())
        .exp()
    }

    #[test]
    fn katz_p0_example() {
        let t = pmf_table(FamilySpec::Katz, &p(1.0, 0.5), DEFAULT_MASS_TOL).unwrap();
        assert!((t.pmf(0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn katz_matches_negative_binomial() {
        let (lambda, theta) = (2.0, 0.5);
        let t = pmf_table(FamilySpec::Katz, &p(lambda, theta), DEFAULT_MASS_TOL).unwrap();
        for (k, &pk) in t.probs().iter().enumerate() {
            let oracle = nb_pmf(lambda / theta, 1.0 - theta, k);
            assert!((pk - oracle).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn poisson_poisson_p0_example() {
        let t = pmf_table(FamilySpec::PoissonPoisson, &p(1.0, 1.0), DEFAULT_MASS_TOL).unwrap();
        assert!((t.pmf(0) - 0.531_464).abs() < 5e-7);
        assert!((t.pmf(0) - (-(1.0 - (-1.0f64).exp())).exp()).abs() < 1e-15);
    }

    #[test]
    fn normalization_and_recurrence() {
        let cases = [
            (FamilySpec::Katz, p(2.0, 0.5)),
            (FamilySpec::PoissonPoisson, p(1.0, 2.0)),
            (FamilySpec::PoissonBinomial { nu: 3 }, p(2.0, 0.75)),
        ];
        for (spec, params) in cases {
            let t = pmf_table(spec, &params, DEFAULT_MASS_TOL).unwrap();
            let total: f64 = t.probs().iter().sum();
            assert!((total + t.cdf_tail() - 1.0).abs() < 1e-12);
            assert!(t.cdf_tail() < DEFAULT_MASS_TOL);
            assert!(t.probs().iter().all(|&x| x > 0.0));
            for k in 0..t.k_max() {
                let rhs: f64 = (0..=k)
                    .map(|u| t.pmf(u) * q_coeff(spec, &params, k - u).unwrap())
                    .sum::<f64>()
                    * params.lambda;
                assert!(((k as f64 + 1.0) * t.pmf(k + 1) - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn moments_from_table() {
        let t = pmf_table(FamilySpec::Katz, &p(2.0, 0.5), DEFAULT_MASS_TOL).unwrap();
        let mean: f64 = t
            .probs()
            .iter()
            .enumerate()
            .map(|(k, &x)| k as f64 * x)
            .sum();
        let m2: f64 = t
            .probs()
            .iter()
            .enumerate()
            .map(|(k, &x)| (k * k) as f64 * x)
            .sum();
        assert!((mean - 4.0).abs() < 1e-8);
        assert!((m2 - mean * mean - 8.0).abs() < 1e-8);
    }

    #[test]
    fn mass_tol_precondition() {
        assert!(pmf_table(FamilySpec::Katz, &p(1.0, 0.5), 0.0).is_err());
        assert!(pmf_table(FamilySpec::Katz, &p(1.0, 0.5), 1e-3).is_err());
    }

    #[test]
    fn near_one_theta_hits_cap() {
        let err = pmf_table(FamilySpec::Katz, &p(1.0, 1.0 - 1e-7), DEFAULT_MASS_TOL).unwrap_err();
        assert_eq!(err, Error::PmfCap { cap: PMF_HARD_CAP });
    }

    #[test]
    fn underflowing_p0_is_an_error() {
        let err = pmf_table(
            FamilySpec::PoissonPoisson,
            &p(2000.0, 1.0),
            DEFAULT_MASS_TOL,
        );
        assert_eq!(err.unwrap_err(), Error::PmfUnderflow);
    }

    #[test]
    fn sampler_zero_n_rejected() {
        let mut rng = substream(1, &[]);
        assert!(sample(FamilySpec::Katz, &p(2.0, 0.5), 0, &mut rng).is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample(FamilySpec::Katz, &p(2.0, 0.5), 500, &mut substream(3, &[1])).unwrap();
        let b = sample(FamilySpec::Katz, &p(2.0, 0.5), 500, &mut substream(3, &[1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 500);
    }

    #[test]
    fn survival_is_complement() {
        let t = pmf_table(FamilySpec::PoissonPoisson, &p(1.0, 1.0), DEFAULT_MASS_TOL).unwrap();
        let s = t.survival();
        for (k, sk) in s.iter().enumerate() {
            assert!((sk + t.cdf(k) - 1.0).abs() < 1e-14);
        }
    }
}
