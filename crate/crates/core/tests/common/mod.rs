#![allow(dead_code)]

use gpgof_core::CountSample;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean and unbiased variance of a frequency table.
pub fn mean_var(s: &CountSample) -> (f64, f64) {
    (s.mean(), s.variance())
}

/// Standard error of the sample variance, from the sample's own fourth
/// central moment.
pub fn var_se(s: &CountSample) -> f64 {
    let m = s.mean();
    let n = s.n() as f64;
    let (mut m2, mut m4) = (0.0, 0.0);
    for (k, &c) in s.frequencies().iter().enumerate() {
        let d = k as f64 - m;
        m2 += c as f64 * d * d;
        m4 += c as f64 * d.powi(4);
    }
    m2 /= n;
    m4 /= n;
    ((m4 - m2 * m2) / n).sqrt()
}

/// Pearson goodness-of-fit p-value of `s` against `probs`, pooling cells
/// with expected count below 5 into their neighbours from the right.
pub fn chi_square_gof(s: &CountSample, probs: &[f64]) -> f64 {
    let n = s.n() as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, &p) in probs.iter().enumerate() {
        obs += s.frequencies().get(k).copied().unwrap_or(0) as f64;
        exp += n * p;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    // everything beyond the table and any unfinished pool joins the last cell
    let tail_obs = n - cells.iter().map(|c| c.0).sum::<f64>();
    let tail_exp = n - cells.iter().map(|c| c.1).sum::<f64>();
    if tail_exp >= 5.0 {
        cells.push((tail_obs, tail_exp));
    } else if let Some(last) = cells.last_mut() {
        last.0 += tail_obs;
        last.1 += tail_exp;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Two-sample chi-square homogeneity p-value.
pub fn chi_square_two_sample(a: &CountSample, b: &CountSample) -> f64 {
    let (na, nb) = (a.n() as f64, b.n() as f64);
    let len = a.frequencies().len().max(b.frequencies().len());
    let get = |s: &CountSample, k: usize| s.frequencies().get(k).copied().unwrap_or(0) as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut ca, mut cb) = (0.0, 0.0);
    for k in 0..len {
        ca += get(a, k);
        cb += get(b, k);
        if ca + cb >= 20.0 {
            cells.push((ca, cb));
            ca = 0.0;
            cb = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += ca;
        last.1 += cb;
    }
    let total = na + nb;
    let mut stat = 0.0;
    for (oa, ob) in &cells {
        let row = oa + ob;
        let (ea, eb) = (row * na / total, row * nb / total);
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let df = (cells.len().max(2) - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Negative binomial pmf with real size `r` and success probability `p`.
pub fn nb_pmf(r: f64, p: f64, k: usize) -> f64 {
    let kf = k as f64;
    (statrs::function::gamma::ln_gamma(kf + r)
        - statrs::function::gamma::ln_gamma(r)
        - statrs::function::gamma::ln_gamma(kf + 1.0)
        + r * p.ln()
        + kf * (1.0 - p).ln())
    .exp()
}
