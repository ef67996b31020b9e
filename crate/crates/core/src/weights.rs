use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// The weight sequence `w_k` of the weighted statistic. Every scheme satisfies
/// `0 < w_k <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WeightScheme {
    Constant,
    /// Negative binomial pmf: failures before `size` successes with success
    /// probability `prob`.
    NegBinomialPmf {
        size: u32,
        prob: f64,
    },
}

impl WeightScheme {
    /// The seven standard schemes, `S1` ... `S7`.
    pub const PRESETS: [WeightScheme; 7] = [
        WeightScheme::Constant,
        WeightScheme::NegBinomialPmf {
            size: 2,
            prob: 0.25,
        },
        WeightScheme::NegBinomialPmf { size: 2, prob: 0.5 },
        WeightScheme::NegBinomialPmf {
            size: 2,
            prob: 0.75,
        },
        WeightScheme::NegBinomialPmf {
            size: 4,
            prob: 0.25,
        },
        WeightScheme::NegBinomialPmf { size: 4, prob: 0.5 },
        WeightScheme::NegBinomialPmf {
            size: 4,
            prob: 0.75,
        },
    ];

    /// Preset `S{index}`, `index` in `1..=7`.
    pub fn preset(index: usize) -> Option<WeightScheme> {
        index
            .checked_sub(1)
            .and_then(|i| Self::PRESETS.get(i))
            .copied()
    }

    /// Index of the matching preset, if any.
    pub fn preset_index(&self) -> Option<usize> {
        Self::PRESETS.iter().position(|p| p == self).map(|i| i + 1)
    }

    /// `w_0, ..., w_{len-1}`.
    pub fn weights(&self, len: usize) -> Vec<f64> {
        match *self {
            WeightScheme::Constant => alloc::vec![1.0; len],
            WeightScheme::NegBinomialPmf { size, prob } => {
                let mut out = Vec::with_capacity(len);
                let mut w = prob.powi(size as i32);
                for k in 0..len {
                    out.push(w);
                    w *= (k as f64 + size as f64) / (k as f64 + 1.0) * (1.0 - prob);
                }
                out
            }
        }
    }
}

/// `w_k` for a single index.
pub fn weight(scheme: &WeightScheme, k: usize) -> f64 {
    match *scheme {
        WeightScheme::Constant => 1.0,
        WeightScheme::NegBinomialPmf { size, prob } => {
            let (kf, r) = (k as f64, size as f64);
            let ln_choose = libm::lgamma(kf + r) - libm::lgamma(kf + 1.0) - libm::lgamma(r);
            (ln_choose + r * prob.ln() + kf * (1.0 - prob).ln()).exp()
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.preset_index(), self) {
            (Some(i), _) => write!(f, "s{i}"),
            (None, WeightScheme::Constant) => f.write_str("const"),
            (None, WeightScheme::NegBinomialPmf { size, prob }) => write!(f, "nb:{size},{prob}"),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    /// Accepts `s1`..`s7`, `const` and `nb:<size>,<prob>`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim().to_ascii_lowercase();
        if t == "const" {
            return Ok(WeightScheme::Constant);
        }
        if let Some(i) = t.strip_prefix('s').and_then(|i| i.parse::<usize>().ok()) {
            return WeightScheme::preset(i)
                .ok_or_else(|| Error::Parse(format!("weight preset `{t}` out of range s1..s7")));
        }
        if let Some(args) = t.strip_prefix("nb:") {
            let mut it = args.split(',');
            let size = it.next().and_then(|x| x.trim().parse::<u32>().ok());
            let prob = it.next().and_then(|x| x.trim().parse::<f64>().ok());
            if let (Some(size), Some(prob), None) = (size, prob, it.next()) {
                if size >= 1 && prob > 0.0 && prob < 1.0 {
                    return Ok(WeightScheme::NegBinomialPmf { size, prob });
                }
            }
        }
        Err(Error::Parse(format!(
            "invalid weight scheme `{t}` (expected s1..s7, const or nb:<size>,<prob>)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_percentages() {
        let s4 = WeightScheme::preset(4).unwrap();
        let s7 = WeightScheme::preset(7).unwrap();
        assert!((weight(&s4, 0) - 0.5625).abs() < 5e-6);
        assert!((weight(&s4, 1) - 0.28125).abs() < 5e-6);
        assert!((weight(&s4, 2) - 0.10547).abs() < 5e-6);
        assert!((weight(&s7, 0) - 0.31641).abs() < 5e-6);
        assert!((weight(&s7, 1) - 0.31641).abs() < 5e-6);
        assert!((weight(&s7, 2) - 0.19775).abs() < 5e-6);
        assert!((weight(&s7, 3) - 0.09888).abs() < 5e-6);
    }

    #[test]
    fn vector_and_pointwise_agree() {
        for scheme in WeightScheme::PRESETS {
            let w = scheme.weights(60);
            for (k, &wk) in w.iter().enumerate() {
                assert!(
                    (wk - weight(&scheme, k)).abs() <= 1e-13 * wk.max(1e-300),
                    "{scheme} {k}"
                );
                assert!(wk > 0.0 && wk <= 1.0);
            }
        }
    }

    #[test]
    fn nb_weights_sum_to_one() {
        for scheme in &WeightScheme::PRESETS[1..] {
            let total: f64 = scheme.weights(2000).iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "{scheme}");
        }
    }

    #[test]
    fn parse_round_trip() {
        for i in 1..=7 {
            let s = WeightScheme::preset(i).unwrap();
            assert_eq!(
                alloc::string::ToString::to_string(&s)
                    .parse::<WeightScheme>()
                    .unwrap(),
                s
            );
        }
        assert_eq!(
            "nb:3,0.4".parse::<WeightScheme>().unwrap(),
            WeightScheme::NegBinomialPmf { size: 3, prob: 0.4 }
        );
        assert!("s8".parse::<WeightScheme>().is_err());
        assert!("s0".parse::<WeightScheme>().is_err());
    }
}
