use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest count value accepted in a sample. The frequency table is dense,
/// so this bounds memory.
pub const MAX_COUNT_VALUE: u64 = 10_000_000;

/// A sample of nonnegative integer counts, stored as its frequency table.
///
/// `freq[k]` is the number of observations equal to `k`; the last entry is
/// always nonzero, so `freq.len() == m1 + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CountSample {
    freq: Vec<u64>,
    n: u64,
}

impl CountSample {
    pub fn from_values(values: &[u64]) -> Result<Self> {
        let m1 = *values.iter().max().ok_or(Error::EmptySample)?;
        if m1 > MAX_COUNT_VALUE {
            return Err(Error::Precondition("count value exceeds supported maximum"));
        }
        let mut freq = vec![0u64; m1 as usize + 1];
        for &v in values {
            freq[v as usize] += 1;
        }
        Ok(CountSample {
            freq,
            n: values.len() as u64,
        })
    }

    /// Builds a sample from `(value, count)` pairs. Repeated values accumulate.
    pub fn from_frequencies<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut freq: Vec<u64> = Vec::new();
        let mut n = 0u64;
        for (value, count) in pairs {
            if value > MAX_COUNT_VALUE {
                return Err(Error::Precondition("count value exceeds supported maximum"));
            }
            if count == 0 {
                continue;
            }
            let idx = value as usize;
            if freq.len() <= idx {
                freq.resize(idx + 1, 0);
            }
            freq[idx] += count;
            n += count;
        }
        if n == 0 {
            return Err(Error::EmptySample);
        }
        while freq.last() == Some(&0) {
            freq.pop();
        }
        Ok(CountSample { freq, n })
    }

    pub(crate) fn from_freq_unchecked(freq: Vec<u64>, n: u64) -> Self {
        debug_assert!(freq.last().is_some_and(|&c| c > 0));
        CountSample { freq, n }
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Maximum observed value `M1`.
    #[inline]
    pub fn m1(&self) -> usize {
        self.freq.len() - 1
    }

    #[inline]
    pub fn frequencies(&self) -> &[u64] {
        &self.freq
    }

    /// Relative frequency `p̂_k`; zero beyond `M1`.
    #[inline]
    pub fn rel_freq(&self, k: usize) -> f64 {
        self.freq.get(k).map_or(0.0, |&c| c as f64 / self.n as f64)
    }

    pub fn rel_freqs(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.freq.iter().map(|&c| c as f64 / n).collect()
    }

    /// Empirical cdf `F_n(j)`.
    pub fn ecdf(&self, j: usize) -> f64 {
        if j >= self.m1() {
            return 1.0;
        }
        let below: u64 = self.freq[..=j].iter().sum();
        below as f64 / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        let (s1, _) = self.power_sums();
        s1 as f64 / self.n as f64
    }

    /// Unbiased sample variance, computed from exact integer power sums.
    /// Zero for `n < 2`.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let (s1, s2) = self.power_sums();
        let n = self.n as u128;
        // n Σx² − (Σx)² is exact in u128 for every supported sample.
        let num = n * s2 - s1 * s1;
        num as f64 / (n * (n - 1)) as f64
    }

    pub fn has_zero_variance(&self) -> bool {
        self.freq.iter().filter(|&&c| c > 0).count() < 2
    }

    fn power_sums(&self) -> (u128, u128) {
        let mut s1 = 0u128;
        let mut s2 = 0u128;
        for (k, &c) in self.freq.iter().enumerate() {
            let k = k as u128;
            s1 += k * c as u128;
            s2 += k * k * c as u128;
        }
        (s1, s2)
    }
}
