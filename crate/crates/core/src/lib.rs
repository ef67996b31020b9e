//! Goodness-of-fit tests for generalized Poisson (GP) count models.
//!
//! A GP law is characterized by the recurrence
//! `(k+1) p_{k+1} = λ Σ_{u≤k} p_u q_{k-u}(θ)` where the sequence `q_k(θ)`
//! identifies the family. The test statistic measures how far the empirical
//! frequencies are from satisfying that recurrence, weighted by a bounded
//! positive sequence, and is calibrated with a parametric bootstrap.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, the command line
//! front-end and the parallel Monte Carlo harness live in the `gpgof` crate.

#![no_std]
#![deny(unsafe_code)]
// Range checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod alternatives;
pub mod bootstrap;
pub mod dhat;
pub mod diagnostics;
pub mod edf;
mod error;
pub mod family;
pub mod pmf;
pub mod rng;
pub mod sample;
pub mod weights;

pub use alternatives::{sample_alt, AlternativeSpec};
pub use bootstrap::{
    bootstrap_test, bootstrap_test_many, reject, BootstrapSetup, GofTestResult, Statistic,
};
pub use dhat::{dhat, statistic, DhatVector, DEFAULT_TRUNC_TOL};
pub use diagnostics::{diagnostics, Recommendation, WeightDiagnostics};
pub use edf::{ad_statistic, cvm_statistic, EdfStatistic};
pub use error::{Error, Result};
pub use family::{estimate_moments, moments, q_coeff, FamilySpec, FittedParams};
pub use pmf::{pmf_table, PmfTable, Sampler, DEFAULT_MASS_TOL};
pub use sample::CountSample;
pub use weights::{weight, WeightScheme};
