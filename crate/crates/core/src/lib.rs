//! Transductive conformal inference with asymptotic guarantees.
//!
//! The crate computes conformal and weighted conformal p-values from score
//! samples, the false coverage proportion (FCP) process and the
//! Benjamini-Hochberg procedure on those p-values, and the large-sample limit
//! theory for all of them: Kolmogorov-calibrated uniform bands, pointwise
//! confidence intervals under distribution shift, asymptotic FDP/TDP moments,
//! and samplers for the Gaussian limit processes. A seeded Monte Carlo harness
//! ([`simulate`]) checks the theory against simulation.
//!
//! ```
//! use confasym::conformal::conformal_pvalues;
//!
//! let p = conformal_pvalues(&[0.1, 0.4, 0.7], &[0.5, 0.05]).unwrap();
//! assert_eq!(p.values, vec![0.5, 1.0]);
//! ```

// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod distributions;
pub mod empirical;
pub mod error;
pub mod io;
pub mod limit_sampler;
pub mod limits;
pub mod numerics;
pub mod rng;
pub mod simulate;

pub use distributions::{oracle_weight, DistributionSpec, WeightKind, WeightSpec};
pub use error::{Error, Result};
pub use rng::SeededRng;

/// Version tag written into every JSON and config document.
pub const SCHEMA_VERSION: u32 = 1;
