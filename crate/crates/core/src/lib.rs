//! Evaluation of synthetic tabular data against the dataset it was derived from.
//!
//! Three families of metrics are provided:
//!
//! * privacy: distance-based scores ([`distance_privacy`]) and simulated
//!   singling-out / linkability / attribute-inference attacks ([`attack_privacy`]);
//! * statistical similarity ([`similarity`]);
//! * machine-learning utility through train-synthetic-test-real runs ([`ml_utility`]).
//!
//! [`generators`] contains simple baseline synthesizers (Gaussian mixture,
//! Gaussian copula, random resampling) so that the whole pipeline can be
//! exercised without external tooling, and [`report`] ties everything
//! together behind a JSON configuration.

pub mod attack_privacy;
pub mod distance_privacy;
pub mod error;
pub mod generators;
pub mod ml_utility;
pub mod neighbors;
pub mod outcome;
pub mod report;
pub mod rng;
pub mod similarity;
pub mod tabular;

pub use error::{Error, Result};
pub use tabular::{Column, ColumnKind, ColumnSpec, Dataset, Schema, Value};
