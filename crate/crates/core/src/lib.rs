//! Linear decorrelation of tabular features from protected attributes.
//!
//! Features are centered, the protected columns are orthonormalized with
//! modified Gram–Schmidt, and every feature column is replaced by its
//! residual after projecting out the protected subspace. A fairness level
//! `lambda` in `[0, 1]` interpolates between the fully decorrelated residual
//! (`0`) and the original feature (`1`).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the sweep
//! runner and the command-line tool live in the `orthofair` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod projection;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};
pub use metrics::{MetricsReport, ProtectedSlice};
pub use models::{FeatureMatrix, FittedModel, ModelKind, Predictions};
pub use projection::{build_basis, debias, debias_outcome, interpolate, DebiasedView, ProtectedBasis};
pub use tabular::{Column, ColumnData, ColumnRole, Dataset, Role, SplitPlan, SplitScheme};
