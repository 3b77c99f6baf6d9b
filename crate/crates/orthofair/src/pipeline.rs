//! Whole-dataset debiasing as exposed by `orthofair debias`.

use std::path::Path;
use std::time::Instant;

use orthofair_core::projection::DebiasedView;
use orthofair_core::tabular::{center, standardize};
use orthofair_core::{build_basis, debias, interpolate, ColumnData, Dataset, Error as CoreError, ProtectedBasis, Role};

use crate::error::Result;
use crate::io::{write_columns, DebiasSidecar};

/// [`build_basis`] on centered rows, reporting a degenerate basis when
/// `raw` had protected columns but centering dropped them all as constant.
pub fn protected_basis(raw: &Dataset, prepared: &Dataset) -> Result<ProtectedBasis> {
    match build_basis(prepared) {
        Err(CoreError::NoProtectedColumns) if raw.with_role(Role::Protected).next().is_some() => {
            Err(CoreError::DegenerateProtected.into())
        }
        r => Ok(r?),
    }
}

pub struct DebiasRun {
    /// Centered (optionally standardized) copy of the input.
    pub prepared: Dataset,
    pub basis: ProtectedBasis,
    pub view: DebiasedView,
    pub sidecar: DebiasSidecar,
}

/// Centers `d`, builds the protected basis and returns `r'(lambda)` for
/// every feature column. `d` must already be fully numeric.
pub fn debias_dataset(d: &Dataset, lambda: f64, standardized: bool, suffix: &str) -> Result<DebiasRun> {
    let prepared = if standardized { standardize(d)? } else { center(d)? };
    for c in prepared.dropped_columns() {
        log::warn!("dropping constant column {c:?}");
    }

    let start = Instant::now();
    let basis = protected_basis(d, &prepared)?;
    let base = debias(&prepared, &basis)?;
    let view = if lambda == 0.0 {
        base
    } else {
        interpolate(&base, &prepared, lambda, &basis)?
    };
    let wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;

    for c in basis.dropped_columns() {
        log::warn!("protected column {c:?} is linearly dependent on earlier ones; dropped");
    }
    for c in view.zero_residual_columns() {
        log::warn!("feature {c:?} lies in the protected span; its residual is zero");
    }

    let sidecar = DebiasSidecar {
        lambda,
        n_rows: prepared.n_rows(),
        n_features: view.source_columns().len(),
        n_protected: basis.n_protected(),
        rank: basis.rank(),
        basis_columns: basis.columns().to_vec(),
        dropped_columns: basis.dropped_columns().to_vec(),
        constant_columns: prepared.dropped_columns().to_vec(),
        zero_residual_columns: view.zero_residual_columns().to_vec(),
        max_residual_correlation: view.max_residual_correlation(),
        mean_fidelity: view.mean_fidelity(&prepared)?,
        standardized,
        suffix: suffix.to_string(),
        wall_clock_ms,
    };
    Ok(DebiasRun {
        prepared,
        basis,
        view,
        sidecar,
    })
}

/// Writes the debiased features (renamed with the sidecar suffix) followed
/// by the protected and outcome columns of `raw`, unchanged.
pub fn write_debiased(path: impl AsRef<Path>, raw: &Dataset, run: &DebiasRun) -> Result<()> {
    let suffix = &run.sidecar.suffix;
    let mut names: Vec<String> = run
        .view
        .source_columns()
        .iter()
        .map(|n| format!("{n}{suffix}"))
        .collect();
    let features: Vec<ColumnData> = run
        .view
        .values()
        .iter()
        .map(|v| ColumnData::Numeric(v.clone()))
        .collect();
    let mut data: Vec<&ColumnData> = features.iter().collect();
    for c in raw.columns().iter().filter(|c| !c.is_role(Role::Feature)) {
        names.push(c.name.clone());
        data.push(&c.data);
    }
    write_columns(path, &names, &data)
}
