//! Orthonormal protected basis and the fair representations built from it.
//!
//! For a centered feature `x` and an orthonormal basis `q_1..q_k` of the
//! protected columns, the fair residual is `r = x - sum_i (x . q_i) q_i`,
//! applied as rank-1 updates so the `n x n` projector is never formed.
//! `r'(lambda) = r + lambda (x - r)` moves back towards `x`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::linalg::{cosine, dot, norm, sub_scaled};
use crate::tabular::{Dataset, Role};

/// Relative residual norm below which a protected column counts as dependent.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-10;

/// Relative residual norm below which a feature lies inside the protected span.
pub const ZERO_RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Removes the components of `v` along the orthonormal `basis`, in place.
///
/// Two modified Gram–Schmidt sweeps; the second one cleans up the rounding
/// left by the first. Returns the accumulated coefficient per basis vector,
/// so that `v_in = v_out + sum_i coef_i q_i`.
fn remove_components(v: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coef = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, q) in coef.iter_mut().zip(basis) {
            let a = dot(q, v);
            sub_scaled(v, a, q);
            *c += a;
        }
    }
    coef
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedBasis {
    vectors: Vec<Vec<f64>>,
    columns: Vec<String>,
    // p_i = sum_{k<i} coefficients[i][k] q_k + diag[i] q_i
    coefficients: Vec<Vec<f64>>,
    diag: Vec<f64>,
    drop_tolerance: f64,
    dropped_columns: Vec<String>,
    n_protected: usize,
}

impl ProtectedBasis {
    /// Unit basis vectors `q_i`, one per kept protected column.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Protected columns that contributed a basis vector, in order.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped_columns
    }

    pub fn drop_tolerance(&self) -> f64 {
        self.drop_tolerance
    }

    /// Number of protected columns offered to Gram–Schmidt.
    pub fn n_protected(&self) -> usize {
        self.n_protected
    }

    pub fn n_rows(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Evaluates the basis on other rows (e.g. a test set centered with the
    /// training statistics) by replaying the Gram–Schmidt recurrence with the
    /// coefficients fitted here. On the fitting rows this reproduces
    /// [`ProtectedBasis::vectors`] up to rounding.
    pub fn extend_rows(&self, d: &Dataset) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.rank());
        for (i, name) in self.columns.iter().enumerate() {
            let col = d
                .column(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            let mut v = col.values()?.to_vec();
            for (k, q) in out.iter().enumerate() {
                sub_scaled(&mut v, self.coefficients[i][k], q);
            }
            let inv = 1.0 / self.diag[i];
            v.iter_mut().for_each(|x| *x *= inv);
            out.push(v);
        }
        Ok(out)
    }
}

/// Modified Gram–Schmidt over the protected columns of a centered dataset,
/// in declared order, with the default drop tolerance.
pub fn build_basis(d: &Dataset) -> Result<ProtectedBasis> {
    build_basis_with_tolerance(d, DEFAULT_DROP_TOLERANCE)
}

pub fn build_basis_with_tolerance(d: &Dataset, drop_tolerance: f64) -> Result<ProtectedBasis> {
    if !d.is_centered() {
        return Err(Error::NotCentered);
    }
    let mut basis = ProtectedBasis {
        vectors: Vec::new(),
        columns: Vec::new(),
        coefficients: Vec::new(),
        diag: Vec::new(),
        drop_tolerance,
        dropped_columns: Vec::new(),
        n_protected: 0,
    };
    for col in d.with_role(Role::Protected) {
        basis.n_protected += 1;
        let p = col.values()?;
        let original = norm(p);
        let mut v = p.to_vec();
        let coef = remove_components(&mut v, &basis.vectors);
        let residual = norm(&v);
        if original == 0.0 || residual <= drop_tolerance * original {
            basis.dropped_columns.push(col.name.clone());
            continue;
        }
        let inv = 1.0 / residual;
        v.iter_mut().for_each(|x| *x *= inv);
        basis.vectors.push(v);
        basis.columns.push(col.name.clone());
        basis.coefficients.push(coef);
        basis.diag.push(residual);
    }
    if basis.n_protected == 0 {
        return Err(Error::NoProtectedColumns);
    }
    if basis.vectors.is_empty() {
        return Err(Error::DegenerateProtected);
    }
    Ok(basis)
}

/// Residual of a single vector: `(I - P) x` and its loadings `x . q_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub values: Vec<f64>,
    pub loadings: Vec<f64>,
}

pub fn residualize(x: &[f64], basis: &ProtectedBasis) -> Result<Residual> {
    if x.len() != basis.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_rows(),
            got: x.len(),
        });
    }
    let mut values = x.to_vec();
    let loadings = remove_components(&mut values, &basis.vectors);
    Ok(Residual { values, loadings })
}

/// Fair representation of the feature block at one fairness level.
#[derive(Debug, Clone, PartialEq)]
pub struct DebiasedView {
    values: Vec<Vec<f64>>,
    lambda: f64,
    source_columns: Vec<String>,
    residual_correlations: Vec<Vec<f64>>,
    loadings: Vec<Vec<f64>>,
    zero_residual_columns: Vec<String>,
}

impl DebiasedView {
    /// One column per source feature.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec<f64>> {
        self.values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn source_columns(&self) -> &[String] {
        &self.source_columns
    }

    /// `|corr(r'_j, q_i)|`, one row per feature, one entry per basis vector.
    pub fn residual_correlations(&self) -> &[Vec<f64>] {
        &self.residual_correlations
    }

    /// Features whose residual vanished (they lie in the protected span);
    /// their correlations are reported as 0.
    pub fn zero_residual_columns(&self) -> &[String] {
        &self.zero_residual_columns
    }

    /// Projection coefficients `x_j . q_i` fitted on the basis rows.
    pub fn loadings(&self) -> &[Vec<f64>] {
        &self.loadings
    }

    pub fn max_residual_correlation(&self) -> f64 {
        self.residual_correlations
            .iter()
            .flatten()
            .fold(0.0, |acc: f64, &c| acc.max(c))
    }

    /// Mean of `corr(r'_j, x_j)` over features with a non-zero representation.
    pub fn mean_fidelity(&self, d: &Dataset) -> Result<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (name, r) in self.source_columns.iter().zip(&self.values) {
            let x = d
                .column(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?
                .values()?;
            if let Some(c) = cosine(r, x) {
                sum += c;
                count += 1;
            }
        }
        Ok(if count == 0 { 0.0 } else { sum / count as f64 })
    }

    /// Applies the fitted projection to other rows at fairness level `lambda`.
    ///
    /// `other` must carry the same feature and protected columns, centered
    /// with the statistics of the rows the basis was built on.
    pub fn transform_rows(
        &self,
        basis: &ProtectedBasis,
        other: &Dataset,
        lambda: f64,
    ) -> Result<Vec<Vec<f64>>> {
        check_lambda(lambda)?;
        let q = basis.extend_rows(other)?;
        self.source_columns
            .iter()
            .zip(&self.loadings)
            .map(|(name, loadings)| {
                let x = other
                    .column(name)
                    .ok_or_else(|| Error::UnknownColumn(name.clone()))?
                    .values()?;
                let mut r = x.to_vec();
                for (a, qi) in loadings.iter().zip(&q) {
                    sub_scaled(&mut r, *a, qi);
                }
                Ok(blend(&r, x, lambda))
            })
            .collect()
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// `r + lambda (x - r)`, exact at both endpoints.
fn blend(r: &[f64], x: &[f64], lambda: f64) -> Vec<f64> {
    if lambda == 0.0 {
        r.to_vec()
    } else if lambda == 1.0 {
        x.to_vec()
    } else {
        r.iter().zip(x).map(|(ri, xi)| ri + lambda * (xi - ri)).collect()
    }
}

fn correlations(r: &[f64], x: &[f64], basis: &ProtectedBasis) -> Option<Vec<f64>> {
    let rn = norm(r);
    if rn == 0.0 || rn <= ZERO_RESIDUAL_TOLERANCE * norm(x) {
        return None;
    }
    Some(
        basis
            .vectors
            .iter()
            .map(|q| cosine(r, q).map_or(0.0, f64::abs))
            .collect(),
    )
}

fn assemble(
    values: Vec<Vec<f64>>,
    sources: &[&[f64]],
    names: Vec<String>,
    loadings: Vec<Vec<f64>>,
    lambda: f64,
    basis: &ProtectedBasis,
) -> DebiasedView {
    let mut residual_correlations = Vec::with_capacity(values.len());
    let mut zero_residual_columns = Vec::new();
    for ((r, x), name) in values.iter().zip(sources).zip(&names) {
        match correlations(r, x, basis) {
            Some(c) => residual_correlations.push(c),
            None => {
                residual_correlations.push(vec![0.0; basis.rank()]);
                zero_residual_columns.push(name.clone());
            }
        }
    }
    DebiasedView {
        values,
        lambda,
        source_columns: names,
        residual_correlations,
        loadings,
        zero_residual_columns,
    }
}

fn feature_block(d: &Dataset) -> Result<(Vec<String>, Vec<&[f64]>)> {
    let mut names = Vec::new();
    let mut cols = Vec::new();
    for c in d.with_role(Role::Feature) {
        names.push(c.name.clone());
        cols.push(c.values()?);
    }
    Ok((names, cols))
}

/// Fully decorrelated representation (`lambda = 0`) of every feature column.
pub fn debias(d: &Dataset, b: &ProtectedBasis) -> Result<DebiasedView> {
    if !d.is_centered() {
        return Err(Error::NotCentered);
    }
    if d.n_rows() != b.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: b.n_rows(),
            got: d.n_rows(),
        });
    }
    let (names, sources) = feature_block(d)?;
    let mut values = Vec::with_capacity(sources.len());
    let mut loadings = Vec::with_capacity(sources.len());
    for x in &sources {
        let res = residualize(x, b)?;
        values.push(res.values);
        loadings.push(res.loadings);
    }
    Ok(assemble(values, &sources, names, loadings, 0.0, b))
}

/// `r'(lambda) = r + lambda (x - r)` from the `lambda = 0` view.
pub fn interpolate(view: &DebiasedView, d: &Dataset, lambda: f64, b: &ProtectedBasis) -> Result<DebiasedView> {
    check_lambda(lambda)?;
    if view.lambda != 0.0 {
        return Err(Error::NotBaseView(view.lambda));
    }
    let mut sources = Vec::with_capacity(view.source_columns.len());
    for name in &view.source_columns {
        let x = d
            .column(name)
            .ok_or_else(|| Error::UnknownColumn(name.clone()))?
            .values()?;
        if x.len() != b.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: b.n_rows(),
                got: x.len(),
            });
        }
        sources.push(x);
    }
    let values = view
        .values
        .iter()
        .zip(&sources)
        .map(|(r, x)| blend(r, x, lambda))
        .collect();
    Ok(assemble(
        values,
        &sources,
        view.source_columns.clone(),
        view.loadings.clone(),
        lambda,
        b,
    ))
}

/// Decorrelated outcome `(I - P) y`.
pub fn debias_outcome(d: &Dataset, b: &ProtectedBasis) -> Result<Vec<f64>> {
    if !d.is_centered() {
        return Err(Error::NotCentered);
    }
    let y = d.outcome().values()?;
    Ok(residualize(y, b)?.values)
}
