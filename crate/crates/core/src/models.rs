//! Least-squares and logistic regression, a majority-class baseline, and the
//! coefficient-invariance check for linear models on debiased features.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, mean, norm, qr_least_squares};
use crate::metrics::pearson;
use crate::projection::{debias, DebiasedView, ProtectedBasis};
use crate::tabular::{is_binary, Dataset, Role};

/// Named, column-major design matrix (no intercept column).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, n_rows: usize) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                what: "column names",
                expected: columns.len(),
                got: names.len(),
            });
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch {
                what: "column",
                expected: n_rows,
                got: c.len(),
            });
        }
        Ok(Self {
            names,
            columns,
            n_rows,
        })
    }

    /// Columns of `d` whose role is in `roles`, in dataset order.
    pub fn from_roles(d: &Dataset, roles: &[Role]) -> Result<Self> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for c in d.columns().iter().filter(|c| roles.contains(&c.role.role)) {
            names.push(c.name.clone());
            columns.push(c.values()?.to_vec());
        }
        Self::new(names, columns, d.n_rows())
    }

    pub fn from_view(view: &DebiasedView, n_rows: usize) -> Result<Self> {
        Self::new(view.source_columns().to_vec(), view.values().to_vec(), n_rows)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Horizontal concatenation.
    pub fn hstack(mut self, other: FeatureMatrix) -> Result<Self> {
        if other.n_rows != self.n_rows {
            return Err(Error::LengthMismatch {
                what: "rows",
                expected: self.n_rows,
                got: other.n_rows,
            });
        }
        self.names.extend(other.names);
        self.columns.extend(other.columns);
        Ok(self)
    }

    fn linear_predictor(&self, intercept: f64, coefficients: &[f64]) -> Vec<f64> {
        let mut z = vec![intercept; self.n_rows];
        for (beta, col) in coefficients.iter().zip(&self.columns) {
            if *beta != 0.0 {
                for (zi, xi) in z.iter_mut().zip(col) {
                    *zi += beta * xi;
                }
            }
        }
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Logistic,
    MajorityClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub intercept: f64,
    /// One per entry of `trained_on`.
    pub coefficients: Vec<f64>,
    pub trained_on: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    /// Logistic: norm of the gradient of the penalized mean log-likelihood.
    /// Linear: norm of the normal-equation residual `X'(y - X beta)`.
    pub final_gradient_norm: f64,
    /// Ridge penalty used when the least-squares design was rank deficient.
    #[serde(default)]
    pub ridge_penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    RealValued,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub values: Vec<f64>,
    pub kind: PredictionKind,
}

impl Predictions {
    /// Probabilities above 1/2 become 1, everything else 0.
    pub fn binarize(&self) -> Predictions {
        Predictions {
            values: binarize(&self.values),
            kind: PredictionKind::Binary,
        }
    }
}

pub fn binarize(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| if v > 0.5 { 1.0 } else { 0.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOptions {
    /// Column `k` is dependent when its QR diagonal is below `rank_tolerance * ||x_k||`.
    pub rank_tolerance: f64,
    /// Solve rank-deficient designs with a small ridge penalty instead of failing.
    pub ridge_fallback: bool,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self {
            rank_tolerance: 1e-10,
            ridge_fallback: true,
        }
    }
}

fn check_rows(x: &FeatureMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n_rows {
        return Err(Error::LengthMismatch {
            what: "outcome",
            expected: x.n_rows,
            got: y.len(),
        });
    }
    Ok(())
}

pub fn fit_linear(x: &FeatureMatrix, y: &[f64]) -> Result<FittedModel> {
    fit_linear_with(x, y, LinearOptions::default())
}

/// Ordinary least squares with an unpenalized intercept.
///
/// The design and outcome are centered, then solved by Householder QR, so
/// the intercept is `mean(y) - mean(X) beta`.
pub fn fit_linear_with(x: &FeatureMatrix, y: &[f64], opts: LinearOptions) -> Result<FittedModel> {
    check_rows(x, y)?;
    let means: Vec<f64> = x.columns.iter().map(|c| mean(c)).collect();
    let centered: Vec<Vec<f64>> = x
        .columns
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let y_mean = mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let (beta, ridge_penalty) = match qr_least_squares(&centered, &yc, 0.0, opts.rank_tolerance) {
        Ok(beta) => (beta, 0.0),
        Err(dependent) => {
            if !opts.ridge_fallback {
                return Err(Error::RankDeficient {
                    columns: dependent.iter().map(|&k| x.names[k].clone()).collect(),
                });
            }
            let scale = centered.iter().map(|c| dot(c, c)).sum::<f64>() / centered.len().max(1) as f64;
            let penalty = 1e-8 * if scale > 0.0 { scale } else { 1.0 };
            let beta = qr_least_squares(&centered, &yc, penalty, opts.rank_tolerance)
                .expect("ridge-augmented design has full column rank");
            (beta, penalty)
        }
    };

    let intercept = y_mean - dot(&means, &beta);
    let fitted = FeatureMatrix {
        names: Vec::new(),
        columns: centered,
        n_rows: x.n_rows,
    }
    .linear_predictor(0.0, &beta);
    let resid: Vec<f64> = yc.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let normal_residual: Vec<f64> = x
        .columns
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().zip(&resid).map(|(xi, ri)| (xi - m) * ri).sum())
        .collect();

    Ok(FittedModel {
        kind: ModelKind::Linear,
        intercept,
        coefficients: beta,
        trained_on: x.names.clone(),
        converged: true,
        iterations: 1,
        final_gradient_norm: norm(&normal_residual),
        ridge_penalty,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// L2 penalty on the coefficients (never the intercept), on the mean log-likelihood scale.
    pub l2_penalty: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            l2_penalty: 1e-8,
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Penalized mean Bernoulli log-likelihood.
fn objective(z: &[f64], y: &[f64], coefficients: &[f64], l2: f64) -> f64 {
    let ll = z.iter().zip(y).map(|(&zi, &yi)| yi * zi - softplus(zi)).sum::<f64>() / z.len() as f64;
    ll - 0.5 * l2 * dot(coefficients, coefficients)
}

/// Gradient of the penalized mean log-likelihood, intercept first.
fn gradient(x: &FeatureMatrix, z: &[f64], y: &[f64], coefficients: &[f64], l2: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len() as f64;
    let resid: Vec<f64> = z.iter().zip(y).map(|(&zi, &yi)| yi - sigmoid(zi)).collect();
    let mut g = Vec::with_capacity(coefficients.len() + 1);
    g.push(resid.iter().sum::<f64>() / n);
    for (c, beta) in x.columns.iter().zip(coefficients) {
        g.push(dot(c, &resid) / n - l2 * beta);
    }
    (g, resid)
}

pub fn fit_logistic(x: &FeatureMatrix, y: &[f64]) -> Result<FittedModel> {
    fit_logistic_with(x, y, LogisticOptions::default())
}

/// Maximum-likelihood logistic regression by damped Newton (IRLS) steps.
///
/// Each step solves `(X' W X / n + l2 I) delta = gradient` by Cholesky and
/// is halved until the penalized log-likelihood does not decrease.
/// Non-convergence is reported through `converged`, not as an error.
pub fn fit_logistic_with(x: &FeatureMatrix, y: &[f64], opts: LogisticOptions) -> Result<FittedModel> {
    check_rows(x, y)?;
    if !is_binary(y) {
        return Err(Error::NonBinary("outcome"));
    }
    let p = x.n_cols();
    let dim = p + 1;
    let n = y.len() as f64;
    let l2 = opts.l2_penalty;

    let base = mean(y);
    let mut intercept = if base > 0.0 && base < 1.0 {
        (base / (1.0 - base)).ln()
    } else {
        0.0
    };
    let mut beta = vec![0.0; p];
    let mut z = x.linear_predictor(intercept, &beta);
    let mut current = objective(&z, y, &beta, l2);
    let (mut g, _) = gradient(x, &z, y, &beta, l2);
    let mut iterations = 0;
    let mut converged = norm(&g) <= opts.gradient_tolerance;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let w: Vec<f64> = z
            .iter()
            .map(|&zi| {
                let s = sigmoid(zi);
                s * (1.0 - s)
            })
            .collect();

        // Information matrix, intercept in row/column 0.
        let mut info = vec![0.0; dim * dim];
        info[0] = w.iter().sum::<f64>() / n;
        for a in 0..p {
            let wx: Vec<f64> = w.iter().zip(&x.columns[a]).map(|(wi, xi)| wi * xi).collect();
            let v = wx.iter().sum::<f64>() / n;
            info[a + 1] = v;
            info[(a + 1) * dim] = v;
            for b in a..p {
                let v = dot(&wx, &x.columns[b]) / n;
                info[(a + 1) * dim + b + 1] = v;
                info[(b + 1) * dim + a + 1] = v;
            }
            info[(a + 1) * dim + a + 1] += l2;
        }

        let delta = solve_with_jitter(&mut info, &g, dim)?;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let cand_intercept = intercept + step * delta[0];
            let cand_beta: Vec<f64> = beta.iter().zip(&delta[1..]).map(|(b, d)| b + step * d).collect();
            let cand_z = x.linear_predictor(cand_intercept, &cand_beta);
            let value = objective(&cand_z, y, &cand_beta, l2);
            if value >= current {
                intercept = cand_intercept;
                beta = cand_beta;
                z = cand_z;
                current = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        g = gradient(x, &z, y, &beta, l2).0;
        converged = norm(&g) <= opts.gradient_tolerance;
        if !accepted {
            break;
        }
    }

    Ok(FittedModel {
        kind: ModelKind::Logistic,
        intercept,
        coefficients: beta,
        trained_on: x.names.clone(),
        converged,
        iterations,
        final_gradient_norm: norm(&g),
        ridge_penalty: 0.0,
    })
}

fn solve_with_jitter(a: &mut [f64], b: &[f64], dim: usize) -> Result<Vec<f64>> {
    let trace = (0..dim).map(|i| a[i * dim + i]).sum::<f64>() / dim as f64;
    let mut jitter = 1e-12 * if trace > 0.0 { trace } else { 1.0 };
    for _ in 0..8 {
        match cholesky_solve(a, b) {
            Ok(x) if x.iter().all(|v| v.is_finite()) => return Ok(x),
            _ => {
                for i in 0..dim {
                    a[i * dim + i] += jitter;
                }
                jitter *= 100.0;
            }
        }
    }
    Err(Error::NotPositiveDefinite)
}

/// Always predicts the most frequent label of `y` (ties go to 1).
pub fn fit_majority(x: &FeatureMatrix, y: &[f64]) -> Result<FittedModel> {
    check_rows(x, y)?;
    if !is_binary(y) {
        return Err(Error::NonBinary("outcome"));
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    let label = if 2 * ones >= y.len() { 1.0 } else { 0.0 };
    Ok(FittedModel {
        kind: ModelKind::MajorityClass,
        intercept: label,
        coefficients: vec![0.0; x.n_cols()],
        trained_on: x.names.clone(),
        converged: true,
        iterations: 0,
        final_gradient_norm: 0.0,
        ridge_penalty: 0.0,
    })
}

pub fn fit(kind: ModelKind, x: &FeatureMatrix, y: &[f64]) -> Result<FittedModel> {
    match kind {
        ModelKind::Linear => fit_linear(x, y),
        ModelKind::Logistic => fit_logistic(x, y),
        ModelKind::MajorityClass => fit_majority(x, y),
    }
}

pub fn predict(m: &FittedModel, x: &FeatureMatrix) -> Result<Predictions> {
    if m.trained_on != x.names {
        return Err(Error::ColumnMismatch {
            expected: m.trained_on.clone(),
            got: x.names.clone(),
        });
    }
    let values = match m.kind {
        ModelKind::Linear => x.linear_predictor(m.intercept, &m.coefficients),
        ModelKind::Logistic => {
            let lo = f64::EPSILON;
            x.linear_predictor(m.intercept, &m.coefficients)
                .into_iter()
                .map(|z| sigmoid(z).clamp(lo, 1.0 - lo))
                .collect()
        }
        ModelKind::MajorityClass => vec![m.intercept; x.n_rows],
    };
    Ok(Predictions {
        values,
        kind: PredictionKind::RealValued,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// `max_i |beta_i - beta'_i|` over non-protected features.
    pub max_abs_coeff_diff: f64,
    /// `max_i |corr(yhat', p_i)|` over protected columns, on the fitting rows.
    pub yhat_protected_corr: f64,
    pub full_coefficients: Vec<f64>,
    pub fair_coefficients: Vec<f64>,
}

/// Fits least squares on `[features, protected]` and on the `lambda = 0`
/// debiased features and compares the feature coefficients.
///
/// Expects a centered (ideally standardized) dataset whose basis `b` was
/// built from its own protected columns.
pub fn verify_coefficient_invariance(d: &Dataset, b: &ProtectedBasis) -> Result<InvarianceReport> {
    let y = d.outcome().values()?;
    let features = FeatureMatrix::from_roles(d, &[Role::Feature])?;
    let kept = protected_matrix(d, b)?;
    let n_f = features.n_cols();
    let full = fit_linear(&features.hstack(kept)?, y)?;

    let view = debias(d, b)?;
    let fair_x = FeatureMatrix::from_view(&view, d.n_rows())?;
    let fair = fit_linear(&fair_x, y)?;

    let max_abs_coeff_diff = full.coefficients[..n_f]
        .iter()
        .zip(&fair.coefficients)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let yhat = predict(&fair, &fair_x)?.values;
    let mut yhat_protected_corr: f64 = 0.0;
    for p in d.with_role(Role::Protected) {
        match pearson(&yhat, p.values()?) {
            Ok(c) => yhat_protected_corr = yhat_protected_corr.max(c.abs()),
            Err(Error::ZeroVariance) => {}
            Err(e) => return Err(e),
        }
    }

    Ok(InvarianceReport {
        max_abs_coeff_diff,
        yhat_protected_corr,
        full_coefficients: full.coefficients,
        fair_coefficients: fair.coefficients,
    })
}

fn protected_matrix(d: &Dataset, b: &ProtectedBasis) -> Result<FeatureMatrix> {
    let mut cols = Vec::with_capacity(b.rank());
    for name in b.columns() {
        let c = d.column(name).ok_or_else(|| Error::UnknownColumn(name.clone()))?;
        cols.push(c.values()?.to_vec());
    }
    FeatureMatrix::new(b.columns().to_vec(), cols, d.n_rows())
}

/// `beta_i - beta'_i` for logistic fits with and without debiasing
/// (diagnostic only; no invariance holds for logistic regression).
pub fn logistic_coefficient_deltas(d: &Dataset, b: &ProtectedBasis, y: &[f64]) -> Result<Vec<f64>> {
    let features = FeatureMatrix::from_roles(d, &[Role::Feature])?;
    let n_f = features.n_cols();
    let full = fit_logistic(&features.hstack(protected_matrix(d, b)?)?, y)?;
    let view = debias(d, b)?;
    let fair = fit_logistic(&FeatureMatrix::from_view(&view, d.n_rows())?, y)?;
    Ok(full.coefficients[..n_f]
        .iter()
        .zip(&fair.coefficients)
        .map(|(a, b)| a - b)
        .collect())
}
