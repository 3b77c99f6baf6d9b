//! Fairness and quality metrics for one set of predictions.
//!
//! Group-based metrics (discrimination, balance, Acc P) need a single binary
//! protected column; Pearson correlation is reported for every protected
//! column with the largest magnitude as the headline number.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::mean;
use crate::models::{binarize, fit_logistic, predict, FeatureMatrix};
use crate::tabular::is_binary;

/// Predictions are clamped into `[NLL_CLAMP, 1 - NLL_CLAMP]` before taking logs.
pub const NLL_CLAMP: f64 = 1e-12;

pub const ACC_P_METHOD: &str = "bayes_histogram+logistic";

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch {
            what: "vector",
            expected: a,
            got: b,
        });
    }
    if a == 0 {
        return Err(Error::TooFewRows(0));
    }
    Ok(())
}

/// Pearson correlation, computed from centered copies of both inputs.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a.len(), b.len())?;
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// `|mean(yhat | p = 0) - mean(yhat | p = 1)|` for binary predictions.
pub fn discrimination(yhat_bin: &[f64], p1: &[f64]) -> Result<f64> {
    same_len(yhat_bin.len(), p1.len())?;
    if !is_binary(yhat_bin) {
        return Err(Error::NonBinary("predictions"));
    }
    if !is_binary(p1) {
        return Err(Error::NonBinary("protected column"));
    }
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for (&v, &g) in yhat_bin.iter().zip(p1) {
        let g = g as usize;
        sums[g] += v;
        counts[g] += 1;
    }
    for (g, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(Error::EmptyGroup(g as u8));
        }
    }
    Ok((sums[0] / counts[0] as f64 - sums[1] / counts[1] as f64).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Balance {
    /// Gap in mean prediction between protected groups among `y = 0` rows.
    pub neg: f64,
    /// Same among `y = 1` rows.
    pub pos: f64,
}

const CELLS: [[&str; 2]; 2] = [["p=0,y=0", "p=0,y=1"], ["p=1,y=0", "p=1,y=1"]];

pub fn balance(yhat_real: &[f64], y: &[f64], p1: &[f64]) -> Result<Balance> {
    same_len(yhat_real.len(), y.len())?;
    same_len(yhat_real.len(), p1.len())?;
    if !is_binary(y) {
        return Err(Error::NonBinary("outcome"));
    }
    if !is_binary(p1) {
        return Err(Error::NonBinary("protected column"));
    }
    let mut sums = [[0.0; 2]; 2];
    let mut counts = [[0usize; 2]; 2];
    for ((&v, &yi), &g) in yhat_real.iter().zip(y).zip(p1) {
        sums[g as usize][yi as usize] += v;
        counts[g as usize][yi as usize] += 1;
    }
    let mut cell_mean = [[0.0; 2]; 2];
    for g in 0..2 {
        for c in 0..2 {
            if counts[g][c] == 0 {
                return Err(Error::EmptyCell(CELLS[g][c]));
            }
            cell_mean[g][c] = sums[g][c] / counts[g][c] as f64;
        }
    }
    Ok(Balance {
        neg: (cell_mean[0][0] - cell_mean[1][0]).abs(),
        pos: (cell_mean[0][1] - cell_mean[1][1]).abs(),
    })
}

/// Mean negative Bernoulli log-likelihood of `y` under `yhat_real`.
pub fn calibration_nll(yhat_real: &[f64], y: &[f64]) -> Result<f64> {
    same_len(yhat_real.len(), y.len())?;
    if !is_binary(y) {
        return Err(Error::NonBinary("outcome"));
    }
    let total: f64 = yhat_real
        .iter()
        .zip(y)
        .map(|(&p, &yi)| {
            let p = p.clamp(NLL_CLAMP, 1.0 - NLL_CLAMP);
            if yi == 1.0 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum();
    Ok(-total / y.len() as f64)
}

pub fn accuracy(yhat_bin: &[f64], y: &[f64]) -> Result<f64> {
    same_len(yhat_bin.len(), y.len())?;
    let hits = yhat_bin.iter().zip(y).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccP {
    /// Better of the two discriminators' mean held-out accuracy.
    pub acc_p: f64,
    /// Majority-class rate of the protected column.
    pub baseline: f64,
    pub bayes: f64,
    pub logistic: f64,
}

/// Class predicted in each of `bins` equal-width bins by
/// `argmax_c P(bin | p = c) P(p = c)`, i.e. the larger class count.
struct HistogramBayes {
    lo: f64,
    width: f64,
    bins: usize,
    label: Vec<f64>,
}

impl HistogramBayes {
    fn fit(r: &[f64], p: &[f64], bins: usize, majority: f64) -> Self {
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut model = HistogramBayes {
            lo,
            width: (hi - lo) / bins as f64,
            bins,
            label: vec![majority; bins],
        };
        let mut counts = vec![[0usize; 2]; bins];
        for (&v, &c) in r.iter().zip(p) {
            counts[model.bin(v)][c as usize] += 1;
        }
        for (label, [c0, c1]) in model.label.iter_mut().zip(counts) {
            if c1 > c0 {
                *label = 1.0;
            } else if c0 > c1 {
                *label = 0.0;
            }
        }
        model
    }

    fn bin(&self, v: f64) -> usize {
        if self.width.is_nan() || self.width <= 0.0 {
            return 0;
        }
        let b = ((v - self.lo) / self.width).floor();
        if b < 0.0 {
            0
        } else {
            (b as usize).min(self.bins - 1)
        }
    }

    fn predict(&self, v: f64) -> f64 {
        self.label[self.bin(v)]
    }
}

fn majority_label(p: &[f64]) -> f64 {
    if 2 * p.iter().filter(|&&v| v == 1.0).count() >= p.len() {
        1.0
    } else {
        0.0
    }
}

fn logistic_discriminator(train_r: &[f64], train_p: &[f64], test_r: &[f64]) -> Result<Vec<f64>> {
    let m = mean(train_r);
    let sd = (train_r.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / train_r.len() as f64).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Ok(vec![majority_label(train_p); test_r.len()]);
    }
    let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| (x - m) / sd).collect() };
    let names = vec!["r".to_string()];
    let train = FeatureMatrix::new(names.clone(), vec![scale(train_r)], train_r.len())?;
    let test = FeatureMatrix::new(names, vec![scale(test_r)], test_r.len())?;
    let model = fit_logistic(&train, train_p)?;
    Ok(binarize(&predict(&model, &test)?.values))
}

/// Accuracy of inferring binary `p1` from the one-dimensional representation
/// `yhat_real`, by `folds`-fold cross-validation (row `i` is held out in
/// fold `i % folds`).
pub fn acc_p(yhat_real: &[f64], p1: &[f64], folds: usize, bins: usize) -> Result<AccP> {
    same_len(yhat_real.len(), p1.len())?;
    if !is_binary(p1) {
        return Err(Error::NonBinary("protected column"));
    }
    if folds < 2 || bins == 0 {
        return Err(Error::InvalidConfig("acc_p needs folds >= 2 and bins >= 1"));
    }
    let n = p1.len();
    if n < 10 * folds {
        return Err(Error::TooFewRowsForFolds {
            needed: 10 * folds,
            folds,
            got: n,
        });
    }
    let ones = p1.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 {
        return Err(Error::EmptyGroup(1));
    }
    if ones == n {
        return Err(Error::EmptyGroup(0));
    }
    let rate = ones as f64 / n as f64;
    let baseline = rate.max(1.0 - rate);

    let (mut bayes_acc, mut logit_acc) = (0.0, 0.0);
    for k in 0..folds {
        let (mut tr_r, mut tr_p, mut te_r, mut te_p) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..n {
            if i % folds == k {
                te_r.push(yhat_real[i]);
                te_p.push(p1[i]);
            } else {
                tr_r.push(yhat_real[i]);
                tr_p.push(p1[i]);
            }
        }
        let majority = majority_label(&tr_p);
        let hist = HistogramBayes::fit(&tr_r, &tr_p, bins, majority);
        let hist_pred: Vec<f64> = te_r.iter().map(|&v| hist.predict(v)).collect();
        bayes_acc += accuracy(&hist_pred, &te_p)?;
        let logit_pred = logistic_discriminator(&tr_r, &tr_p, &te_r)?;
        logit_acc += accuracy(&logit_pred, &te_p)?;
    }
    let bayes = bayes_acc / folds as f64;
    let logistic = logit_acc / folds as f64;
    Ok(AccP {
        acc_p: bayes.max(logistic),
        baseline,
        bayes,
        logistic,
    })
}

/// A protected column as seen by the metrics: its raw (uncentered) values.
#[derive(Debug, Clone, Copy)]
pub struct ProtectedSlice<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectedCorrelation {
    pub column: String,
    pub corr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluationConfig {
    pub acc_p_folds: usize,
    pub acc_p_bins: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            acc_p_folds: 5,
            acc_p_bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_id: String,
    pub split_id: String,
    /// `None` for externally supplied predictions.
    pub lambda: Option<f64>,
    pub n: usize,
    pub acc_y: f64,
    pub pearson_corr_yp: Vec<ProtectedCorrelation>,
    pub max_abs_corr: f64,
    pub protected_column: Option<String>,
    pub discrimination: Option<f64>,
    pub balance_neg: Option<f64>,
    pub balance_pos: Option<f64>,
    pub neg_log_likelihood: f64,
    pub acc_p: Option<f64>,
    pub acc_p_baseline: Option<f64>,
    pub acc_p_method: String,
    /// `max |corr(yhat, p)|` on the training rows, when the caller has them.
    pub train_max_abs_corr: Option<f64>,
    pub notes: Vec<String>,
}

/// Computes every metric for real-valued predictions `yhat_real` of binary `y`.
///
/// `designated` indexes the binary protected column used for the group
/// metrics; when it is `None` or not binary those metrics are omitted.
/// Metric-level failures (empty subgroup, constant predictions) are recorded
/// in `notes` instead of failing the whole report.
pub fn evaluate(
    yhat_real: &[f64],
    y: &[f64],
    protected: &[ProtectedSlice<'_>],
    designated: Option<usize>,
    config: EvaluationConfig,
) -> Result<MetricsReport> {
    same_len(yhat_real.len(), y.len())?;
    let yhat_bin = binarize(yhat_real);
    let mut notes = Vec::new();

    let mut pearson_corr_yp = Vec::with_capacity(protected.len());
    let mut max_abs_corr: f64 = 0.0;
    for p in protected {
        same_len(yhat_real.len(), p.values.len())?;
        let corr = match pearson(yhat_real, p.values) {
            Ok(c) => c,
            Err(Error::ZeroVariance) => {
                notes.push(format!("corr(yhat, {}) undefined (zero variance); reported as 0", p.name));
                0.0
            }
            Err(e) => return Err(e),
        };
        max_abs_corr = max_abs_corr.max(corr.abs());
        pearson_corr_yp.push(ProtectedCorrelation {
            column: p.name.to_string(),
            corr,
        });
    }

    let mut report = MetricsReport {
        model_id: String::new(),
        split_id: String::new(),
        lambda: None,
        n: y.len(),
        acc_y: accuracy(&yhat_bin, y)?,
        pearson_corr_yp,
        max_abs_corr,
        protected_column: None,
        discrimination: None,
        balance_neg: None,
        balance_pos: None,
        neg_log_likelihood: calibration_nll(yhat_real, y)?,
        acc_p: None,
        acc_p_baseline: None,
        acc_p_method: ACC_P_METHOD.to_string(),
        train_max_abs_corr: None,
        notes: Vec::new(),
    };

    if let Some(p) = designated.and_then(|i| protected.get(i)) {
        if is_binary(p.values) {
            report.protected_column = Some(p.name.to_string());
            match discrimination(&yhat_bin, p.values) {
                Ok(v) => report.discrimination = Some(v),
                Err(e) => notes.push(format!("discrimination: {e}")),
            }
            match balance(yhat_real, y, p.values) {
                Ok(b) => {
                    report.balance_neg = Some(b.neg);
                    report.balance_pos = Some(b.pos);
                }
                Err(e) => notes.push(format!("balance: {e}")),
            }
            match acc_p(yhat_real, p.values, config.acc_p_folds, config.acc_p_bins) {
                Ok(a) => {
                    report.acc_p = Some(a.acc_p);
                    report.acc_p_baseline = Some(a.baseline);
                }
                Err(e) => notes.push(format!("acc_p: {e}")),
            }
        } else {
            notes.push(format!("protected column {} is not binary; group metrics skipped", p.name));
        }
    }
    report.notes = notes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[-1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(pearson(&a, &[1.0; 4]), Err(Error::ZeroVariance));
    }

    #[test]
    fn discrimination_examples() {
        assert_eq!(discrimination(&[1.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(discrimination(&[1.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
        let d = discrimination(&[1.0, 0.0, 1.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((d - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(discrimination(&[1.0, 0.0], &[1.0, 1.0]), Err(Error::EmptyGroup(0)));
    }

    #[test]
    fn balance_examples() {
        let y = [0.0, 1.0, 0.0, 1.0];
        let p = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(balance(&[0.5; 4], &y, &p).unwrap(), Balance { neg: 0.0, pos: 0.0 });
        let b = balance(&p, &y, &p).unwrap();
        assert_eq!(b.neg, 1.0);
        assert_eq!(balance(&[0.5; 4], &[0.0, 0.0, 0.0, 1.0], &p), Err(Error::EmptyCell("p=0,y=1")));
    }

    #[test]
    fn nll_examples() {
        let y = [1.0, 0.0, 1.0];
        assert!(calibration_nll(&y, &y).unwrap() < 1e-11);
        assert!((calibration_nll(&[0.5; 3], &y).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        let y10: Vec<f64> = (0..10).map(|i| if i < 7 { 1.0 } else { 0.0 }).collect();
        let v = calibration_nll(&[0.7; 10], &y10).unwrap();
        let expect = -(0.7 * 0.7f64.ln() + 0.3 * 0.3f64.ln());
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.6109).abs() < 1e-4);
    }

    #[test]
    fn accuracy_examples() {
        let a = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(accuracy(&a, &a).unwrap(), 1.0);
        let c: Vec<f64> = a.iter().map(|v| 1.0 - v).collect();
        assert_eq!(accuracy(&a, &c).unwrap(), 0.0);
        let mut six = a;
        six[0] = 0.0;
        six[1] = 1.0;
        assert_eq!(accuracy(&six, &a).unwrap(), 0.75);
        assert!(accuracy(&a, &a[..3]).is_err());
    }

    #[test]
    fn acc_p_perfect_leakage() {
        let p: Vec<f64> = (0..100).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let a = acc_p(&p, &p, 5, 10).unwrap();
        assert_eq!(a.acc_p, 1.0);
        assert!((a.baseline - 66.0 / 100.0).abs() < 1e-15);
        assert!(matches!(acc_p(&p[..20], &p[..20], 5, 10), Err(Error::TooFewRowsForFolds { .. })));
        assert_eq!(acc_p(&p, &[0.0; 100], 5, 10), Err(Error::EmptyGroup(1)));
    }

    #[test]
    fn acc_p_constant_predictions_hit_baseline() {
        let p: Vec<f64> = (0..100).map(|i| if i % 10 < 7 { 1.0 } else { 0.0 }).collect();
        let a = acc_p(&[0.3; 100], &p, 5, 10).unwrap();
        assert!((a.acc_p - 0.7).abs() < 1e-12);
    }
}
