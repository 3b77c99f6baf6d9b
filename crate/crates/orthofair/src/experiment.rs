//! Lambda sweeps over models and splits, curve aggregation and timing.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use orthofair_core::metrics::{evaluate, pearson, EvaluationConfig};
use orthofair_core::models::{fit, predict};
use orthofair_core::tabular::{is_binary, make_splits, CenteringStats, Split};
use orthofair_core::{
    build_basis, debias, interpolate, Dataset, Error as CoreError, FeatureMatrix, MetricsReport, ModelKind,
    ProtectedSlice, Role, SplitPlan, SplitScheme,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::pipeline::protected_basis;
use crate::io::{
    config_hash, create_dir, file_sha256, format_f64, load_encoded, load_schema, read_json, read_predictions,
    write_json,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub path: PathBuf,
    pub schema: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Linear,
    Logistic,
    Majority,
    /// Scores from another tool: a `row_index,yhat_real` CSV over the
    /// dataset rows. Evaluated once per fold, with no lambda.
    External {
        path: PathBuf,
        #[serde(default = "default_external_name")]
        name: String,
    },
}

fn default_external_name() -> String {
    "external".into()
}

impl ModelSpec {
    pub fn id(&self) -> &str {
        match self {
            ModelSpec::Linear => "linear",
            ModelSpec::Logistic => "logistic",
            ModelSpec::Majority => "majority",
            ModelSpec::External { name, .. } => name,
        }
    }

    fn kind(&self) -> Option<ModelKind> {
        match self {
            ModelSpec::Linear => Some(ModelKind::Linear),
            ModelSpec::Logistic => Some(ModelKind::Logistic),
            ModelSpec::Majority => Some(ModelKind::MajorityClass),
            ModelSpec::External { .. } => None,
        }
    }
}

fn default_acc_p_folds() -> usize {
    5
}

fn default_acc_p_bins() -> usize {
    10
}

/// A sweep configuration file. Relative paths are resolved against the
/// directory holding the file by [`SweepSpec::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub dataset: DatasetRef,
    pub lambdas: Vec<f64>,
    pub models: Vec<ModelSpec>,
    pub split_plan: SplitPlan,
    #[serde(default)]
    pub standardize: bool,
    pub output_dir: PathBuf,
    /// Binary protected column for discrimination, balance and Acc P.
    /// Defaults to the first binary protected column.
    #[serde(default)]
    pub protected: Option<String>,
    #[serde(default = "default_acc_p_folds")]
    pub acc_p_folds: usize,
    #[serde(default = "default_acc_p_bins")]
    pub acc_p_bins: usize,
}

impl SweepSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut spec: SweepSpec = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut spec.dataset.path);
        resolve(&mut spec.dataset.schema);
        resolve(&mut spec.output_dir);
        for m in &mut spec.models {
            if let ModelSpec::External { path, .. } = m {
                resolve(path);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.lambdas.is_empty() {
            return bad("lambdas must not be empty");
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return bad("every lambda must lie in [0, 1]");
        }
        if self.lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambdas must be strictly increasing");
        }
        if self.models.is_empty() {
            return bad("at least one model is required");
        }
        let mut ids: Vec<&str> = self.models.iter().map(ModelSpec::id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("model ids must be unique");
        }
        if ids.iter().any(|id| id.is_empty() || id.contains(['/', '\\', ',', '"'])) {
            return bad("model ids must be non-empty and free of '/', '\\', ',' and '\"'");
        }
        if self.acc_p_folds < 2 || self.acc_p_bins < 1 {
            return bad("acc_p_folds must be >= 2 and acc_p_bins >= 1");
        }
        self.split_plan.validate()?;
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.split_plan.seed
    }

    /// Hash of this config without its output directory, so the same
    /// experiment written to two places shares one hash.
    pub fn config_hash(&self) -> String {
        let mut s = self.clone();
        s.output_dir = PathBuf::new();
        config_hash(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub split_id: String,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Wall-clock per phase, in milliseconds. Fold phases are summed over folds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub load_ms: f64,
    pub prepare_ms: f64,
    pub fit_ms: f64,
    pub evaluate_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub dataset_path: PathBuf,
    pub dataset_sha256: String,
    pub config_hash: String,
    pub n_rows: usize,
    pub columns: Vec<String>,
    pub designated_protected: Option<String>,
    pub spec: SweepSpec,
    pub splits: Vec<SplitManifest>,
    /// Kept out of `manifest.json` so reruns produce identical files.
    #[serde(skip)]
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by model (spec order), lambda, then fold.
    pub rows: Vec<MetricsReport>,
    pub provenance: Provenance,
}

fn split_id(plan: &SplitPlan, index: usize) -> String {
    match plan.scheme {
        SplitScheme::HoldoutCv { .. } => format!("fold{index}"),
        SplitScheme::RandomSplits { .. } => format!("repeat{index}"),
    }
}

pub fn lambda_label(lambda: Option<f64>) -> String {
    lambda.map_or_else(|| "na".to_string(), format_f64)
}

struct FoldOutput {
    reports: Vec<(usize, usize, MetricsReport)>,
    prepare_ms: f64,
    fit_ms: f64,
    evaluate_ms: f64,
}

struct Shared<'a> {
    spec: &'a SweepSpec,
    raw: &'a Dataset,
    y: &'a [f64],
    protected: Vec<(&'a str, &'a [f64])>,
    designated: Option<usize>,
    external: BTreeMap<usize, HashMap<usize, f64>>,
    config: EvaluationConfig,
}

fn gather(v: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| v[i]).collect()
}

fn max_abs_corr(yhat: &[f64], protected: &[(&str, Vec<f64>)]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (_, p) in protected {
        match pearson(yhat, p) {
            Ok(c) => best = best.max(c.abs()),
            Err(CoreError::ZeroVariance) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(best)
}

fn run_fold(sh: &Shared<'_>, split: &Split, id: &str) -> Result<FoldOutput> {
    let t = Instant::now();
    let train_raw = sh.raw.select_rows(&split.train)?;
    let test_raw = sh.raw.select_rows(&split.test)?;
    let stats = CenteringStats::fit(&train_raw, sh.spec.standardize)?;
    let train = stats.apply(&train_raw)?;
    let test = stats.apply(&test_raw)?;
    let basis = protected_basis(&train_raw, &train)?;
    let base = debias(&train, &basis)?;
    let mut views = Vec::with_capacity(sh.spec.lambdas.len());
    for &lambda in &sh.spec.lambdas {
        let train_view = interpolate(&base, &train, lambda, &basis)?;
        let test_x = base.transform_rows(&basis, &test, lambda)?;
        let train_x = FeatureMatrix::from_view(&train_view, train.n_rows())?;
        let test_x = FeatureMatrix::new(train_x.names().to_vec(), test_x, test.n_rows())?;
        views.push((train_x, test_x));
    }
    let prepare_ms = t.elapsed().as_secs_f64() * 1e3;

    let y_train = gather(sh.y, &split.train);
    let y_test = gather(sh.y, &split.test);
    let p_train: Vec<(&str, Vec<f64>)> = sh.protected.iter().map(|(n, v)| (*n, gather(v, &split.train))).collect();
    let p_test: Vec<(&str, Vec<f64>)> = sh.protected.iter().map(|(n, v)| (*n, gather(v, &split.test))).collect();
    let slices: Vec<ProtectedSlice<'_>> = p_test
        .iter()
        .map(|(name, values)| ProtectedSlice { name, values })
        .collect();

    let mut out = FoldOutput {
        reports: Vec::new(),
        prepare_ms,
        fit_ms: 0.0,
        evaluate_ms: 0.0,
    };
    for (mi, model) in sh.spec.models.iter().enumerate() {
        let Some(kind) = model.kind() else {
            let scores = &sh.external[&mi];
            let yhat: Vec<f64> = split.test.iter().map(|i| scores[i]).collect();
            let t = Instant::now();
            let mut r = evaluate(&yhat, &y_test, &slices, sh.designated, sh.config)?;
            out.evaluate_ms += t.elapsed().as_secs_f64() * 1e3;
            r.model_id = model.id().to_string();
            r.split_id = id.to_string();
            out.reports.push((mi, 0, r));
            continue;
        };
        for (li, (&lambda, (train_x, test_x))) in sh.spec.lambdas.iter().zip(&views).enumerate() {
            let cell = |e: Error| Error::Cell {
                model: model.id().to_string(),
                lambda: format_f64(lambda),
                fold: split.index,
                source: Box::new(e),
            };
            let t = Instant::now();
            let m = fit(kind, train_x, &y_train).map_err(|e| cell(e.into()))?;
            if !m.converged {
                log::warn!(
                    "{} did not converge at lambda {lambda} in {id} (gradient norm {:e})",
                    model.id(),
                    m.final_gradient_norm
                );
            }
            out.fit_ms += t.elapsed().as_secs_f64() * 1e3;

            let t = Instant::now();
            let yhat = predict(&m, test_x).map_err(|e| cell(e.into()))?.values;
            let yhat_train = predict(&m, train_x).map_err(|e| cell(e.into()))?.values;
            let mut r = evaluate(&yhat, &y_test, &slices, sh.designated, sh.config).map_err(|e| cell(e.into()))?;
            r.train_max_abs_corr = Some(max_abs_corr(&yhat_train, &p_train).map_err(cell)?);
            out.evaluate_ms += t.elapsed().as_secs_f64() * 1e3;
            r.model_id = model.id().to_string();
            r.split_id = id.to_string();
            r.lambda = Some(lambda);
            out.reports.push((mi, li, r));
        }
    }
    Ok(out)
}

fn load_external(path: &Path, n: usize) -> Result<HashMap<usize, f64>> {
    let rows = read_predictions(path)?;
    let mut map = HashMap::with_capacity(rows.len());
    for r in rows {
        if r.row_index >= n {
            return Err(Error::Predictions {
                path: path.into(),
                message: format!("row_index {} is out of range for {n} rows", r.row_index),
            });
        }
        map.insert(r.row_index, r.yhat_real);
    }
    Ok(map)
}

/// Runs every (model, lambda, fold) cell. Centering statistics and the
/// protected basis come from each fold's training rows only; test rows are
/// transformed with them. Models are fitted on the raw outcome.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let start = Instant::now();
    let schema = load_schema(&spec.dataset.schema)?;
    let raw = load_encoded(&spec.dataset.path, &schema)?;
    let dataset_sha256 = file_sha256(&spec.dataset.path)?;
    let y = raw.outcome().values()?;
    if !is_binary(y) {
        return Err(CoreError::NonBinary("outcome").into());
    }

    let protected: Vec<(&str, &[f64])> = raw
        .with_role(Role::Protected)
        .map(|c| Ok((c.name.as_str(), c.values()?)))
        .collect::<Result<_>>()?;
    let designated = match &spec.protected {
        Some(name) => Some(
            protected
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::Config(format!("protected column {name:?} not found after encoding")))?,
        ),
        None => protected.iter().position(|(_, v)| is_binary(v)),
    };

    let mut external = BTreeMap::new();
    for (i, m) in spec.models.iter().enumerate() {
        if let ModelSpec::External { path, .. } = m {
            external.insert(i, load_external(path, raw.n_rows())?);
        }
    }
    let splits = make_splits(&raw, &spec.split_plan)?;
    for (i, m) in external.iter() {
        let missing = splits.iter().flat_map(|s| &s.test).find(|r| !m.contains_key(r));
        if let Some(r) = missing {
            let ModelSpec::External { path, .. } = &spec.models[*i] else { unreachable!() };
            return Err(Error::Predictions {
                path: path.clone(),
                message: format!("no prediction for test row {r}"),
            });
        }
    }
    let load_ms = start.elapsed().as_secs_f64() * 1e3;

    let shared = Shared {
        spec,
        raw: &raw,
        y,
        designated,
        protected,
        external,
        config: EvaluationConfig {
            acc_p_folds: spec.acc_p_folds,
            acc_p_bins: spec.acc_p_bins,
        },
    };
    let ids: Vec<String> = splits.iter().map(|s| split_id(&spec.split_plan, s.index)).collect();
    let outputs: Vec<FoldOutput> = splits
        .par_iter()
        .zip(&ids)
        .map(|(s, id)| {
            run_fold(&shared, s, id).map_err(|e| match e {
                e @ Error::Cell { .. } => e,
                e => Error::Fold {
                    fold: s.index,
                    source: Box::new(e),
                },
            })
        })
        .collect::<Result<_>>()?;

    let mut timings = PhaseTimings {
        load_ms,
        ..Default::default()
    };
    let mut keyed = Vec::new();
    for (fold, o) in outputs.into_iter().enumerate() {
        timings.prepare_ms += o.prepare_ms;
        timings.fit_ms += o.fit_ms;
        timings.evaluate_ms += o.evaluate_ms;
        keyed.extend(o.reports.into_iter().map(|(m, l, r)| ((m, l, fold), r)));
    }
    keyed.sort_by_key(|(k, _)| *k);
    timings.total_ms = start.elapsed().as_secs_f64() * 1e3;

    let provenance = Provenance {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed(),
        dataset_path: spec.dataset.path.clone(),
        dataset_sha256,
        config_hash: spec.config_hash(),
        n_rows: raw.n_rows(),
        columns: raw.names().map(str::to_string).collect(),
        designated_protected: designated.map(|i| shared.protected[i].0.to_string()),
        spec: spec.clone(),
        splits: splits
            .into_iter()
            .zip(ids)
            .map(|(s, split_id)| SplitManifest {
                split_id,
                train: s.train,
                validation: s.validation,
                test: s.test,
            })
            .collect(),
        timings,
    };
    Ok(SweepResult {
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
        provenance,
    })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Reports sharing one (model, lambda), in canonical order.
pub fn group_rows(rows: &[MetricsReport]) -> Vec<(&str, Option<f64>, Vec<&MetricsReport>)> {
    let mut groups: Vec<(&str, Option<f64>, Vec<&MetricsReport>)> = Vec::new();
    for r in rows {
        match groups.last_mut() {
            Some((m, l, g)) if *m == r.model_id && *l == r.lambda => g.push(r),
            _ => groups.push((&r.model_id, r.lambda, vec![r])),
        }
    }
    groups
}

fn stat_fields(group: &[&MetricsReport], get: impl Fn(&MetricsReport) -> Option<f64>) -> [String; 2] {
    let values: Vec<f64> = group.iter().filter_map(|r| get(r)).collect();
    match mean_sd(&values) {
        Some((m, s)) => [format_f64(m), format_f64(s)],
        None => [String::new(), String::new()],
    }
}

const FAIRNESS_HEADER: &str = "\
# Fairness versus accuracy, aggregated over folds.
# lambda: fairness level (0 = fully decorrelated, 1 = original features); empty for external predictions
# model: model id; folds: number of test folds aggregated
# <metric>_mean / <metric>_sd: mean and sample standard deviation over folds (sd = 0 for one fold)
# acc_y: outcome accuracy at threshold 1/2
# abs_corr: max over protected columns of |pearson(yhat, p)| on test rows
# discrimination: |P(yhat=1 | p=0) - P(yhat=1 | p=1)| for the designated protected column
# acc_p: held-out accuracy of the better of a histogram-Bayes and a logistic discriminator predicting p from yhat
# acc_p_baseline_mean: majority-class rate of the designated protected column
";

const BALANCE_HEADER: &str = "\
# Balance versus calibration, aggregated over folds.
# lambda: fairness level; empty for external predictions
# model: model id; folds: number of test folds aggregated
# balance_neg: |mean(yhat | p=0, y=0) - mean(yhat | p=1, y=0)|
# balance_pos: |mean(yhat | p=0, y=1) - mean(yhat | p=1, y=1)|
# nll: mean negative Bernoulli log-likelihood, predictions clamped to [1e-12, 1 - 1e-12]
";

fn write_csv_with_header(path: &Path, comments: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(file);
    buf.write_all(comments.as_bytes()).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(buf);
    let csv_err = |e| Error::Csv {
        path: path.into(),
        source: e,
    };
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `fairness_accuracy.csv` and `balance_calibration.csv` into `out`.
pub fn emit_curves(r: &SweepResult, out: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out = out.as_ref();
    create_dir(out)?;
    let groups = group_rows(&r.rows);
    let lead = |m: &str, l: Option<f64>, g: &[&MetricsReport]| {
        vec![l.map(format_f64).unwrap_or_default(), m.to_string(), g.len().to_string()]
    };

    let fairness = groups
        .iter()
        .map(|(m, l, g)| {
            let mut row = lead(m, *l, g);
            row.extend(stat_fields(g, |r| Some(r.acc_y)));
            row.extend(stat_fields(g, |r| Some(r.max_abs_corr)));
            row.extend(stat_fields(g, |r| r.discrimination));
            row.extend(stat_fields(g, |r| r.acc_p));
            row.push(stat_fields(g, |r| r.acc_p_baseline)[0].clone());
            row
        })
        .collect();
    let balance = groups
        .iter()
        .map(|(m, l, g)| {
            let mut row = lead(m, *l, g);
            row.extend(stat_fields(g, |r| r.balance_neg));
            row.extend(stat_fields(g, |r| r.balance_pos));
            row.extend(stat_fields(g, |r| Some(r.neg_log_likelihood)));
            row
        })
        .collect();

    let fa = out.join("fairness_accuracy.csv");
    write_csv_with_header(
        &fa,
        FAIRNESS_HEADER,
        &[
            "lambda",
            "model",
            "folds",
            "acc_y_mean",
            "acc_y_sd",
            "abs_corr_mean",
            "abs_corr_sd",
            "discrimination_mean",
            "discrimination_sd",
            "acc_p_mean",
            "acc_p_sd",
            "acc_p_baseline_mean",
        ],
        fairness,
    )?;
    let bc = out.join("balance_calibration.csv");
    write_csv_with_header(
        &bc,
        BALANCE_HEADER,
        &[
            "lambda",
            "model",
            "folds",
            "balance_neg_mean",
            "balance_neg_sd",
            "balance_pos_mean",
            "balance_pos_sd",
            "nll_mean",
            "nll_sd",
        ],
        balance,
    )?;
    Ok(vec![fa, bc])
}

/// Writes the curves plus `manifest.json`, `timings.json` and one
/// `reports/<model>_<lambda>_<fold>.json` per row.
pub fn write_sweep(r: &SweepResult, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    emit_curves(r, out)?;
    write_json(out.join("manifest.json"), &r.provenance)?;
    write_json(out.join("timings.json"), &r.provenance.timings)?;
    let reports = out.join("reports");
    create_dir(&reports)?;
    for row in &r.rows {
        let name = format!("{}_{}_{}.json", row.model_id, lambda_label(row.lambda), row.split_id);
        write_json(reports.join(name), row)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub n: usize,
    pub n_f: usize,
    pub n_p: usize,
    pub repeats: usize,
    /// Median of `build_basis + debias`.
    pub median_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub basis_median_ms: f64,
    pub debias_median_ms: f64,
    pub target_ms: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Times `build_basis + debias` on an already centered dataset.
pub fn time_debias(d: &Dataset, repeats: usize) -> Result<TimingReport> {
    let repeats = repeats.max(1);
    let mut total = Vec::with_capacity(repeats);
    let mut basis_t = Vec::with_capacity(repeats);
    let mut debias_t = Vec::with_capacity(repeats);
    let mut n_f = 0;
    let mut n_p = 0;
    for _ in 0..repeats {
        let t0 = Instant::now();
        let b = build_basis(d)?;
        let t1 = Instant::now();
        let v = debias(d, &b)?;
        let t2 = Instant::now();
        n_f = v.source_columns().len();
        n_p = b.n_protected();
        std::hint::black_box(&v);
        basis_t.push((t1 - t0).as_secs_f64() * 1e3);
        debias_t.push((t2 - t1).as_secs_f64() * 1e3);
        total.push((t2 - t0).as_secs_f64() * 1e3);
    }
    Ok(TimingReport {
        n: d.n_rows(),
        n_f,
        n_p,
        repeats,
        median_ms: median(total.clone()),
        min_ms: total.iter().copied().fold(f64::INFINITY, f64::min),
        max_ms: total.iter().copied().fold(0.0, f64::max),
        basis_median_ms: median(basis_t),
        debias_median_ms: median(debias_t),
        target_ms: 200.0,
    })
}
