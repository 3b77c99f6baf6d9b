//! Column-labelled datasets: role bookkeeping, dummy encoding, centering and
//! train/validation/test splitting.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Protected,
    Outcome,
}

/// Role of a column plus whether its raw values are categorical labels.
///
/// This is also the per-column entry of a schema file:
/// `{"role": "protected", "categorical": true}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRole {
    pub role: Role,
    #[serde(default)]
    pub categorical: bool,
}

impl ColumnRole {
    pub const fn new(role: Role) -> Self {
        Self {
            role,
            categorical: false,
        }
    }

    pub const fn categorical(role: Role) -> Self {
        Self {
            role,
            categorical: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub role: ColumnRole,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, role: Role, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            role: ColumnRole::new(role),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn categorical(name: impl Into<String>, role: Role, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            role: ColumnRole::categorical(role),
            data: ColumnData::Categorical(values),
        }
    }

    pub fn values(&self) -> Result<&[f64]> {
        match &self.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(Error::NotNumeric(self.name.clone())),
        }
    }

    pub fn is_role(&self, role: Role) -> bool {
        self.role.role == role
    }
}

/// An immutable, column-major table with role tags.
///
/// `column_means`/`column_scales` record the transform applied by
/// [`center`]/[`standardize`] (zeros/ones before that). `is_centered` means
/// the centering transform has been applied, either fitted on these rows or
/// carried over from a training set via [`CenteringStats::apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
    column_means: Vec<f64>,
    column_scales: Vec<f64>,
    is_centered: bool,
    is_standardized: bool,
    dropped_columns: Vec<String>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let m = columns.len();
        let n_rows = columns.first().map_or(0, |c| c.data.len());
        if m < 2 {
            return Err(Error::TooFewColumns(m));
        }
        if n_rows < 2 {
            return Err(Error::TooFewRows(n_rows));
        }
        let mut seen = BTreeSet::new();
        let mut outcomes = 0;
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.data.len() != n_rows {
                return Err(Error::LengthMismatch {
                    what: "column",
                    expected: n_rows,
                    got: c.data.len(),
                });
            }
            if c.is_role(Role::Outcome) {
                outcomes += 1;
            }
            if let ColumnData::Numeric(v) = &c.data {
                if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::NonFinite {
                        column: c.name.clone(),
                        row,
                    });
                }
            }
        }
        if outcomes != 1 {
            return Err(Error::OutcomeCount(outcomes));
        }
        Ok(Self {
            n_rows,
            column_means: alloc::vec![0.0; m],
            column_scales: alloc::vec![1.0; m],
            columns,
            is_centered: false,
            is_standardized: false,
            dropped_columns: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| c.is_role(role))
    }

    pub fn outcome(&self) -> &Column {
        self.columns
            .iter()
            .find(|c| c.is_role(Role::Outcome))
            .expect("validated: exactly one outcome column")
    }

    pub fn column_means(&self) -> &[f64] {
        &self.column_means
    }

    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn is_centered(&self) -> bool {
        self.is_centered
    }

    pub fn is_standardized(&self) -> bool {
        self.is_standardized
    }

    /// Constant feature/protected columns removed during centering.
    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped_columns
    }

    pub fn is_numeric(&self) -> bool {
        self.columns
            .iter()
            .all(|c| matches!(c.data, ColumnData::Numeric(_)))
    }

    /// Rows `indices` (in the given order), keeping centering metadata.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.len() < 2 {
            return Err(Error::TooFewRows(indices.len()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_rows) {
            return Err(Error::LengthMismatch {
                what: "row index",
                expected: self.n_rows,
                got: bad,
            });
        }
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                role: c.role,
                data: match &c.data {
                    ColumnData::Numeric(v) => {
                        ColumnData::Numeric(indices.iter().map(|&i| v[i]).collect())
                    }
                    ColumnData::Categorical(v) => {
                        ColumnData::Categorical(indices.iter().map(|&i| v[i].clone()).collect())
                    }
                },
            })
            .collect();
        Ok(Dataset {
            columns,
            n_rows: indices.len(),
            ..self.clone_metadata()
        })
    }

    fn clone_metadata(&self) -> Dataset {
        Dataset {
            columns: Vec::new(),
            n_rows: self.n_rows,
            column_means: self.column_means.clone(),
            column_scales: self.column_scales.clone(),
            is_centered: self.is_centered,
            is_standardized: self.is_standardized,
            dropped_columns: self.dropped_columns.clone(),
        }
    }
}

/// Category labels in first-appearance order.
fn categories(values: &[String]) -> Vec<&str> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for v in values {
        if seen.insert(v.as_str()) {
            order.push(v.as_str());
        }
    }
    order
}

/// Replaces categorical `column` by `k - 1` dummy columns named `column=label`.
///
/// Categories are taken in first-appearance order and the last one is the
/// reference level (all dummies zero). A column whose labels are exactly
/// `{"0", "1"}` is treated as an indicator: its single dummy is the column
/// itself, with `0` as the reference.
pub fn encode_categorical(d: &Dataset, column: &str) -> Result<Dataset> {
    let idx = d
        .column_index(column)
        .ok_or_else(|| Error::UnknownColumn(column.to_string()))?;
    let source = &d.columns[idx];
    let ColumnData::Categorical(values) = &source.data else {
        return Err(Error::NotCategorical(column.to_string()));
    };
    let mut cats = categories(values);
    let k = cats.len();
    if k < 2 {
        return Err(Error::ConstantCategorical(column.to_string()));
    }
    if k > d.n_rows {
        return Err(Error::TooManyCategories {
            column: column.to_string(),
            categories: k,
            rows: d.n_rows,
        });
    }
    if source.is_role(Role::Outcome) && k != 2 {
        return Err(Error::OutcomeNotBinary {
            column: column.to_string(),
            categories: k,
        });
    }
    let indicator = k == 2 && cats.contains(&"0") && cats.contains(&"1");
    if indicator {
        cats = alloc::vec!["1", "0"];
    }

    let dummies: Vec<Column> = cats[..k - 1]
        .iter()
        .map(|cat| {
            let data = values
                .iter()
                .map(|v| if v == cat { 1.0 } else { 0.0 })
                .collect();
            let name = if indicator {
                source.name.clone()
            } else {
                format!("{}={}", source.name, cat)
            };
            Column {
                name,
                role: ColumnRole::new(source.role.role),
                data: ColumnData::Numeric(data),
            }
        })
        .collect();

    let mut columns = Vec::with_capacity(d.n_cols() + k - 2);
    columns.extend_from_slice(&d.columns[..idx]);
    columns.extend(dummies);
    columns.extend_from_slice(&d.columns[idx + 1..]);
    let mut out = Dataset::new(columns)?;
    out.dropped_columns = d.dropped_columns.clone();
    Ok(out)
}

/// Encodes every categorical column.
pub fn encode_all(d: &Dataset) -> Result<Dataset> {
    let names: Vec<String> = d
        .columns
        .iter()
        .filter(|c| matches!(c.data, ColumnData::Categorical(_)))
        .map(|c| c.name.clone())
        .collect();
    let mut out = d.clone();
    for name in names {
        out = encode_categorical(&out, &name)?;
    }
    Ok(out)
}

/// Per-column centering (and optional scaling) statistics fitted on one set
/// of rows, applicable to any dataset with the same columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringStats {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub standardize: bool,
    /// Constant feature/protected columns; removed by [`CenteringStats::apply`].
    pub dropped: Vec<String>,
}

/// Mean with one refinement pass so that `x - mean` sums to ~0 in floating point.
fn refined_mean(v: &[f64]) -> f64 {
    let m = crate::linalg::mean(v);
    let correction = v.iter().map(|x| x - m).sum::<f64>() / v.len() as f64;
    m + correction
}

impl CenteringStats {
    pub fn fit(d: &Dataset, standardize: bool) -> Result<Self> {
        let mut stats = CenteringStats {
            names: Vec::with_capacity(d.n_cols()),
            means: Vec::with_capacity(d.n_cols()),
            scales: Vec::with_capacity(d.n_cols()),
            standardize,
            dropped: Vec::new(),
        };
        for c in &d.columns {
            let v = c.values()?;
            let m = refined_mean(v);
            let constant = v.iter().all(|&x| x == v[0]);
            if constant && !c.is_role(Role::Outcome) {
                stats.dropped.push(c.name.clone());
            }
            let scale = if standardize {
                let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            } else {
                1.0
            };
            stats.names.push(c.name.clone());
            stats.means.push(m);
            stats.scales.push(scale);
        }
        Ok(stats)
    }

    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        let mut columns = Vec::with_capacity(self.names.len());
        let mut means = Vec::with_capacity(self.names.len());
        let mut scales = Vec::with_capacity(self.names.len());
        for ((name, &m), &s) in self.names.iter().zip(&self.means).zip(&self.scales) {
            if self.dropped.contains(name) {
                continue;
            }
            let c = d
                .column(name)
                .ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            let v = c.values()?;
            let data = if self.standardize {
                v.iter().map(|x| (x - m) / s).collect()
            } else {
                v.iter().map(|x| x - m).collect()
            };
            columns.push(Column {
                name: name.clone(),
                role: c.role,
                data: ColumnData::Numeric(data),
            });
            means.push(m);
            scales.push(s);
        }
        let mut out = Dataset::new(columns)?;
        out.column_means = means;
        out.column_scales = scales;
        out.is_centered = true;
        out.is_standardized = self.standardize;
        out.dropped_columns = d.dropped_columns.clone();
        out.dropped_columns.extend(self.dropped.iter().cloned());
        Ok(out)
    }
}

/// Subtracts each column mean. Constant feature/protected columns are
/// dropped and listed in [`Dataset::dropped_columns`]. Already-centered
/// datasets are returned unchanged.
pub fn center(d: &Dataset) -> Result<Dataset> {
    if d.is_centered {
        return Ok(d.clone());
    }
    CenteringStats::fit(d, false)?.apply(d)
}

/// Centers and scales every column to unit (population) variance.
pub fn standardize(d: &Dataset) -> Result<Dataset> {
    if d.is_standardized {
        return Ok(d.clone());
    }
    if d.is_centered {
        // Scale only; the recorded means stay those of the original data.
        let stats = CenteringStats::fit(d, true)?;
        let mut out = stats.apply(d)?;
        let kept: Vec<usize> = out
            .columns
            .iter()
            .map(|c| d.column_index(&c.name).expect("column kept from d"))
            .collect();
        out.column_means = kept.iter().map(|&i| d.column_means[i]).collect();
        return Ok(out);
    }
    CenteringStats::fit(d, true)?.apply(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SplitScheme {
    /// A fixed test set, then `folds`-fold rotation of validation over the rest.
    HoldoutCv { test_frac: f64, folds: usize },
    /// `repeats` independent shuffles into train/validation/test.
    RandomSplits {
        train_frac: f64,
        val_frac: f64,
        test_frac: f64,
        repeats: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    #[serde(flatten)]
    pub scheme: SplitScheme,
    #[serde(default)]
    pub seed: u64,
}

/// One fold or repeat. Index lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub index: usize,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn in_unit(f: f64) -> bool {
    f > 0.0 && f < 1.0
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl SplitPlan {
    pub fn holdout_cv(test_frac: f64, folds: usize, seed: u64) -> Self {
        Self {
            scheme: SplitScheme::HoldoutCv { test_frac, folds },
            seed,
        }
    }

    pub fn random_splits(train_frac: f64, val_frac: f64, test_frac: f64, repeats: usize, seed: u64) -> Self {
        Self {
            scheme: SplitScheme::RandomSplits {
                train_frac,
                val_frac,
                test_frac,
                repeats,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            SplitScheme::HoldoutCv { test_frac, folds } => {
                if !in_unit(test_frac) {
                    return Err(Error::InvalidSplitPlan("test_frac must lie in (0, 1)"));
                }
                if folds < 2 {
                    return Err(Error::InvalidSplitPlan("folds must be at least 2"));
                }
            }
            SplitScheme::RandomSplits {
                train_frac,
                val_frac,
                test_frac,
                repeats,
            } => {
                if !(in_unit(train_frac) && in_unit(val_frac) && in_unit(test_frac)) {
                    return Err(Error::InvalidSplitPlan("fractions must lie in (0, 1)"));
                }
                if (train_frac + val_frac + test_frac - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSplitPlan("fractions must sum to 1"));
                }
                if repeats == 0 {
                    return Err(Error::InvalidSplitPlan("repeats must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Number of folds/repeats this plan produces.
    pub fn len(&self) -> usize {
        match self.scheme {
            SplitScheme::HoldoutCv { folds, .. } => folds,
            SplitScheme::RandomSplits { repeats, .. } => repeats,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Partitions `0..n` according to the plan using a seeded shuffle.
    pub fn splits(&self, n: usize) -> Result<Vec<Split>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut rows: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(self.len());
        match self.scheme {
            SplitScheme::HoldoutCv { test_frac, folds } => {
                rows.shuffle(&mut rng);
                let n_test = (test_frac * n as f64).round() as usize;
                let (test, rest) = rows.split_at(n_test.min(n));
                let base = rest.len() / folds;
                let extra = rest.len() % folds;
                let mut start = 0;
                for k in 0..folds {
                    let len = base + usize::from(k < extra);
                    let validation = &rest[start..start + len];
                    let train: Vec<usize> = rest[..start]
                        .iter()
                        .chain(&rest[start + len..])
                        .copied()
                        .collect();
                    start += len;
                    out.push(Split {
                        index: k,
                        train: sorted(train),
                        validation: sorted(validation.to_vec()),
                        test: sorted(test.to_vec()),
                    });
                }
            }
            SplitScheme::RandomSplits {
                train_frac,
                val_frac,
                repeats,
                ..
            } => {
                let n_train = (train_frac * n as f64).round() as usize;
                let n_val = (val_frac * n as f64).round() as usize;
                if n_train + n_val > n {
                    return Err(Error::EmptyPartition {
                        split: 0,
                        partition: "test",
                    });
                }
                for k in 0..repeats {
                    rows.shuffle(&mut rng);
                    out.push(Split {
                        index: k,
                        train: sorted(rows[..n_train].to_vec()),
                        validation: sorted(rows[n_train..n_train + n_val].to_vec()),
                        test: sorted(rows[n_train + n_val..].to_vec()),
                    });
                }
            }
        }
        for s in &out {
            for (partition, part) in [("train", &s.train), ("validation", &s.validation), ("test", &s.test)] {
                if part.is_empty() {
                    return Err(Error::EmptyPartition {
                        split: s.index,
                        partition,
                    });
                }
            }
        }
        Ok(out)
    }
}

pub fn make_splits(d: &Dataset, plan: &SplitPlan) -> Result<Vec<Split>> {
    plan.splits(d.n_rows())
}

/// True when every value is exactly 0 or 1.
pub fn is_binary(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0 || x == 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cats(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn toy() -> Dataset {
        Dataset::new(vec![
            Column::numeric("x1", Role::Feature, vec![1.0, 2.0, 4.0]),
            Column::numeric("p", Role::Protected, vec![1.0, 0.0, -1.0]),
            Column::numeric("y", Role::Outcome, vec![0.0, 1.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn construction_checks() {
        let d = toy();
        assert_eq!((d.n_rows(), d.n_cols()), (3, 3));
        let two_outcomes = Dataset::new(vec![
            Column::numeric("a", Role::Outcome, vec![1.0, 2.0]),
            Column::numeric("b", Role::Outcome, vec![1.0, 2.0]),
        ]);
        assert_eq!(two_outcomes, Err(Error::OutcomeCount(2)));
        let nan = Dataset::new(vec![
            Column::numeric("a", Role::Feature, vec![1.0, f64::NAN]),
            Column::numeric("b", Role::Outcome, vec![1.0, 2.0]),
        ]);
        assert!(matches!(nan, Err(Error::NonFinite { row: 1, .. })));
        let dup = Dataset::new(vec![
            Column::numeric("a", Role::Feature, vec![1.0, 2.0]),
            Column::numeric("a", Role::Outcome, vec![1.0, 2.0]),
        ]);
        assert_eq!(dup, Err(Error::DuplicateColumn("a".into())));
        let one_row = Dataset::new(vec![
            Column::numeric("a", Role::Feature, vec![1.0]),
            Column::numeric("b", Role::Outcome, vec![1.0]),
        ]);
        assert_eq!(one_row, Err(Error::TooFewRows(1)));
    }

    #[test]
    fn center_examples() {
        let d = Dataset::new(vec![
            Column::numeric("a", Role::Feature, vec![1.0, 2.0, 3.0]),
            Column::numeric("b", Role::Feature, vec![1.0, 2.0, 4.0]),
            Column::numeric("y", Role::Outcome, vec![-1.0, 0.0, 1.0]),
        ])
        .unwrap();
        let c = center(&d).unwrap();
        assert_eq!(c.columns()[0].values().unwrap(), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.column_means()[0], 2.0);
        let b = c.columns()[1].values().unwrap();
        let expect = [-4.0 / 3.0, -1.0 / 3.0, 5.0 / 3.0];
        for (x, e) in b.iter().zip(expect) {
            assert!((x - e).abs() < 1e-15);
        }
        assert!((c.column_means()[1] - 7.0 / 3.0).abs() < 1e-15);
        // already centered column: unchanged, mean 0
        assert_eq!(c.columns()[2].values().unwrap(), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.column_means()[2], 0.0);
        assert!(c.is_centered());
        assert_eq!(center(&c).unwrap(), c);
    }

    #[test]
    fn constant_columns_are_dropped() {
        let d = Dataset::new(vec![
            Column::numeric("a", Role::Feature, vec![1.0, 2.0, 3.0]),
            Column::numeric("k", Role::Feature, vec![5.0, 5.0, 5.0]),
            Column::numeric("y", Role::Outcome, vec![1.0, 1.0, 1.0]),
        ])
        .unwrap();
        let c = center(&d).unwrap();
        assert_eq!(c.n_cols(), 2);
        assert_eq!(c.dropped_columns(), &["k".to_string()]);
    }

    #[test]
    fn standardize_gives_unit_variance() {
        let s = standardize(&toy()).unwrap();
        for c in s.columns() {
            let v = c.values().unwrap();
            let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
            assert!((var - 1.0).abs() < 1e-12);
        }
        let via_center = standardize(&center(&toy()).unwrap()).unwrap();
        for (a, b) in s.columns().iter().zip(via_center.columns()) {
            for (x, y) in a.values().unwrap().iter().zip(b.values().unwrap()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert_eq!(via_center.column_means(), s.column_means());
    }

    #[test]
    fn encode_three_categories() {
        let d = Dataset::new(vec![
            Column::categorical("c", Role::Feature, cats(&["a", "b", "c", "c"])),
            Column::numeric("y", Role::Outcome, vec![0.0, 1.0, 0.0, 1.0]),
        ])
        .unwrap();
        let e = encode_categorical(&d, "c").unwrap();
        assert_eq!(e.n_cols(), 3);
        assert_eq!(e.columns()[0].name, "c=a");
        assert_eq!(e.columns()[0].values().unwrap(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(e.columns()[1].values().unwrap(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(e.columns()[0].role, ColumnRole::new(Role::Feature));
    }

    #[test]
    fn encode_binary_indicator_is_identity() {
        let d = Dataset::new(vec![
            Column::categorical("s", Role::Protected, cats(&["0", "1", "1", "0"])),
            Column::numeric("y", Role::Outcome, vec![0.0, 1.0, 0.0, 1.0]),
        ])
        .unwrap();
        let e = encode_categorical(&d, "s").unwrap();
        assert_eq!(e.n_cols(), 2);
        assert_eq!(e.columns()[0].name, "s");
        assert_eq!(e.columns()[0].values().unwrap(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn encode_five_category_protected() {
        let d = Dataset::new(vec![
            Column::categorical("race", Role::Protected, cats(&["a", "b", "c", "d", "e", "a"])),
            Column::numeric("y", Role::Outcome, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]),
        ])
        .unwrap();
        let e = encode_categorical(&d, "race").unwrap();
        assert_eq!(e.with_role(Role::Protected).count(), 4);
    }

    #[test]
    fn encode_errors() {
        let d = Dataset::new(vec![
            Column::categorical("c", Role::Feature, cats(&["a", "a", "a"])),
            Column::numeric("x", Role::Feature, vec![1.0, 2.0, 3.0]),
            Column::categorical("y", Role::Outcome, cats(&["u", "v", "w"])),
        ])
        .unwrap();
        assert_eq!(encode_categorical(&d, "c"), Err(Error::ConstantCategorical("c".into())));
        assert_eq!(encode_categorical(&d, "x"), Err(Error::NotCategorical("x".into())));
        assert!(matches!(encode_categorical(&d, "y"), Err(Error::OutcomeNotBinary { .. })));
        assert!(matches!(center(&d), Err(Error::NotNumeric(_))));
    }

    #[test]
    fn holdout_cv_sizes() {
        let splits = SplitPlan::holdout_cv(0.2, 5, 1).splits(100).unwrap();
        assert_eq!(splits.len(), 5);
        for s in &splits {
            assert_eq!(s.test.len(), 20);
            assert_eq!(s.train.len(), 64);
            assert_eq!(s.validation.len(), 16);
            assert_eq!(s.test, splits[0].test);
        }
    }

    #[test]
    fn random_split_sizes_and_determinism() {
        let plan = SplitPlan::random_splits(0.5, 0.2, 0.3, 1, 9);
        let s = plan.splits(10).unwrap();
        assert_eq!((s[0].train.len(), s[0].validation.len(), s[0].test.len()), (5, 2, 3));
        assert_eq!(plan.splits(10).unwrap(), s);
    }

    #[test]
    fn bad_plans() {
        assert!(SplitPlan::holdout_cv(1.2, 5, 0).validate().is_err());
        assert!(SplitPlan::random_splits(0.5, 0.2, 0.2, 1, 0).validate().is_err());
        assert!(matches!(
            SplitPlan::holdout_cv(0.2, 5, 0).splits(4),
            Err(Error::EmptyPartition { .. })
        ));
    }
}
