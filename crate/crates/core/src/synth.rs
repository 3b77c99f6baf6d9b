//! Seeded synthetic data: the biased two-Gaussian classification set and
//! random correlated designs for property tests and benchmarks.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::tabular::{Column, Dataset, Role};

/// Two continuous features drawn from a bivariate Gaussian per outcome
/// class, a binary outcome `y` with `P(y = 1) = 1/2`, and a binary protected
/// attribute `s` with `P(s = 1 | y = 1) = protected_bias` and
/// `P(s = 1 | y = 0) = 1 - protected_bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    pub mean_pos: [f64; 2],
    pub mean_neg: [f64; 2],
    pub cov_pos: [[f64; 2]; 2],
    pub cov_neg: [[f64; 2]; 2],
    pub protected_bias: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 10_000,
            seed: 0,
            mean_pos: [2.0, 2.0],
            mean_neg: [-2.0, -2.0],
            cov_pos: [[5.0, 1.0], [1.0, 5.0]],
            cov_neg: [[10.0, 1.0], [1.0, 3.0]],
            protected_bias: 0.8,
        }
    }
}

fn cholesky2(cov: &[[f64; 2]; 2]) -> Result<[f64; 3]> {
    if cov[0][1] != cov[1][0] {
        return Err(Error::NotPositiveDefinite);
    }
    let l = cholesky(&[cov[0][0], cov[0][1], cov[1][0], cov[1][1]], 2)?;
    Ok([l[0], l[2], l[3]])
}

pub fn generate(c: &SynthConfig) -> Result<Dataset> {
    if !(c.protected_bias > 0.0 && c.protected_bias < 1.0) {
        return Err(Error::InvalidConfig("protected_bias must lie in (0, 1)"));
    }
    let l_pos = cholesky2(&c.cov_pos)?;
    let l_neg = cholesky2(&c.cov_neg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (mut x1, mut x2, mut s, mut y) = (
        Vec::with_capacity(c.n),
        Vec::with_capacity(c.n),
        Vec::with_capacity(c.n),
        Vec::with_capacity(c.n),
    );
    for _ in 0..c.n {
        let positive = rng.random::<f64>() < 0.5;
        let p_s = if positive {
            c.protected_bias
        } else {
            1.0 - c.protected_bias
        };
        let blue = rng.random::<f64>() < p_s;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let (mu, l) = if positive {
            (c.mean_pos, l_pos)
        } else {
            (c.mean_neg, l_neg)
        };
        x1.push(mu[0] + l[0] * z1);
        x2.push(mu[1] + l[1] * z1 + l[2] * z2);
        s.push(f64::from(u8::from(blue)));
        y.push(f64::from(u8::from(positive)));
    }
    Dataset::new(alloc::vec![
        Column::numeric("x1", Role::Feature, x1),
        Column::numeric("x2", Role::Feature, x2),
        Column::numeric("s", Role::Protected, s),
        Column::numeric("y", Role::Outcome, y),
    ])
}

/// Random regression design with protected columns that are correlated
/// with each other and with every feature.
///
/// `p_k = z_k + correlation * z_0`, `x_j = sum_k a_jk p_k + e_j` with
/// `a_jk ~ N(0, correlation^2)`, and `y` a random linear combination of all
/// columns plus unit noise. Protected columns are Gaussian unless
/// `binary_protected` is set, in which case `p_k = 1[z_k + correlation z_0 > 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub n: usize,
    pub n_features: usize,
    pub n_protected: usize,
    pub correlation: f64,
    pub binary_protected: bool,
    pub seed: u64,
}

pub fn correlated_design(c: &DesignConfig) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };
    let shared: Vec<f64> = (0..c.n).map(|_| normal()).collect();
    let protected: Vec<Vec<f64>> = (0..c.n_protected)
        .map(|_| {
            shared
                .iter()
                .map(|z0| {
                    let v = normal() + c.correlation * z0;
                    if c.binary_protected {
                        f64::from(u8::from(v > 0.0))
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let features: Vec<Vec<f64>> = (0..c.n_features)
        .map(|_| {
            let loads: Vec<f64> = (0..c.n_protected).map(|_| c.correlation * normal()).collect();
            (0..c.n)
                .map(|i| {
                    let signal: f64 = loads.iter().zip(&protected).map(|(a, p)| a * p[i]).sum();
                    signal + normal()
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (0..c.n_features + c.n_protected).map(|_| normal()).collect();
    let y: Vec<f64> = (0..c.n)
        .map(|i| {
            let xs = features.iter().chain(&protected).map(|col| col[i]);
            weights.iter().zip(xs).map(|(w, v)| w * v).sum::<f64>() + normal()
        })
        .collect();

    let mut cols = Vec::with_capacity(c.n_features + c.n_protected + 1);
    for (j, f) in features.into_iter().enumerate() {
        cols.push(Column::numeric(format!("x{}", j + 1), Role::Feature, f));
    }
    for (k, p) in protected.into_iter().enumerate() {
        cols.push(Column::numeric(format!("p{}", k + 1), Role::Protected, p));
    }
    cols.push(Column::numeric("y", Role::Outcome, y));
    Dataset::new(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::pearson;

    #[test]
    fn deterministic() {
        let c = SynthConfig {
            n: 200,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = SynthConfig { seed: 8, ..c.clone() };
        assert_ne!(generate(&c).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn unbiased_limit() {
        let c = SynthConfig {
            protected_bias: 0.5,
            seed: 3,
            ..Default::default()
        };
        let d = generate(&c).unwrap();
        let s = d.column("s").unwrap().values().unwrap();
        let y = d.column("y").unwrap().values().unwrap();
        assert!(pearson(s, y).unwrap().abs() <= 0.05);
    }

    #[test]
    fn rejects_bad_config() {
        let bad_cov = SynthConfig {
            cov_pos: [[1.0, 2.0], [2.0, 1.0]],
            ..Default::default()
        };
        assert_eq!(generate(&bad_cov), Err(Error::NotPositiveDefinite));
        let bad_bias = SynthConfig {
            protected_bias: 1.0,
            ..Default::default()
        };
        assert!(generate(&bad_bias).is_err());
    }
}
