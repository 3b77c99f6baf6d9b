use orthofair_core::linalg::norm;
use orthofair_core::models::{
    fit_linear, fit_logistic, fit_logistic_with, fit_majority, logistic_coefficient_deltas, predict, sigmoid,
    verify_coefficient_invariance, LogisticOptions,
};
use orthofair_core::synth::{correlated_design, DesignConfig};
use orthofair_core::tabular::{center, standardize};
use orthofair_core::{build_basis, debias, interpolate, Error, FeatureMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn matrix(cols: Vec<Vec<f64>>) -> FeatureMatrix {
    let n = cols[0].len();
    let names = (0..cols.len()).map(|i| format!("x{i}")).collect();
    FeatureMatrix::new(names, cols, n).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Solves the normal equations of `[1, X]` by Gaussian elimination with
/// partial pivoting, independently of the library's QR path.
fn normal_equations(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut design = vec![vec![1.0; n]];
    design.extend(cols.iter().cloned());
    let p = design.len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = (0..n).map(|k| design[i][k] * design[j][k]).sum();
        }
        a[i][p] = (0..n).map(|k| design[i][k] * y[k]).sum();
    }
    for c in 0..p {
        let pivot = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, pivot);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot = a[c].clone();
                for (v, w) in a[r].iter_mut().zip(&pivot).skip(c) {
                    *v -= f * w;
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

#[test]
fn least_squares_matches_normal_equation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let cols: Vec<Vec<f64>> = (0..4).map(|_| gaussian(&mut rng, 50)).collect();
        let y = gaussian(&mut rng, 50);
        let m = fit_linear(&matrix(cols.clone()), &y).unwrap();
        let oracle = normal_equations(&cols, &y);
        assert!((m.intercept - oracle[0]).abs() <= 1e-8);
        for (b, o) in m.coefficients.iter().zip(&oracle[1..]) {
            assert!((b - o).abs() <= 1e-8, "{b} vs {o}");
        }
    }
}

#[test]
fn least_squares_residual_is_orthogonal_to_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cols: Vec<Vec<f64>> = (0..5).map(|_| gaussian(&mut rng, 80)).collect();
    let y = gaussian(&mut rng, 80);
    let x = matrix(cols.clone());
    let m = fit_linear(&x, &y).unwrap();
    let fitted = predict(&m, &x).unwrap().values;
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    assert!(resid.iter().sum::<f64>().abs() <= 1e-10);
    let xty: Vec<f64> = cols.iter().map(|c| c.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
    let normal: Vec<f64> = cols.iter().map(|c| c.iter().zip(&resid).map(|(a, b)| a * b).sum()).collect();
    assert!(norm(&normal) <= 1e-8 * norm(&xty));
}

#[test]
fn orthogonal_design_closed_form() {
    let x0 = vec![1.0, -1.0, 1.0, -1.0];
    let x1 = vec![1.0, 1.0, -1.0, -1.0];
    let y = vec![3.0, 1.0, 0.5, -2.0];
    let m = fit_linear(&matrix(vec![x0.clone(), x1.clone()]), &y).unwrap();
    for (b, x) in m.coefficients.iter().zip([&x0, &x1]) {
        let expected = x.iter().zip(&y).map(|(a, c)| a * c).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
        assert!((b - expected).abs() <= 1e-12);
    }
}

fn logistic_problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..p).map(|_| gaussian(&mut rng, n)).collect();
    let w: Vec<f64> = (0..p).map(|j| 0.5 - 0.4 * j as f64).collect();
    let y = (0..n)
        .map(|i| {
            let z: f64 = 0.3 + (0..p).map(|j| w[j] * cols[j][i]).sum::<f64>();
            f64::from(u8::from(rng.random::<f64>() < sigmoid(z)))
        })
        .collect();
    (cols, y)
}

/// Gradient of the penalized mean log-likelihood, computed directly.
fn oracle_gradient(cols: &[Vec<f64>], y: &[f64], b0: f64, b: &[f64], l2: f64) -> Vec<f64> {
    let n = y.len();
    let resid: Vec<f64> = (0..n)
        .map(|i| {
            let z = b0 + cols.iter().zip(b).map(|(c, w)| w * c[i]).sum::<f64>();
            y[i] - 1.0 / (1.0 + (-z).exp())
        })
        .collect();
    let mut g = vec![resid.iter().sum::<f64>() / n as f64];
    for (c, w) in cols.iter().zip(b) {
        g.push(c.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n as f64 - l2 * w);
    }
    g
}

#[test]
fn logistic_first_order_condition() {
    for seed in 0..5 {
        let (cols, y) = logistic_problem(seed, 200, 3);
        let m = fit_logistic(&matrix(cols.clone()), &y).unwrap();
        assert!(m.converged);
        assert!(m.final_gradient_norm <= 1e-8);
        let g = oracle_gradient(&cols, &y, m.intercept, &m.coefficients, 1e-8);
        assert!(norm(&g) <= 1e-8, "seed {seed}: {}", norm(&g));
    }
}

#[test]
fn logistic_likelihood_never_decreases() {
    let (cols, y) = logistic_problem(9, 200, 3);
    let x = matrix(cols);
    let loglik = |iters: usize| {
        let opts = LogisticOptions {
            max_iterations: iters,
            ..Default::default()
        };
        let m = fit_logistic_with(&x, &y, opts).unwrap();
        let p = predict(&m, &x).unwrap().values;
        y.iter().zip(&p).map(|(t, q)| t * q.ln() + (1.0 - t) * (1.0 - q).ln()).sum::<f64>()
    };
    let path: Vec<f64> = (0..8).map(loglik).collect();
    for w in path.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{path:?}");
    }
}

#[test]
fn logistic_without_signal() {
    // Exactly balanced labels, each label mirrored in x: the MLE is zero.
    let x: Vec<f64> = vec![-2.0, -1.0, 1.0, 2.0, -2.0, -1.0, 1.0, 2.0];
    let y = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
    let m = fit_logistic(&matrix(vec![x]), &y).unwrap();
    assert!(m.intercept.abs() <= 1e-6);
    assert!(m.coefficients[0].abs() <= 1e-6);
}

#[test]
fn logistic_rejects_non_binary_outcome() {
    let x = matrix(vec![vec![1.0, 2.0, 3.0, 4.0]]);
    assert!(matches!(fit_logistic(&x, &[0.0, 1.0, 2.0, 1.0]), Err(Error::NonBinary(_))));
}

#[test]
fn majority_predicts_the_common_label() {
    let x = matrix(vec![vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
    let m = fit_majority(&x, &[1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
    assert_eq!(predict(&m, &x).unwrap().values, vec![1.0; 5]);
}

#[test]
fn predict_checks_columns() {
    let x = matrix(vec![vec![1.0, 2.0, 3.0]]);
    let m = fit_linear(&x, &[1.0, 2.0, 4.0]).unwrap();
    let other = FeatureMatrix::new(vec!["z".into()], vec![vec![1.0, 2.0, 3.0]], 3).unwrap();
    assert!(matches!(predict(&m, &other), Err(Error::ColumnMismatch { .. })));
}

#[test]
fn coefficient_invariance_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let c = DesignConfig {
            n: rng.random_range(50..=500),
            n_features: rng.random_range(2..=10),
            n_protected: rng.random_range(1..=3),
            correlation: rng.random_range(0.3..1.5),
            binary_protected: case % 2 == 1,
            seed: rng.random(),
        };
        let d = standardize(&correlated_design(&c).unwrap()).unwrap();
        let b = build_basis(&d).unwrap();
        let r = verify_coefficient_invariance(&d, &b).unwrap();
        assert!(r.max_abs_coeff_diff <= 1e-6, "case {case} {c:?}: {}", r.max_abs_coeff_diff);
        assert!(r.yhat_protected_corr <= 1e-8, "case {case} {c:?}: {}", r.yhat_protected_corr);
    }
}

#[test]
fn invariance_is_trivial_for_orthogonal_protected_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 40;
    let x = gaussian(&mut rng, n);
    // p alternates sign in pairs, so it is orthogonal to the symmetrized x.
    let x: Vec<f64> = (0..n).map(|i| x[i / 2]).collect();
    let p: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let y = gaussian(&mut rng, n);
    use orthofair_core::{Column, Dataset, Role};
    let d = center(
        &Dataset::new(vec![
            Column::numeric("x", Role::Feature, x.clone()),
            Column::numeric("p", Role::Protected, p),
            Column::numeric("y", Role::Outcome, y),
        ])
        .unwrap(),
    )
    .unwrap();
    let b = build_basis(&d).unwrap();
    let view = debias(&d, &b).unwrap();
    let xc = d.column("x").unwrap().values().unwrap();
    for (a, c) in view.values()[0].iter().zip(xc) {
        assert!((a - c).abs() <= 1e-12);
    }
    let r = verify_coefficient_invariance(&d, &b).unwrap();
    assert!(r.max_abs_coeff_diff <= 1e-12);
}

#[test]
fn invariance_breaks_away_from_lambda_zero() {
    let d = standardize(
        &correlated_design(&DesignConfig {
            n: 300,
            n_features: 3,
            n_protected: 1,
            correlation: 1.0,
            binary_protected: false,
            seed: 8,
        })
        .unwrap(),
    )
    .unwrap();
    let b = build_basis(&d).unwrap();
    let full = verify_coefficient_invariance(&d, &b).unwrap().full_coefficients;
    let half = interpolate(&debias(&d, &b).unwrap(), &d, 0.5, &b).unwrap();
    let y = d.outcome().values().unwrap();
    let m = fit_linear(&FeatureMatrix::from_view(&half, d.n_rows()).unwrap(), y).unwrap();
    let diff = full.iter().zip(&m.coefficients).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
    assert!(diff > 1e-3, "{diff}");
}

#[test]
fn logistic_deltas_are_reported() {
    let raw = correlated_design(&DesignConfig {
        n: 400,
        n_features: 3,
        n_protected: 1,
        correlation: 0.8,
        binary_protected: true,
        seed: 4,
    })
    .unwrap();
    let y: Vec<f64> = raw.outcome().values().unwrap().iter().map(|v| f64::from(u8::from(*v > 0.0))).collect();
    let d = standardize(&raw).unwrap();
    let b = build_basis(&d).unwrap();
    let deltas = logistic_coefficient_deltas(&d, &b, &y).unwrap();
    assert_eq!(deltas.len(), 3);
    assert!(deltas.iter().all(|v| v.is_finite()));
}
