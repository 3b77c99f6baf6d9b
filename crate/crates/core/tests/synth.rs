use orthofair_core::metrics::{accuracy, discrimination, pearson};
use orthofair_core::models::{binarize, fit_logistic, predict};
use orthofair_core::synth::{generate, SynthConfig};
use orthofair_core::tabular::center;
use orthofair_core::{build_basis, debias, interpolate, Error, FeatureMatrix};

fn col(d: &orthofair_core::Dataset, name: &str) -> Vec<f64> {
    d.column(name).unwrap().values().unwrap().to_vec()
}

#[test]
fn class_means_converge() {
    let c = SynthConfig {
        n: 20_000,
        seed: 3,
        ..Default::default()
    };
    let d = generate(&c).unwrap();
    let y = col(&d, "y");
    for (j, name) in ["x1", "x2"].iter().enumerate() {
        let x = col(&d, name);
        for (label, mean, cov) in [(1.0, c.mean_pos, c.cov_pos), (0.0, c.mean_neg, c.cov_neg)] {
            let group: Vec<f64> = x.iter().zip(&y).filter(|(_, &t)| t == label).map(|(v, _)| *v).collect();
            let m = group.iter().sum::<f64>() / group.len() as f64;
            let bound = 3.0 * cov[j][j].sqrt() / (group.len() as f64).sqrt();
            assert!((m - mean[j]).abs() <= bound, "{name} y={label}: {m} vs {}", mean[j]);
        }
    }
}

#[test]
fn unbiased_protected_is_independent_of_outcome() {
    let d = generate(&SynthConfig {
        protected_bias: 0.5,
        seed: 1,
        ..Default::default()
    })
    .unwrap();
    assert!(pearson(&col(&d, "s"), &col(&d, "y")).unwrap().abs() <= 0.05);
}

#[test]
fn biased_protected_tracks_outcome() {
    let d = generate(&SynthConfig::default()).unwrap();
    assert!(pearson(&col(&d, "s"), &col(&d, "y")).unwrap() > 0.3);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad_cov = SynthConfig {
        cov_pos: [[1.0, 2.0], [2.0, 1.0]],
        ..Default::default()
    };
    assert!(matches!(generate(&bad_cov), Err(Error::NotPositiveDefinite)));
    let bad_bias = SynthConfig {
        protected_bias: 1.0,
        ..Default::default()
    };
    assert!(generate(&bad_bias).is_err());
}

/// Fraction of protected-group members among rows predicted `label`.
fn group_ratio(pred: &[f64], s: &[f64], label: f64) -> f64 {
    let (hits, total) = pred
        .iter()
        .zip(s)
        .filter(|(p, _)| **p == label)
        .fold((0.0, 0.0), |(h, t), (_, g)| (h + g, t + 1.0));
    hits / total
}

#[test]
fn decorrelation_trades_accuracy_for_parity() {
    let raw = generate(&SynthConfig::default()).unwrap();
    let y = col(&raw, "y");
    let s = col(&raw, "s");
    let d = center(&raw).unwrap();
    let b = build_basis(&d).unwrap();
    let fair = debias(&d, &b).unwrap();

    let mut results = Vec::new();
    for lambda in [0.0, 1.0] {
        let view = interpolate(&fair, &d, lambda, &b).unwrap();
        let x = FeatureMatrix::from_view(&view, d.n_rows()).unwrap();
        let m = fit_logistic(&x, &y).unwrap();
        let pred = binarize(&predict(&m, &x).unwrap().values);
        let gap = (group_ratio(&pred, &s, 1.0) - group_ratio(&pred, &s, 0.0)).abs();
        results.push((accuracy(&pred, &y).unwrap(), discrimination(&pred, &s).unwrap(), gap));
    }
    let (acc0, disc0, gap0) = results[0];
    let (acc1, disc1, gap1) = results[1];
    assert!(acc1 > acc0, "{results:?}");
    assert!(disc0 < disc1, "{results:?}");
    assert!(gap0 < gap1, "{results:?}");
}
