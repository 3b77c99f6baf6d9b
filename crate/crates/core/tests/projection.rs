use orthofair_core::linalg::{cosine, dot, norm};
use orthofair_core::synth::{correlated_design, DesignConfig};
use orthofair_core::tabular::center;
use orthofair_core::{build_basis, debias, debias_outcome, interpolate, Column, Dataset, Role};
use proptest::prelude::*;

fn design(n: usize, n_f: usize, n_p: usize, binary: bool, seed: u64) -> Dataset {
    let d = correlated_design(&DesignConfig {
        n,
        n_features: n_f,
        n_protected: n_p,
        correlation: 0.8,
        binary_protected: binary,
        seed,
    })
    .unwrap();
    center(&d).unwrap()
}

fn feature(d: &Dataset, name: &str) -> Vec<f64> {
    d.column(name).unwrap().values().unwrap().to_vec()
}

/// Rebuilds `d` with its feature columns replaced.
fn with_features(d: &Dataset, features: Vec<Vec<f64>>) -> Dataset {
    let mut it = features.into_iter();
    let cols = d
        .columns()
        .iter()
        .map(|c| {
            if c.is_role(Role::Feature) {
                Column::numeric(c.name.clone(), Role::Feature, it.next().unwrap())
            } else {
                c.clone()
            }
        })
        .collect();
    center(&Dataset::new(cols).unwrap()).unwrap()
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = norm(a).max(norm(b)).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_orthonormal(seed in any::<u64>(), n in 20usize..200, n_p in 1usize..4) {
        let d = design(n, 3, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        prop_assert!(b.rank() <= n_p && b.rank() <= n);
        let v = b.vectors();
        for i in 0..v.len() {
            prop_assert!((norm(&v[i]) - 1.0).abs() <= 1e-12);
            for j in 0..i {
                prop_assert!(dot(&v[i], &v[j]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_basis(
        seed in any::<u64>(), n in 20usize..200, n_f in 1usize..6, n_p in 1usize..4, binary in any::<bool>()
    ) {
        let d = design(n, n_f, n_p, binary, seed);
        let Ok(b) = build_basis(&d) else { return Ok(()) };
        let view = debias(&d, &b).unwrap();
        for r in view.values() {
            if norm(r) == 0.0 {
                continue;
            }
            for q in b.vectors() {
                prop_assert!(cosine(r, q).unwrap().abs() <= 1e-10);
            }
        }
        prop_assert!(view.max_residual_correlation() <= 1e-10);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), n in 20usize..200, n_f in 1usize..6, n_p in 1usize..4) {
        let d = design(n, n_f, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        let once = debias(&d, &b).unwrap();
        let twice = debias(&with_features(&d, once.values().to_vec()), &b).unwrap();
        for (r1, r2) in once.values().iter().zip(twice.values()) {
            let scale = norm(r1).max(1.0);
            for (a, c) in r1.iter().zip(r2) {
                prop_assert!((a - c).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn projection_is_linear(
        seed in any::<u64>(), n in 20usize..200, n_p in 1usize..4, alpha in -10.0f64..10.0, beta in -10.0f64..10.0
    ) {
        let d = design(n, 2, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        let x = feature(&d, "x1");
        let z = feature(&d, "x2");
        let combo: Vec<f64> = x.iter().zip(&z).map(|(a, c)| alpha * a + beta * c).collect();
        let separate = debias(&d, &b).unwrap();
        let joint = debias(&with_features(&d, vec![combo, z.clone()]), &b).unwrap();
        let expected: Vec<f64> = separate.values()[0]
            .iter()
            .zip(&separate.values()[1])
            .map(|(a, c)| alpha * a + beta * c)
            .collect();
        prop_assert!(max_rel_diff(&joint.values()[0], &expected) <= 1e-10);
    }

    #[test]
    fn projection_never_increases_norm(seed in any::<u64>(), n in 20usize..200, n_f in 1usize..6, n_p in 1usize..4) {
        let d = design(n, n_f, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        let view = debias(&d, &b).unwrap();
        for (name, r) in view.source_columns().iter().zip(view.values()) {
            let x = feature(&d, name);
            prop_assert!(norm(r) <= norm(&x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn binary_groups_share_residual_means(seed in any::<u64>(), n in 20usize..300, n_f in 1usize..5) {
        let raw = correlated_design(&DesignConfig {
            n, n_features: n_f, n_protected: 1, correlation: 0.8, binary_protected: true, seed,
        }).unwrap();
        let groups = raw.column("p1").unwrap().values().unwrap().to_vec();
        let (ones, zeros) = groups.iter().fold((0, 0), |(o, z), &g| if g == 1.0 { (o + 1, z) } else { (o, z + 1) });
        if ones == 0 || zeros == 0 {
            return Ok(());
        }
        let d = center(&raw).unwrap();
        let b = build_basis(&d).unwrap();
        let view = debias(&d, &b).unwrap();
        for r in view.values() {
            let mean_in = |g: f64| {
                let (s, c) = r.iter().zip(&groups).filter(|(_, &p)| p == g).fold((0.0, 0.0), |(s, c), (v, _)| (s + v, c + 1.0));
                s / c
            };
            let scale = norm(r).max(1.0);
            prop_assert!((mean_in(0.0) - mean_in(1.0)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn interpolation_endpoints(seed in any::<u64>(), n in 20usize..200, n_f in 1usize..6, n_p in 1usize..4, lambda in 0.0f64..=1.0) {
        let d = design(n, n_f, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        let zero = debias(&d, &b).unwrap();
        let one = interpolate(&zero, &d, 1.0, &b).unwrap();
        for (name, v) in one.source_columns().iter().zip(one.values()) {
            let x = feature(&d, name);
            for (a, c) in v.iter().zip(&x) {
                prop_assert!((a - c).abs() <= 1e-12 * c.abs().max(1.0));
            }
        }
        let same = interpolate(&zero, &d, 0.0, &b).unwrap();
        prop_assert_eq!(same.values(), zero.values());
        let mid = interpolate(&zero, &d, lambda, &b).unwrap();
        for ((name, r), v) in zero.source_columns().iter().zip(zero.values()).zip(mid.values()) {
            let x = feature(&d, name);
            for i in 0..n {
                let expected = r[i] + lambda * (x[i] - r[i]);
                prop_assert!((v[i] - expected).abs() <= 1e-12 * x[i].abs().max(r[i].abs()).max(1.0));
            }
        }
    }

    #[test]
    fn outcome_residual_is_orthogonal(seed in any::<u64>(), n in 20usize..200, n_p in 1usize..4) {
        let d = design(n, 2, n_p, false, seed);
        let b = build_basis(&d).unwrap();
        let ry = debias_outcome(&d, &b).unwrap();
        for q in b.vectors() {
            prop_assert!(cosine(&ry, q).unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn outcome_splits_into_protected_and_orthogonal_parts() {
    // y = q1 + z with z orthogonal to the basis: the residual is exactly z.
    let d = design(60, 2, 2, false, 5);
    let b = build_basis(&d).unwrap();
    let z = debias(&d, &b).unwrap().values()[0].clone();
    let y: Vec<f64> = b.vectors()[0].iter().zip(&z).map(|(q, zi)| q + zi).collect();
    let cols = d
        .columns()
        .iter()
        .map(|c| if c.is_role(Role::Outcome) { Column::numeric("y", Role::Outcome, y.clone()) } else { c.clone() })
        .collect();
    let d2 = center(&Dataset::new(cols).unwrap()).unwrap();
    let ry = debias_outcome(&d2, &b).unwrap();
    assert!(max_rel_diff(&ry, &z) <= 1e-10);
}

#[test]
fn test_rows_use_training_loadings() {
    // Transforming the training rows themselves reproduces the fitted view.
    let d = design(120, 4, 2, false, 11);
    let b = build_basis(&d).unwrap();
    let view = debias(&d, &b).unwrap();
    for lambda in [0.0, 0.3, 1.0] {
        let moved = view.transform_rows(&b, &d, lambda).unwrap();
        let at = interpolate(&view, &d, lambda, &b).unwrap();
        for (a, c) in moved.iter().zip(at.values()) {
            assert!(max_rel_diff(a, c) <= 1e-10, "lambda {lambda}");
        }
    }
}
