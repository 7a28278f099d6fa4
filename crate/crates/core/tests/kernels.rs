mod common;

use dirbias_core::kernels::{
    eval_kernel, gram_matrix, predicted_offdiag_bound, sample_sphere_data, simulate_sine_regression, tau_bound_check,
    DataSet, KernelSpec,
};
use dirbias_core::linalg::{max_off_diagonal, Matrix};
use dirbias_core::rng::Pcg64;
use dirbias_core::spectral::eig_sym;
use proptest::prelude::*;

fn vector_families() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Bilinear,
        KernelSpec::Polynomial { c: 0.01, m: 2 },
        KernelSpec::Polynomial { c: 0.5, m: 3 },
        KernelSpec::Rbf { gamma: 0.7 },
        KernelSpec::Gaussian { sigma: 1.3 },
        KernelSpec::Laplace { sigma: 0.8 },
        KernelSpec::Sigmoid { alpha: 0.5, c: 0.1 },
    ]
}

proptest! {
    #[test]
    fn kernels_are_symmetric(
        pair in (1usize..8).prop_flat_map(|d| (prop::collection::vec(-2.0f64..2.0, d), prop::collection::vec(-2.0f64..2.0, d))),
        s in 0.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let (a, b) = pair;
        for spec in vector_families() {
            prop_assert_eq!(eval_kernel(&spec, &a, &b).unwrap(), eval_kernel(&spec, &b, &a).unwrap());
        }
        let cs = KernelSpec::CubicSpline;
        prop_assert_eq!(eval_kernel(&cs, &[s], &[t]).unwrap(), eval_kernel(&cs, &[t], &[s]).unwrap());
    }

    #[test]
    fn gram_matches_pairwise_evaluation(seed in any::<u64>()) {
        let ds = sample_sphere_data(5, 4, seed, [0.49, 1.0]).unwrap();
        let spec = KernelSpec::default_polynomial();
        let k = gram_matrix(&spec, &ds.x).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let xi: Vec<f64> = ds.x.row(i).iter().copied().collect();
                let xj: Vec<f64> = ds.x.row(j).iter().copied().collect();
                prop_assert_eq!(k[(i, j)], eval_kernel(&spec, &xi, &xj).unwrap());
            }
        }
    }
}

#[test]
fn positive_definite_families_have_psd_grams() {
    let specs = [
        KernelSpec::Bilinear,
        KernelSpec::Gaussian { sigma: 1.0 },
        KernelSpec::Rbf { gamma: 2.0 },
        KernelSpec::Laplace { sigma: 0.5 },
    ];
    for seed in 0..20 {
        let ds = sample_sphere_data(8, 5, seed, [0.25, 1.0]).unwrap();
        for spec in specs {
            let k = gram_matrix(&spec, &ds.x).unwrap();
            let eig = eig_sym(&k).unwrap();
            assert!(eig.gamma_n() >= -1e-8 * eig.spectral_norm(), "{spec} seed {seed}: {}", eig.gamma_n());
        }
        let mut rng = Pcg64::seed_from_u64(seed);
        let pts = Matrix::from_fn(8, 1, |_, _| rng.next_f64());
        let k = gram_matrix(&KernelSpec::CubicSpline, &pts).unwrap();
        let eig = eig_sym(&k).unwrap();
        assert!(eig.gamma_n() >= -1e-8 * eig.spectral_norm());
    }
}

#[test]
fn gaussian_gram_has_unit_diagonal() {
    let ds = sample_sphere_data(6, 3, 4, [0.2, 3.0]).unwrap();
    let k = gram_matrix(&KernelSpec::Gaussian { sigma: 1.0 }, &ds.x).unwrap();
    assert!(k.diagonal().iter().all(|v| *v == 1.0));
}

#[test]
fn offdiag_bounds_hold_on_high_dimensional_sphere_data() {
    let specs = [
        KernelSpec::Bilinear,
        KernelSpec::Polynomial { c: 0.01, m: 2 },
        KernelSpec::Polynomial { c: 0.05, m: 3 },
        KernelSpec::Sigmoid { alpha: 1.0, c: 0.0 },
        KernelSpec::Rbf { gamma: 1.5 },
        KernelSpec::Gaussian { sigma: 0.7 },
        KernelSpec::Laplace { sigma: 0.5 },
    ];
    let mut checked = 0;
    for seed in 0..100 {
        let ds = sample_sphere_data(10, 10_000, seed, [1.0, 1.0]).unwrap();
        let observed = max_off_diagonal(&(&ds.x * ds.x.transpose()));
        // Premise: the bound is evaluated at a tau_tilde no smaller than the observed inner products.
        let tau_tilde = observed;
        if !(tau_tilde > 0.0 && tau_tilde < 1.0) {
            continue;
        }
        checked += 1;
        for spec in specs {
            let k = gram_matrix(&spec, &ds.x).unwrap();
            let bound = predicted_offdiag_bound(&spec, tau_tilde).unwrap();
            assert!(max_off_diagonal(&k) <= bound * (1.0 + 1e-12), "{spec} seed {seed}");
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn sphere_inner_products_concentrate() {
    // delta chosen so the tail threshold equals 0.1 at d = 10^4, n = 10.
    let delta = 200.0 * (-25.0f64).exp();
    let check = tau_bound_check(10, 10_000, delta, 1000, 11).unwrap();
    assert!((check.threshold - 0.1).abs() < 1e-12);
    assert!(1.0 - check.rate >= 0.95, "rate of max |<x_i,x_j>| >= 0.1: {}", check.rate);
}

#[test]
fn fixed_seed_reproduces_datasets() {
    assert_eq!(
        simulate_sine_regression(10, 100, 0.1, 42, [0.49, 1.0]).unwrap(),
        simulate_sine_regression(10, 100, 0.1, 42, [0.49, 1.0]).unwrap()
    );
    assert_eq!(
        sample_sphere_data(7, 9, 3, [0.5, 0.5]).unwrap().x,
        sample_sphere_data(7, 9, 3, [0.5, 0.5]).unwrap().x
    );
}

#[test]
fn dataset_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ds = simulate_sine_regression(10, 100, 0.1, 1, [0.49, 1.0]).unwrap();
    ds.write_csv(dir.path().join("train.csv")).unwrap();
    ds.write_sidecar(dir.path().join("train.json")).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("train.json")).unwrap()).unwrap();
    for key in ["seed", "generator_id", "n", "p", "noise_sd", "sq_norm_range"] {
        assert!(meta.get(key).is_some(), "sidecar lacks {key}");
    }
    let back = DataSet::read(dir.path().join("train.csv"), dir.path().join("train.json")).unwrap();
    assert_eq!(back, ds);
}
