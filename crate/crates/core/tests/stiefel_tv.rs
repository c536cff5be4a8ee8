mod common;

use ndarray::{s, Array2, Array3};
use rand::Rng;
use rand_distr::StandardNormal;
use relaxed_denoise::linalg::{polar_factor, spectral_norm};
use relaxed_denoise::objective::objective_stiefel_tv;
use relaxed_denoise::stiefel_tv::*;
use relaxed_denoise::synth::{gen_stiefel_experiment, SignalProfile, StiefelSignalSpec};
use relaxed_denoise::{AdmmConfig, Graph, MatrixSignal};

fn gaussian(rng: &mut impl Rng, d: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((d, k), |_| rng.sample::<f64, _>(StandardNormal))
}

#[test]
fn single_node_is_polar_factor() {
    let mut rng = common::rng(31);
    let g = Graph::chain(1).unwrap();
    for trial in 0..10 {
        let (d, k) = [(3, 2), (4, 3), (5, 1), (2, 2)][trial % 4];
        let y = gaussian(&mut rng, d, k);
        let res = denoise_stiefel_tv(&MatrixSignal::from_matrices(&[y.clone()]).unwrap(), &g, &AdmmConfig::stiefel_tv()).unwrap();
        let expected = polar_factor(y.view()).unwrap();
        assert!(common::max_abs_diff(res.relaxed.node(0).iter(), expected.iter()) < 1e-6);
        if k == 1 {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(common::max_abs_diff(res.relaxed.node(0).iter(), (&y / norm).iter()) < 1e-6);
        }
    }
}

#[test]
fn constant_stiefel_input_is_a_fixed_point() {
    let mut rng = common::rng(32);
    let x = common::random_stiefel(&mut rng, 3, 2);
    let y = MatrixSignal::from_matrices(&vec![x; 8]).unwrap();
    let g = Graph::chain(8).unwrap();
    let res = denoise_stiefel_tv(&y, &g, &AdmmConfig::new(0.01, 0.5)).unwrap();
    assert!(common::max_abs_diff(res.relaxed.data(), y.data()) < 1e-6);
}

#[test]
fn opposite_pair_collapses_under_strong_regularization() {
    let mut rng = common::rng(33);
    let x = common::random_stiefel(&mut rng, 3, 2);
    let y = MatrixSignal::from_matrices(&[x.clone(), -&x]).unwrap();
    let g = Graph::chain(2).unwrap();
    let res = denoise_stiefel_tv(&y, &g, &AdmmConfig::new(10.0, 0.5)).unwrap();
    assert!(common::max_abs_diff(res.relaxed.node(0).iter(), res.relaxed.node(1).iter()) < 1e-6);
    // Every constant pair attains the optimum 0 of the non-convex problem.
    let k = objective_stiefel_tv(&res.relaxed, &y, 10.0, &g).unwrap();
    assert!(k.abs() < 1e-6);
    for _ in 0..200 {
        let a = common::random_stiefel(&mut rng, 3, 2);
        let b = common::random_stiefel(&mut rng, 3, 2);
        let pair = MatrixSignal::from_matrices(&[a, b]).unwrap();
        assert!(objective_stiefel_tv(&pair, &y, 10.0, &g).unwrap() >= k - 1e-6);
    }
}

#[test]
fn feasibility_record_examples() {
    let mut rng = common::rng(34);
    let x = MatrixSignal::from_matrices(&[common::random_stiefel(&mut rng, 3, 2), common::random_stiefel(&mut rng, 3, 2)]).unwrap();
    let f = stiefel_feasibility(&x);
    assert!(f.mean_norm_deviation < 1e-12 && f.mean_inner_product < 1e-12);
    let f = stiefel_feasibility(&MatrixSignal::zeros(4, 3, 2));
    assert_eq!((f.mean_norm_deviation, f.mean_inner_product), (1.0, 0.0));
    let scaled = MatrixSignal::new(x.data() * 1.1).unwrap();
    assert!((stiefel_feasibility(&scaled).mean_norm_deviation - 0.1).abs() < 1e-12);
}

#[test]
fn experiment_run_is_feasible_and_rounding_consistent() {
    let spec = StiefelSignalSpec { length: 60, d: 3, k: 2, profile: SignalProfile::PiecewiseConstant { segments: 3 }, kappa: 50.0, seed: 35 };
    let (_, noisy) = gen_stiefel_experiment(&spec).unwrap();
    let g = Graph::chain(60).unwrap();
    let cfg = AdmmConfig::stiefel_tv();
    let res = denoise_stiefel_tv(&noisy, &g, &cfg).unwrap();
    assert!(res.report.converged);
    assert!(max_node_spectral_norm(&res.relaxed).unwrap() <= 1.0 + 1e-9);
    let rounded = round_to_stiefel(&res.relaxed).unwrap();
    assert!(stiefel_feasibility(&rounded).mean_norm_deviation < 1e-12);
    let k_relaxed = objective_stiefel_tv(&res.relaxed, &noisy, cfg.lambda, &g).unwrap();
    let k_rounded = objective_stiefel_tv(&rounded, &noisy, cfg.lambda, &g).unwrap();
    assert!((k_rounded - k_relaxed).abs() <= 1e-4 * (1.0 + k_relaxed.abs()), "{k_rounded} vs {k_relaxed}");
}

#[test]
fn unit_block_encoding_matches_spectral_norm() {
    let mut rng = common::rng(36);
    for _ in 0..200 {
        let x = gaussian(&mut rng, 4, 2) * rng.random_range(0.1..0.8);
        let mut v = Array2::<f64>::eye(6);
        v.slice_mut(s![..4, 4..]).assign(&x);
        v.slice_mut(s![4.., ..4]).assign(&x.t());
        let min_eig = relaxed_denoise::linalg::sym_eig(v.view()).unwrap().eigenvalues[5];
        let sn = spectral_norm(x.view()).unwrap();
        if (sn - 1.0).abs() > 1e-6 {
            assert_eq!(min_eig >= -1e-9, sn <= 1.0, "spectral norm {sn}, min eigenvalue {min_eig}");
        }
    }
}

#[test]
fn non_finite_and_mismatched_inputs_are_rejected() {
    let mut data = Array3::<f64>::zeros((2, 3, 2));
    data[[0, 0, 0]] = f64::INFINITY;
    assert!(MatrixSignal::new(data).is_err());
    assert!(MatrixSignal::new(Array3::zeros((2, 2, 3))).is_err());
    let y = MatrixSignal::zeros(3, 3, 2);
    assert!(denoise_stiefel_tv(&y, &Graph::chain(4).unwrap(), &AdmmConfig::stiefel_tv()).is_err());
}
