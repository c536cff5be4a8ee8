//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

mod common;

use std::time::{Duration, Instant};

use ndarray::{s, Array2, Array3};
use rand::Rng;
use rand_distr::StandardNormal;
use relaxed_denoise::binary_tv::{denoise_binary_tv, threshold_round, tightness_audit};
use relaxed_denoise::linalg::{polar_factor, spectral_norm, sym_eig};
use relaxed_denoise::metrics::{metric_dist_to_bd, metric_mse, pixel_accuracy};
use relaxed_denoise::stiefel_tik::{adjoint_q, apply_q, assemble_q_edge, denoise_stiefel_tikhonov, EdgeBlockField};
use relaxed_denoise::stiefel_tv::denoise_stiefel_tv;
use relaxed_denoise::synth::{gen_multicolor_qr, gen_stiefel_experiment, QrSpec, SignalProfile, StiefelSignalSpec};
use relaxed_denoise::tv_prox::{tv_prox_chain, tv_prox_graph, TvProxConfig};
use relaxed_denoise::{AdmmConfig, EdgeCoupling, Graph, MatrixSignal, VectorSignal};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!("{} [{id}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn gaussian(rng: &mut impl Rng, shape: (usize, usize)) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| rng.sample::<f64, _>(StandardNormal))
}

fn mse(a: &MatrixSignal, b: &MatrixSignal) -> f64 {
    metric_mse(a.data().as_slice().unwrap(), b.data().as_slice().unwrap()).unwrap()
}

#[test]
fn criterion_1_qr_experiment() {
    let start = Instant::now();
    let spec = QrSpec { modules_h: 20, modules_w: 20, upsample: 10, noise_sigma: 2f64.sqrt() * 0.5, seed: 1 };
    let qr = gen_multicolor_qr(&spec).unwrap();
    let g = qr.graph().unwrap();
    let mut cfg = AdmmConfig::binary_tv();
    cfg.tv_cfg.inner_tol = 1e-10 * g.num_edges() as f64;
    cfg.tv_cfg.parallel = true;
    let res = denoise_binary_tv(&qr.noisy, &g, &cfg).unwrap();
    let dist = metric_dist_to_bd(&res.relaxed);
    let acc = pixel_accuracy(&res.rounded, &qr.truth).unwrap();
    let elapsed = start.elapsed();
    verdict(
        1,
        "QR 200x200, lambda=1.2, rho=0.1",
        dist <= 1e-4 && acc >= 0.99 && elapsed <= Duration::from_secs(600),
        format!(
            "dist_to_B3={dist:.3e} (<=1e-4), pixel_accuracy={acc:.4} (>=0.99), iterations={}, converged={}, runtime={:.1}s (<=600s)",
            res.report.iterations,
            res.report.converged,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_stiefel_experiments() {
    let g = Graph::chain(200).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;

    let start = Instant::now();
    let spec = StiefelSignalSpec { length: 200, d: 3, k: 2, profile: SignalProfile::PiecewiseConstant { segments: 5 }, kappa: 50.0, seed: 7 };
    let (truth, noisy) = gen_stiefel_experiment(&spec).unwrap();
    let res = denoise_stiefel_tv(&noisy, &g, &AdmmConfig::stiefel_tv()).unwrap();
    let elapsed = start.elapsed();
    let (restored, before) = (mse(&res.relaxed, &truth), mse(&noisy, &truth));
    let f = res.feasibility;
    pass &= res.report.converged
        && f.mean_norm_deviation <= 1e-3
        && f.mean_inner_product <= 1e-2
        && restored <= 0.7 * before
        && elapsed <= Duration::from_secs(900);
    lines.push(format!(
        "TV: converged={} norm_dev={:.2e} inner={:.2e} mse={restored:.3e} vs noisy {before:.3e} ({:.0}% lower) {:.1}s",
        res.report.converged,
        f.mean_norm_deviation,
        f.mean_inner_product,
        100.0 * (1.0 - restored / before),
        elapsed.as_secs_f64()
    ));

    let start = Instant::now();
    let spec = StiefelSignalSpec { profile: SignalProfile::Smooth { total_angle: std::f64::consts::PI }, ..spec };
    let (truth, noisy) = gen_stiefel_experiment(&spec).unwrap();
    let res = denoise_stiefel_tikhonov(&noisy, &g, &AdmmConfig::stiefel_tikhonov()).unwrap();
    let elapsed = start.elapsed();
    let (restored, before) = (mse(&res.x, &truth), mse(&noisy, &truth));
    let f = res.feasibility;
    pass &= res.report.converged
        && f.mean_norm_deviation <= 1e-3
        && f.mean_inner_product <= 1e-2
        && restored <= 0.7 * before
        && elapsed <= Duration::from_secs(900);
    lines.push(format!(
        "Tikhonov: converged={} norm_dev={:.2e} inner={:.2e} mse={restored:.3e} vs noisy {before:.3e} ({:.0}% lower) {:.1}s",
        res.report.converged,
        f.mean_norm_deviation,
        f.mean_inner_product,
        100.0 * (1.0 - restored / before),
        elapsed.as_secs_f64()
    ));
    verdict(2, "Stiefel V_3(2) chain of length 200, kappa=50", pass, lines.join("; "));
}

#[test]
fn criterion_3_tightness_against_enumeration() {
    let start = Instant::now();
    let mut rng = common::rng(2024);
    let mut worst = 0.0f64;
    let mut all_converged = true;
    for trial in 0..50 {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(1..=2);
        let lambda = [0.1, 0.5, 2.0][trial % 3];
        let g = common::random_connected_graph(&mut rng, n);
        let y = VectorSignal::new(Array2::from_shape_fn((n, d), |_| rng.random_range(-1.5..1.5))).unwrap();
        let res = denoise_binary_tv(&y, &g, &AdmmConfig::new(lambda, 0.1)).unwrap();
        all_converged &= res.report.converged;
        let best = common::brute_force_binary(y.data(), &g, lambda);
        let audit = tightness_audit(&res.relaxed, &y, &g, lambda, 20, trial as u64).unwrap();
        for k in audit.samples {
            worst = worst.max((k - best).abs() / (1.0 + best.abs()));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        "rounded relaxation equals exhaustive minimum (50 instances)",
        all_converged && worst <= 1e-6 && elapsed <= Duration::from_secs(60),
        format!("worst |K - K*|/(1+|K*|) = {worst:.2e} (<=1e-6), all converged={all_converged}, {:.1}s (<=60s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_4_coarea_identity() {
    let mut rng = common::rng(4);
    let samples = 100_000;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let pair = VectorSignal::from_rows(&[a.clone(), b.clone()]).unwrap();
        let exact: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum();
        let mut acc = 0.0;
        for _ in 0..samples {
            let eta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let r = threshold_round(&pair, &eta).unwrap();
            acc += r.data().row(0).iter().zip(r.data().row(1)).map(|(p, q)| (p - q).abs()).sum::<f64>();
        }
        worst = worst.max((acc / samples as f64 - exact).abs() / exact);
    }
    verdict(4, "coarea identity, 20 pairs x 1e5 thresholds", worst <= 0.02, format!("worst relative deviation {worst:.3e} (<=2e-2)"));
}

#[test]
fn criterion_5_tv_prox_correctness() {
    let mut rng = common::rng(5);
    let inner_tol = 1e-10;
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = rng.random_range(2..=64);
        let z = common::random_vec(&mut rng, n, trial % 3 == 0);
        let gamma = rng.random_range(0.05..2.0);
        let cfg = TvProxConfig { inner_tol, ..TvProxConfig::new(gamma) };
        let exact = tv_prox_chain(&z, gamma);
        let graph = tv_prox_graph(&z, &Graph::chain(n).unwrap(), &cfg).unwrap();
        worst = worst.max(common::max_abs_diff(&exact, &graph));
    }
    let g = Graph::grid(4, 4).unwrap();
    let mut worst_cert = 0.0f64;
    for trial in 0..20 {
        let z = common::random_vec(&mut rng, 16, trial % 2 == 1);
        let gamma = rng.random_range(0.05..1.5);
        let x = tv_prox_graph(&z, &g, &TvProxConfig::new(gamma)).unwrap();
        worst_cert = worst_cert.max(common::graph_certificate(&g, &z, &x, gamma, 1e-7));
    }
    verdict(
        5,
        "TV prox: graph solver vs chain solver, grid certificates",
        worst <= 10.0 * inner_tol && worst_cert <= 1e-6,
        format!("max chain deviation {worst:.2e} (<=1e-9), max grid certificate residual {worst_cert:.2e} (<=1e-6)"),
    );
}

fn psd_rank(m: &Array2<f64>, tol: f64) -> (bool, usize) {
    let ev = sym_eig(m.view()).unwrap().eigenvalues;
    (ev.iter().all(|&l| l >= -tol), ev.iter().filter(|&&l| l > tol).count())
}

#[test]
fn criterion_6_encoding_lemmas() {
    let mut rng = common::rng(6);
    let tol = 1e-9;
    let mut failures = Vec::new();
    for trial in 0..100 {
        let d = rng.random_range(1..=5);
        let k = rng.random_range(1..=d.min(3));
        let block = |x: &Array2<f64>| {
            let mut v = Array2::<f64>::eye(d + k);
            v.slice_mut(s![..d, d..]).assign(x);
            v.slice_mut(s![d.., ..d]).assign(&x.t());
            v
        };
        let x = common::random_stiefel(&mut rng, d, k);
        if psd_rank(&block(&x), tol) != (true, d) {
            failures.push(format!("vertex encoding, trial {trial}"));
        }
        let raw = gaussian(&mut rng, (d, k));
        let scaled = &raw * (rng.random_range(0.2..1.8) / spectral_norm(raw.view()).unwrap());
        let sn = spectral_norm(scaled.view()).unwrap();
        if (sn - 1.0).abs() > 1e-6 && psd_rank(&block(&scaled), tol).0 != (sn <= 1.0) {
            failures.push(format!("spectral-ball encoding, trial {trial}, norm {sn}"));
        }
        let xm = common::random_stiefel(&mut rng, d, k);
        let l = x.t().dot(&xm);
        let q = assemble_q_edge(x.view(), xm.view(), l.view()).unwrap() + Array2::<f64>::eye(d + 2 * k);
        if psd_rank(&q, tol) != (true, d) {
            failures.push(format!("edge encoding, trial {trial}"));
        }
    }
    let mut worst_adjoint = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let d = rng.random_range(1..=5);
        let k = rng.random_range(1..=d.min(3));
        let g = common::random_connected_graph(&mut rng, n);
        let m = g.num_edges();
        let p = d + 2 * k;
        let x = MatrixSignal::new(Array3::from_shape_fn((n, d, k), |_| rng.sample(StandardNormal))).unwrap();
        let l = EdgeCoupling::new(Array3::from_shape_fn((m, k, k), |_| rng.sample(StandardNormal))).unwrap();
        let mut raw = Array3::<f64>::from_shape_fn((m, p, p), |_| rng.sample(StandardNormal));
        for mut b in raw.outer_iter_mut() {
            let sym = (&b + &b.t()) * 0.5;
            b.assign(&sym);
        }
        let u = EdgeBlockField::from_blocks(raw, d, k).unwrap();
        let lhs = apply_q(&x, &l, &g).unwrap().frob_inner(&u);
        let (ax, al) = adjoint_q(&u, &g).unwrap();
        let rhs = (x.data() * &ax).sum() + (l.data() * al.data()).sum();
        worst_adjoint = worst_adjoint.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0));
    }
    verdict(
        6,
        "encoding lemmas and adjoint identity",
        failures.is_empty() && worst_adjoint <= 1e-10,
        format!("{} PSD/rank failures over 300 checks, worst adjoint relative error {worst_adjoint:.2e} (<=1e-10)", failures.len()),
    );
}

#[test]
fn criterion_7_single_node_closed_forms() {
    let mut rng = common::rng(7);
    let g = Graph::chain(1).unwrap();
    let mut binary_ok = true;
    let mut worst_polar = 0.0f64;
    for _ in 0..10 {
        let d = rng.random_range(1..=4);
        let y = VectorSignal::new(Array2::from_shape_fn((1, d), |_| rng.random_range(-2.0..2.0))).unwrap();
        let res = denoise_binary_tv(&y, &g, &AdmmConfig::binary_tv()).unwrap();
        let sign = y.data().mapv(f64::signum);
        binary_ok &= res.relaxed.data() == sign && res.rounded.data() == sign;

        let d = rng.random_range(2..=5);
        let k = rng.random_range(1..=d.min(3));
        let y = gaussian(&mut rng, (d, k));
        let res = denoise_stiefel_tv(&MatrixSignal::from_matrices(&[y.clone()]).unwrap(), &g, &AdmmConfig::stiefel_tv()).unwrap();
        let polar = polar_factor(y.view()).unwrap();
        worst_polar = worst_polar.max(common::max_abs_diff(res.relaxed.node(0).iter(), polar.iter()));
    }
    verdict(
        7,
        "single-node closed forms",
        binary_ok && worst_polar <= 1e-6,
        format!("binary returns sign(y): {binary_ok}; max deviation from polar factor {worst_polar:.2e} (<=1e-6)"),
    );
}
