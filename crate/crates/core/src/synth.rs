//! Seeded generators for the synthetic experiments.
//!
//! All generators are pure functions of their spec: the same spec and seed
//! yield bit-identical output.

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};

use crate::error::{DenoiseError, Result};
use crate::graph::Graph;
use crate::linalg::gram_schmidt;
use crate::signal::{MatrixSignal, VectorSignal};

const GRAM_SCHMIDT_RETRIES: usize = 8;

/// A random multi-colour QR-style module grid and its noisy rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct QrSpec {
    pub modules_h: usize,
    pub modules_w: usize,
    /// Each module becomes an `upsample x upsample` block of pixels.
    pub upsample: usize,
    /// Per-channel standard deviation of the additive Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl QrSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modules_h == 0 || self.modules_w == 0 || self.upsample == 0 {
            return Err(DenoiseError::InvalidSize(format!(
                "QR grid {}x{} modules with upsample {}",
                self.modules_h, self.modules_w, self.upsample
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(DenoiseError::Parameter(format!("noise sigma must be nonnegative, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.modules_h * self.upsample
    }

    pub fn width(&self) -> usize {
        self.modules_w * self.upsample
    }
}

#[derive(Debug, Clone)]
pub struct QrInstance {
    pub height: usize,
    pub width: usize,
    pub upsample: usize,
    /// `modules_h x modules_w x 3`, entries in `{−1, 1}`.
    pub modules: Array3<f64>,
    /// Pixel values in row-major order, one row of 3 channels per pixel.
    pub truth: VectorSignal,
    pub noisy: VectorSignal,
}

impl QrInstance {
    pub fn graph(&self) -> Result<Graph> {
        Graph::grid(self.height, self.width)
    }
}

pub const QR_CHANNELS: usize = 3;

/// Three independent uniform `±1` module patterns (one per colour channel),
/// upsampled and corrupted by i.i.d. Gaussian noise.
pub fn gen_multicolor_qr(spec: &QrSpec) -> Result<QrInstance> {
    spec.validate()?;
    let mut module_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let modules = Array3::from_shape_fn((spec.modules_h, spec.modules_w, QR_CHANNELS), |_| {
        if module_rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    });
    let (h, w, up) = (spec.height(), spec.width(), spec.upsample);
    let truth = Array2::from_shape_fn((h * w, QR_CHANNELS), |(pix, c)| modules[[(pix / w) / up, (pix % w) / up, c]]);

    let mut noisy = truth.clone();
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| DenoiseError::Parameter(e.to_string()))?;
        for c in 0..QR_CHANNELS {
            // one independent stream per channel
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(1 + c as u64);
            for px in noisy.column_mut(c).iter_mut() {
                *px += normal.sample(&mut rng);
            }
        }
    }
    Ok(QrInstance {
        height: h,
        width: w,
        upsample: up,
        modules,
        truth: VectorSignal::new(truth)?,
        noisy: VectorSignal::new(noisy)?,
    })
}

fn check_unit(mu: &[f64]) -> Result<()> {
    let norm = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if mu.is_empty() || (norm - 1.0).abs() > 1e-10 {
        return Err(DenoiseError::Parameter(format!("vMF mean direction must be a unit vector (norm {norm})")));
    }
    Ok(())
}

/// Cosine `w = ⟨μ, x⟩` of a von Mises–Fisher draw on `S^{d−1}`.
fn sample_vmf_cosine<R: Rng + ?Sized>(d: usize, kappa: f64, rng: &mut R) -> f64 {
    match d {
        1 => {
            if rng.random::<f64>() < 1.0 / (1.0 + (-2.0 * kappa).exp()) {
                1.0
            } else {
                -1.0
            }
        }
        3 => {
            // exact inverse CDF of the density ∝ exp(κ w) on [−1, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            let w = 1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa;
            w.clamp(-1.0, 1.0)
        }
        _ => {
            // Wood (1994) rejection sampler
            let m1 = (d - 1) as f64;
            let b = m1 / (2.0 * kappa + (4.0 * kappa * kappa + m1 * m1).sqrt());
            let x0 = (1.0 - b) / (1.0 + b);
            let c = kappa * x0 + m1 * (1.0 - x0 * x0).ln();
            let beta = Beta::new(m1 / 2.0, m1 / 2.0).expect("valid beta parameters");
            loop {
                let z: f64 = beta.sample(rng);
                let w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
                let u: f64 = 1.0 - rng.random::<f64>();
                if kappa * w + m1 * (1.0 - x0 * w).ln() - c >= u.ln() {
                    return w;
                }
            }
        }
    }
}

/// One draw from the von Mises–Fisher distribution `∝ exp(κ⟨μ, x⟩)` on the
/// unit sphere, via the tangent-normal decomposition `x = wμ + √(1−w²) v`.
pub fn sample_vmf<R: Rng + ?Sized>(mu: &[f64], kappa: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_unit(mu)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(DenoiseError::Parameter(format!("vMF concentration must be positive, got {kappa}")));
    }
    let d = mu.len();
    let w = sample_vmf_cosine(d, kappa, rng);
    if d == 1 {
        return Ok(vec![w * mu[0]]);
    }
    let tangent = loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let along: f64 = v.iter().zip(mu).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(mu).for_each(|(a, b)| *a -= along * b);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            break v;
        }
    };
    let s = (1.0 - w * w).max(0.0).sqrt();
    let mut x: Vec<f64> = mu.iter().zip(&tangent).map(|(m, t)| w * m + s * t).collect();
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    x.iter_mut().for_each(|a| *a /= norm);
    Ok(x)
}

/// Replaces every column by a vMF draw centred at it, then re-orthonormalizes
/// each node with Gram–Schmidt.
pub fn perturb_stiefel<R: Rng + ?Sized>(x: &MatrixSignal, kappa: f64, rng: &mut R) -> Result<MatrixSignal> {
    let mut out = x.data().clone();
    for (n, mut node) in out.outer_iter_mut().enumerate() {
        let source = x.node(n);
        let defect = crate::linalg::stiefel_defect(source);
        if defect > 1e-8 {
            return Err(DenoiseError::Parameter(format!("node {n} is not orthonormal (defect {defect:.2e})")));
        }
        let mut last_err = None;
        let mut done = false;
        for _ in 0..GRAM_SCHMIDT_RETRIES {
            let mut draw = source.to_owned();
            for (j, mut col) in draw.columns_mut().into_iter().enumerate() {
                let mu: Vec<f64> = source.column(j).to_vec();
                let sample = sample_vmf(&mu, kappa, rng)?;
                col.iter_mut().zip(sample).for_each(|(c, s)| *c = s);
            }
            match gram_schmidt(draw.view()) {
                Ok(q) => {
                    node.assign(&q);
                    done = true;
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| DenoiseError::Degenerate("perturbation failed".into())));
        }
    }
    MatrixSignal::new(out)
}

/// Uniformly distributed frame in `V_d(k)`.
pub fn random_stiefel<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Array2<f64>> {
    if k == 0 || k > d {
        return Err(DenoiseError::Dimension(format!("cannot draw a {d}x{k} Stiefel frame")));
    }
    for _ in 0..GRAM_SCHMIDT_RETRIES {
        let m = Array2::from_shape_fn((d, k), |_| rng.sample::<f64, _>(StandardNormal));
        if let Ok(q) = gram_schmidt(m.view()) {
            return Ok(q);
        }
    }
    Err(DenoiseError::Degenerate("could not draw a full-rank Gaussian matrix".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalProfile {
    /// Random Stiefel values on `segments` contiguous blocks of equal length.
    PiecewiseConstant { segments: usize },
    /// `X_n = R(t_n) X_0` with `R(t)` a product of planar rotations whose
    /// angles grow linearly in `t ∈ [0, 1]`; the angles sum to `total_angle`
    /// at `t = 1`.
    Smooth { total_angle: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiefelSignalSpec {
    pub length: usize,
    pub d: usize,
    pub k: usize,
    pub profile: SignalProfile,
    /// vMF concentration of the noise added by [`gen_stiefel_experiment`].
    pub kappa: f64,
    pub seed: u64,
}

impl StiefelSignalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.k == 0 || self.k > self.d {
            return Err(DenoiseError::InvalidSize(format!(
                "Stiefel signal of length {} with d = {}, k = {}",
                self.length, self.d, self.k
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(DenoiseError::Parameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        match self.profile {
            SignalProfile::PiecewiseConstant { segments } if segments == 0 || segments > self.length => Err(
                DenoiseError::Parameter(format!("{segments} segments for a signal of length {}", self.length)),
            ),
            SignalProfile::Smooth { total_angle } if !total_angle.is_finite() => {
                Err(DenoiseError::Parameter("rotation angle must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

fn rotate_rows(x: &mut Array2<f64>, i: usize, j: usize, angle: f64) {
    let (c, s) = (angle.cos(), angle.sin());
    for col in 0..x.ncols() {
        let (a, b) = (x[[i, col]], x[[j, col]]);
        x[[i, col]] = c * a - s * b;
        x[[j, col]] = s * a + c * b;
    }
}

/// Ground-truth Stiefel signal.
pub fn gen_stiefel_signal(spec: &StiefelSignalSpec) -> Result<MatrixSignal> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n_len, d, k) = (spec.length, spec.d, spec.k);
    let mut data = Array3::zeros((n_len, d, k));
    match spec.profile {
        SignalProfile::PiecewiseConstant { segments } => {
            let values: Vec<Array2<f64>> =
                (0..segments).map(|_| random_stiefel(d, k, &mut rng)).collect::<Result<_>>()?;
            for (n, mut node) in data.outer_iter_mut().enumerate() {
                node.assign(&values[n * segments / n_len]);
            }
        }
        SignalProfile::Smooth { total_angle } => {
            let base = random_stiefel(d, k, &mut rng)?;
            let planes: Vec<(usize, usize)> = (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
            let weights: Vec<f64> = planes.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let rates: Vec<f64> = weights.iter().map(|w| total_angle * w / total.max(f64::MIN_POSITIVE)).collect();
            for (n, mut node) in data.outer_iter_mut().enumerate() {
                let t = if n_len > 1 { n as f64 / (n_len - 1) as f64 } else { 0.0 };
                let mut x = base.clone();
                // R(t) = G_1(θ_1 t) ⋯ G_P(θ_P t), applied right to left
                for (&(i, j), &rate) in planes.iter().zip(&rates).rev() {
                    rotate_rows(&mut x, i, j, rate * t);
                }
                node.assign(&x);
            }
        }
    }
    MatrixSignal::new(data)
}

/// Ground truth plus its vMF-perturbed, re-orthonormalized copy.
pub fn gen_stiefel_experiment(spec: &StiefelSignalSpec) -> Result<(MatrixSignal, MatrixSignal)> {
    let truth = gen_stiefel_signal(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let noisy = perturb_stiefel(&truth, spec.kappa, &mut rng)?;
    Ok((truth, noisy))
}
