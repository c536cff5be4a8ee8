//! ADMM for the cube relaxation of multi-binary TV denoising, plus the
//! threshold rounding `X_η` that maps relaxed solutions back to `{−1, 1}^d`.
//!
//! The relaxed problem is `min −Σ⟨x_n, y_n⟩ + λ TV(x)` over `x_n ∈ [−1, 1]^d`,
//! split as `K(x) + ι_C(u)` with `x = u`:
//!
//! ```text
//! x ← prox_{TV, λ/ρ}(u − z + y/ρ)
//! u ← proj_C(x + z)
//! z ← z + x − u
//! ```

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admm::{AdmmConfig, EtaChoice, SolverReport};
use crate::error::{DenoiseError, Result};
use crate::graph::Graph;
use crate::metrics::metric_dist_to_bd;
use crate::objective::objective_binary;
use crate::signal::VectorSignal;
use crate::tv_prox::CoordinateTvProx;

#[derive(Debug, Clone)]
pub struct BinaryDenoiseResult {
    /// Final `u` iterate; lies in the cube exactly.
    pub relaxed: VectorSignal,
    /// `X_η(relaxed)`, entries in `{−1, 1}`.
    pub rounded: VectorSignal,
    pub report: SolverReport,
    pub eta_used: Vec<f64>,
    /// Mean entrywise distance of `relaxed` to `{−1, 1}`.
    pub dist_to_vertices: f64,
}

fn frob_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Resolves the rounding threshold for a signal of dimension `dim`.
pub fn resolve_eta(choice: &EtaChoice, dim: usize) -> Result<Vec<f64>> {
    match choice {
        EtaChoice::Zero => Ok(vec![0.0; dim]),
        EtaChoice::Fixed(eta) => {
            if eta.len() != dim {
                return Err(DenoiseError::Dimension(format!("eta has length {}, signal dimension is {dim}", eta.len())));
            }
            Ok(eta.clone())
        }
        EtaChoice::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        }
    }
}

pub fn denoise_binary_tv(y: &VectorSignal, g: &Graph, cfg: &AdmmConfig) -> Result<BinaryDenoiseResult> {
    cfg.validate()?;
    y.check_graph(g)?;
    let (n, d) = y.data().dim();
    let eta = resolve_eta(&cfg.eta, d)?;
    let (tol_primal, tol_dual) = cfg.tolerances(1e-8 * ((n * d) as f64).sqrt());
    let prox_cfg = cfg.prox_config();
    let rho = cfg.rho;

    let y_scaled = y.data() / rho;
    let mut x = Array2::<f64>::zeros((n, d));
    let mut u = Array2::<f64>::zeros((n, d));
    let mut z = Array2::<f64>::zeros((n, d));
    let mut u_next = Array2::<f64>::zeros((n, d));
    let mut prox = CoordinateTvProx::new(g, d);
    let mut report = SolverReport::new(tol_primal, tol_dual);

    for _ in 0..cfg.max_iter {
        Zip::from(&mut x).and(&u).and(&z).and(&y_scaled).for_each(|x, &u, &z, &ys| *x = u - z + ys);
        prox.apply(x.view_mut(), g, &prox_cfg)?;
        Zip::from(&mut u_next).and(&x).and(&z).for_each(|un, &x, &z| *un = (x + z).clamp(-1.0, 1.0));
        Zip::from(&mut z).and(&x).and(&u_next).for_each(|z, &x, &un| *z += x - un);

        let primal = frob_diff(&x, &u_next);
        let dual = rho * frob_diff(&u_next, &u);
        std::mem::swap(&mut u, &mut u_next);
        let objective = objective_binary(&VectorSignal::from_array_unchecked(u.clone()), y, cfg.lambda, g)?;
        if report.record(objective, primal, dual) {
            break;
        }
    }

    let relaxed = VectorSignal::from_array_unchecked(u);
    let rounded = threshold_round(&relaxed, &eta)?;
    let dist_to_vertices = metric_dist_to_bd(&relaxed);
    Ok(BinaryDenoiseResult { relaxed, rounded, report, eta_used: eta, dist_to_vertices })
}

/// `X_η`: entry `(n, i)` becomes `1` if `x_{n,i} > η_i` and `−1` otherwise.
pub fn threshold_round(x: &VectorSignal, eta: &[f64]) -> Result<VectorSignal> {
    if eta.len() != x.dim() {
        return Err(DenoiseError::Dimension(format!("eta has length {}, signal dimension is {}", eta.len(), x.dim())));
    }
    if let Some(bad) = eta.iter().find(|e| !(-1.0..=1.0).contains(*e)) {
        return Err(DenoiseError::Parameter(format!("eta component {bad} lies outside [-1, 1]")));
    }
    let mut out = x.data().clone();
    for mut row in out.rows_mut() {
        for (v, &e) in row.iter_mut().zip(eta) {
            *v = if *v > e { 1.0 } else { -1.0 };
        }
    }
    Ok(VectorSignal::from_array_unchecked(out))
}

/// Monte-Carlo view of the identity `K(x) = 2^{-d} ∫_C K(X_η(x)) dη`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessAudit {
    pub relaxed_objective: f64,
    /// `K(X_η(relaxed))` for each sampled η.
    pub samples: Vec<f64>,
    pub etas: Vec<Vec<f64>>,
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    /// `mean − K(relaxed)`.
    pub mean_deviation: Option<f64>,
}

pub fn tightness_audit(
    relaxed: &VectorSignal,
    y: &VectorSignal,
    g: &Graph,
    lambda: f64,
    num_eta: usize,
    seed: u64,
) -> Result<TightnessAudit> {
    let relaxed_objective = objective_binary(relaxed, y, lambda, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = relaxed.dim();
    let mut samples = Vec::with_capacity(num_eta);
    let mut etas = Vec::with_capacity(num_eta);
    for _ in 0..num_eta {
        let eta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        samples.push(objective_binary(&threshold_round(relaxed, &eta)?, y, lambda, g)?);
        etas.push(eta);
    }
    let (min, mean, max) = if samples.is_empty() {
        (None, None, None)
    } else {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        (
            samples.iter().copied().reduce(f64::min),
            Some(mean),
            samples.iter().copied().reduce(f64::max),
        )
    };
    Ok(TightnessAudit {
        relaxed_objective,
        samples,
        etas,
        min,
        mean,
        max,
        mean_deviation: mean.map(|m| m - relaxed_objective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rounding_examples() {
        let b = VectorSignal::new(array![[1.0, -1.0], [-1.0, -1.0]]).unwrap();
        assert_eq!(threshold_round(&b, &[0.0, 0.0]).unwrap(), b);
        let x = VectorSignal::new(array![[0.2, -0.7]]).unwrap();
        assert_eq!(threshold_round(&x, &[0.0, 0.0]).unwrap().data(), &array![[1.0, -1.0]]);
        let x = VectorSignal::new(array![[0.5]]).unwrap();
        assert_eq!(threshold_round(&x, &[0.5]).unwrap().data(), &array![[-1.0]]);
        assert!(matches!(threshold_round(&x, &[1.5]), Err(DenoiseError::Parameter(_))));
        assert!(matches!(threshold_round(&x, &[0.0, 0.0]), Err(DenoiseError::Dimension(_))));
    }

    #[test]
    fn eta_choices() {
        assert_eq!(resolve_eta(&EtaChoice::Zero, 3).unwrap(), vec![0.0; 3]);
        let r = resolve_eta(&EtaChoice::Random { seed: 9 }, 4).unwrap();
        assert_eq!(r, resolve_eta(&EtaChoice::Random { seed: 9 }, 4).unwrap());
        assert!(r.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(resolve_eta(&EtaChoice::Fixed(vec![0.1]), 2).is_err());
    }

    #[test]
    fn empty_audit() {
        let g = Graph::chain(1).unwrap();
        let x = VectorSignal::new(array![[0.3]]).unwrap();
        let a = tightness_audit(&x, &x, &g, 1.0, 0, 1).unwrap();
        assert!(a.samples.is_empty() && a.mean.is_none() && a.min.is_none());
    }

    #[test]
    fn single_node_selects_sign() {
        let g = Graph::chain(1).unwrap();
        let y = VectorSignal::new(array![[0.3, -2.0]]).unwrap();
        let res = denoise_binary_tv(&y, &g, &AdmmConfig::new(1.0, 0.5)).unwrap();
        assert!(res.report.converged);
        assert_eq!(res.relaxed.data(), &array![[1.0, -1.0]]);
        assert_eq!(res.rounded.data(), &array![[1.0, -1.0]]);
    }
}
