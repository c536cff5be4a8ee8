//! ADMM for TV denoising of Stiefel-valued signals, relaxed to the product
//! of spectral-norm unit balls.
//!
//! ```text
//! X ← prox_{TV, λ/ρ}(U − Z + Y/ρ)
//! U_n ← proj_{‖·‖₂ ≤ 1}(X_n + Z_n)
//! Z ← Z + X − U
//! ```

use ndarray::{Array3, Axis, Zip};

use crate::admm::{AdmmConfig, SolverReport};
use crate::error::{DenoiseError, Result};
use crate::graph::Graph;
use crate::linalg::{column_norms, polar_factor, project_spectral_ball};
use crate::objective::objective_stiefel_tv;
use crate::signal::MatrixSignal;
use crate::tv_prox::CoordinateTvProx;

/// How far a matrix signal is from having orthonormal columns at every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiefelFeasibility {
    /// Mean over nodes and columns of `| ‖col‖ − 1 |`.
    pub mean_norm_deviation: f64,
    /// Mean over nodes and column pairs `i < j` of `|⟨col_i, col_j⟩|`;
    /// zero when `k = 1`.
    pub mean_inner_product: f64,
}

pub fn stiefel_feasibility(x: &MatrixSignal) -> StiefelFeasibility {
    let k = x.cols();
    let mut norm_dev = 0.0;
    let mut inner = 0.0;
    for node in x.data().outer_iter() {
        norm_dev += column_norms(node).iter().map(|n| (n - 1.0).abs()).sum::<f64>();
        for i in 0..k {
            for j in (i + 1)..k {
                inner += node.column(i).dot(&node.column(j)).abs();
            }
        }
    }
    let n = x.num_vertices() as f64;
    let pairs = (k * (k - 1) / 2) as f64;
    StiefelFeasibility {
        mean_norm_deviation: norm_dev / (n * k as f64),
        mean_inner_product: if pairs > 0.0 { inner / (n * pairs) } else { 0.0 },
    }
}

/// Replaces every node matrix by its polar factor, landing exactly on the
/// Stiefel manifold.
pub fn round_to_stiefel(x: &MatrixSignal) -> Result<MatrixSignal> {
    let mut out = x.data().clone();
    for (mut slot, node) in out.outer_iter_mut().zip(x.data().outer_iter()) {
        slot.assign(&polar_factor(node)?);
    }
    Ok(MatrixSignal::from_array_unchecked(out))
}

#[derive(Debug, Clone)]
pub struct StiefelTvResult {
    /// Final `U` iterate; every node has spectral norm at most one.
    pub relaxed: MatrixSignal,
    pub report: SolverReport,
    pub feasibility: StiefelFeasibility,
}

fn frob_diff(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn denoise_stiefel_tv(y: &MatrixSignal, g: &Graph, cfg: &AdmmConfig) -> Result<StiefelTvResult> {
    cfg.validate()?;
    y.check_graph(g)?;
    let (n, d, k) = y.data().dim();
    let (tol_primal, tol_dual) = cfg.tolerances(1e-8 * ((n * d * k) as f64).sqrt());
    let prox_cfg = cfg.prox_config();
    let rho = cfg.rho;

    let y_scaled = y.data() / rho;
    let mut x = Array3::<f64>::zeros((n, d, k));
    let mut u = Array3::<f64>::zeros((n, d, k));
    let mut z = Array3::<f64>::zeros((n, d, k));
    let mut u_next = Array3::<f64>::zeros((n, d, k));
    let mut prox = CoordinateTvProx::new(g, d * k);
    let mut report = SolverReport::new(tol_primal, tol_dual);

    for _ in 0..cfg.max_iter {
        Zip::from(&mut x).and(&u).and(&z).and(&y_scaled).for_each(|x, &u, &z, &ys| *x = u - z + ys);
        {
            let flat = x
                .view_mut()
                .into_shape_with_order((n, d * k))
                .map_err(|e| DenoiseError::Dimension(e.to_string()))?;
            prox.apply(flat, g, &prox_cfg)?;
        }
        for ((mut un, xn), zn) in u_next.outer_iter_mut().zip(x.outer_iter()).zip(z.outer_iter()) {
            let v = &xn + &zn;
            un.assign(&project_spectral_ball(v.view())?);
        }
        Zip::from(&mut z).and(&x).and(&u_next).for_each(|z, &x, &un| *z += x - un);

        let primal = frob_diff(&x, &u_next);
        let dual = rho * frob_diff(&u_next, &u);
        std::mem::swap(&mut u, &mut u_next);
        let objective = objective_stiefel_tv(&MatrixSignal::from_array_unchecked(u.clone()), y, cfg.lambda, g)?;
        if report.record(objective, primal, dual) {
            break;
        }
    }

    let relaxed = MatrixSignal::from_array_unchecked(u);
    let feasibility = stiefel_feasibility(&relaxed);
    Ok(StiefelTvResult { relaxed, report, feasibility })
}

/// Largest spectral norm over the nodes.
pub fn max_node_spectral_norm(x: &MatrixSignal) -> Result<f64> {
    x.data()
        .axis_iter(Axis(0))
        .map(crate::linalg::spectral_norm)
        .try_fold(0.0f64, |acc, s| Ok(acc.max(s?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn frame() -> Array3<f64> {
        let mut a = Array3::zeros((1, 3, 2));
        a[[0, 0, 0]] = 0.6;
        a[[0, 1, 0]] = 0.8;
        a[[0, 2, 1]] = 1.0;
        a
    }

    #[test]
    fn feasibility_examples() {
        let s = MatrixSignal::new(frame()).unwrap();
        let f = stiefel_feasibility(&s);
        assert!(f.mean_norm_deviation < 1e-15 && f.mean_inner_product < 1e-15);
        let f = stiefel_feasibility(&MatrixSignal::zeros(4, 3, 2));
        assert_eq!((f.mean_norm_deviation, f.mean_inner_product), (1.0, 0.0));
        let scaled = MatrixSignal::new(frame() * 1.1).unwrap();
        assert!((stiefel_feasibility(&scaled).mean_norm_deviation - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_node_converges_to_polar_factor() {
        let g = Graph::chain(1).unwrap();
        let y = MatrixSignal::new(Array3::from_shape_vec((1, 3, 2), vec![1.0, 0.2, -0.3, 0.9, 0.5, 0.4]).unwrap())
            .unwrap();
        let res = denoise_stiefel_tv(&y, &g, &AdmmConfig::stiefel_tv()).unwrap();
        let polar = polar_factor(y.node(0)).unwrap();
        let diff = res.relaxed.node(0).iter().zip(&polar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res.report.converged);
        assert!(diff < 1e-6, "{diff}");
    }
}
