//! Anisotropic TV seminorms and the linearized objectives minimized by the solvers.
//!
//! For signals on the constraint sets the quadratic fidelity `½‖x − y‖²`
//! equals `−⟨x, y⟩` up to a data-only constant, so every objective here
//! uses the linear form.

use crate::error::{DenoiseError, Result};
use crate::graph::Graph;
use crate::signal::{EdgeCoupling, MatrixSignal, VectorSignal};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(DenoiseError::Parameter(format!("lambda must be positive, got {lambda}")))
    }
}

/// `Σ_{(n,m) ∈ E} |x_n − x_m|` for a scalar signal.
pub fn tv_seminorm_scalar(x: &[f64], g: &Graph) -> Result<f64> {
    if x.len() != g.num_vertices() {
        return Err(DenoiseError::Dimension(format!(
            "scalar signal has {} entries, graph has {} vertices",
            x.len(),
            g.num_vertices()
        )));
    }
    Ok(g.edges().iter().map(|&(n, m)| (x[n] - x[m]).abs()).sum())
}

/// `Σ_{(n,m) ∈ E} ‖x_n − x_m‖₁`.
pub fn tv_seminorm_vector(x: &VectorSignal, g: &Graph) -> Result<f64> {
    x.check_graph(g)?;
    let data = x.data();
    Ok(g.edges()
        .iter()
        .map(|&(n, m)| data.row(n).iter().zip(data.row(m)).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum())
}

/// `Σ_{(n,m) ∈ E} ‖X_n − X_m‖_{1,1}` with the entrywise 1,1-norm.
pub fn tv_seminorm_matrix(x: &MatrixSignal, g: &Graph) -> Result<f64> {
    x.check_graph(g)?;
    Ok(g.edges()
        .iter()
        .map(|&(n, m)| x.node(n).iter().zip(x.node(m)).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum())
}

/// `K(x) = −Σ ⟨x_n, y_n⟩ + λ TV(x)`.
pub fn objective_binary(x: &VectorSignal, y: &VectorSignal, lambda: f64, g: &Graph) -> Result<f64> {
    check_lambda(lambda)?;
    x.check_same_shape(y)?;
    let fidelity: f64 = x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
    Ok(-fidelity + lambda * tv_seminorm_vector(x, g)?)
}

/// `K(X) = −Σ ⟨X_n, Y_n⟩_F + λ TV(X)`.
pub fn objective_stiefel_tv(x: &MatrixSignal, y: &MatrixSignal, lambda: f64, g: &Graph) -> Result<f64> {
    check_lambda(lambda)?;
    x.check_same_shape(y)?;
    let fidelity: f64 = x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
    Ok(-fidelity + lambda * tv_seminorm_matrix(x, g)?)
}

/// `L(X, L) = −Σ ⟨X_n, Y_n⟩_F − λ Σ_e ⟨L_e, 1_k⟩_F`.
///
/// The edge term carries the λ weight that the Tikhonov ADMM injects in its
/// coupling update.
pub fn objective_tikhonov(
    x: &MatrixSignal,
    coupling: &EdgeCoupling,
    y: &MatrixSignal,
    lambda: f64,
    g: &Graph,
) -> Result<f64> {
    check_lambda(lambda)?;
    x.check_same_shape(y)?;
    x.check_graph(g)?;
    coupling.check_graph(g)?;
    if coupling.k() != x.cols() && coupling.num_edges() > 0 {
        return Err(DenoiseError::Dimension(format!(
            "coupling blocks are {0}x{0}, signal has k = {1}",
            coupling.k(),
            x.cols()
        )));
    }
    let fidelity: f64 = x.data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
    let edge_sum: f64 = coupling.data().sum();
    Ok(-fidelity - lambda * edge_sum)
}
