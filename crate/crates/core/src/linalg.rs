//! Small dense matrix kernels used by the Stiefel solvers.
//!
//! The decompositions are Jacobi methods: cyclic two-sided Jacobi for
//! symmetric eigenproblems and one-sided (Hestenes) Jacobi for the thin SVD.
//! Both are accurate to a few ulps at the sizes used here (`p ≤ 16`).

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{DenoiseError, Result};

const JACOBI_MAX_SWEEPS: usize = 64;

/// Symmetric tolerance applied before the shifted-PSD projection.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Eigendecomposition `A = Q diag(λ) Qᵀ` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    pub eigenvalues: Array1<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: Array2<f64>,
}

impl SymEigResult {
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.eigenvectors * &self.eigenvalues;
        scaled.dot(&self.eigenvectors.t())
    }
}

/// Thin SVD `A = U diag(σ) Vᵀ` of a `d x k` matrix with `k ≤ d`.
///
/// Singular values are descending. Columns of `u` belonging to a zero
/// singular value are zero.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Array2<f64>,
    pub sigma: Array1<f64>,
    pub v: Array2<f64>,
}

fn sym_max_asymmetry(a: ArrayView2<'_, f64>) -> f64 {
    let p = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..p {
        for j in (i + 1)..p {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

/// Eigendecomposition of a symmetric matrix.
///
/// Only the symmetric part `(A + Aᵀ)/2` is used; callers wanting an
/// asymmetry check should use [`check_symmetric`] first.
pub fn sym_eig(a: ArrayView2<'_, f64>) -> Result<SymEigResult> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(DenoiseError::Dimension(format!("eigendecomposition of non-square {:?}", a.dim())));
    }
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            m[i * p + j] = 0.5 * (a[[i, j]] + a[[j, i]]);
        }
    }
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    jacobi_eigen_in_place(&mut m, &mut v, p);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| m[j * p + j].total_cmp(&m[i * p + i]));
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| m[i * p + i]));
    let eigenvectors = Array2::from_shape_fn((p, p), |(r, c)| v[r * p + order[c]]);
    Ok(SymEigResult { eigenvalues, eigenvectors })
}

/// Cyclic Jacobi on a row-major symmetric `p x p` buffer. On return the
/// diagonal of `m` holds the eigenvalues and the columns of `v` the vectors.
fn jacobi_eigen_in_place(m: &mut [f64], v: &mut [f64], p: usize) {
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return;
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                off += m[i * p + j] * m[i * p + j];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-2 * frob {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = m[i * p + j];
                if aij.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[j * p + j] - m[i * p + i]) / (2.0 * aij);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..p {
                    let ari = m[r * p + i];
                    let arj = m[r * p + j];
                    m[r * p + i] = c * ari - s * arj;
                    m[r * p + j] = s * ari + c * arj;
                }
                for col in 0..p {
                    let aic = m[i * p + col];
                    let ajc = m[j * p + col];
                    m[i * p + col] = c * aic - s * ajc;
                    m[j * p + col] = s * aic + c * ajc;
                }
                m[i * p + j] = 0.0;
                m[j * p + i] = 0.0;
                for r in 0..p {
                    let vri = v[r * p + i];
                    let vrj = v[r * p + j];
                    v[r * p + i] = c * vri - s * vrj;
                    v[r * p + j] = s * vri + c * vrj;
                }
            }
        }
    }
}

/// Thin SVD by one-sided Jacobi rotations.
pub fn thin_svd(a: ArrayView2<'_, f64>) -> Result<ThinSvd> {
    let (d, k) = a.dim();
    if k > d {
        return Err(DenoiseError::Dimension(format!("thin SVD expects rows >= cols, got {d}x{k}")));
    }
    // Column-major working copies: column j lives at [j*d .. (j+1)*d].
    let mut u: Vec<f64> = (0..k).flat_map(|j| (0..d).map(move |i| (i, j))).map(|(i, j)| a[[i, j]]).collect();
    let mut v = vec![0.0; k * k];
    for j in 0..k {
        v[j * k + j] = 1.0;
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..d {
                    let up = u[p * d + i];
                    let uq = u[q * d + i];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..d {
                    let up = u[p * d + i];
                    let uq = u[q * d + i];
                    u[p * d + i] = c * up - s * uq;
                    u[q * d + i] = s * up + c * uq;
                }
                for i in 0..k {
                    let vp = v[p * k + i];
                    let vq = v[q * k + i];
                    v[p * k + i] = c * vp - s * vq;
                    v[q * k + i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..k).map(|j| u[j * d..(j + 1) * d].iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma = Array1::from_iter(order.iter().map(|&j| norms[j]));
    let u_out = Array2::from_shape_fn((d, k), |(i, c)| {
        let j = order[c];
        if norms[j] > 0.0 {
            u[j * d + i] / norms[j]
        } else {
            0.0
        }
    });
    let v_out = Array2::from_shape_fn((k, k), |(i, c)| v[order[c] * k + i]);
    Ok(ThinSvd { u: u_out, sigma, v: v_out })
}

fn assemble_svd(u: &Array2<f64>, sigma: &Array1<f64>, v: &Array2<f64>) -> Array2<f64> {
    (u * sigma).dot(&v.t())
}

/// Entrywise clamp onto the cube `[−1, 1]^d`.
pub fn project_box(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.clamp(-1.0, 1.0)).collect()
}

/// Projection onto the spectral-norm unit ball: singular values above one
/// are clamped to one.
pub fn project_spectral_ball(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let svd = thin_svd(x)?;
    if svd.sigma.iter().all(|&s| s <= 1.0) {
        return Ok(x.to_owned());
    }
    let clamped = svd.sigma.mapv(|s| s.min(1.0));
    Ok(assemble_svd(&svd.u, &clamped, &svd.v))
}

/// Fails when `a` is not square or deviates from symmetry by more than
/// [`SYMMETRY_TOL`] (scaled by `max(1, max|a_ij|)`).
pub fn check_symmetric(a: ArrayView2<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(DenoiseError::Dimension(format!("expected a square matrix, got {:?}", a.dim())));
    }
    let scale = a.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let asym = sym_max_asymmetry(a);
    if asym > SYMMETRY_TOL * scale {
        return Err(DenoiseError::ContractViolation(format!("matrix asymmetric by {asym:.3e}")));
    }
    Ok(())
}

/// Projection onto `{B : B ⪰ −I}`: eigenvalues below −1 are raised to −1.
pub fn project_shifted_psd(a: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_symmetric(a)?;
    let eig = sym_eig(a)?;
    if eig.eigenvalues.iter().all(|&l| l >= -1.0) {
        let mut sym = a.to_owned();
        sym += &a.t();
        sym *= 0.5;
        return Ok(sym);
    }
    let clamped = eig.eigenvalues.mapv(|l| l.max(-1.0));
    let mut out = (&eig.eigenvectors * &clamped).dot(&eig.eigenvectors.t());
    // restore exact symmetry lost to rounding in the product
    let t = out.t().to_owned();
    out += &t;
    out *= 0.5;
    Ok(out)
}

/// Classical Gram–Schmidt with one re-orthogonalization pass, column order
/// preserved. Rejects inputs whose smallest singular value is `≤ 1e-10`.
pub fn gram_schmidt(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let svd = thin_svd(x)?;
    let smallest = svd.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= 1e-10 {
        return Err(DenoiseError::Degenerate(format!("columns nearly dependent (sigma_min = {smallest:.3e})")));
    }
    let (_, k) = x.dim();
    let mut q = x.to_owned();
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).to_owned();
                q.column_mut(j).scaled_add(-proj, &qi);
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(q)
}

/// Orthonormal polar factor `U Vᵀ` of a full-column-rank matrix.
pub fn polar_factor(y: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let svd = thin_svd(y)?;
    let largest = svd.sigma.first().copied().unwrap_or(0.0);
    let smallest = svd.sigma.last().copied().unwrap_or(0.0);
    if largest == 0.0 || smallest <= 1e-12 * largest {
        return Err(DenoiseError::Degenerate(format!(
            "polar factor needs full column rank (sigma = {:?})",
            svd.sigma.to_vec()
        )));
    }
    Ok(svd.u.dot(&svd.v.t()))
}

/// Frobenius inner product.
pub fn frob_inner(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn frob_norm(a: ArrayView2<'_, f64>) -> f64 {
    frob_inner(a, a).sqrt()
}

/// `‖Xᵀ X − I‖_F`, zero exactly on the Stiefel manifold.
pub fn stiefel_defect(x: ArrayView2<'_, f64>) -> f64 {
    let gram = x.t().dot(&x);
    let k = gram.nrows();
    (gram - Array2::<f64>::eye(k)).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(x: ArrayView2<'_, f64>) -> Result<f64> {
    let svd = if x.nrows() >= x.ncols() { thin_svd(x)? } else { thin_svd(x.t())? };
    Ok(svd.sigma.first().copied().unwrap_or(0.0))
}

pub(crate) fn column_norms(x: ArrayView2<'_, f64>) -> Vec<f64> {
    x.axis_iter(Axis(1)).map(|c| c.dot(&c).sqrt()).collect()
}
