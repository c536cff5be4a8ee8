//! ADMM for the Tikhonov denoiser of Stiefel-valued signals.
//!
//! Each edge `e = (n, m)` carries the block matrix
//!
//! ```text
//!         ┌ I_d   X_n   X_m ┐
//! Q_e  =  │ X_nᵀ  I_k   L_e │
//!         └ X_mᵀ  L_eᵀ  I_k ┘
//! ```
//!
//! which is PSD of rank `d` exactly when `X_n, X_m` are Stiefel and
//! `L_e = X_nᵀ X_m`. Dropping the rank condition gives a convex problem in
//! `(X, L)`; the linear operator `Q(X, L) = (Q_e − I)_e` and the splitting
//! `U = Q(X, L)`, `U_e ⪰ −I`, give the ADMM updates
//!
//! ```text
//! X_n ← (1 / 2ν_n) [Q_X*(U − Z)_n + Y_n / ρ]
//! L_e ← ½ [Q_L*(U − Z)_e + (λ/ρ) 1_k]
//! U_e ← proj_{⪰ −I}(Q_e(X, L) + Z_e)
//! Z   ← Z + Q(X, L) − U
//! ```
//!
//! where `ν_n` is the number of neighbours of `n`.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayViewMut2, Axis, Zip};

use crate::admm::{AdmmConfig, SolverReport};
use crate::error::{DenoiseError, Result};
use crate::graph::Graph;
use crate::linalg::{check_symmetric, project_shifted_psd};
use crate::objective::objective_tikhonov;
use crate::signal::{EdgeCoupling, MatrixSignal};
use crate::stiefel_tv::{stiefel_feasibility, StiefelFeasibility};

/// One symmetric `(d + 2k) x (d + 2k)` matrix per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeBlockField {
    data: Array3<f64>,
    d: usize,
    k: usize,
}

impl EdgeBlockField {
    pub fn zeros(num_edges: usize, d: usize, k: usize) -> Self {
        let p = d + 2 * k;
        Self { data: Array3::zeros((num_edges, p, p)), d, k }
    }

    pub fn from_blocks(data: Array3<f64>, d: usize, k: usize) -> Result<Self> {
        let (_, a, b) = data.dim();
        if a != d + 2 * k || b != a {
            return Err(DenoiseError::Dimension(format!("edge blocks {a}x{b} do not match d = {d}, k = {k}")));
        }
        Ok(Self { data, d, k })
    }

    pub fn num_edges(&self) -> usize {
        self.data.dim().0
    }

    pub fn block(&self, e: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), e)
    }

    pub fn block_mut(&mut self, e: usize) -> ArrayViewMut2<'_, f64> {
        self.data.index_axis_mut(Axis(0), e)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d, self.k)
    }

    /// Largest entrywise asymmetry over all blocks.
    pub fn max_asymmetry(&self) -> f64 {
        self.data
            .outer_iter()
            .map(|b| b.iter().zip(b.t().iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn frob_inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(other.data.iter()).map(|(a, b)| a * b).sum()
    }
}

fn write_q_edge(mut out: ArrayViewMut2<'_, f64>, xn: ArrayView2<'_, f64>, xm: ArrayView2<'_, f64>, l: ArrayView2<'_, f64>) {
    let (d, k) = xn.dim();
    out.fill(0.0);
    out.slice_mut(s![0..d, d..d + k]).assign(&xn);
    out.slice_mut(s![0..d, d + k..]).assign(&xm);
    out.slice_mut(s![d..d + k, 0..d]).assign(&xn.t());
    out.slice_mut(s![d + k.., 0..d]).assign(&xm.t());
    out.slice_mut(s![d..d + k, d + k..]).assign(&l);
    out.slice_mut(s![d + k.., d..d + k]).assign(&l.t());
}

/// `Q_e(X, L) = Q_e − I`: the block matrix with zero diagonal blocks.
pub fn assemble_q_edge(xn: ArrayView2<'_, f64>, xm: ArrayView2<'_, f64>, l: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (d, k) = xn.dim();
    if xm.dim() != (d, k) || l.dim() != (k, k) {
        return Err(DenoiseError::Dimension(format!(
            "Q block from X_n {:?}, X_m {:?}, L {:?}",
            xn.dim(),
            xm.dim(),
            l.dim()
        )));
    }
    let mut out = Array2::zeros((d + 2 * k, d + 2 * k));
    write_q_edge(out.view_mut(), xn, xm, l);
    Ok(out)
}

fn check_tik_shapes(x: &MatrixSignal, l: &EdgeCoupling, g: &Graph) -> Result<()> {
    x.check_graph(g)?;
    l.check_graph(g)?;
    if g.num_edges() > 0 && l.k() != x.cols() {
        return Err(DenoiseError::Dimension(format!("coupling is {0}x{0}, signal has k = {1}", l.k(), x.cols())));
    }
    Ok(())
}

/// `Q(X, L)` on every edge.
pub fn apply_q(x: &MatrixSignal, l: &EdgeCoupling, g: &Graph) -> Result<EdgeBlockField> {
    check_tik_shapes(x, l, g)?;
    let mut out = EdgeBlockField::zeros(g.num_edges(), x.rows(), x.cols());
    for (e, &(n, m)) in g.edges().iter().enumerate() {
        write_q_edge(out.block_mut(e), x.node(n), x.node(m), l.edge(e));
    }
    Ok(out)
}

fn adjoint_into(u: ArrayView2<'_, f64>, d: usize, k: usize, xn: &mut ArrayViewMut2<'_, f64>) {
    // ⟨Q_e(X, L), U_e⟩ sees X_n in the upper-right block and Xᵀ_n in the lower-left one.
    let upper = u.slice(s![0..d, d..d + k]);
    let lower = u.slice(s![d..d + k, 0..d]);
    Zip::from(xn).and(&upper).and(&lower.t()).for_each(|o, &a, &b| *o += a + b);
}

/// Adjoint of `Q`, split into its `X` part (per node) and `L` part (per edge).
///
/// Blocks must be symmetric to within the kernel tolerance.
pub fn adjoint_q(u: &EdgeBlockField, g: &Graph) -> Result<(Array3<f64>, EdgeCoupling)> {
    if u.num_edges() != g.num_edges() {
        return Err(DenoiseError::Dimension(format!(
            "block field has {} edges, graph has {}",
            u.num_edges(),
            g.num_edges()
        )));
    }
    for b in u.data.outer_iter() {
        check_symmetric(b)?;
    }
    Ok(adjoint_unchecked(u.data.view(), g, u.d, u.k))
}

fn adjoint_unchecked(u: ndarray::ArrayView3<'_, f64>, g: &Graph, d: usize, k: usize) -> (Array3<f64>, EdgeCoupling) {
    let mut ax = Array3::zeros((g.num_vertices(), d, k));
    let mut al = Array3::zeros((g.num_edges(), k, k));
    for (e, &(n, m)) in g.edges().iter().enumerate() {
        let b = u.index_axis(Axis(0), e);
        adjoint_into(b, d, k, &mut ax.index_axis_mut(Axis(0), n));
        // X_m sits in the third block column.
        let upper = b.slice(s![0..d, d + k..]);
        let lower = b.slice(s![d + k.., 0..d]);
        Zip::from(ax.index_axis_mut(Axis(0), m)).and(&upper).and(&lower.t()).for_each(|o, &a, &c| *o += a + c);
        let f = b.slice(s![d..d + k, d + k..]);
        let f_low = b.slice(s![d + k.., d..d + k]);
        Zip::from(al.index_axis_mut(Axis(0), e)).and(&f).and(&f_low.t()).for_each(|o, &a, &c| *o = a + c);
    }
    (ax, EdgeCoupling::new(al).expect("finite adjoint"))
}

/// Stepwise Tikhonov ADMM; [`denoise_stiefel_tikhonov`] drives it to convergence.
#[derive(Debug, Clone)]
pub struct TikhonovAdmm<'g> {
    graph: &'g Graph,
    y_scaled: Array3<f64>,
    lambda_over_rho: f64,
    rho: f64,
    inv_two_nu: Vec<f64>,
    x: Array3<f64>,
    l: Array3<f64>,
    u: Array3<f64>,
    z: Array3<f64>,
    q: Array3<f64>,
    d: usize,
    k: usize,
}

impl<'g> TikhonovAdmm<'g> {
    pub fn new(y: &MatrixSignal, g: &'g Graph, cfg: &AdmmConfig) -> Result<Self> {
        cfg.validate()?;
        y.check_graph(g)?;
        if g.num_edges() == 0 {
            return Err(DenoiseError::Topology("Tikhonov model needs at least one edge".into()));
        }
        let mut inv_two_nu = Vec::with_capacity(g.num_vertices());
        for n in 0..g.num_vertices() {
            let nu = g.neighbor_count(n)?;
            if nu == 0 {
                return Err(DenoiseError::Topology(format!("vertex {n} is isolated")));
            }
            inv_two_nu.push(1.0 / (2.0 * nu as f64));
        }
        let (n, d, k) = y.data().dim();
        let m = g.num_edges();
        let p = d + 2 * k;
        Ok(Self {
            graph: g,
            y_scaled: y.data() / cfg.rho,
            lambda_over_rho: cfg.lambda / cfg.rho,
            rho: cfg.rho,
            inv_two_nu,
            x: Array3::zeros((n, d, k)),
            l: Array3::zeros((m, k, k)),
            u: Array3::zeros((m, p, p)),
            z: Array3::zeros((m, p, p)),
            q: Array3::zeros((m, p, p)),
            d,
            k,
        })
    }

    /// One ADMM sweep. Returns `(‖Q(X, L) − U‖_F, ρ‖U_new − U‖_F)`.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        let (d, k) = (self.d, self.k);
        let diff = &self.u - &self.z;
        let (ax, al) = adjoint_unchecked(diff.view(), self.graph, d, k);

        for (((mut xn, axn), yn), &w) in
            self.x.outer_iter_mut().zip(ax.outer_iter()).zip(self.y_scaled.outer_iter()).zip(&self.inv_two_nu)
        {
            Zip::from(&mut xn).and(&axn).and(&yn).for_each(|x, &a, &y| *x = w * (a + y));
        }
        let shift = self.lambda_over_rho;
        Zip::from(&mut self.l).and(al.data()).for_each(|l, &a| *l = 0.5 * (a + shift));

        let mut primal = 0.0;
        let mut dual = 0.0;
        for (e, &(n, m)) in self.graph.edges().iter().enumerate() {
            let mut qe = self.q.index_axis_mut(Axis(0), e);
            write_q_edge(
                qe.view_mut(),
                self.x.index_axis(Axis(0), n),
                self.x.index_axis(Axis(0), m),
                self.l.index_axis(Axis(0), e),
            );
            let ze = self.z.index_axis(Axis(0), e);
            let target = &qe + &ze;
            let projected = project_shifted_psd(target.view())?;
            let mut ue = self.u.index_axis_mut(Axis(0), e);
            dual += ue.iter().zip(&projected).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            primal += qe.iter().zip(&projected).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            ue.assign(&projected);
            let mut ze = self.z.index_axis_mut(Axis(0), e);
            Zip::from(&mut ze).and(&qe).and(&projected).for_each(|z, &q, &u| *z += q - u);
        }
        Ok((primal.sqrt(), self.rho * dual.sqrt()))
    }

    pub fn x(&self) -> MatrixSignal {
        MatrixSignal::from_array_unchecked(self.x.clone())
    }

    pub fn coupling(&self) -> EdgeCoupling {
        EdgeCoupling::new(self.l.clone()).expect("finite coupling")
    }

    pub fn u(&self) -> EdgeBlockField {
        EdgeBlockField { data: self.u.clone(), d: self.d, k: self.k }
    }

    pub fn z(&self) -> EdgeBlockField {
        EdgeBlockField { data: self.z.clone(), d: self.d, k: self.k }
    }
}

#[derive(Debug, Clone)]
pub struct StiefelTikResult {
    pub x: MatrixSignal,
    pub l: EdgeCoupling,
    pub report: SolverReport,
    pub feasibility: StiefelFeasibility,
    /// `‖L_e − X_nᵀ X_m‖_F` per edge.
    pub coupling_defect: Vec<f64>,
}

pub fn denoise_stiefel_tikhonov(y: &MatrixSignal, g: &Graph, cfg: &AdmmConfig) -> Result<StiefelTikResult> {
    let mut admm = TikhonovAdmm::new(y, g, cfg)?;
    let (d, k) = (y.rows(), y.cols());
    let default_tol = 1e-7 * (g.num_edges() as f64).sqrt() * (d + 2 * k) as f64;
    let (tol_primal, tol_dual) = cfg.tolerances(default_tol);
    let mut report = SolverReport::new(tol_primal, tol_dual);
    for _ in 0..cfg.max_iter {
        let (primal, dual) = admm.step()?;
        let objective = objective_tikhonov(
            &MatrixSignal::from_array_unchecked(admm.x.clone()),
            &EdgeCoupling::new(admm.l.clone())?,
            y,
            cfg.lambda,
            g,
        )?;
        if report.record(objective, primal, dual) {
            break;
        }
    }
    let x = admm.x();
    let l = admm.coupling();
    let coupling_defect = coupling_defect(&x, &l, g);
    let feasibility = stiefel_feasibility(&x);
    Ok(StiefelTikResult { x, l, report, feasibility, coupling_defect })
}

/// `‖L_e − X_nᵀ X_m‖_F` for every edge.
pub fn coupling_defect(x: &MatrixSignal, l: &EdgeCoupling, g: &Graph) -> Vec<f64> {
    g.edges()
        .iter()
        .enumerate()
        .map(|(e, &(n, m))| {
            let target = x.node(n).t().dot(&x.node(m));
            target.iter().zip(l.edge(e).iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        })
        .collect()
}
