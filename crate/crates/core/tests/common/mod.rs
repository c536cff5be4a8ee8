#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaxed_denoise::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Subgradient certificate for `x = prox_{γ TV}(z)` on a chain, built
/// explicitly by integrating the residual along the path.
pub fn chain_certificate(z: &[f64], x: &[f64], gamma: f64, tol: f64) -> Result<(), String> {
    let n = z.len();
    let r: Vec<f64> = z.iter().zip(x).map(|(a, b)| (a - b) / gamma).collect();
    let mut p = Vec::with_capacity(n.saturating_sub(1));
    let mut acc = 0.0;
    for i in 0..n.saturating_sub(1) {
        acc += r[i];
        p.push(acc);
    }
    let closing = acc + r.get(n - 1).copied().unwrap_or(0.0);
    if closing.abs() > tol {
        return Err(format!("residual does not sum to zero: {closing:e}"));
    }
    for (e, &pe) in p.iter().enumerate() {
        if pe.abs() > 1.0 + tol {
            return Err(format!("edge {e}: |p| = {pe} > 1"));
        }
        let dx = x[e] - x[e + 1];
        if dx.abs() > tol && (pe - dx.signum()).abs() > tol {
            return Err(format!("edge {e}: jump {dx:e} but p = {pe}"));
        }
    }
    Ok(())
}

/// Subgradient certificate on a general graph: searches edge variables
/// `p ∈ [−1, 1]^M`, pinned to `sign(Dx)` on jump edges, with `Dᵀp = (z − x)/γ`
/// by projected gradient on the least-squares residual.
pub fn graph_certificate(g: &Graph, z: &[f64], x: &[f64], gamma: f64, jump_tol: f64) -> f64 {
    let r: Vec<f64> = z.iter().zip(x).map(|(a, b)| (a - b) / gamma).collect();
    let edges = g.edges();
    let pinned: Vec<Option<f64>> = edges
        .iter()
        .map(|&(n, m)| {
            let dx = x[n] - x[m];
            (dx.abs() > jump_tol).then(|| dx.signum())
        })
        .collect();
    let mut p: Vec<f64> = pinned.iter().map(|v| v.unwrap_or(0.0)).collect();
    let step = 1.0 / (2.0 * g.max_degree() as f64);
    let residual = |p: &[f64]| -> Vec<f64> {
        let mut res: Vec<f64> = r.iter().map(|v| -v).collect();
        for (&(n, m), &pe) in edges.iter().zip(p) {
            res[n] += pe;
            res[m] -= pe;
        }
        res
    };
    for _ in 0..200_000 {
        let res = residual(&p);
        let norm: f64 = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return norm;
        }
        for (e, &(n, m)) in edges.iter().enumerate() {
            if pinned[e].is_none() {
                p[e] = (p[e] - step * (res[n] - res[m])).clamp(-1.0, 1.0);
            }
        }
    }
    residual(&p).iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn random_vec(rng: &mut impl Rng, len: usize, quantized: bool) -> Vec<f64> {
    (0..len)
        .map(|_| if quantized { rng.random_range(-3i32..=3) as f64 * 0.5 } else { rng.random_range(-2.0..2.0) })
        .collect()
}

/// Uniform draw from `V_d(k)` by orthonormalizing a Gaussian matrix.
pub fn random_stiefel(rng: &mut impl Rng, d: usize, k: usize) -> ndarray::Array2<f64> {
    use rand_distr::StandardNormal;
    loop {
        let m = ndarray::Array2::from_shape_fn((d, k), |_| rng.sample::<f64, _>(StandardNormal));
        if let Ok(q) = relaxed_denoise::linalg::gram_schmidt(m.view()) {
            return q;
        }
    }
}

pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random connected graph: a random spanning tree plus a few extra edges.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..n / 2 {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    Graph::new(n, &edges).expect("tree plus extras is connected")
}

/// Exhaustive minimum of `K(x) = −Σ⟨x_n, y_n⟩ + λ TV(x)` over `{−1, 1}^{N×d}`,
/// enumerated in Gray-code order with incremental updates.
pub fn brute_force_binary(y: &ndarray::Array2<f64>, g: &Graph, lambda: f64) -> f64 {
    let (n, d) = y.dim();
    let total = n * d;
    assert!(total <= 26, "enumeration too large");
    let mut nbrs = vec![Vec::new(); n];
    for &(a, b) in g.edges() {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let mut x = vec![-1i8; total];
    let mut k: f64 = y.iter().sum::<f64>();
    let mut best = k;
    for step in 1u64..(1u64 << total) {
        let j = step.trailing_zeros() as usize;
        let (v, i) = (j / d, j % d);
        let s = f64::from(x[j]);
        let mut tv = 0.0;
        for &m in &nbrs[v] {
            tv += if x[m * d + i] == x[j] { 2.0 } else { -2.0 };
        }
        k += 2.0 * s * y[[v, i]] + lambda * tv;
        x[j] = -x[j];
        best = best.min(k);
    }
    best
}
