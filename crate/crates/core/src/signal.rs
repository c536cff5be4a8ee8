//! Dense containers for graph signals.

use ndarray::{Array2, Array3, ArrayView2, ArrayViewMut2, Axis};

use crate::error::{DenoiseError, Result};
use crate::graph::Graph;

fn check_finite<'a>(values: impl IntoIterator<Item = &'a f64>, what: &str) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(DenoiseError::Data(format!("{what} contains non-finite entries")))
    }
}

/// `N` vectors in `R^d`, one row per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSignal {
    data: Array2<f64>,
}

impl VectorSignal {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        check_finite(data.iter(), "vector signal")?;
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(DenoiseError::InvalidSize(format!("vector signal shape {:?}", data.dim())));
        }
        Ok(Self { data })
    }

    pub fn zeros(num_vertices: usize, dim: usize) -> Self {
        Self { data: Array2::zeros((num_vertices, dim)) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(DenoiseError::Dimension("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), dim), flat)
            .map_err(|e| DenoiseError::Dimension(e.to_string()))?;
        Self::new(data)
    }

    pub fn num_vertices(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    pub(crate) fn from_array_unchecked(data: Array2<f64>) -> Self {
        Self { data }
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.num_vertices() != g.num_vertices() {
            return Err(DenoiseError::Dimension(format!(
                "signal has {} vertices, graph has {}",
                self.num_vertices(),
                g.num_vertices()
            )));
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.data.dim() != other.data.dim() {
            return Err(DenoiseError::Dimension(format!(
                "signal shapes {:?} and {:?} differ",
                self.data.dim(),
                other.data.dim()
            )));
        }
        Ok(())
    }
}

/// `N` matrices in `R^{d x k}`, stored as an `N x d x k` array.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSignal {
    data: Array3<f64>,
}

impl MatrixSignal {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        check_finite(data.iter(), "matrix signal")?;
        let (n, d, k) = data.dim();
        if n == 0 || d == 0 || k == 0 {
            return Err(DenoiseError::InvalidSize(format!("matrix signal shape {:?}", data.dim())));
        }
        if k > d {
            return Err(DenoiseError::Dimension(format!("k = {k} exceeds d = {d}")));
        }
        Ok(Self { data })
    }

    pub fn zeros(num_vertices: usize, d: usize, k: usize) -> Self {
        Self { data: Array3::zeros((num_vertices, d, k)) }
    }

    /// Stacks per-vertex `d x k` matrices.
    pub fn from_matrices(mats: &[Array2<f64>]) -> Result<Self> {
        let (d, k) = mats.first().map_or((0, 0), |m| m.dim());
        if mats.iter().any(|m| m.dim() != (d, k)) {
            return Err(DenoiseError::Dimension("node matrices differ in shape".into()));
        }
        let mut data = Array3::zeros((mats.len(), d, k));
        for (mut slot, m) in data.outer_iter_mut().zip(mats) {
            slot.assign(m);
        }
        Self::new(data)
    }

    pub fn num_vertices(&self) -> usize {
        self.data.dim().0
    }

    pub fn rows(&self) -> usize {
        self.data.dim().1
    }

    pub fn cols(&self) -> usize {
        self.data.dim().2
    }

    pub fn node(&self, n: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), n)
    }

    pub fn node_mut(&mut self, n: usize) -> ArrayViewMut2<'_, f64> {
        self.data.index_axis_mut(Axis(0), n)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_inner(self) -> Array3<f64> {
        self.data
    }

    pub(crate) fn from_array_unchecked(data: Array3<f64>) -> Self {
        Self { data }
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.num_vertices() != g.num_vertices() {
            return Err(DenoiseError::Dimension(format!(
                "signal has {} vertices, graph has {}",
                self.num_vertices(),
                g.num_vertices()
            )));
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.data.dim() != other.data.dim() {
            return Err(DenoiseError::Dimension(format!(
                "signal shapes {:?} and {:?} differ",
                self.data.dim(),
                other.data.dim()
            )));
        }
        Ok(())
    }
}

/// One `k x k` matrix per edge: the auxiliary coupling of the Tikhonov model.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCoupling {
    data: Array3<f64>,
}

impl EdgeCoupling {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        check_finite(data.iter(), "edge coupling")?;
        let (_, a, b) = data.dim();
        if a != b {
            return Err(DenoiseError::Dimension(format!("edge blocks must be square, got {a}x{b}")));
        }
        Ok(Self { data })
    }

    pub fn zeros(num_edges: usize, k: usize) -> Self {
        Self { data: Array3::zeros((num_edges, k, k)) }
    }

    pub fn num_edges(&self) -> usize {
        self.data.dim().0
    }

    pub fn k(&self) -> usize {
        self.data.dim().1
    }

    pub fn edge(&self, e: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), e)
    }

    pub fn edge_mut(&mut self, e: usize) -> ArrayViewMut2<'_, f64> {
        self.data.index_axis_mut(Axis(0), e)
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.num_edges() != g.num_edges() {
            return Err(DenoiseError::Dimension(format!(
                "coupling has {} edges, graph has {}",
                self.num_edges(),
                g.num_edges()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(VectorSignal::new(array![[1.0, f64::NAN]]), Err(DenoiseError::Data(_))));
        let mut m = Array3::<f64>::zeros((2, 3, 2));
        m[[1, 2, 0]] = f64::INFINITY;
        assert!(MatrixSignal::new(m).is_err());
    }

    #[test]
    fn matrix_signal_needs_k_le_d() {
        assert!(matches!(MatrixSignal::new(Array3::zeros((1, 2, 3))), Err(DenoiseError::Dimension(_))));
    }

    #[test]
    fn shape_checks() {
        let g = Graph::chain(3).unwrap();
        assert!(VectorSignal::zeros(3, 2).check_graph(&g).is_ok());
        assert!(VectorSignal::zeros(4, 2).check_graph(&g).is_err());
        assert!(EdgeCoupling::zeros(2, 2).check_graph(&g).is_ok());
        assert!(VectorSignal::zeros(3, 2).check_same_shape(&VectorSignal::zeros(3, 1)).is_err());
        assert!(VectorSignal::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
