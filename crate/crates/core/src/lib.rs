//! Convex-relaxation denoisers for multi-binary and Stiefel-valued signals
//! on undirected graphs.
//!
//! Three ADMM solvers are provided:
//!
//! * [`binary_tv::denoise_binary_tv`]: anisotropic TV denoising of
//!   `{−1, 1}^d`-valued data, relaxed to the cube `[−1, 1]^d`, with
//!   threshold rounding back to the vertices;
//! * [`stiefel_tv::denoise_stiefel_tv`]: anisotropic TV denoising of
//!   Stiefel-valued data, relaxed to the spectral-norm unit ball;
//! * [`stiefel_tik::denoise_stiefel_tikhonov`]: Tikhonov denoising of
//!   Stiefel-valued data via per-edge PSD block encodings.
//!
//! [`synth`] generates the synthetic experiments, [`metrics`] and [`io`]
//! support the command-line driver.

pub mod admm;
pub mod binary_tv;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod objective;
pub mod signal;
pub mod stiefel_tik;
pub mod stiefel_tv;
pub mod synth;
pub mod tv_prox;

pub use admm::{AdmmConfig, EtaChoice, SolverReport};
pub use error::{DenoiseError, Result};
pub use graph::{Graph, GraphSpec};
pub use signal::{EdgeCoupling, MatrixSignal, VectorSignal};
