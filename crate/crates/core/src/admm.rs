//! Configuration and diagnostics shared by the three ADMM solvers.

use crate::error::{DenoiseError, Result};
use crate::tv_prox::TvProxConfig;

/// How the rounding threshold η of the binary solver is chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum EtaChoice {
    /// η = 0, deterministic rounding.
    #[default]
    Zero,
    Fixed(Vec<f64>),
    /// η drawn once, uniformly from the cube, with the given seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub lambda: f64,
    pub max_iter: usize,
    /// `None` selects the solver's size-scaled default.
    pub tol_primal: Option<f64>,
    pub tol_dual: Option<f64>,
    /// Inner TV prox settings; its `gamma` is overwritten with `lambda / rho`.
    pub tv_cfg: TvProxConfig,
    pub eta: EtaChoice,
}

impl AdmmConfig {
    pub fn new(lambda: f64, rho: f64) -> Self {
        Self {
            rho,
            lambda,
            max_iter: 10_000,
            tol_primal: None,
            tol_dual: None,
            tv_cfg: TvProxConfig::new(lambda / rho),
            eta: EtaChoice::Zero,
        }
    }

    /// Defaults of the multi-binary TV run (`λ = 1.2`, `ρ = 0.1`).
    pub fn binary_tv() -> Self {
        Self::new(1.2, 0.1)
    }

    /// Defaults of the Stiefel TV run (`λ = 0.75`, `ρ = 0.5`).
    pub fn stiefel_tv() -> Self {
        Self::new(0.75, 0.5)
    }

    /// Defaults of the Stiefel Tikhonov run (`λ = 10`, `ρ = 0.1`, 2·10⁴ iterations).
    pub fn stiefel_tikhonov() -> Self {
        Self { max_iter: 20_000, ..Self::new(10.0, 0.1) }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tolerances(mut self, tol_primal: f64, tol_dual: f64) -> Self {
        self.tol_primal = Some(tol_primal);
        self.tol_dual = Some(tol_dual);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DenoiseError::Parameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.rho, "rho")?;
        positive(self.lambda, "lambda")?;
        if self.max_iter == 0 {
            return Err(DenoiseError::Parameter("max_iter must be at least 1".into()));
        }
        if let Some(t) = self.tol_primal {
            positive(t, "tol_primal")?;
        }
        if let Some(t) = self.tol_dual {
            positive(t, "tol_dual")?;
        }
        self.prox_config().validate()
    }

    pub(crate) fn prox_config(&self) -> TvProxConfig {
        TvProxConfig { gamma: self.lambda / self.rho, ..self.tv_cfg }
    }

    pub(crate) fn tolerances(&self, default: f64) -> (f64, f64) {
        (self.tol_primal.unwrap_or(default), self.tol_dual.unwrap_or(default))
    }
}

/// Per-run diagnostics. The objective is recorded once per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub converged: bool,
}

impl SolverReport {
    pub(crate) fn new(tol_primal: f64, tol_dual: f64) -> Self {
        Self {
            iterations: 0,
            objective_trace: Vec::new(),
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            tol_primal,
            tol_dual,
            converged: false,
        }
    }

    pub(crate) fn record(&mut self, objective: f64, primal: f64, dual: f64) -> bool {
        self.iterations += 1;
        self.objective_trace.push(objective);
        self.primal_residual = primal;
        self.dual_residual = dual;
        self.converged = primal <= self.tol_primal && dual <= self.tol_dual;
        self.converged
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_values() {
        assert!(AdmmConfig::new(1.0, 0.5).validate().is_ok());
        assert!(AdmmConfig::new(0.0, 0.5).validate().is_err());
        assert!(AdmmConfig::new(1.0, -0.5).validate().is_err());
        assert!(AdmmConfig::new(1.0, 0.5).with_max_iter(0).validate().is_err());
        assert!(AdmmConfig::new(1.0, 0.5).with_tolerances(0.0, 1.0).validate().is_err());
    }

    #[test]
    fn prox_step_is_lambda_over_rho() {
        let cfg = AdmmConfig::binary_tv();
        assert!((cfg.prox_config().gamma - 12.0).abs() < 1e-12);
    }
}
