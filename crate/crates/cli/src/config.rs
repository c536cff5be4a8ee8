//! Validated run configurations and their manifest form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use relaxed_denoise::io::KeyValues;
use relaxed_denoise::{AdmmConfig, EtaChoice};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Model {
    BinaryTv,
    StiefelTv,
    StiefelTik,
}

impl Model {
    /// Default `(λ, ρ)` of each model.
    pub fn defaults(self) -> (f64, f64) {
        match self {
            Model::BinaryTv => (1.2, 0.1),
            Model::StiefelTv => (0.75, 0.5),
            Model::StiefelTik => (10.0, 0.1),
        }
    }

    pub fn default_max_iter(self) -> usize {
        match self {
            Model::StiefelTik => 20_000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::BinaryTv => "binary-tv",
            Model::StiefelTv => "stiefel-tv",
            Model::StiefelTik => "stiefel-tik",
        })
    }
}

impl FromStr for Model {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "binary-tv" => Ok(Model::BinaryTv),
            "stiefel-tv" => Ok(Model::StiefelTv),
            "stiefel-tik" => Ok(Model::StiefelTik),
            _ => Err(CliError::Validation(format!("model: unknown model `{s}`"))),
        }
    }
}

/// Rounding threshold request: a fixed vector or a seeded random draw.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaArg {
    Fixed(Vec<f64>),
    Random,
}

impl FromStr for EtaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(EtaArg::Random);
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<Result<Vec<_>, _>>()
            .map(EtaArg::Fixed)
    }
}

impl fmt::Display for EtaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EtaArg::Random => f.write_str("random"),
            EtaArg::Fixed(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Everything needed to reproduce one denoising run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub input: PathBuf,
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub tol: Option<f64>,
    pub inner_tol: Option<f64>,
    pub eta: Option<EtaArg>,
    pub seed: u64,
    pub parallel: bool,
    pub upsample: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{name}: must be a positive number, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("rho", self.rho)?;
        if self.max_iter == 0 {
            return Err(CliError::Validation("max-iter: must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        if let Some(t) = self.inner_tol {
            positive("inner-tol", t)?;
        }
        if let Some(EtaArg::Fixed(eta)) = &self.eta {
            if self.model != Model::BinaryTv {
                return Err(CliError::Validation("eta: only meaningful for the binary-tv model".into()));
            }
            if eta.iter().any(|e| !(-1.0..=1.0).contains(e)) {
                return Err(CliError::Validation("eta: components must lie in [-1, 1]".into()));
            }
        }
        if self.upsample == Some(0) {
            return Err(CliError::Validation("upsample: must be at least 1".into()));
        }
        Ok(())
    }

    /// Solver configuration for a graph with `num_edges` edges.
    pub fn admm_config(&self, num_edges: usize) -> AdmmConfig {
        let mut cfg = AdmmConfig::new(self.lambda, self.rho).with_max_iter(self.max_iter);
        if let Some(t) = self.tol {
            cfg = cfg.with_tolerances(t, t);
        }
        cfg.tv_cfg.inner_tol = self.inner_tol.unwrap_or(1e-10 * num_edges.max(1) as f64);
        cfg.tv_cfg.parallel = self.parallel;
        cfg.eta = match &self.eta {
            None => EtaChoice::Zero,
            Some(EtaArg::Fixed(v)) => EtaChoice::Fixed(v.clone()),
            Some(EtaArg::Random) => EtaChoice::Random { seed: self.seed },
        };
        cfg
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("model", self.model)
            .set("input", self.input.display())
            .set("out", self.out.display())
            .set_real("lambda", self.lambda)
            .set_real("rho", self.rho)
            .set("max_iter", self.max_iter)
            .set("seed", self.seed)
            .set("parallel", self.parallel);
        if let Some(t) = &self.truth {
            kv.set("truth", t.display());
        }
        if let Some(t) = self.tol {
            kv.set_real("tol", t);
        }
        if let Some(t) = self.inner_tol {
            kv.set_real("inner_tol", t);
        }
        if let Some(e) = &self.eta {
            kv.set("eta", e);
        }
        if let Some(u) = self.upsample {
            kv.set("upsample", u);
        }
        kv
    }

    pub fn from_key_values(kv: &KeyValues) -> CliResult<Self> {
        let opt_f64 = |key: &str| kv.get(key).map(|_| kv.parse_value::<f64>(key)).transpose();
        Ok(Self {
            model: kv.require("model")?.parse()?,
            input: kv.require("input")?.into(),
            truth: kv.get("truth").map(PathBuf::from),
            out: kv.require("out")?.into(),
            lambda: kv.parse_value("lambda")?,
            rho: kv.parse_value("rho")?,
            max_iter: kv.parse_value("max_iter")?,
            tol: opt_f64("tol")?,
            inner_tol: opt_f64("inner_tol")?,
            eta: kv.get("eta").map(|e| e.parse().map_err(|m| CliError::Validation(format!("eta: {m}")))).transpose()?,
            seed: kv.parse_value("seed")?,
            parallel: kv.parse_value("parallel")?,
            upsample: kv.get("upsample").map(|_| kv.parse_value("upsample")).transpose()?,
        })
    }
}
