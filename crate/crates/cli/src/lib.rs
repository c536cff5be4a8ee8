//! Command-line driver: synthetic data generation, denoising runs,
//! λ-sweeps and evaluation.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relaxed_denoise::io::KeyValues;
use relaxed_denoise::synth::{QrSpec, SignalProfile, StiefelSignalSpec};

use crate::commands::{GenerateSpec, SUMMARY};
use crate::config::{EtaArg, Model, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "relaxed-denoise", version, about = "Convex-relaxation denoising of multi-binary and Stiefel-valued graph signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic ground truth / noisy pair.
    Generate(GenerateArgs),
    /// Run one denoiser.
    Denoise(DenoiseArgs),
    /// Run one denoiser for several λ and report the best by MSE.
    Sweep(SweepArgs),
    /// Score a signal against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    Qr,
    Stiefel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Piecewise,
    Smooth,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Option<DataKind>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-channel Gaussian noise level (QR).
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Module grid as HxW (QR).
    #[arg(long)]
    pub modules: Option<String>,
    #[arg(long)]
    pub upsample: Option<usize>,
    /// von Mises–Fisher concentration (Stiefel).
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileKind>,
    #[arg(long)]
    pub segments: Option<usize>,
    /// Total rotation angle of the smooth profile.
    #[arg(long)]
    pub angle: Option<f64>,
    /// Regenerate from a previous manifest; explicit flags override it.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Primal and dual residual tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Duality-gap tolerance of the TV prox (default 1e-10 per edge).
    #[arg(long)]
    pub inner_tol: Option<f64>,
    /// Rounding threshold: comma-separated vector or `random`.
    #[arg(long)]
    pub eta: Option<EtaArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallel: bool,
    /// Module size in pixels, for module accuracy on QR runs.
    #[arg(long)]
    pub upsample: Option<usize>,
    /// Rerun from a saved run configuration; explicit flags override it.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// λ values, comma-separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub grid: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Also write the metrics to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub upsample: Option<usize>,
}

fn missing(flag: &str) -> CliError {
    CliError::Validation(format!("{flag}: required"))
}

fn parse_modules(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Validation(format!("modules: expected HxW, got `{s}`"));
    let (h, w) = s.split_once('x').ok_or_else(bad)?;
    Ok((h.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?))
}

impl GenerateArgs {
    pub fn resolve(&self) -> CliResult<GenerateSpec> {
        let base = self.from_manifest.as_deref().map(KeyValues::read).transpose()?.map(|kv| GenerateSpec::from_key_values(&kv)).transpose()?;
        let kind = match (&self.kind, &base) {
            (Some(k), _) => *k,
            (None, Some(GenerateSpec::Qr(_))) => DataKind::Qr,
            (None, Some(GenerateSpec::Stiefel(_))) => DataKind::Stiefel,
            (None, None) => return Err(missing("kind")),
        };
        Ok(match kind {
            DataKind::Qr => {
                let mut q = match base {
                    Some(GenerateSpec::Qr(q)) => q,
                    _ => QrSpec { modules_h: 20, modules_w: 20, upsample: 10, noise_sigma: 2f64.sqrt() * 0.5, seed: 0 },
                };
                if let Some(m) = &self.modules {
                    (q.modules_h, q.modules_w) = parse_modules(m)?;
                }
                q.upsample = self.upsample.unwrap_or(q.upsample);
                q.noise_sigma = self.sigma.unwrap_or(q.noise_sigma);
                q.seed = self.seed.unwrap_or(q.seed);
                GenerateSpec::Qr(q)
            }
            DataKind::Stiefel => {
                let mut s = match base {
                    Some(GenerateSpec::Stiefel(s)) => s,
                    _ => StiefelSignalSpec {
                        length: 200,
                        d: 3,
                        k: 2,
                        profile: SignalProfile::PiecewiseConstant { segments: 5 },
                        kappa: 50.0,
                        seed: 0,
                    },
                };
                s.length = self.length.unwrap_or(s.length);
                s.d = self.d.unwrap_or(s.d);
                s.k = self.k.unwrap_or(s.k);
                s.kappa = self.kappa.unwrap_or(s.kappa);
                s.seed = self.seed.unwrap_or(s.seed);
                s.profile = match (self.profile, s.profile) {
                    (Some(ProfileKind::Piecewise), SignalProfile::PiecewiseConstant { segments }) | (None, SignalProfile::PiecewiseConstant { segments }) => {
                        SignalProfile::PiecewiseConstant { segments: self.segments.unwrap_or(segments) }
                    }
                    (Some(ProfileKind::Smooth), SignalProfile::Smooth { total_angle }) | (None, SignalProfile::Smooth { total_angle }) => {
                        SignalProfile::Smooth { total_angle: self.angle.unwrap_or(total_angle) }
                    }
                    (Some(ProfileKind::Piecewise), _) => SignalProfile::PiecewiseConstant { segments: self.segments.unwrap_or(5) },
                    (Some(ProfileKind::Smooth), _) => SignalProfile::Smooth { total_angle: self.angle.unwrap_or(std::f64::consts::PI) },
                };
                GenerateSpec::Stiefel(s)
            }
        })
    }
}

impl SolverArgs {
    /// Merges the saved configuration (if any) with explicit flags and model defaults.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let base = self.from_manifest.as_deref().map(KeyValues::read).transpose()?.map(|kv| RunConfig::from_key_values(&kv)).transpose()?;
        let model = self.model.or(base.as_ref().map(|b| b.model)).ok_or_else(|| missing("model"))?;
        let (lambda, rho) = model.defaults();
        let base = base.filter(|b| b.model == model);
        let cfg = RunConfig {
            model,
            input: self.input.clone().or(base.as_ref().map(|b| b.input.clone())).ok_or_else(|| missing("in"))?,
            truth: self.truth.clone().or(base.as_ref().and_then(|b| b.truth.clone())),
            out: self.out.clone().or(base.as_ref().map(|b| b.out.clone())).ok_or_else(|| missing("out"))?,
            lambda: self.lambda.or(base.as_ref().map(|b| b.lambda)).unwrap_or(lambda),
            rho: self.rho.or(base.as_ref().map(|b| b.rho)).unwrap_or(rho),
            max_iter: self.max_iter.or(base.as_ref().map(|b| b.max_iter)).unwrap_or(model.default_max_iter()),
            tol: self.tol.or(base.as_ref().and_then(|b| b.tol)),
            inner_tol: self.inner_tol.or(base.as_ref().and_then(|b| b.inner_tol)),
            eta: self.eta.clone().or(base.as_ref().and_then(|b| b.eta.clone())),
            seed: self.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
            parallel: self.parallel || base.as_ref().is_some_and(|b| b.parallel),
            upsample: self.upsample.or(base.as_ref().and_then(|b| b.upsample)),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Executes a parsed command and returns the text to print on success.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Generate(args) => {
            let spec = args.resolve()?;
            let written = commands::cmd_generate(&spec, &args.out)?;
            Ok(written.iter().map(|p| format!("wrote {}", p.display())).collect::<Vec<_>>().join("\n"))
        }
        Command::Denoise(args) => {
            let cfg = args.solver.resolve()?;
            let report = commands::cmd_denoise(&cfg)?;
            Ok(report.to_key_values().encode())
        }
        Command::Sweep(args) => {
            let cfg = args.solver.resolve()?;
            let summary = commands::cmd_sweep(&cfg, &args.grid)?;
            let mut text = summary.to_key_values().encode();
            text.push_str(&format!("# summary written to {}", cfg.out.join(SUMMARY).display()));
            Ok(text)
        }
        Command::Eval(args) => {
            let kv = commands::cmd_eval(&args.input, &args.truth, args.upsample)?;
            if let Some(out) = &args.out {
                kv.write(out)?;
            }
            Ok(kv.encode())
        }
    }
}
