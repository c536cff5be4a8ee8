//! The four verbs: `generate`, `denoise`, `sweep`, `eval`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use relaxed_denoise::binary_tv::denoise_binary_tv;
use relaxed_denoise::io::{read_signal, write_ppm, write_signal, KeyValues, SignalData, SignalFile};
use relaxed_denoise::metrics::{error_mask, metric_dist_to_bd, metric_mse, module_accuracy, pixel_accuracy, MetricsReport};
use relaxed_denoise::stiefel_tik::denoise_stiefel_tikhonov;
use relaxed_denoise::stiefel_tv::{denoise_stiefel_tv, stiefel_feasibility};
use relaxed_denoise::synth::{gen_multicolor_qr, gen_stiefel_experiment, QrSpec, SignalProfile, StiefelSignalSpec};
use relaxed_denoise::{GraphSpec, VectorSignal};

use crate::config::{Model, RunConfig};
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.txt";
pub const METRICS: &str = "metrics.txt";
pub const RUN_CONFIG: &str = "run.txt";
pub const SUMMARY: &str = "summary.txt";

/// What `generate` should produce.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerateSpec {
    Qr(QrSpec),
    Stiefel(StiefelSignalSpec),
}

impl GenerateSpec {
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        match self {
            GenerateSpec::Qr(q) => {
                kv.set("kind", "qr")
                    .set("modules_h", q.modules_h)
                    .set("modules_w", q.modules_w)
                    .set("upsample", q.upsample)
                    .set_real("sigma", q.noise_sigma)
                    .set("seed", q.seed);
            }
            GenerateSpec::Stiefel(s) => {
                kv.set("kind", "stiefel")
                    .set("length", s.length)
                    .set("d", s.d)
                    .set("k", s.k)
                    .set_real("kappa", s.kappa)
                    .set("seed", s.seed);
                match s.profile {
                    SignalProfile::PiecewiseConstant { segments } => kv.set("profile", "piecewise").set("segments", segments),
                    SignalProfile::Smooth { total_angle } => kv.set("profile", "smooth").set_real("angle", total_angle),
                };
            }
        }
        kv
    }

    pub fn from_key_values(kv: &KeyValues) -> CliResult<Self> {
        match kv.require("kind")? {
            "qr" => Ok(GenerateSpec::Qr(QrSpec {
                modules_h: kv.parse_value("modules_h")?,
                modules_w: kv.parse_value("modules_w")?,
                upsample: kv.parse_value("upsample")?,
                noise_sigma: kv.parse_value("sigma")?,
                seed: kv.parse_value("seed")?,
            })),
            "stiefel" => {
                let profile = match kv.require("profile")? {
                    "piecewise" => SignalProfile::PiecewiseConstant { segments: kv.parse_value("segments")? },
                    "smooth" => SignalProfile::Smooth { total_angle: kv.parse_value("angle")? },
                    other => return Err(CliError::Validation(format!("profile: unknown profile `{other}`"))),
                };
                Ok(GenerateSpec::Stiefel(StiefelSignalSpec {
                    length: kv.parse_value("length")?,
                    d: kv.parse_value("d")?,
                    k: kv.parse_value("k")?,
                    profile,
                    kappa: kv.parse_value("kappa")?,
                    seed: kv.parse_value("seed")?,
                }))
            }
            other => Err(CliError::Validation(format!("kind: unknown data kind `{other}`"))),
        }
    }
}

/// Writes ground truth, noisy data and a manifest into `out`; returns the written paths.
pub fn cmd_generate(spec: &GenerateSpec, out: &Path) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    match spec {
        GenerateSpec::Qr(q) => {
            q.validate()?;
            let inst = gen_multicolor_qr(q)?;
            let graph = GraphSpec::Grid { height: inst.height, width: inst.width };
            for (name, sig) in [("truth", &inst.truth), ("noisy", &inst.noisy)] {
                let ppm = out.join(format!("{name}.ppm"));
                write_ppm(&ppm, inst.width, inst.height, sig)?;
                let txt = out.join(format!("{name}.txt"));
                write_signal(&txt, &SignalFile { graph, signal: SignalData::Vector(sig.clone()) })?;
                written.extend([ppm, txt]);
            }
        }
        GenerateSpec::Stiefel(s) => {
            s.validate()?;
            let (truth, noisy) = gen_stiefel_experiment(s)?;
            let graph = GraphSpec::Chain(s.length);
            for (name, sig) in [("truth", truth), ("noisy", noisy)] {
                let txt = out.join(format!("{name}.txt"));
                write_signal(&txt, &SignalFile { graph, signal: SignalData::Matrix(sig) })?;
                written.push(txt);
            }
        }
    }
    let manifest = out.join(MANIFEST);
    spec.to_key_values().write(&manifest)?;
    written.push(manifest);
    Ok(written)
}

fn values(sig: &SignalData) -> Vec<f64> {
    match sig {
        SignalData::Vector(v) => v.data().iter().copied().collect(),
        SignalData::Matrix(m) => m.data().iter().copied().collect(),
    }
}

fn load_truth(path: &Path, input: &SignalFile) -> CliResult<SignalFile> {
    let truth = read_signal(path)?;
    let same_shape = match (&truth.signal, &input.signal) {
        (SignalData::Vector(a), SignalData::Vector(b)) => a.data().dim() == b.data().dim(),
        (SignalData::Matrix(a), SignalData::Matrix(b)) => a.data().dim() == b.data().dim(),
        _ => false,
    };
    if truth.graph != input.graph || !same_shape {
        return Err(CliError::Validation(format!(
            "truth: {} does not match the input's graph and shape",
            path.display()
        )));
    }
    Ok(truth)
}

/// Upsampling factor from the flag or, failing that, the generate manifest beside the truth file.
fn resolve_upsample(explicit: Option<usize>, truth: Option<&Path>) -> Option<usize> {
    explicit.or_else(|| {
        let manifest = truth?.parent()?.join(MANIFEST);
        KeyValues::read(&manifest).ok()?.parse_value("upsample").ok()
    })
}

/// Per-channel module values read off the top-left pixel of each block.
fn modules_of(truth: &VectorSignal, graph: GraphSpec, upsample: usize) -> Option<ndarray::Array3<f64>> {
    let GraphSpec::Grid { height, width } = graph else { return None };
    if upsample == 0 || height % upsample != 0 || width % upsample != 0 {
        return None;
    }
    let (mh, mw) = (height / upsample, width / upsample);
    Some(ndarray::Array3::from_shape_fn((mh, mw, truth.dim()), |(i, j, c)| {
        truth.data()[[i * upsample * width + j * upsample, c]]
    }))
}

fn binary_metrics(
    report: &mut MetricsReport,
    rounded: &VectorSignal,
    truth: &VectorSignal,
    graph: GraphSpec,
    upsample: Option<usize>,
) -> CliResult<()> {
    report.pixel_accuracy = Some(pixel_accuracy(rounded, truth)?);
    if let Some(modules) = upsample.and_then(|u| modules_of(truth, graph, u).map(|m| (m, u))) {
        report.module_accuracy = Some(module_accuracy(rounded, &modules.0, modules.1)?);
    }
    Ok(())
}

fn write_images(out: &Path, graph: GraphSpec, images: &[(&str, &VectorSignal)]) -> CliResult<()> {
    if let GraphSpec::Grid { height, width } = graph {
        for (name, img) in images {
            if img.dim() == 3 {
                write_ppm(&out.join(format!("{name}.ppm")), width, height, img)?;
            }
        }
    }
    Ok(())
}

/// Runs one solver and writes its outputs. Returns the report whether or not
/// the solver met its tolerances.
pub fn run_denoise(cfg: &RunConfig) -> CliResult<MetricsReport> {
    cfg.validate()?;
    let input = read_signal(&cfg.input)?;
    let graph = input.graph.build()?;
    let truth = cfg.truth.as_deref().map(|p| load_truth(p, &input)).transpose()?;
    let admm = cfg.admm_config(graph.num_edges());
    cfg.to_key_values().write(&cfg.out.join(RUN_CONFIG))?;
    let mismatch = |kind: &str| CliError::Validation(format!("model: {} needs a {kind} signal", cfg.model));

    let start = Instant::now();
    let (mut report, restored) = match (cfg.model, &input.signal) {
        (Model::BinaryTv, SignalData::Vector(y)) => {
            let res = denoise_binary_tv(y, &graph, &admm)?;
            let mut report = MetricsReport::from_solver("binary-tv", cfg.lambda, cfg.rho, &res.report, start.elapsed().as_secs_f64());
            report.dist_to_bd = Some(res.dist_to_vertices);
            write_signal(&cfg.out.join("rounded.txt"), &SignalFile { graph: input.graph, signal: SignalData::Vector(res.rounded.clone()) })?;
            let mut images = vec![("restored", &res.relaxed), ("rounded", &res.rounded)];
            let mask;
            if let Some(SignalFile { signal: SignalData::Vector(t), .. }) = &truth {
                binary_metrics(&mut report, &res.rounded, t, input.graph, resolve_upsample(cfg.upsample, cfg.truth.as_deref()))?;
                mask = error_mask(&res.rounded, t)?;
                images.push(("error", &mask));
            }
            write_images(&cfg.out, input.graph, &images)?;
            (report, SignalData::Vector(res.relaxed))
        }
        (Model::StiefelTv, SignalData::Matrix(y)) => {
            let res = denoise_stiefel_tv(y, &graph, &admm)?;
            let mut report = MetricsReport::from_solver("stiefel-tv", cfg.lambda, cfg.rho, &res.report, start.elapsed().as_secs_f64());
            report.mean_norm_deviation = Some(res.feasibility.mean_norm_deviation);
            report.mean_inner_product = Some(res.feasibility.mean_inner_product);
            (report, SignalData::Matrix(res.relaxed))
        }
        (Model::StiefelTik, SignalData::Matrix(y)) => {
            let res = denoise_stiefel_tikhonov(y, &graph, &admm)?;
            let mut report = MetricsReport::from_solver("stiefel-tik", cfg.lambda, cfg.rho, &res.report, start.elapsed().as_secs_f64());
            report.mean_norm_deviation = Some(res.feasibility.mean_norm_deviation);
            report.mean_inner_product = Some(res.feasibility.mean_inner_product);
            report.coupling_defect = Some(res.coupling_defect.iter().sum::<f64>() / res.coupling_defect.len() as f64);
            (report, SignalData::Matrix(res.x))
        }
        (Model::BinaryTv, _) => return Err(mismatch("vector")),
        _ => return Err(mismatch("matrix")),
    };
    if let Some(t) = &truth {
        let t = values(&t.signal);
        report.mse = Some(metric_mse(&values(&restored), &t)?);
        report.noisy_mse = Some(metric_mse(&values(&input.signal), &t)?);
    }
    write_signal(&cfg.out.join("restored.txt"), &SignalFile { graph: input.graph, signal: restored })?;
    report.validate()?;
    report.to_key_values().write(&cfg.out.join(METRICS))?;
    Ok(report)
}

/// `run_denoise`, failing with a non-convergence error (after all outputs
/// are written) when the solver stopped at `max_iter`.
pub fn cmd_denoise(cfg: &RunConfig) -> CliResult<MetricsReport> {
    let report = run_denoise(cfg)?;
    if !report.converged {
        return Err(CliError::NonConvergence(format!(
            "stopped after {} iterations (primal {:e}, dual {:e}); report written to {}",
            report.iterations,
            report.primal_residual,
            report.dual_residual,
            cfg.out.join(METRICS).display()
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub lambda: f64,
    pub dir: PathBuf,
    pub outcome: Result<MetricsReport, String>,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub runs: Vec<SweepRun>,
    /// `(λ, mse)` of the completed run with the smallest MSE.
    pub best: Option<(f64, f64)>,
}

impl SweepSummary {
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let grid: Vec<String> = self.runs.iter().map(|r| r.lambda.to_string()).collect();
        kv.set("grid", grid.join(","));
        if let Some((lambda, mse)) = self.best {
            kv.set_real("best_lambda", lambda).set_real("best_mse", mse);
        }
        for run in &self.runs {
            match &run.outcome {
                Ok(r) => {
                    kv.set_real(&format!("run.{}.mse", run.lambda), r.mse.unwrap_or(f64::NAN));
                    kv.set(&format!("run.{}.converged", run.lambda), r.converged);
                }
                Err(e) => {
                    kv.set(&format!("run.{}.error", run.lambda), e);
                }
            }
        }
        kv
    }
}

pub fn lambda_dir(root: &Path, lambda: f64) -> PathBuf {
    root.join(format!("lambda_{lambda}"))
}

/// Runs `base` once per λ in `grid` (concurrently when `base.parallel` is
/// set), each in its own subdirectory of `base.out`.
pub fn cmd_sweep(base: &RunConfig, grid: &[f64]) -> CliResult<SweepSummary> {
    if grid.is_empty() {
        return Err(CliError::Validation("grid: at least one lambda is required".into()));
    }
    for (i, l) in grid.iter().enumerate() {
        if grid[..i].contains(l) {
            return Err(CliError::Validation(format!("grid: lambda {l} appears twice")));
        }
    }
    if base.truth.is_none() {
        return Err(CliError::Validation("truth: a sweep needs ground truth to rank runs".into()));
    }
    let configs: Vec<RunConfig> = grid
        .iter()
        .map(|&lambda| RunConfig { lambda, out: lambda_dir(&base.out, lambda), parallel: false, ..base.clone() })
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    let run = |cfg: &RunConfig| SweepRun { lambda: cfg.lambda, dir: cfg.out.clone(), outcome: run_denoise(cfg).map_err(|e| e.to_string()) };
    let runs: Vec<SweepRun> = if base.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs.iter().map(|cfg| s.spawn(move || run(cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        })
    } else {
        configs.iter().map(run).collect()
    };
    let best = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().and_then(|m| m.mse).map(|mse| (r.lambda, mse)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let summary = SweepSummary { runs, best };
    summary.to_key_values().write(&base.out.join(SUMMARY))?;
    if summary.best.is_none() {
        let first = summary.runs.iter().find_map(|r| r.outcome.as_ref().err()).cloned().unwrap_or_default();
        return Err(CliError::NonConvergence(format!("no sweep run completed; first failure: {first}")));
    }
    Ok(summary)
}

/// Compares a (restored or rounded) signal against ground truth.
pub fn cmd_eval(input: &Path, truth: &Path, upsample: Option<usize>) -> CliResult<KeyValues> {
    let signal = read_signal(input)?;
    let reference = load_truth(truth, &signal)?;
    let mut kv = KeyValues::new();
    kv.set_real("mse", metric_mse(&values(&signal.signal), &values(&reference.signal))?);
    match (&signal.signal, &reference.signal) {
        (SignalData::Vector(x), SignalData::Vector(t)) => {
            kv.set_real("dist_to_bd", metric_dist_to_bd(x));
            let rounded = relaxed_denoise::binary_tv::threshold_round(x, &vec![0.0; x.dim()])?;
            kv.set_real("pixel_accuracy", pixel_accuracy(&rounded, t)?);
            let upsample = resolve_upsample(upsample, Some(truth));
            if let Some((modules, u)) = upsample.and_then(|u| modules_of(t, signal.graph, u).map(|m| (m, u))) {
                kv.set_real("module_accuracy", module_accuracy(&rounded, &modules, u)?);
            }
        }
        (SignalData::Matrix(x), _) => {
            let f = stiefel_feasibility(x);
            kv.set_real("mean_norm_deviation", f.mean_norm_deviation).set_real("mean_inner_product", f.mean_inner_product);
        }
        _ => unreachable!("shapes checked by load_truth"),
    }
    Ok(kv)
}

