//! Error and feasibility metrics for restored signals.

use ndarray::Array3;

use crate::admm::SolverReport;
use crate::error::{DenoiseError, Result};
use crate::io::KeyValues;
use crate::signal::VectorSignal;

/// Mean squared difference over all scalar entries.
pub fn metric_mse<'a>(a: &'a [f64], b: &'a [f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DenoiseError::Dimension(format!("mse of lengths {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(DenoiseError::InvalidSize("mse of empty signals".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Mean over entries of `| |x| − 1 |`, the entrywise distance to `{−1, 1}`.
pub fn metric_dist_to_bd(x: &VectorSignal) -> f64 {
    let data = x.data();
    data.iter().map(|v| (v.abs() - 1.0).abs()).sum::<f64>() / data.len() as f64
}

fn check_pixels(a: &VectorSignal, b: &VectorSignal) -> Result<()> {
    if a.data().dim() != b.data().dim() {
        return Err(DenoiseError::Dimension(format!(
            "signals of shape {:?} and {:?}",
            a.data().dim(),
            b.data().dim()
        )));
    }
    Ok(())
}

/// Fraction of vertices whose rounded value agrees with the truth in every channel.
pub fn pixel_accuracy(rounded: &VectorSignal, truth: &VectorSignal) -> Result<f64> {
    check_pixels(rounded, truth)?;
    let hits = rounded.data().rows().into_iter().zip(truth.data().rows()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / rounded.num_vertices() as f64)
}

/// Fraction of QR modules recovered: each channel of a module is decided by
/// majority vote over its `upsample × upsample` pixel block (ties go to +1).
/// `modules` is `modules_h × modules_w × channels`.
pub fn module_accuracy(rounded: &VectorSignal, modules: &Array3<f64>, upsample: usize) -> Result<f64> {
    let (mh, mw, ch) = modules.dim();
    let width = mw * upsample;
    if rounded.num_vertices() != mh * mw * upsample * upsample || rounded.dim() != ch {
        return Err(DenoiseError::Dimension(format!(
            "{}x{} signal does not match {mh}x{mw}x{ch} modules at upsampling {upsample}",
            rounded.num_vertices(),
            rounded.dim()
        )));
    }
    let data = rounded.data();
    let mut hits = 0;
    for i in 0..mh {
        for j in 0..mw {
            let ok = (0..ch).all(|c| {
                let mut vote = 0.0;
                for r in i * upsample..(i + 1) * upsample {
                    for s in j * upsample..(j + 1) * upsample {
                        vote += data[[r * width + s, c]].signum();
                    }
                }
                let decided = if vote >= 0.0 { 1.0 } else { -1.0 };
                decided == modules[[i, j, c]]
            });
            hits += usize::from(ok);
        }
    }
    Ok(hits as f64 / (mh * mw) as f64)
}

/// Entrywise disagreement mask: `+1` where `rounded` and `truth` differ, `−1`
/// elsewhere, so that the PPM encoding shows errors in white.
pub fn error_mask(rounded: &VectorSignal, truth: &VectorSignal) -> Result<VectorSignal> {
    check_pixels(rounded, truth)?;
    let mask = ndarray::Zip::from(rounded.data())
        .and(truth.data())
        .map_collect(|a, b| if a == b { -1.0 } else { 1.0 });
    Ok(VectorSignal::from_array_unchecked(mask))
}

/// Summary of one denoising run, serialized as `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub model: String,
    pub lambda: f64,
    pub rho: f64,
    pub mse: Option<f64>,
    pub noisy_mse: Option<f64>,
    pub dist_to_bd: Option<f64>,
    pub pixel_accuracy: Option<f64>,
    pub module_accuracy: Option<f64>,
    pub mean_norm_deviation: Option<f64>,
    pub mean_inner_product: Option<f64>,
    pub coupling_defect: Option<f64>,
    pub runtime_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub final_objective: Option<f64>,
}

impl MetricsReport {
    pub fn from_solver(model: &str, lambda: f64, rho: f64, report: &SolverReport, runtime_seconds: f64) -> Self {
        Self {
            model: model.to_string(),
            lambda,
            rho,
            runtime_seconds,
            iterations: report.iterations,
            converged: report.converged,
            primal_residual: report.primal_residual,
            dual_residual: report.dual_residual,
            final_objective: report.final_objective(),
            ..Self::default()
        }
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("model", &self.model).set_real("lambda", self.lambda).set_real("rho", self.rho);
        let optional = [
            ("mse", self.mse),
            ("noisy_mse", self.noisy_mse),
            ("dist_to_bd", self.dist_to_bd),
            ("pixel_accuracy", self.pixel_accuracy),
            ("module_accuracy", self.module_accuracy),
            ("mean_norm_deviation", self.mean_norm_deviation),
            ("mean_inner_product", self.mean_inner_product),
            ("coupling_defect", self.coupling_defect),
        ];
        for (key, value) in optional {
            if let Some(v) = value {
                kv.set_real(key, v);
            }
        }
        kv.set_real("runtime_seconds", self.runtime_seconds)
            .set("iterations", self.iterations)
            .set("converged", self.converged)
            .set_real("primal_residual", self.primal_residual)
            .set_real("dual_residual", self.dual_residual);
        if let Some(v) = self.final_objective {
            kv.set_real("final_objective", v);
        }
        kv
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let opt = |key: &str| kv.get(key).map(|_| kv.parse_value::<f64>(key)).transpose();
        Ok(Self {
            model: kv.require("model")?.to_string(),
            lambda: kv.parse_value("lambda")?,
            rho: kv.parse_value("rho")?,
            mse: opt("mse")?,
            noisy_mse: opt("noisy_mse")?,
            dist_to_bd: opt("dist_to_bd")?,
            pixel_accuracy: opt("pixel_accuracy")?,
            module_accuracy: opt("module_accuracy")?,
            mean_norm_deviation: opt("mean_norm_deviation")?,
            mean_inner_product: opt("mean_inner_product")?,
            coupling_defect: opt("coupling_defect")?,
            runtime_seconds: kv.parse_value("runtime_seconds")?,
            iterations: kv.parse_value("iterations")?,
            converged: kv.parse_value("converged")?,
            primal_residual: kv.parse_value("primal_residual")?,
            dual_residual: kv.parse_value("dual_residual")?,
            final_objective: opt("final_objective")?,
        })
    }

    /// Checks that all recorded numbers are finite and accuracies lie in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let reals = [
            Some(self.lambda),
            Some(self.rho),
            self.mse,
            self.noisy_mse,
            self.dist_to_bd,
            self.pixel_accuracy,
            self.module_accuracy,
            self.mean_norm_deviation,
            self.mean_inner_product,
            self.coupling_defect,
            Some(self.runtime_seconds),
            Some(self.primal_residual),
            Some(self.dual_residual),
            self.final_objective,
        ];
        if reals.iter().flatten().any(|v| !v.is_finite()) {
            return Err(DenoiseError::Data("metrics report contains non-finite values".into()));
        }
        if [self.pixel_accuracy, self.module_accuracy].iter().flatten().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(DenoiseError::Data("accuracy outside [0, 1]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn mse_examples() {
        assert_eq!(metric_mse(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 0.0);
        assert_eq!(metric_mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(metric_mse(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn dist_examples() {
        let v = |rows: Array2<f64>| VectorSignal::new(rows).unwrap();
        assert_eq!(metric_dist_to_bd(&v(array![[1.0, -1.0], [-1.0, 1.0]])), 0.0);
        assert!((metric_dist_to_bd(&v(array![[0.9]])) - 0.1).abs() < 1e-15);
        assert_eq!(metric_dist_to_bd(&VectorSignal::zeros(4, 3)), 1.0);
    }

    #[test]
    fn accuracy_and_mask() {
        let truth = VectorSignal::new(array![[1.0, -1.0], [1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap();
        let got = VectorSignal::new(array![[1.0, -1.0], [1.0, -1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap();
        assert_eq!(pixel_accuracy(&got, &truth).unwrap(), 0.75);
        let mask = error_mask(&got, &truth).unwrap();
        assert_eq!(mask.data(), &array![[-1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0], [-1.0, -1.0]]);
        // One 2x2 module: majority vote per channel, channel 1 has a 1:3 vote for −1.
        let modules = Array3::from_shape_vec((1, 1, 2), vec![1.0, -1.0]).unwrap();
        assert_eq!(module_accuracy(&got, &modules, 2).unwrap(), 1.0);
        let modules = Array3::from_shape_vec((1, 1, 2), vec![-1.0, -1.0]).unwrap();
        assert_eq!(module_accuracy(&got, &modules, 2).unwrap(), 0.0);
    }

    #[test]
    fn report_round_trip() {
        let report = MetricsReport {
            model: "binary-tv".into(),
            lambda: 1.2,
            rho: 0.1,
            mse: Some(0.012345678901234),
            dist_to_bd: Some(3.2e-6),
            pixel_accuracy: Some(0.996),
            runtime_seconds: 12.5,
            iterations: 158,
            converged: true,
            primal_residual: 3e-13,
            dual_residual: 0.0,
            ..Default::default()
        };
        let text = report.to_key_values().encode();
        let back = MetricsReport::from_key_values(&KeyValues::decode(&text).unwrap()).unwrap();
        assert_eq!(back, report);
        assert!(back.validate().is_ok());
        let bad = MetricsReport { pixel_accuracy: Some(1.5), ..report };
        assert!(bad.validate().is_err());
    }
}
