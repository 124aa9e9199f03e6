//! End-to-end experiment: split a dataset, fit parametric baselines and
//! optimal-bandwidth KDEs on the training clutter, then score them.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bandwidth::{BandwidthProblem, BandwidthResult, BruteForce, FixedPointConfig, QuadratureConfig};
use crate::cfar::{evaluate, DetectionReport};
use crate::error::{Error, Result};
use crate::kde::{Density, DensityModel, KdeModel};
use crate::kernels::{KernelFamily, KernelSpec, MomentConvention};
use crate::metrics::{ccdf_curve, fit_report, FitReport};
use crate::parametric::{fit_parametric, FitConfig, HistogramDensity, ParametricModel};
use crate::quadrature::{linspace, logspace};
use crate::samples_io::Dataset;

/// Where KDE kernel parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelParamSource {
    /// The fixed table in [`ExperimentConfig::kernels`].
    Reference,
    /// The parametric fit of the same family to the training histogram.
    #[default]
    Fitted,
}

impl FromStr for KernelParamSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(KernelParamSource::Reference),
            "fitted" => Ok(KernelParamSource::Fitted),
            other => Err(Error::Config(format!("unknown kernel parameter source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub gaussian: KernelSpec,
    pub gamma: KernelSpec,
    pub weibull: KernelSpec,
}

impl Default for KernelTable {
    fn default() -> Self {
        KernelTable {
            gaussian: KernelSpec::reference(KernelFamily::Gaussian),
            gamma: KernelSpec::reference(KernelFamily::Gamma),
            weibull: KernelSpec::reference(KernelFamily::Weibull),
        }
    }
}

impl KernelTable {
    pub fn get(&self, family: KernelFamily) -> KernelSpec {
        match family {
            KernelFamily::Gaussian => self.gaussian,
            KernelFamily::Gamma => self.gamma,
            KernelFamily::Weibull => self.weibull,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for f in KernelFamily::ALL {
            let k = self.get(f);
            if k.family() != f {
                return Err(Error::Config(format!("kernels.{f} holds a {} kernel", k.family())));
            }
            k.validate()?;
        }
        Ok(())
    }
}

/// Log-spaced bandwidth grid for the AMISE grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandwidthGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for BandwidthGrid {
    fn default() -> Self {
        BandwidthGrid {
            lo: 1e-3,
            hi: 1.0,
            points: 200,
        }
    }
}

impl BandwidthGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.points >= 1) {
            return Err(Error::Config(format!("invalid bandwidth grid {self:?}")));
        }
        Ok(logspace(self.lo, self.hi, self.points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Leading clutter-only samples used for training; the rest are held out.
    pub training_samples: usize,
    pub bins: usize,
    pub kernel_params: KernelParamSource,
    pub kernels: KernelTable,
    pub moment_convention: MomentConvention,
    pub fixed_point: FixedPointConfig,
    pub quadrature: QuadratureConfig,
    /// Searched when the fixed-point iteration fails to converge.
    pub fallback_grid: BandwidthGrid,
    pub fit: FitConfig,
    pub pfa_grid: Vec<f64>,
    pub ccdf_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            training_samples: 2048,
            bins: 128,
            kernel_params: KernelParamSource::Fitted,
            kernels: KernelTable::default(),
            moment_convention: MomentConvention::Literal,
            fixed_point: FixedPointConfig::default(),
            quadrature: QuadratureConfig::default(),
            fallback_grid: BandwidthGrid::default(),
            fit: FitConfig::default(),
            pfa_grid: vec![1e-3, 1e-2, 1e-1],
            ccdf_points: 256,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.training_samples < 2 {
            return Err(Error::Config("training_samples must be >= 2".into()));
        }
        if self.bins < 2 {
            return Err(Error::Config("bins must be >= 2".into()));
        }
        if self.ccdf_points < 2 {
            return Err(Error::Config("ccdf_points must be >= 2".into()));
        }
        if self.pfa_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || self.pfa_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("pfa_grid must be ascending within (0, 1)".into()));
        }
        self.kernels.validate()?;
        self.fixed_point.validate()?;
        self.quadrature.validate()?;
        self.fallback_grid.values()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Training, held-out and target amplitudes drawn from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub training: Vec<f64>,
    pub held_out: Vec<f64>,
    pub primary: Vec<f64>,
}

/// The first `training_samples` clutter-only amplitudes (in cell order)
/// train; the remaining clutter is held out.
pub fn split(data: &Dataset, training_samples: usize) -> Result<Split> {
    let clutter = data.clutter_amplitudes();
    if clutter.len() < training_samples {
        return Err(Error::DegenerateData(format!(
            "{} clutter samples, {training_samples} needed for training",
            clutter.len()
        )));
    }
    let (training, held_out) = clutter.split_at(training_samples);
    Ok(Split {
        training: training.to_vec(),
        held_out: held_out.to_vec(),
        primary: data.primary().map(|c| c.amplitudes.clone()).unwrap_or_default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthSource {
    FixedPoint,
    GridSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeFit {
    pub model: KdeModel,
    pub source: BandwidthSource,
    /// The fixed-point run, if it completed without error.
    pub fixed_point: Option<BandwidthResult>,
    /// Why the fixed point was not used, if it was not.
    pub fallback_reason: Option<String>,
    pub grid_search: Option<BruteForce>,
}

/// KDE at the fixed-point bandwidth, or at the AMISE grid minimizer when
/// the iteration does not converge.
pub fn optimal_kde(kernel: KernelSpec, training: &[f64], cfg: &ExperimentConfig) -> Result<KdeFit> {
    let problem = BandwidthProblem::new(kernel, training)
        .with_quadrature(cfg.quadrature)
        .with_convention(cfg.moment_convention);
    let (fixed_point, reason) = match problem.solve(&cfg.fixed_point) {
        Ok(r) if r.converged => {
            let model = KdeModel::new(kernel, r.h_opt, training.to_vec())?;
            return Ok(KdeFit {
                model,
                source: BandwidthSource::FixedPoint,
                fixed_point: Some(r),
                fallback_reason: None,
                grid_search: None,
            });
        }
        Ok(r) => {
            let reason = format!("no convergence in {} iterations", r.iterations.len());
            (Some(r), reason)
        }
        Err(e @ (Error::DegenerateMap { .. } | Error::Diverged { .. })) => (None, e.to_string()),
        Err(e) => return Err(e),
    };
    log::warn!("{kernel}: fixed point unusable ({reason}); using the AMISE grid minimizer");
    let grid = problem.brute_force(&cfg.fallback_grid.values()?)?;
    let model = KdeModel::new(kernel, grid.h_opt, training.to_vec())?;
    Ok(KdeFit {
        model,
        source: BandwidthSource::GridSearch,
        fixed_point,
        fallback_reason: Some(reason),
        grid_search: Some(grid),
    })
}

/// Kernel parameters for `family` under the configured source.
pub fn kernel_for(family: KernelFamily, training: &[f64], cfg: &ExperimentConfig) -> Result<KernelSpec> {
    match cfg.kernel_params {
        KernelParamSource::Reference => Ok(cfg.kernels.get(family)),
        KernelParamSource::Fitted => {
            let hist = HistogramDensity::empirical_pdf(training, cfg.bins)?;
            Ok(fit_parametric(family, &hist, &cfg.fit)?.spec)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Models {
    pub parametric: Vec<ParametricModel>,
    pub kdes: Vec<KdeFit>,
}

impl Models {
    /// Parametric models first, then KDEs, each in family order.
    pub fn all(&self) -> Vec<DensityModel> {
        self.parametric
            .iter()
            .map(|m| DensityModel::Parametric(*m))
            .chain(self.kdes.iter().map(|k| DensityModel::Kde(k.model.clone())))
            .collect()
    }
}

pub fn fit_models(training: &[f64], families: &[KernelFamily], cfg: &ExperimentConfig) -> Result<Models> {
    cfg.validate()?;
    let hist = HistogramDensity::empirical_pdf(training, cfg.bins)?;
    let parametric = families
        .iter()
        .map(|&f| fit_parametric(f, &hist, &cfg.fit))
        .collect::<Result<Vec<_>>>()?;
    let kdes = families
        .iter()
        .zip(&parametric)
        .map(|(&f, p)| {
            let kernel = match cfg.kernel_params {
                KernelParamSource::Reference => cfg.kernels.get(f),
                KernelParamSource::Fitted => p.spec,
            };
            optimal_kde(kernel, training, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Models { parametric, kdes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub models: Models,
    pub fit_reports: Vec<FitReport>,
    pub ccdf_grid: Vec<f64>,
    pub ccdf: Vec<(String, Vec<(f64, f64)>)>,
    pub detection: Vec<(String, Vec<DetectionReport>)>,
}

/// Fits every model on the training split and produces fit, CCDF and
/// detection data. Detection is skipped when the dataset has no primary
/// cell or no held-out clutter.
pub fn run_experiment(data: &Dataset, families: &[KernelFamily], cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = split(data, cfg.training_samples)?;
    let models = fit_models(&s.training, families, cfg)?;
    let hist = HistogramDensity::empirical_pdf(&s.training, cfg.bins)?;
    let max = s.training.iter().copied().fold(0.0, f64::max);
    let ccdf_grid = linspace(0.0, max, cfg.ccdf_points);
    let mut fit_reports = Vec::new();
    let mut ccdf = Vec::new();
    let mut detection = Vec::new();
    for m in models.all() {
        fit_reports.push(fit_report(&m, &hist, &s.training)?);
        ccdf.push((m.name(), ccdf_curve(&m, &ccdf_grid)?));
        if !s.primary.is_empty() && !s.held_out.is_empty() {
            detection.push((
                m.name(),
                evaluate(&m, &s.training, &s.held_out, &s.primary, &cfg.pfa_grid)?,
            ));
        }
    }
    Ok(ExperimentOutput {
        models,
        fit_reports,
        ccdf_grid,
        ccdf,
        detection,
    })
}

pub fn fit_reports_csv(reports: &[FitReport]) -> String {
    let mut out = String::from("model,pdf_mse,ccdf_max_abs_gap\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{}", r.model_name, r.pdf_mse, r.ccdf_max_abs_gap);
    }
    out
}

/// Long format: one row per model and abscissa.
pub fn ccdf_csv(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::from("model,x,ccdf\n");
    for (name, curve) in curves {
        for (x, c) in curve {
            let _ = writeln!(out, "{name},{x},{c}");
        }
    }
    out
}

/// Detection reports prefixed by a `model` column.
pub fn detection_csv(rows: &[(String, Vec<DetectionReport>)]) -> String {
    let mut out = String::from("model,pfa_target,pfa_empirical,pd_empirical,threshold,T\n");
    for (name, reports) in rows {
        for r in reports {
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{}",
                r.pfa_target, r.pfa_empirical, r.pd_empirical, r.threshold, r.t_factor
            );
        }
    }
    out
}

/// Tabulated PDFs of every model at the histogram bin centers, next to the
/// histogram itself.
pub fn pdf_table_csv(models: &[DensityModel], hist: &HistogramDensity) -> Result<String> {
    let mut out = String::from("x,histogram");
    for m in models {
        let _ = write!(out, ",{}", m.name());
    }
    out.push('\n');
    for (x, d) in hist.centers().into_iter().zip(&hist.densities) {
        let _ = write!(out, "{x},{d}");
        for m in models {
            let _ = write!(out, ",{}", m.pdf(x)?);
        }
        out.push('\n');
    }
    Ok(out)
}
