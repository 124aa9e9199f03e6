//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bandwidth::{BandwidthProblem, BandwidthResult, UpdateRule};
use crate::clutter_sim::{generate, ClutterFamily, ClutterScenario};
use crate::error::{Error, Result};
use crate::kde::DensityModel;
use crate::kernels::{KernelFamily, KernelSpec, MomentConvention};
use crate::parametric::HistogramDensity;
use crate::pipeline::{
    ccdf_csv, detection_csv, fit_models, fit_reports_csv, kernel_for, pdf_table_csv, run_experiment, split,
    ExperimentConfig, KernelParamSource,
};
use crate::samples_io::{normalize_dataset, Dataset, Normalization};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Parse { .. } | Error::Schema(_) | Error::DegenerateData(_) | Error::Io { .. } => EXIT_DATA,
        Error::DegenerateMap { .. } | Error::Diverged { .. } => EXIT_NOT_CONVERGED,
        Error::Domain(_)
        | Error::Singularity { .. }
        | Error::Numerical(_)
        | Error::TailResolution { .. }
        | Error::Fit(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "clutter-kde",
    version,
    about = "Kernel density modeling of sea-clutter amplitudes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic clutter dataset as amplitude CSV.
    Simulate(SimulateArgs),
    /// Solve the fixed-point bandwidth for one or all kernels.
    Bandwidth(BandwidthArgs),
    /// Fit parametric and KDE models; write the fit report and PDF table.
    Fit(FitArgs),
    /// Write CCDF curves of every model.
    Evaluate(EvaluateArgs),
    /// Run the CFAR detector for every model over a Pfa grid.
    Detect(DetectArgs),
    /// Everything above on one dataset, into one output directory.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Rayleigh,
    Weibull,
    Kcompound,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML); replaces all scenario flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rayleigh")]
    pub family: FamilyArg,
    /// Rayleigh per-component deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Weibull or K-compound shape.
    #[arg(long, default_value_t = 1.0)]
    pub shape: f64,
    /// Weibull scale, or K-compound RMS amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.0)]
    pub target_amplitude: f64,
    /// Probability that a primary-cell sample carries the target; 0 disables the primary cell.
    #[arg(long, default_value_t = 0.0)]
    pub target_fraction: f64,
    #[arg(long, default_value_t = 14)]
    pub cells: usize,
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizeArg {
    MaxAbs,
    Rms,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Gamma,
    Weibull,
    All,
}

impl KernelArg {
    fn families(self) -> Vec<KernelFamily> {
        match self {
            KernelArg::Gaussian => vec![KernelFamily::Gaussian],
            KernelArg::Gamma => vec![KernelFamily::Gamma],
            KernelArg::Weibull => vec![KernelFamily::Weibull],
            KernelArg::All => KernelFamily::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Amplitude CSV with header `cell_id,label,amplitude`.
    #[arg(long)]
    pub data: PathBuf,
    /// Common rescaling, from the pooled clutter-only cells.
    #[arg(long, value_enum, env = "CLUTTER_KDE_NORMALIZE", default_value = "max-abs")]
    pub normalize: NormalizeArg,
    /// Experiment config (TOML); the flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Leading clutter-only samples used for training [default: 2048].
    #[arg(long)]
    pub training_samples: Option<usize>,
    /// Histogram bins for parametric fits [default: 128].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Kernel parameters: `reference` (fixed table) or `fitted` (per-family fit) [default: fitted].
    #[arg(long)]
    pub kernel_params: Option<String>,
    #[arg(long, value_enum, default_value = "all")]
    pub kernel: KernelArg,
    /// Initial bandwidth [default: 0.1].
    #[arg(long)]
    pub h0: Option<f64>,
    /// Relative stopping tolerance, in (0, 1) [default: 0.001].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap [default: 50].
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Update map: `closed-form` or `direct` [default: closed-form].
    #[arg(long)]
    pub update: Option<String>,
    /// Gamma second moment: `literal` or `dimensionally-corrected` [default: literal].
    #[arg(long)]
    pub moment: Option<String>,
    /// Minimum quadrature grid size [default: 8192].
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl DataArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_toml(&read(p)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.training_samples {
            cfg.training_samples = v;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        if let Some(v) = &self.kernel_params {
            cfg.kernel_params = v.parse::<KernelParamSource>()?;
        }
        if let Some(v) = self.h0 {
            cfg.fixed_point.h0 = v;
        }
        if let Some(v) = self.tol {
            cfg.fixed_point.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.fixed_point.max_iter = v;
        }
        if let Some(v) = &self.update {
            cfg.fixed_point.update = match v.as_str() {
                "closed-form" => UpdateRule::ClosedForm,
                "direct" => UpdateRule::Direct,
                other => return Err(Error::Config(format!("unknown update rule `{other}`"))),
            };
        }
        if let Some(v) = &self.moment {
            cfg.moment_convention = match v.as_str() {
                "literal" => MomentConvention::Literal,
                "dimensionally-corrected" => MomentConvention::DimensionallyCorrected,
                other => return Err(Error::Config(format!("unknown moment convention `{other}`"))),
            };
        }
        if let Some(v) = self.grid_points {
            cfg.quadrature.grid_points = v;
            cfg.quadrature.max_grid_points = cfg.quadrature.max_grid_points.max(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn dataset(&self) -> Result<Dataset> {
        let data = Dataset::load_csv(&self.data)?;
        match self.normalize {
            NormalizeArg::MaxAbs => normalize_dataset(&data, Normalization::MaxAbs),
            NormalizeArg::Rms => normalize_dataset(&data, Normalization::RootMeanSquare),
            NormalizeArg::None => Ok(data),
        }
    }
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Results as JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Iteration traces as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fit report CSV: `model,pdf_mse,ccdf_max_abs_gap`.
    #[arg(long)]
    pub out: PathBuf,
    /// PDF table CSV: histogram and every model at the bin centers.
    #[arg(long)]
    pub pdf_table: Option<PathBuf>,
    /// Fitted models as JSON.
    #[arg(long)]
    pub models: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// CCDF CSV: `model,x,ccdf`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated false-alarm rates, ascending [default: 0.001,0.01,0.1].
    #[arg(long, value_delimiter = ',')]
    pub pfa: Option<Vec<f64>>,
    /// Detection CSV: `model,pfa_target,pfa_empirical,pd_empirical,threshold,T`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Directory for bandwidth.json, models.json, fit_report.csv,
    /// pdf_table.csv, ccdf.csv and detection.csv. Must exist.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::io(p, e))
}

fn write(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).map_err(|e| Error::io(p, e))?;
    log::info!("wrote {}", p.display());
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable report") + "\n"
}

#[derive(Debug, Serialize)]
pub struct BandwidthReport {
    pub kernel: KernelSpec,
    pub n: usize,
    pub result: Option<BandwidthResult>,
    pub error: Option<String>,
}

fn bandwidth_reports(
    data: &Dataset,
    families: &[KernelFamily],
    cfg: &ExperimentConfig,
) -> Result<Vec<BandwidthReport>> {
    let s = split(data, cfg.training_samples)?;
    families
        .iter()
        .map(|&f| {
            let kernel = kernel_for(f, &s.training, cfg)?;
            let problem = BandwidthProblem::new(kernel, &s.training)
                .with_quadrature(cfg.quadrature)
                .with_convention(cfg.moment_convention);
            let (result, error) = match problem.solve(&cfg.fixed_point) {
                Ok(r) => (Some(r), None),
                Err(e @ (Error::DegenerateMap { .. } | Error::Diverged { .. })) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            Ok(BandwidthReport {
                kernel,
                n: s.training.len(),
                result,
                error,
            })
        })
        .collect()
}

fn all_converged(reports: &[BandwidthReport]) -> bool {
    reports.iter().all(|r| r.result.as_ref().is_some_and(|b| b.converged))
}

fn traces(reports: &[BandwidthReport]) -> String {
    reports
        .iter()
        .filter_map(|r| r.result.as_ref())
        .map(|r| r.trace_json_lines())
        .collect()
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate(a) => {
            let scenario = match &a.config {
                Some(p) => toml::from_str::<ClutterScenario>(&read(p)?).map_err(|e| Error::Config(e.to_string()))?,
                None => ClutterScenario {
                    clutter: match a.family {
                        FamilyArg::Rayleigh => ClutterFamily::Rayleigh { sigma: a.sigma },
                        FamilyArg::Weibull => ClutterFamily::Weibull {
                            scale: a.scale,
                            shape: a.shape,
                        },
                        FamilyArg::Kcompound => ClutterFamily::KCompound {
                            shape: a.shape,
                            scale: a.scale,
                        },
                    },
                    target_amplitude: a.target_amplitude,
                    target_fraction: a.target_fraction,
                    n_cells: a.cells,
                    samples_per_cell: a.samples,
                    rng_seed: a.seed,
                },
            };
            scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
            generate(&scenario)?.save_csv(&a.out)?;
            Ok(EXIT_OK)
        }
        Command::Bandwidth(a) => {
            let cfg = a.data.config()?;
            let data = a.data.dataset()?;
            let reports = bandwidth_reports(&data, &a.data.kernel.families(), &cfg)?;
            write(&a.out, &to_json(&reports))?;
            if let Some(p) = &a.trace {
                write(p, &traces(&reports))?;
            }
            Ok(if all_converged(&reports) {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Fit(a) => {
            let cfg = a.data.config()?;
            let data = a.data.dataset()?;
            let s = split(&data, cfg.training_samples)?;
            let models = fit_models(&s.training, &a.data.kernel.families(), &cfg)?;
            let all: Vec<DensityModel> = models.all();
            let hist = HistogramDensity::empirical_pdf(&s.training, cfg.bins)?;
            let reports = all
                .iter()
                .map(|m| crate::metrics::fit_report(m, &hist, &s.training))
                .collect::<Result<Vec<_>>>()?;
            write(&a.out, &fit_reports_csv(&reports))?;
            if let Some(p) = &a.pdf_table {
                write(p, &pdf_table_csv(&all, &hist)?)?;
            }
            if let Some(p) = &a.models {
                write(p, &to_json(&models))?;
            }
            Ok(EXIT_OK)
        }
        Command::Evaluate(a) => {
            let cfg = a.data.config()?;
            let data = a.data.dataset()?;
            let out = run_experiment(&data, &a.data.kernel.families(), &cfg)?;
            write(&a.out, &ccdf_csv(&out.ccdf))?;
            Ok(EXIT_OK)
        }
        Command::Detect(a) => {
            let mut cfg = a.data.config()?;
            if let Some(p) = &a.pfa {
                cfg.pfa_grid = p.clone();
                cfg.validate()?;
            }
            let data = a.data.dataset()?;
            if data.primary().is_none() {
                return Err(Error::Schema("detection needs a primary cell".into()));
            }
            let out = run_experiment(&data, &a.data.kernel.families(), &cfg)?;
            if out.detection.is_empty() {
                return Err(Error::DegenerateData(
                    "no held-out clutter beyond the training samples".into(),
                ));
            }
            write(&a.out, &detection_csv(&out.detection))?;
            Ok(EXIT_OK)
        }
        Command::Run(a) => {
            let cfg = a.data.config()?;
            let data = a.data.dataset()?;
            let families = a.data.kernel.families();
            let dir = &a.out_dir;
            let reports = bandwidth_reports(&data, &families, &cfg)?;
            write(&dir.join("bandwidth.json"), &to_json(&reports))?;
            write(&dir.join("bandwidth_trace.jsonl"), &traces(&reports))?;
            let out = run_experiment(&data, &families, &cfg)?;
            let s = split(&data, cfg.training_samples)?;
            let hist = HistogramDensity::empirical_pdf(&s.training, cfg.bins)?;
            write(&dir.join("models.json"), &to_json(&out.models))?;
            write(&dir.join("fit_report.csv"), &fit_reports_csv(&out.fit_reports))?;
            write(&dir.join("pdf_table.csv"), &pdf_table_csv(&out.models.all(), &hist)?)?;
            write(&dir.join("ccdf.csv"), &ccdf_csv(&out.ccdf))?;
            if !out.detection.is_empty() {
                write(&dir.join("detection.csv"), &detection_csv(&out.detection))?;
            }
            Ok(if all_converged(&reports) {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            })
        }
    }
}
