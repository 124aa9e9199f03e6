//! Parametric baselines: Gaussian, Gamma and Weibull densities fitted to an
//! empirical histogram by minimizing the mean squared PDF error at the bin
//! centers.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::Density;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::special::gamma;

/// A piecewise-constant density on `[edges[0], edges[last]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramDensity {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub count: usize,
}

impl HistogramDensity {
    /// Unit-mass histogram of `samples` with `bins` equal bins over `[0, max]`.
    pub fn empirical_pdf(samples: &[f64], bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
        }
        if samples.is_empty() {
            return Err(Error::DegenerateData("histogram of an empty sample".into()));
        }
        if let Some(x) = samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::DegenerateData(format!("amplitude {x} is not finite and >= 0")));
        }
        let first = samples[0];
        if samples.iter().all(|&x| x == first) {
            return Err(Error::DegenerateData(format!(
                "all {} samples equal {first}",
                samples.len()
            )));
        }
        let max = samples.iter().copied().fold(0.0f64, f64::max);
        let width = max / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { max } else { i as f64 * width })
            .collect();
        let mut counts = vec![0usize; bins];
        for &x in samples {
            let i = ((x / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        let n = samples.len() as f64;
        let densities = counts
            .iter()
            .zip(edges.windows(2))
            .map(|(&c, e)| c as f64 / (n * (e[1] - e[0])))
            .collect();
        Ok(HistogramDensity {
            edges,
            densities,
            count: samples.len(),
        })
    }

    pub fn from_values(edges: Vec<f64>, densities: Vec<f64>, count: usize) -> Result<Self> {
        if edges.len() < 2 || densities.len() + 1 != edges.len() {
            return Err(Error::Domain(format!(
                "{} edges do not bound {} bins",
                edges.len(),
                densities.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("histogram edges must be strictly increasing".into()));
        }
        if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Domain("histogram densities must be finite and >= 0".into()));
        }
        Ok(HistogramDensity {
            edges,
            densities,
            count,
        })
    }

    /// Exact PDF values of `density` at the centers of `bins` equal bins on `[lo, hi]`.
    pub fn tabulate<D: Density + ?Sized>(density: &D, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let w = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + i as f64 * w })
            .collect();
        let densities = edges
            .windows(2)
            .map(|e| density.pdf(0.5 * (e[0] + e[1])))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(edges, densities, 0)
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    pub fn mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    /// Mass-weighted mean and variance of the bin centers.
    fn moments(&self) -> (f64, f64) {
        let centers = self.centers();
        let weights: Vec<f64> = self
            .densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .collect();
        let total: f64 = weights.iter().sum();
        let mean = centers.iter().zip(&weights).map(|(c, w)| c * w).sum::<f64>() / total;
        let var = centers
            .iter()
            .zip(&weights)
            .map(|(c, w)| (c - mean).powi(2) * w)
            .sum::<f64>()
            / total;
        (mean, var)
    }
}

/// A fitted parametric density; serializes as `{family, params, fit_mse}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricModel {
    #[serde(flatten)]
    pub spec: KernelSpec,
    pub fit_mse: f64,
}

impl Density for ParametricModel {
    fn pdf(&self, x: f64) -> Result<f64> {
        self.spec.pdf(x)
    }

    fn ccdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("CCDF at non-finite x = {x}")));
        }
        Ok(self.spec.sf(x))
    }

    fn support(&self) -> (f64, f64) {
        match self.spec {
            KernelSpec::Gaussian { mu, sigma } => (mu - 40.0 * sigma, mu + 40.0 * sigma),
            KernelSpec::Gamma { alpha, beta } => (0.0, (alpha + 40.0 * alpha.sqrt() + 800.0) / beta),
            KernelSpec::Weibull { c, s } => (0.0, c * 800f64.powf(1.0 / s)),
        }
    }

    fn tail_floor(&self) -> f64 {
        f64::MIN_POSITIVE
    }

    fn name(&self) -> String {
        format!("parametric-{}", self.spec.family())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iters: u64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            restarts: 20,
            max_iters: 2000,
            seed: 0x5eed,
        }
    }
}

/// Mean squared difference between `spec`'s PDF and the histogram at the
/// bin centers.
pub fn histogram_mse(spec: &KernelSpec, target: &HistogramDensity) -> Result<f64> {
    let mut acc = 0.0;
    for (c, d) in target.centers().into_iter().zip(&target.densities) {
        acc += (spec.pdf(c)? - d).powi(2);
    }
    Ok(acc / target.bins() as f64)
}

// Optimizer coordinates: Gaussian (mu, ln sigma); the others take logs of both.
fn to_coords(spec: &KernelSpec) -> Vec<f64> {
    let [a, b] = spec.params();
    match spec.family() {
        KernelFamily::Gaussian => vec![a, b.ln()],
        _ => vec![a.ln(), b.ln()],
    }
}

fn from_coords(family: KernelFamily, p: &[f64]) -> Result<KernelSpec> {
    let params = match family {
        KernelFamily::Gaussian => [p[0], p[1].exp()],
        _ => [p[0].exp(), p[1].exp()],
    };
    KernelSpec::from_params(family, params)
}

const PENALTY: f64 = 1e30;

struct MseCost<'a> {
    family: KernelFamily,
    target: &'a HistogramDensity,
}

impl CostFunction for MseCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let value = from_coords(self.family, p)
            .and_then(|spec| histogram_mse(&spec, self.target))
            .unwrap_or(PENALTY);
        Ok(if value.is_finite() { value } else { PENALTY })
    }
}

/// Moment-matched starting parameters.
fn moment_start(family: KernelFamily, target: &HistogramDensity) -> Result<KernelSpec> {
    let (mean, var) = target.moments();
    if !(mean > 0.0 && var > 0.0) {
        return Err(Error::Fit(format!(
            "histogram moments unusable: mean {mean}, variance {var}"
        )));
    }
    match family {
        KernelFamily::Gaussian => KernelSpec::gaussian(mean, var.sqrt()),
        KernelFamily::Gamma => KernelSpec::gamma(mean * mean / var, mean / var),
        KernelFamily::Weibull => {
            let s = (var.sqrt() / mean).powf(-1.086).clamp(0.2, 50.0);
            KernelSpec::weibull(mean / gamma(1.0 + 1.0 / s), s)
        }
    }
}

fn nelder_mead(cost: MseCost<'_>, start: &[f64], max_iters: u64) -> Result<(Vec<f64>, f64)> {
    let step = 0.1;
    let simplex = vec![
        start.to_vec(),
        vec![start[0] + step, start[1]],
        vec![start[0], start[1] + step],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let res = Executor::new(cost, solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| Error::Fit(e.to_string()))?;
    let state = res.state();
    let best = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::Fit("optimizer produced no parameters".into()))?;
    Ok((best, state.get_best_cost()))
}

/// Multi-start Nelder–Mead fit of one family to `target`.
///
/// The first start is moment-matched; the other `restarts - 1` starts
/// perturb it with standard normal noise of scale 0.5 in optimizer
/// coordinates (ChaCha8 seeded from `cfg.seed`). Each run is polished by a
/// second Nelder–Mead pass. The lowest MSE wins; ties go to the
/// lexicographically smaller parameter vector.
pub fn fit_parametric(family: KernelFamily, target: &HistogramDensity, cfg: &FitConfig) -> Result<ParametricModel> {
    if cfg.restarts == 0 {
        return Err(Error::Config("restarts must be >= 1".into()));
    }
    let start = to_coords(&moment_start(family, target)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(KernelSpec, f64)> = None;
    for r in 0..cfg.restarts {
        let mut p = start.clone();
        if r > 0 {
            let scale = match family {
                KernelFamily::Gaussian => [0.5 * start[1].exp(), 0.5],
                _ => [0.5, 0.5],
            };
            for (x, s) in p.iter_mut().zip(scale) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x += s * z;
            }
        }
        let (p1, _) = nelder_mead(MseCost { family, target }, &p, cfg.max_iters)?;
        let (p2, cost) = nelder_mead(MseCost { family, target }, &p1, cfg.max_iters)?;
        if cost >= PENALTY {
            continue;
        }
        let Ok(spec) = from_coords(family, &p2) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((b, bc)) => {
                cost < *bc || (cost == *bc && spec.params().partial_cmp(&b.params()) == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((spec, cost));
        }
    }
    let (spec, _) = best.ok_or_else(|| Error::Fit(format!("every {family} fit ended at invalid parameters")))?;
    let fit_mse = histogram_mse(&spec, target)?;
    Ok(ParametricModel { spec, fit_mse })
}
