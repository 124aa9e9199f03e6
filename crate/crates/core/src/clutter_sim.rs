//! Synthetic clutter with known ground truth.
//!
//! Every scenario draws from a single ChaCha8 stream seeded by `rng_seed`,
//! so a scenario reproduces bit for bit on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::Density;
use crate::kernels::KernelSpec;
use crate::samples_io::{CellLabel, Dataset, SampleSet};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ClutterFamily {
    /// Amplitude of a complex Gaussian with per-component deviation `sigma`.
    Rayleigh {
        sigma: f64,
    },
    Weibull {
        scale: f64,
        shape: f64,
    },
    /// Rayleigh speckle modulated by a unit-mean Gamma texture of shape
    /// `shape`: `x = scale · √(τ E)` with `τ ~ Gamma(shape, rate = shape)` and
    /// `E ~ Exp(1)`. `scale` is the RMS amplitude.
    #[serde(rename = "kcompound")]
    KCompound {
        shape: f64,
        scale: f64,
    },
}

impl ClutterFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match *self {
            ClutterFamily::Rayleigh { sigma } => ok("sigma", sigma),
            ClutterFamily::Weibull { scale, shape } => ok("scale", scale).and(ok("shape", shape)),
            ClutterFamily::KCompound { shape, scale } => ok("shape", shape).and(ok("scale", scale)),
        }
    }

    pub fn mean(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            ClutterFamily::Rayleigh { sigma } => sigma * (PI / 2.0).sqrt(),
            ClutterFamily::Weibull { scale, shape } => scale * crate::special::gamma(1.0 + 1.0 / shape),
            ClutterFamily::KCompound { shape, scale } => {
                let texture = (ln_gamma(shape + 0.5) - ln_gamma(shape)).exp() / shape.sqrt();
                scale * texture * PI.sqrt() / 2.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterScenario {
    pub clutter: ClutterFamily,
    pub target_amplitude: f64,
    /// Probability that a primary-cell sample carries the target.
    pub target_fraction: f64,
    pub n_cells: usize,
    pub samples_per_cell: usize,
    pub rng_seed: u64,
}

impl ClutterScenario {
    pub fn validate(&self) -> Result<()> {
        self.clutter.validate()?;
        if !(self.target_amplitude.is_finite() && self.target_amplitude >= 0.0) {
            return Err(Error::Domain(format!(
                "target_amplitude must be finite and >= 0, got {}",
                self.target_amplitude
            )));
        }
        if !(0.0..1.0).contains(&self.target_fraction) {
            return Err(Error::Domain(format!(
                "target_fraction must lie in [0, 1), got {}",
                self.target_fraction
            )));
        }
        if self.n_cells == 0 || self.samples_per_cell == 0 {
            return Err(Error::Domain("n_cells and samples_per_cell must be >= 1".into()));
        }
        Ok(())
    }

    /// Index of the primary cell, if the scenario has one.
    pub fn primary_index(&self) -> Option<usize> {
        (self.target_fraction > 0.0).then_some(self.n_cells / 2)
    }
}

enum Sampler {
    Rayleigh(f64),
    Weibull(Weibull<f64>),
    KCompound(Gamma<f64>, f64),
}

impl Sampler {
    fn new(f: &ClutterFamily) -> Result<Self> {
        let bad = |e: &dyn std::fmt::Display| Error::Domain(e.to_string());
        Ok(match *f {
            ClutterFamily::Rayleigh { sigma } => Sampler::Rayleigh(sigma),
            ClutterFamily::Weibull { scale, shape } => {
                Sampler::Weibull(Weibull::new(scale, shape).map_err(|e| bad(&e))?)
            }
            ClutterFamily::KCompound { shape, scale } => {
                Sampler::KCompound(Gamma::new(shape, 1.0 / shape).map_err(|e| bad(&e))?, scale)
            }
        })
    }

    fn clutter(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Rayleigh(sigma) => {
                let (a, b) = normal_pair(rng);
                sigma * a.hypot(b)
            }
            Sampler::Weibull(w) => w.sample(rng),
            Sampler::KCompound(texture, scale) => {
                let tau = texture.sample(rng);
                let e: f64 = Exp1.sample(rng);
                scale * (tau * e).sqrt()
            }
        }
    }

    /// A primary-cell sample. Rayleigh clutter adds the target coherently
    /// (Rician amplitude with a uniform phase); the others add amplitudes.
    fn with_target(&self, rng: &mut ChaCha8Rng, amplitude: f64, present: bool) -> f64 {
        match self {
            Sampler::Rayleigh(sigma) => {
                let (a, b) = normal_pair(rng);
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                let a_t = if present { amplitude } else { 0.0 };
                (sigma * a + a_t * phase.cos()).hypot(sigma * b + a_t * phase.sin())
            }
            _ => self.clutter(rng) + if present { amplitude } else { 0.0 },
        }
    }
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Generates the scenario's cells. The primary cell (if any) sits at index
/// `n_cells / 2`; all other cells are clutter-only.
pub fn generate(s: &ClutterScenario) -> Result<Dataset> {
    s.validate()?;
    let sampler = Sampler::new(&s.clutter)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.rng_seed);
    let primary = s.primary_index();
    let source = format!("synthetic:{}:seed={}", family_tag(&s.clutter), s.rng_seed);
    let mut cells = Vec::with_capacity(s.n_cells);
    for cell in 0..s.n_cells {
        let is_primary = primary == Some(cell);
        let amps: Vec<f64> = (0..s.samples_per_cell)
            .map(|_| {
                if is_primary {
                    let present = rng.random::<f64>() < s.target_fraction;
                    sampler.with_target(&mut rng, s.target_amplitude, present)
                } else {
                    sampler.clutter(&mut rng)
                }
            })
            .collect();
        let label = if is_primary {
            CellLabel::Primary
        } else {
            CellLabel::ClutterOnly
        };
        cells.push(SampleSet::new(cell as u64, label, amps, source.clone())?);
    }
    Dataset::new(format!("synthetic-{}", family_tag(&s.clutter)), cells)
}

fn family_tag(f: &ClutterFamily) -> &'static str {
    match f {
        ClutterFamily::Rayleigh { .. } => "rayleigh",
        ClutterFamily::Weibull { .. } => "weibull",
        ClutterFamily::KCompound { .. } => "kcompound",
    }
}

const TEXTURE_NODES: usize = 4001;

/// The clutter amplitude law of a family, as a [`Density`].
///
/// The K-compound law is evaluated by a fixed Simpson rule over the log
/// texture, `p(x) = ∫ Rayleigh(x; τ) Gamma(τ) dτ`. The node set is the same
/// for every `x`, so the CCDF is exactly non-increasing.
#[derive(Debug, Clone)]
pub struct ClutterDistribution {
    family: ClutterFamily,
    // (weight, 1/(scale² τ)) per texture node
    nodes: Vec<(f64, f64)>,
}

impl ClutterDistribution {
    pub fn new(family: ClutterFamily) -> Result<Self> {
        family.validate()?;
        let nodes = match family {
            ClutterFamily::KCompound { shape, scale } => texture_nodes(shape, scale),
            _ => Vec::new(),
        };
        Ok(ClutterDistribution { family, nodes })
    }

    pub fn family(&self) -> ClutterFamily {
        self.family
    }
}

fn texture_nodes(nu: f64, scale: f64) -> Vec<(f64, f64)> {
    let ln_norm = nu * nu.ln() - ln_gamma(nu);
    // log-density of u = ln τ is ln_norm + ν u - ν e^u
    let u_lo = ((1e-17f64).ln() - ln_norm) / nu;
    let u_hi = ((nu + 50.0 + 10.0 * nu.sqrt()) / nu).ln();
    let m = TEXTURE_NODES;
    let du = (u_hi - u_lo) / (m - 1) as f64;
    (0..m)
        .map(|j| {
            let u = u_lo + j as f64 * du;
            let simpson = if j == 0 || j == m - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let w = simpson * du / 3.0 * (ln_norm + nu * u - nu * u.exp()).exp();
            (w, 1.0 / (scale * scale * u.exp()))
        })
        .collect()
}

impl Density for ClutterDistribution {
    fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("PDF at non-finite x = {x}")));
        }
        if x < 0.0 {
            return Ok(0.0);
        }
        Ok(match self.family {
            ClutterFamily::Rayleigh { sigma } => x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp(),
            ClutterFamily::Weibull { scale, shape } => KernelSpec::Weibull { c: scale, s: shape }.pdf(x)?,
            ClutterFamily::KCompound { .. } => {
                let x2 = x * x;
                self.nodes.iter().map(|&(w, k)| w * 2.0 * x * k * (-x2 * k).exp()).sum()
            }
        })
    }

    fn ccdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("CCDF at non-finite x = {x}")));
        }
        if x <= 0.0 {
            return Ok(1.0);
        }
        Ok(match self.family {
            ClutterFamily::Rayleigh { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            ClutterFamily::Weibull { scale, shape } => (-(x / scale).powf(shape)).exp(),
            ClutterFamily::KCompound { .. } => {
                let x2 = x * x;
                self.nodes
                    .iter()
                    .map(|&(w, k)| w * (-x2 * k).exp())
                    .sum::<f64>()
                    .clamp(0.0, 1.0)
            }
        })
    }

    fn support(&self) -> (f64, f64) {
        let hi = match self.family {
            ClutterFamily::Rayleigh { sigma } => sigma * 1500f64.sqrt(),
            ClutterFamily::Weibull { scale, shape } => scale * 700f64.powf(1.0 / shape),
            ClutterFamily::KCompound { shape, scale } => {
                let tau_hi = (shape + 50.0 + 10.0 * shape.sqrt()) / shape;
                scale * (tau_hi * 700.0).sqrt()
            }
        };
        (0.0, hi)
    }

    fn tail_floor(&self) -> f64 {
        match self.family {
            ClutterFamily::KCompound { .. } => 1e-15,
            _ => f64::MIN_POSITIVE,
        }
    }

    fn name(&self) -> String {
        format!("true-{}", family_tag(&self.family))
    }
}

/// The analytic clutter PDF of a scenario; 0 for `x < 0`.
pub fn true_pdf(s: &ClutterScenario, x: f64) -> Result<f64> {
    ClutterDistribution::new(s.clutter)?.pdf(x)
}
