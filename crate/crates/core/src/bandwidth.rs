//! AMISE-optimal bandwidths.
//!
//! The plug-in estimate of `R(f'')` is built from the KDE's own second
//! derivative: `R̂(f''; h) = P² Q(h) / (N² h⁶)`, where `P` is the kernel's
//! [`bracket_scale`](KernelSpec::bracket_scale) and
//! `Q(h) = ∫ (Σᵢ B((x - xᵢ)/h))² dx` integrates the squared sum of the
//! per-sample brackets `B`. Substituting it into the closed-form AMISE
//! minimizer `h = [R(K) / (μ₂² R(f'') N)]^(1/5)` gives a fixed-point
//! equation `h = ψ(h)` with `ψ(h) = μ₂² P² Q(h) / (R(K) N)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelConstants, KernelSpec, MomentConvention};
use crate::quadrature::simpson;
use crate::special::ln_gamma;

/// How each iterate is produced from the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateRule {
    /// `h ← [R(K) / (μ₂² N R̂(f''; h))]^(1/5) = (h⁶ / ψ(h))^(1/5)`.
    #[default]
    ClosedForm,
    /// `h ← ψ(h)`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointConfig {
    pub h0: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub update: UpdateRule,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            h0: 0.1,
            tol: 1e-3,
            max_iter: 50,
            update: UpdateRule::ClosedForm,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h0.is_finite() && self.h0 > 0.0) {
            return Err(Error::Config(format!("h0 must be finite and > 0, got {}", self.h0)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Grid used for the `Q(h)` integral.
///
/// The window is `[min(xᵢ) + lo·h, max(xᵢ) + hi·h]` where `(lo, hi)` is the
/// kernel window at `window_spread_multiplier` spreads. The grid has at
/// least `grid_points` nodes and is refined further until one kernel spread
/// at bandwidth `h` spans `min_points_per_spread` nodes, up to
/// `max_grid_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub grid_points: usize,
    pub window_spread_multiplier: f64,
    /// Radius, in units of `h`, of the excluded neighborhood to the right of
    /// each sample for kernels whose curvature has a pole at the origin.
    pub singularity_epsilon: f64,
    pub min_points_per_spread: usize,
    pub max_grid_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            grid_points: 8192,
            window_spread_multiplier: 10.0,
            singularity_epsilon: 1e-6,
            min_points_per_spread: 32,
            max_grid_points: 1 << 22,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Config(format!(
                "grid_points must be >= 3, got {}",
                self.grid_points
            )));
        }
        if !(self.window_spread_multiplier.is_finite() && self.window_spread_multiplier > 0.0) {
            return Err(Error::Config("window_spread_multiplier must be > 0".into()));
        }
        if !(self.singularity_epsilon.is_finite() && self.singularity_epsilon > 0.0) {
            return Err(Error::Config("singularity_epsilon must be > 0".into()));
        }
        if self.max_grid_points < self.grid_points {
            return Err(Error::Config("max_grid_points must be >= grid_points".into()));
        }
        Ok(())
    }
}

/// One step of the fixed-point iteration: `mapped` is the image of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub h: f64,
    pub mapped: f64,
    pub rel_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthResult {
    pub kernel: KernelSpec,
    /// The iterate that passed the stopping test (the value *before* its
    /// update), or the last iterate when the loop ran out.
    pub h_opt: f64,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub update: UpdateRule,
}

impl BandwidthResult {
    /// The trace as JSON lines.
    pub fn trace_json_lines(&self) -> String {
        self.iterations
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain numeric record") + "\n")
            .collect()
    }
}

/// `R(K)/(N h) + ¼ h⁴ μ₂² R(f'')`.
pub fn amise(constants: &KernelConstants, h: f64, n: usize, r_f2: f64) -> f64 {
    let mu2 = constants.second_moment;
    constants.roughness / (n as f64 * h) + 0.25 * h.powi(4) * mu2 * mu2 * r_f2
}

/// `[R(K) / (μ₂² R(f'') N)]^(1/5)`, the minimizer of [`amise`].
pub fn h_amise_closed_form(constants: &KernelConstants, n: usize, r_f2: f64) -> Result<f64> {
    if !(r_f2.is_finite() && r_f2 > 0.0) {
        return Err(Error::Domain(format!("R(f'') must be finite and > 0, got {r_f2}")));
    }
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    let mu2 = constants.second_moment;
    Ok((constants.roughness / (mu2 * mu2 * r_f2 * n as f64)).powf(0.2))
}

/// Rule-of-thumb bandwidth `1.06 σ̂ N^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::DegenerateData("need at least two samples".into()));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::DegenerateData("samples have zero spread".into()));
    }
    Ok(1.06 * var.sqrt() * (n as f64).powf(-0.2))
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    lo: f64,
    dx: f64,
    n: usize,
}

fn layout(k: &KernelSpec, min: f64, max: f64, h: f64, q: &QuadratureConfig) -> Grid {
    let (klo, khi) = k.window(q.window_spread_multiplier);
    let lo = min + klo * h;
    let hi = max + khi * h;
    let width = hi - lo;
    let resolution = k.spread() * h / q.min_points_per_spread.max(1) as f64;
    let needed = (width / resolution).ceil();
    let mut n = if needed.is_finite() && needed < q.max_grid_points as f64 {
        q.grid_points.max(needed as usize + 1)
    } else {
        q.max_grid_points
    };
    n = n.min(q.max_grid_points);
    if n % 2 == 0 {
        n += 1;
    }
    Grid {
        lo,
        dx: width / (n - 1) as f64,
        n,
    }
}

/// `Q(h) = ∫ (Σᵢ B((x - xᵢ)/h))² dx` by composite Simpson on a uniform grid.
///
/// Each sample only touches the grid nodes inside its kernel window, and
/// the sums are accumulated in sample order so the result is reproducible
/// bit for bit. For kernels with a curvature pole at the origin the bracket
/// is set to zero for `0 < z < singularity_epsilon`.
pub fn bracket_integral(k: &KernelSpec, samples: &[f64], h: f64, q: &QuadratureConfig) -> Result<f64> {
    k.validate()?;
    q.validate()?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be finite and > 0, got {h}")));
    }
    if samples.is_empty() {
        return Ok(0.0);
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    let g = layout(k, min, max, h, q);
    let (klo, khi) = k.window(q.window_spread_multiplier);
    let singular = k.has_singular_curvature();
    let eps = q.singularity_epsilon;
    if singular {
        log::debug!(
            "{k}: excluding z in (0, {eps:e}) right of each sample (radius {:e} in x); {}",
            eps * h,
            excluded_mass_note(k, samples.len(), h, eps)
        );
    }

    let mut sum = vec![0.0f64; g.n];
    let last = (g.n - 1) as f64;
    for &xi in samples {
        let a = ((xi + klo * h - g.lo) / g.dx).ceil().clamp(0.0, last) as usize;
        let b = ((xi + khi * h - g.lo) / g.dx).floor().clamp(0.0, last) as usize;
        for (j, s) in sum.iter_mut().enumerate().take(b + 1).skip(a) {
            let z = (g.lo + j as f64 * g.dx - xi) / h;
            if singular && z < eps {
                continue;
            }
            *s += k.bracket(z);
        }
    }
    if let Some(j) = sum.iter().position(|v| !v.is_finite()) {
        let x = g.lo + j as f64 * g.dx;
        let near = samples
            .iter()
            .copied()
            .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()))
            .unwrap_or(x);
        return Err(Error::Numerical(format!(
            "bracket sum is non-finite at x = {x} (nearest sample {near}) for {k}, h = {h}"
        )));
    }
    for v in sum.iter_mut() {
        *v *= *v;
    }
    simpson(&sum, g.dx)
}

/// Leading-order size of what the exclusion removes from one isolated bump.
fn excluded_mass_note(k: &KernelSpec, n: usize, h: f64, eps: f64) -> String {
    let (coef, power) = match *k {
        KernelSpec::Gamma { alpha, .. } => ((alpha - 1.0) * (alpha - 2.0), alpha - 3.0),
        KernelSpec::Weibull { c, s } => ((s - 1.0) * (s - 2.0) * c.powf(3.0 - s), s - 3.0),
        KernelSpec::Gaussian { .. } => return "no pole".into(),
    };
    let p = 2.0 * power + 1.0;
    if p > 0.0 {
        format!(
            "excluded contribution ~ {:e}",
            n as f64 * h * coef * coef * eps.powf(p) / p
        )
    } else {
        format!(
            "squared bracket ~ z^{:.3} is not integrable at 0; the result depends on epsilon",
            2.0 * power
        )
    }
}

/// The family coefficient multiplying `Q(h)` in `ψ(h)`, in closed form.
///
/// With [`MomentConvention::DimensionallyCorrected`] the Gamma coefficient
/// is rebuilt from `μ₂² P² / (R(K) N)` using the corrected second moment.
pub fn psi_coefficient(k: &KernelSpec, n: usize, convention: MomentConvention) -> Result<f64> {
    k.validate()?;
    let nf = n as f64;
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    match (*k, convention) {
        (KernelSpec::Gaussian { mu, sigma }, _) => {
            Ok((sigma * sigma + mu * mu).powi(2) / (std::f64::consts::PI.sqrt() * sigma.powi(5) * nf))
        }
        (KernelSpec::Gamma { alpha, beta }, MomentConvention::Literal) => {
            if 2.0 * alpha - 1.0 <= 0.0 {
                return Err(Error::Domain(format!(
                    "Gamma coefficient needs 2*alpha - 1 > 0, got alpha = {alpha}"
                )));
            }
            let ln = (2.0 * alpha - 1.0) * (2.0 * beta).ln() + 2.0 * ln_gamma(alpha + 2.0)
                - ln_gamma(2.0 * alpha - 1.0)
                - 2.0 * ln_gamma(alpha)
                - nf.ln();
            Ok(ln.exp())
        }
        (KernelSpec::Gamma { .. }, MomentConvention::DimensionallyCorrected) => {
            let c = k.constants(convention)?;
            let p = k.bracket_scale();
            Ok(c.second_moment.powi(2) * p * p / (c.roughness * nf))
        }
        (KernelSpec::Weibull { c, s }, _) => {
            if s <= 0.5 {
                return Err(Error::Domain(format!("Weibull coefficient needs s > 1/2, got s = {s}")));
            }
            let e = 2.0 - 1.0 / s;
            let ln = e * 2f64.ln() + 2.0 * ln_gamma(2.0 / s + 1.0) + s.ln() - ln_gamma(e) - c.ln() - nf.ln();
            Ok(ln.exp())
        }
    }
}

/// The plug-in bandwidth problem for one kernel and one sample.
#[derive(Debug, Clone)]
pub struct BandwidthProblem<'a> {
    pub kernel: KernelSpec,
    pub samples: &'a [f64],
    pub quadrature: QuadratureConfig,
    pub convention: MomentConvention,
}

impl<'a> BandwidthProblem<'a> {
    pub fn new(kernel: KernelSpec, samples: &'a [f64]) -> Self {
        BandwidthProblem {
            kernel,
            samples,
            quadrature: QuadratureConfig::default(),
            convention: MomentConvention::default(),
        }
    }

    pub fn with_quadrature(mut self, q: QuadratureConfig) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_convention(mut self, c: MomentConvention) -> Self {
        self.convention = c;
        self
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn constants(&self) -> Result<KernelConstants> {
        self.kernel.constants(self.convention)
    }

    /// Whether the `Q(h)` grid can resolve one kernel spread at `h` with
    /// `min_points_per_spread` nodes without exceeding `max_grid_points`.
    pub fn resolvable(&self, h: f64) -> bool {
        if self.samples.is_empty() || !(h > 0.0) {
            return false;
        }
        let min = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (klo, khi) = self.kernel.window(self.quadrature.window_spread_multiplier);
        let width = max - min + (khi - klo) * h;
        let needed = width * self.quadrature.min_points_per_spread as f64 / (self.kernel.spread() * h);
        needed < self.quadrature.max_grid_points as f64
    }

    pub fn bracket_integral(&self, h: f64) -> Result<f64> {
        bracket_integral(&self.kernel, self.samples, h, &self.quadrature)
    }

    /// `R̂(f''; h) = P² Q(h) / (N² h⁶)`.
    pub fn plugin_r_f2(&self, h: f64) -> Result<f64> {
        let p = self.kernel.bracket_scale();
        let nh3 = self.n() as f64 * h.powi(3);
        Ok(p * p * self.bracket_integral(h)? / (nh3 * nh3))
    }

    /// `ψ(h)`: the family coefficient times `Q(h)`.
    pub fn psi(&self, h: f64) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::DegenerateData("no samples".into()));
        }
        Ok(psi_coefficient(&self.kernel, self.n(), self.convention)? * self.bracket_integral(h)?)
    }

    pub fn amise_at(&self, h: f64) -> Result<f64> {
        Ok(amise(&self.constants()?, h, self.n(), self.plugin_r_f2(h)?))
    }

    /// Fixed-point iteration on `ψ` with the configured update rule.
    pub fn solve(&self, cfg: &FixedPointConfig) -> Result<BandwidthResult> {
        cfg.validate()?;
        self.quadrature.validate()?;
        self.constants()?;
        let update = cfg.update;
        let outcome = iterate_fixed_point(cfg.h0, cfg.tol, cfg.max_iter, |h| {
            if !self.resolvable(h) {
                return Err(Error::DegenerateMap {
                    h,
                    msg: format!(
                        "bandwidth below the quadrature resolution ({} grid points at most)",
                        self.quadrature.max_grid_points
                    ),
                    trace: Vec::new(),
                });
            }
            let psi = self.psi(h)?;
            if !(psi.is_finite() && psi > 0.0) {
                return Err(Error::DegenerateMap {
                    h,
                    msg: format!("psi(h) = {psi}"),
                    trace: Vec::new(),
                });
            }
            Ok(match update {
                UpdateRule::Direct => psi,
                UpdateRule::ClosedForm => (h.powi(6) / psi).powf(0.2),
            })
        })?;
        log::info!(
            "{}: h = {} after {} iterations (converged: {})",
            self.kernel,
            outcome.h_opt,
            outcome.trace.len(),
            outcome.converged
        );
        Ok(BandwidthResult {
            kernel: self.kernel,
            h_opt: outcome.h_opt,
            iterations: outcome.trace,
            converged: outcome.converged,
            update,
        })
    }

    /// Grid minimizer of `AMISE(h, R̂(f''; h))`.
    pub fn brute_force(&self, h_grid: &[f64]) -> Result<BruteForce> {
        if h_grid.is_empty() {
            return Err(Error::Domain("bandwidth grid is empty".into()));
        }
        if h_grid.iter().any(|h| !(h.is_finite() && *h > 0.0)) || h_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "bandwidth grid must be positive and strictly ascending".into(),
            ));
        }
        let constants = self.constants()?;
        let mut profile = Vec::with_capacity(h_grid.len());
        let mut best: Option<(usize, f64)> = None;
        for (i, &h) in h_grid.iter().enumerate() {
            let r = self.plugin_r_f2(h)?;
            let value = if r.is_finite() && r > 0.0 {
                amise(&constants, h, self.n(), r)
            } else {
                f64::NAN
            };
            profile.push(AmisePoint {
                h,
                r_f2: r,
                amise: value,
            });
            if value.is_finite() && best.is_none_or(|(_, b)| value < b) {
                best = Some((i, value));
            }
        }
        match best {
            Some((index, _)) => Ok(BruteForce {
                h_opt: h_grid[index],
                index,
                profile,
            }),
            None => Err(Error::DegenerateMap {
                h: h_grid[0],
                msg: "AMISE is degenerate at every grid point".into(),
                trace: Vec::new(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmisePoint {
    pub h: f64,
    pub r_f2: f64,
    pub amise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub h_opt: f64,
    pub index: usize,
    pub profile: Vec<AmisePoint>,
}

pub fn plugin_r_f2(k: &KernelSpec, samples: &[f64], h: f64, q: &QuadratureConfig) -> Result<f64> {
    BandwidthProblem::new(*k, samples).with_quadrature(*q).plugin_r_f2(h)
}

pub fn psi(k: &KernelSpec, samples: &[f64], h: f64, q: &QuadratureConfig) -> Result<f64> {
    BandwidthProblem::new(*k, samples).with_quadrature(*q).psi(h)
}

pub fn solve_bandwidth(
    k: &KernelSpec,
    samples: &[f64],
    cfg: &FixedPointConfig,
    q: &QuadratureConfig,
) -> Result<BandwidthResult> {
    BandwidthProblem::new(*k, samples).with_quadrature(*q).solve(cfg)
}

pub fn brute_force_h_opt(k: &KernelSpec, samples: &[f64], h_grid: &[f64], q: &QuadratureConfig) -> Result<f64> {
    Ok(BandwidthProblem::new(*k, samples)
        .with_quadrature(*q)
        .brute_force(h_grid)?
        .h_opt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    pub h_opt: f64,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
}

/// The iteration loop:
///
/// ```text
/// i = 1
/// while i <= max_iter:
///     h = map(h0)
///     if |(h - h0) / h| < tol: return h0
///     h0 = h; i += 1
/// ```
///
/// An image that is zero or non-finite is a [`Error::DegenerateMap`]; an
/// image more than ten times its argument is an [`Error::Diverged`].
pub fn iterate_fixed_point<F>(h0: f64, tol: f64, max_iter: usize, mut map: F) -> Result<FixedPointOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut current = h0;
    let mut trace = Vec::new();
    for iter in 1..=max_iter {
        let next = match map(current) {
            Ok(v) => v,
            Err(Error::DegenerateMap { h, msg, .. }) => return Err(Error::DegenerateMap { h, msg, trace }),
            Err(e) => return Err(e),
        };
        if !(next.is_finite() && next > 0.0) {
            return Err(Error::DegenerateMap {
                h: current,
                msg: format!("map returned {next}"),
                trace,
            });
        }
        let rel_change = ((next - current) / next).abs();
        trace.push(IterationRecord {
            iter,
            h: current,
            mapped: next,
            rel_change,
        });
        if rel_change < tol {
            return Ok(FixedPointOutcome {
                h_opt: current,
                trace,
                converged: true,
            });
        }
        if next > 10.0 * current {
            return Err(Error::Diverged {
                from: current,
                to: next,
                trace,
            });
        }
        current = next;
    }
    Ok(FixedPointOutcome {
        h_opt: current,
        trace,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn amise_unit_and_standard_normal() {
        let unit = KernelConstants {
            roughness: 1.0,
            second_moment: 1.0,
        };
        assert_eq!(amise(&unit, 1.0, 1, 1.0), 1.25);
        assert_eq!(h_amise_closed_form(&unit, 1, 1.0).unwrap(), 1.0);

        let k = KernelSpec::gaussian(0.0, 1.0).unwrap();
        let c = k.constants(MomentConvention::Literal).unwrap();
        let r = 3.0 / (8.0 * PI.sqrt());
        let expected = 1.0 / (100.0 * 2.0 * PI.sqrt()) + 0.25 * r;
        assert!((amise(&c, 1.0, 100, r) - expected).abs() < 1e-16);
        let h = h_amise_closed_form(&c, 100, r).unwrap();
        assert!((h - (4.0f64 / 300.0).powf(0.2)).abs() < 1e-14);
        assert!((h - 0.421_684_606).abs() < 1e-9);
        assert!(h_amise_closed_form(&c, 100, 0.0).is_err());
    }

    #[test]
    fn coefficient_arithmetic() {
        let pf = MomentConvention::Literal;
        let w = KernelSpec::weibull(1.0, 2.0).unwrap();
        let expected = 2f64.powf(2.5) / (PI.sqrt() / 2.0 * 100.0);
        assert!((psi_coefficient(&w, 100, pf).unwrap() - expected).abs() < 1e-13 * expected);
        let g = KernelSpec::gamma(1.0, 1.0).unwrap();
        assert!((psi_coefficient(&g, 50, pf).unwrap() - 8.0 / 50.0).abs() < 1e-14);
    }

    #[test]
    fn constant_map_converges_on_first_step() {
        let out = iterate_fixed_point(1.0, 1e-3, 50, |_| Ok(1.0005)).unwrap();
        assert!(out.converged);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.h_opt, 1.0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let out = iterate_fixed_point(1.0, 1e-12, 1, |_| Ok(3.0)).unwrap();
        assert!(!out.converged);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn degenerate_and_divergent_maps() {
        assert!(matches!(
            iterate_fixed_point(1.0, 1e-3, 5, |_| Ok(0.0)),
            Err(Error::DegenerateMap { .. })
        ));
        match iterate_fixed_point(1.0, 1e-3, 5, |h| Ok(h * 20.0)) {
            Err(Error::Diverged { from, to, trace }) => {
                assert_eq!((from, to), (1.0, 20.0));
                assert_eq!(trace.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_sample_integral_is_zero() {
        let k = KernelSpec::gaussian(0.0, 1.0).unwrap();
        assert_eq!(
            bracket_integral(&k, &[], 1.0, &QuadratureConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_gaussian_bump_integral() {
        // ∫ (x² - 1)² e^{-x²} dx = (3/4)√π - √π + √π = (3/4)√π
        let k = KernelSpec::gaussian(0.0, 1.0).unwrap();
        let q = bracket_integral(&k, &[0.0], 1.0, &QuadratureConfig::default()).unwrap();
        assert!((q - 0.75 * PI.sqrt()).abs() < 1e-10 * q, "{q}");
    }

    #[test]
    fn config_validation() {
        let bad = FixedPointConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = QuadratureConfig {
            singularity_epsilon: 0.0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn brute_force_single_point_and_grid_checks() {
        let k = KernelSpec::gaussian(0.0, 1.0).unwrap();
        let xs = [0.1, 0.5, 0.9, 1.3];
        let p = BandwidthProblem::new(k, &xs);
        assert_eq!(p.brute_force(&[0.3]).unwrap().h_opt, 0.3);
        assert!(p.brute_force(&[]).is_err());
        assert!(p.brute_force(&[0.3, 0.2]).is_err());
    }
}
