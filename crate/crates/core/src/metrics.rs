//! Fit-quality metrics: PDF mean squared error, CCDF curves and a combined
//! per-model report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::Density;
use crate::parametric::HistogramDensity;
use crate::quadrature::linspace;

/// Number of grid points used against an analytic reference.
pub const ANALYTIC_GRID_POINTS: usize = 512;

/// What a model's PDF is compared against.
pub enum Reference<'a> {
    /// Compared at the bin centers.
    Histogram(&'a HistogramDensity),
    /// Compared at 512 evenly spaced points on `[lo, hi]`.
    Analytic { density: &'a dyn Density, lo: f64, hi: f64 },
}

impl Reference<'_> {
    pub fn grid(&self) -> Vec<f64> {
        match self {
            Reference::Histogram(h) => h.centers(),
            Reference::Analytic { lo, hi, .. } => linspace(*lo, *hi, ANALYTIC_GRID_POINTS),
        }
    }

    fn values(&self, grid: &[f64]) -> Result<Vec<f64>> {
        match self {
            Reference::Histogram(h) => Ok(h.densities.clone()),
            Reference::Analytic { density, .. } => grid.iter().map(|&x| density.pdf(x)).collect(),
        }
    }
}

/// Mean over the reference grid of the squared PDF difference.
pub fn pdf_mse<D: Density + ?Sized>(model: &D, reference: &Reference<'_>) -> Result<f64> {
    let grid = reference.grid();
    let target = reference.values(&grid)?;
    let mut acc = 0.0;
    for (&x, t) in grid.iter().zip(&target) {
        acc += (model.pdf(x)? - t).powi(2);
    }
    Ok(acc / grid.len() as f64)
}

/// Mean squared difference of two densities on a shared grid.
pub fn pdf_mse_between<A: Density + ?Sized, B: Density + ?Sized>(a: &A, b: &B, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("empty comparison grid".into()));
    }
    let mut acc = 0.0;
    for &x in grid {
        acc += (a.pdf(x)? - b.pdf(x)?).powi(2);
    }
    Ok(acc / grid.len() as f64)
}

/// `(x, CCDF(x))` pairs. Fails if any value leaves `[0, 1]` or the curve
/// increases along the (sorted) grid.
pub fn ccdf_curve<D: Density + ?Sized>(model: &D, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("CCDF grid must be sorted".into()));
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for &x in grid {
        let c = model.ccdf(x)?;
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::Numerical(format!(
                "{}: CCDF({x}) = {c} outside [0, 1]",
                model.name()
            )));
        }
        if let Some(&(px, pc)) = out.last() {
            if c > pc {
                return Err(Error::Numerical(format!(
                    "{}: CCDF increases from {pc} at {px} to {c} at {x}",
                    model.name()
                )));
            }
        }
        out.push((x, c));
    }
    Ok(out)
}

/// Fraction of `samples` strictly above `x`.
pub fn empirical_ccdf(samples: &[f64], x: f64) -> f64 {
    samples.iter().filter(|&&s| s > x).count() as f64 / samples.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model_name: String,
    pub pdf_mse: f64,
    /// Largest gap between the model CCDF and the empirical CCDF on `grid`.
    pub ccdf_max_abs_gap: f64,
    pub grid: Vec<f64>,
}

/// PDF error against `histogram` and CCDF gap against `samples`, both on
/// the histogram's grid (bin centers and bin edges respectively).
pub fn fit_report<D: Density + ?Sized>(model: &D, histogram: &HistogramDensity, samples: &[f64]) -> Result<FitReport> {
    if samples.is_empty() {
        return Err(Error::DegenerateData("no samples for the empirical CCDF".into()));
    }
    let pdf_mse = pdf_mse(model, &Reference::Histogram(histogram))?;
    let curve = ccdf_curve(model, &histogram.edges)?;
    let gap = curve
        .iter()
        .map(|&(x, c)| (c - empirical_ccdf(samples, x)).abs())
        .fold(0.0, f64::max);
    Ok(FitReport {
        model_name: model.name(),
        pdf_mse,
        ccdf_max_abs_gap: gap,
        grid: histogram.edges.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelSpec;
    use crate::parametric::ParametricModel;

    fn model(spec: KernelSpec) -> ParametricModel {
        ParametricModel { spec, fit_mse: 0.0 }
    }

    #[test]
    fn identical_is_zero_and_offset_is_squared() {
        let m = model(KernelSpec::gamma(2.0, 1.5).unwrap());
        let h = HistogramDensity::tabulate(&m, 0.0, 5.0, 64).unwrap();
        assert!(pdf_mse(&m, &Reference::Histogram(&h)).unwrap() < 1e-24);
        let shifted =
            HistogramDensity::from_values(h.edges.clone(), h.densities.iter().map(|d| d + 0.01).collect(), 0).unwrap();
        let mse = pdf_mse(&m, &Reference::Histogram(&shifted)).unwrap();
        assert!((mse - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn exponential_ccdf_curve() {
        let m = model(KernelSpec::weibull(1.0, 1.0).unwrap());
        let c = ccdf_curve(&m, &[0.0, 2f64.ln()]).unwrap();
        assert_eq!(c[0].1, 1.0);
        assert!((c[1].1 - 0.5).abs() < 1e-15);
        let below = ccdf_curve(&m, &[-3.0]).unwrap();
        assert_eq!(below[0].1, 1.0);
    }

    #[test]
    fn analytic_reference_is_symmetric() {
        let a = model(KernelSpec::gamma(2.0, 1.0).unwrap());
        let b = model(KernelSpec::weibull(1.5, 1.7).unwrap());
        let ab = pdf_mse(
            &a,
            &Reference::Analytic {
                density: &b,
                lo: 0.0,
                hi: 6.0,
            },
        )
        .unwrap();
        let ba = pdf_mse(
            &b,
            &Reference::Analytic {
                density: &a,
                lo: 0.0,
                hi: 6.0,
            },
        )
        .unwrap();
        assert_eq!(ab, ba);
    }
}
