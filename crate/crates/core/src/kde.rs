//! The kernel density estimator `f̂(x) = (1/Nh) Σ K((x - xᵢ)/h)` and the
//! [`Density`] interface shared with parametric and ground-truth models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::parametric::ParametricModel;
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

/// Absolute tolerance of the quadrature-based CCDF.
pub const CCDF_QUADRATURE_TOL: f64 = 1e-9;

/// A univariate density that can be evaluated pointwise.
pub trait Density {
    fn pdf(&self, x: f64) -> Result<f64>;

    /// `P(X > x)`. The default integrates the PDF numerically.
    fn ccdf(&self, x: f64) -> Result<f64> {
        ccdf_by_quadrature(self, x)
    }

    /// A finite interval outside which the density carries negligible mass.
    fn support(&self) -> (f64, f64);

    /// Smallest tail probability the CCDF resolves reliably.
    fn tail_floor(&self) -> f64 {
        CCDF_QUADRATURE_TOL
    }

    /// Points where the PDF is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn name(&self) -> String;
}

/// `1 - ∫ pdf` from the lower end of the support up to `x`, by adaptive
/// Gauss–Kronrod quadrature with absolute tolerance 1e-9.
pub fn ccdf_by_quadrature<D: Density + ?Sized>(d: &D, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("CCDF at non-finite x = {x}")));
    }
    let (lo, hi) = d.support();
    if x <= lo {
        return Ok(1.0);
    }
    if x >= hi {
        return Ok(0.0);
    }
    let mut failure = None;
    let est = integrate_with_breakpoints(
        |t| match d.pdf(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        x,
        &d.breakpoints(),
        Tolerance::absolute(CCDF_QUADRATURE_TOL),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((1.0 - est?.value).clamp(0.0, 1.0))
}

/// Kernel density estimate over a fixed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeModel {
    pub kernel: KernelSpec,
    pub bandwidth: f64,
    pub samples: Vec<f64>,
}

impl KdeModel {
    pub fn new(kernel: KernelSpec, bandwidth: f64, samples: Vec<f64>) -> Result<Self> {
        kernel.validate()?;
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::Domain(format!(
                "bandwidth must be finite and > 0, got {bandwidth}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::DegenerateData("KDE needs at least one sample".into()));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::DegenerateData(format!("non-finite sample {x}")));
        }
        Ok(KdeModel {
            kernel,
            bandwidth,
            samples,
        })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// `f̂⁽ᵐ⁾(x) = (1/(N h^(m+1))) Σ K⁽ᵐ⁾((x - xᵢ)/h)` for `m` in {1, 2}.
    pub fn derivative(&self, x: f64, order: u32) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("KDE derivative at non-finite x = {x}")));
        }
        let h = self.bandwidth;
        let mut acc = 0.0;
        for &xi in &self.samples {
            let u = (x - xi) / h;
            acc += match order {
                1 => self.kernel.first_derivative(u)?,
                2 => self.kernel.second_derivative(u)?,
                _ => return Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}"))),
            };
        }
        Ok(acc / (self.n() as f64 * h.powi(order as i32 + 1)))
    }

    /// Quadrature-based CCDF, for cross-checking the closed form.
    pub fn ccdf_quadrature(&self, x: f64) -> Result<f64> {
        ccdf_by_quadrature(self, x)
    }
}

impl Density for KdeModel {
    fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("KDE evaluated at non-finite x = {x}")));
        }
        let h = self.bandwidth;
        let mut acc = 0.0;
        for &xi in &self.samples {
            acc += self.kernel.pdf((x - xi) / h)?;
        }
        Ok(acc / (self.n() as f64 * h))
    }

    /// Exact: the average of the kernel survival functions.
    fn ccdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("CCDF at non-finite x = {x}")));
        }
        let h = self.bandwidth;
        let s: f64 = self.samples.iter().map(|&xi| self.kernel.sf((x - xi) / h)).sum();
        Ok((s / self.n() as f64).clamp(0.0, 1.0))
    }

    /// `[min(xᵢ) + (lo)h, max(xᵢ) + (hi)h]` with `(lo, hi)` the kernel's
    /// ten-spread window.
    fn support(&self) -> (f64, f64) {
        let (klo, khi) = self.kernel.window(10.0);
        let min = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min + klo * self.bandwidth, max + khi * self.bandwidth)
    }

    fn tail_floor(&self) -> f64 {
        f64::MIN_POSITIVE
    }

    /// One-sided kernels switch on at each sample.
    fn breakpoints(&self) -> Vec<f64> {
        if self.kernel.is_one_sided() {
            self.samples.clone()
        } else {
            Vec::new()
        }
    }

    fn name(&self) -> String {
        format!("kde-{}", self.kernel.family())
    }
}

/// Either kind of fitted clutter model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DensityModel {
    Kde(KdeModel),
    Parametric(ParametricModel),
}

impl Density for DensityModel {
    fn pdf(&self, x: f64) -> Result<f64> {
        match self {
            DensityModel::Kde(m) => m.pdf(x),
            DensityModel::Parametric(m) => m.pdf(x),
        }
    }

    fn ccdf(&self, x: f64) -> Result<f64> {
        match self {
            DensityModel::Kde(m) => m.ccdf(x),
            DensityModel::Parametric(m) => m.ccdf(x),
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            DensityModel::Kde(m) => m.support(),
            DensityModel::Parametric(m) => m.support(),
        }
    }

    fn tail_floor(&self) -> f64 {
        match self {
            DensityModel::Kde(m) => m.tail_floor(),
            DensityModel::Parametric(m) => m.tail_floor(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            DensityModel::Kde(m) => m.breakpoints(),
            DensityModel::Parametric(m) => m.breakpoints(),
        }
    }

    fn name(&self) -> String {
        match self {
            DensityModel::Kde(m) => m.name(),
            DensityModel::Parametric(m) => m.name(),
        }
    }
}

impl From<KdeModel> for DensityModel {
    fn from(m: KdeModel) -> Self {
        DensityModel::Kde(m)
    }
}

impl From<ParametricModel> for DensityModel {
    fn from(m: ParametricModel) -> Self {
        DensityModel::Parametric(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> KernelSpec {
        KernelSpec::gaussian(0.0, 1.0).unwrap()
    }

    #[test]
    fn single_and_symmetric_pairs() {
        let m = KdeModel::new(std_normal(), 1.0, vec![0.0]).unwrap();
        assert!((m.pdf(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((m.ccdf(0.0).unwrap() - 0.5).abs() < 1e-15);
        let m = KdeModel::new(std_normal(), 1.0, vec![0.0, 2.0]).unwrap();
        assert!((m.pdf(1.0).unwrap() - 0.241_970_724_519_143_37).abs() < 1e-15);
        let m = KdeModel::new(std_normal(), 0.7, vec![-1.3, 1.3]).unwrap();
        assert!(m.derivative(0.0, 1).unwrap().abs() < 1e-16);
    }

    #[test]
    fn gamma_kernel_sum_term_by_term() {
        let k = KernelSpec::gamma(2.0, 1.0).unwrap();
        let m = KdeModel::new(k, 0.5, vec![0.5, 1.0, 1.5]).unwrap();
        // K(u) = u e^{-u}; only 0.5 and 1.0 lie to the left of x = 1.2
        let expected = ((1.4f64 * (-1.4f64).exp()) + (0.4 * (-0.4f64).exp())) / 1.5;
        assert!((m.pdf(1.2).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn second_derivative_direct_instance() {
        let m = KdeModel::new(std_normal(), 2.0, vec![0.0]).unwrap();
        let x = 0.9;
        let expected = std_normal().second_derivative(x / 2.0).unwrap() / 8.0;
        assert!((m.derivative(x, 2).unwrap() - expected).abs() < 1e-16);
        assert!(matches!(m.derivative(x, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(KdeModel::new(std_normal(), 0.0, vec![1.0]).is_err());
        assert!(KdeModel::new(std_normal(), 1.0, vec![]).is_err());
        let m = KdeModel::new(std_normal(), 1.0, vec![1.0]).unwrap();
        assert!(m.pdf(f64::NAN).is_err());
    }

    #[test]
    fn closed_form_ccdf_matches_quadrature() {
        let k = KernelSpec::weibull(1.0, 2.0).unwrap();
        let m = KdeModel::new(k, 0.3, vec![0.2, 0.9, 1.4, 2.2]).unwrap();
        for x in [0.0, 0.5, 1.0, 2.0, 2.5] {
            let exact = m.ccdf(x).unwrap();
            let quad = m.ccdf_quadrature(x).unwrap();
            assert!((exact - quad).abs() < 1e-8, "x={x}: {exact} vs {quad}");
        }
        assert_eq!(m.ccdf(-5.0).unwrap(), 1.0);
    }
}
