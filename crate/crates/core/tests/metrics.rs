use clutter_kde::kernels::KernelSpec;
use clutter_kde::metrics::{ccdf_curve, empirical_ccdf, fit_report, pdf_mse, pdf_mse_between, Reference};
use clutter_kde::parametric::{HistogramDensity, ParametricModel};
use clutter_kde::quadrature::linspace;
use clutter_kde::{Density, Error, KdeModel, Result};

fn model(spec: KernelSpec) -> ParametricModel {
    ParametricModel { spec, fit_mse: 0.0 }
}

#[test]
fn self_comparison_is_zero() {
    let m = model(KernelSpec::gamma(2.0, 1.0).unwrap());
    let hist = HistogramDensity::tabulate(&m, 0.0, 10.0, 100).unwrap();
    assert_eq!(pdf_mse(&m, &Reference::Histogram(&hist)).unwrap(), 0.0);
    let r = Reference::Analytic {
        density: &m,
        lo: 0.0,
        hi: 10.0,
    };
    assert_eq!(pdf_mse(&m, &r).unwrap(), 0.0);
    assert_eq!(r.grid().len(), 512);
}

#[test]
fn mse_matches_hand_sum() {
    let a = model(KernelSpec::gaussian(0.0, 1.0).unwrap());
    let b = model(KernelSpec::gaussian(0.5, 1.2).unwrap());
    let grid = linspace(-4.0, 4.0, 33);
    let want = grid
        .iter()
        .map(|&x| (a.pdf(x).unwrap() - b.pdf(x).unwrap()).powi(2))
        .sum::<f64>()
        / 33.0;
    assert_eq!(pdf_mse_between(&a, &b, &grid).unwrap(), want);
    assert!(pdf_mse_between(&a, &b, &[]).is_err());
}

#[test]
fn empirical_ccdf_counts_strict_exceedances() {
    let xs = [1.0, 2.0, 2.0, 3.0];
    assert_eq!(empirical_ccdf(&xs, 0.0), 1.0);
    assert_eq!(empirical_ccdf(&xs, 2.0), 0.25);
    assert_eq!(empirical_ccdf(&xs, 3.0), 0.0);
}

#[test]
fn fit_report_on_a_kde() {
    let xs: Vec<f64> = (1..200).map(|i| (i as f64 * 0.618).fract() * 3.0).collect();
    let hist = HistogramDensity::empirical_pdf(&xs, 32).unwrap();
    let m = KdeModel::new(KernelSpec::gaussian(0.0, 1.0).unwrap(), 0.1, xs.clone()).unwrap();
    let r = fit_report(&m, &hist, &xs).unwrap();
    assert_eq!(r.model_name, "kde-gaussian");
    assert_eq!(r.grid, hist.edges);
    assert!(r.pdf_mse >= 0.0);
    assert!(r.ccdf_max_abs_gap > 0.0 && r.ccdf_max_abs_gap < 0.1);
}

struct Broken;

impl Density for Broken {
    fn pdf(&self, _: f64) -> Result<f64> {
        Ok(0.0)
    }
    fn ccdf(&self, x: f64) -> Result<f64> {
        Ok(if x < 1.0 { 0.5 } else { 0.9 })
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 2.0)
    }
    fn name(&self) -> String {
        "broken".into()
    }
}

#[test]
fn ccdf_curve_rejects_increasing_tails() {
    assert!(matches!(
        ccdf_curve(&Broken, &[0.0, 0.5, 1.5]),
        Err(Error::Numerical(_))
    ));
    assert!(ccdf_curve(&Broken, &[1.0, 0.0]).is_err());
    let m = model(KernelSpec::weibull(1.0, 1.5).unwrap());
    let c = ccdf_curve(&m, &linspace(0.0, 5.0, 50)).unwrap();
    assert_eq!(c[0], (0.0, 1.0));
}
