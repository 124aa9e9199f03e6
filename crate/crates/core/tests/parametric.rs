use clutter_kde::kernels::{KernelFamily, KernelSpec};
use clutter_kde::parametric::{fit_parametric, histogram_mse, FitConfig, HistogramDensity, ParametricModel};
use clutter_kde::Density;
use proptest::prelude::*;

fn exact(spec: KernelSpec) -> ParametricModel {
    ParametricModel { spec, fit_mse: 0.0 }
}

fn round_trip(spec: KernelSpec, hi: f64) -> ParametricModel {
    let target = HistogramDensity::tabulate(&exact(spec), 0.0, hi, 128).unwrap();
    fit_parametric(spec.family(), &target, &FitConfig::default()).unwrap()
}

fn assert_params_near(got: KernelSpec, want: KernelSpec, rel: f64) {
    for (g, w) in got.params().iter().zip(want.params()) {
        assert!(((g - w) / w).abs() < rel, "{got} vs {want}");
    }
}

#[test]
fn recovers_gaussian_from_its_own_pdf() {
    let want = KernelSpec::gaussian(0.32, 1.38).unwrap();
    let fit = round_trip(want, 5.0);
    assert_params_near(fit.spec, want, 0.02);
    assert!(fit.fit_mse < 1e-10);
}

#[test]
fn recovers_weibull_from_its_own_pdf() {
    let want = KernelSpec::weibull(0.27, 2.0).unwrap();
    let fit = round_trip(want, 1.2);
    assert_params_near(fit.spec, want, 0.02);
    assert!(fit.fit_mse < 1e-10);
}

#[test]
fn recovers_gamma_from_its_own_pdf() {
    let want = KernelSpec::gamma(1.8, 0.2).unwrap();
    let fit = round_trip(want, 50.0);
    assert_params_near(fit.spec, want, 0.02);
    assert!(fit.fit_mse < 1e-10);
}

#[test]
fn weibull_beats_gaussian_on_rayleigh_shape() {
    // Rayleigh(1) is Weibull(c = √2, s = 2).
    let rayleigh = KernelSpec::weibull(2f64.sqrt(), 2.0).unwrap();
    let target = HistogramDensity::tabulate(&exact(rayleigh), 0.0, 5.0, 128).unwrap();
    let cfg = FitConfig::default();
    let w = fit_parametric(KernelFamily::Weibull, &target, &cfg).unwrap();
    let g = fit_parametric(KernelFamily::Gaussian, &target, &cfg).unwrap();
    assert!(w.fit_mse < 1e-10);
    assert!(g.fit_mse > 1e-4);
}

#[test]
fn fits_are_reproducible() {
    let xs: Vec<f64> = (1..=500).map(|i| ((i * 7919) % 1000) as f64 / 250.0).collect();
    let h = HistogramDensity::empirical_pdf(&xs, 64).unwrap();
    for f in KernelFamily::ALL {
        let a = fit_parametric(f, &h, &FitConfig::default()).unwrap();
        let b = fit_parametric(f, &h, &FitConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fit_mse.to_bits(), histogram_mse(&a.spec, &h).unwrap().to_bits());
    }
}

#[test]
fn model_json_is_flat() {
    let m = exact(KernelSpec::gamma(2.0, 3.0).unwrap());
    let v: serde_json::Value = serde_json::to_value(m).unwrap();
    assert_eq!(v["family"], "gamma");
    assert_eq!(v["params"]["alpha"], 2.0);
    assert_eq!(serde_json::from_value::<ParametricModel>(v).unwrap(), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn histogram_matches_counting_oracle(
        xs in prop::collection::vec(0.0..10.0f64, 2..300),
        bins in prop::sample::select(vec![64usize, 128, 256]),
    ) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let h = HistogramDensity::empirical_pdf(&xs, bins).unwrap();
        prop_assert_eq!(h.bins(), bins);
        prop_assert!((h.mass() - 1.0).abs() < 1e-12);
        let max = xs.iter().copied().fold(0.0, f64::max);
        prop_assert_eq!(h.edges[0], 0.0);
        prop_assert_eq!(h.edges[bins], max);
        let n = xs.len() as f64;
        for i in 0..bins {
            let (a, b) = (h.edges[i], h.edges[i + 1]);
            let count = xs
                .iter()
                .filter(|&&x| (x >= a && x < b) || (i == bins - 1 && x == b))
                .count();
            let expect = count as f64 / (n * (b - a));
            prop_assert!((h.densities[i] - expect).abs() <= 1e-9 * (1.0 + expect), "bin {i}");
        }
    }

    #[test]
    fn tabulate_samples_the_pdf(mu in -1.0..1.0f64, sigma in 0.3..2.0f64) {
        let m = exact(KernelSpec::gaussian(mu, sigma).unwrap());
        let t = HistogramDensity::tabulate(&m, -3.0, 3.0, 60).unwrap();
        for (c, d) in t.centers().iter().zip(&t.densities) {
            prop_assert_eq!(*d, m.pdf(*c).unwrap());
        }
    }
}

#[test]
fn rejects_degenerate_histograms() {
    assert!(HistogramDensity::empirical_pdf(&[], 64).is_err());
    assert!(HistogramDensity::empirical_pdf(&[1.0, 1.0], 64).is_err());
    assert!(HistogramDensity::empirical_pdf(&[1.0, -1.0], 64).is_err());
    assert!(HistogramDensity::empirical_pdf(&[1.0, 2.0], 1).is_err());
    assert!(HistogramDensity::from_values(vec![0.0, 1.0], vec![1.0, 2.0], 0).is_err());
}
