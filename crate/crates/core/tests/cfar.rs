use clutter_kde::cfar::{detect, evaluate, reports_to_csv, set_threshold, REPORT_COLUMNS};
use clutter_kde::clutter_sim::{ClutterDistribution, ClutterFamily};
use clutter_kde::kernels::KernelSpec;
use clutter_kde::parametric::ParametricModel;
use clutter_kde::{Density, Error, KdeModel, Result};
use proptest::prelude::*;

fn rayleigh(sigma: f64) -> ClutterDistribution {
    ClutterDistribution::new(ClutterFamily::Rayleigh { sigma }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_threshold_is_the_analytic_quantile(sigma in 0.2..5.0f64, lp in -6.0..-0.2f64) {
        let pfa = 10f64.powf(lp);
        let t = set_threshold(&rayleigh(sigma), &[1.0], pfa).unwrap();
        let want = sigma * (-2.0 * pfa.ln()).sqrt();
        // |ΔCCDF| <= 1e-6 pfa maps to a relative threshold error below 1e-6.
        prop_assert!(((t.threshold - want) / want).abs() < 1e-6, "{} vs {want}", t.threshold);
    }

    #[test]
    fn thresholds_decrease_with_pfa(xs in prop::collection::vec(0.1..5.0f64, 2..50), h in 0.05..1.0f64) {
        let m = KdeModel::new(KernelSpec::gaussian(0.0, 1.0).unwrap(), h, xs.clone()).unwrap();
        let grid = [1e-4, 1e-3, 1e-2, 1e-1, 0.5];
        let ts: Vec<f64> = grid.iter().map(|&p| set_threshold(&m, &xs, p).unwrap().threshold).collect();
        prop_assert!(ts.windows(2).all(|w| w[1] < w[0]), "{ts:?}");
        for (&p, &t) in grid.iter().zip(&ts) {
            prop_assert!((m.ccdf(t).unwrap() - p).abs() <= 1e-6 * p + 1e-15);
        }
    }
}

#[test]
fn t_factor_is_relative_to_training_mean() {
    let t = set_threshold(&rayleigh(1.0), &[2.0, 4.0], 1e-2).unwrap();
    assert_eq!(t.background, 3.0);
    assert_eq!(t.t_factor, t.threshold / 3.0);
}

#[test]
fn one_sided_kde_threshold() {
    let xs = vec![0.3, 0.9, 1.4, 2.2];
    let m = KdeModel::new(KernelSpec::weibull(1.0, 2.0).unwrap(), 0.3, xs.clone()).unwrap();
    let t = set_threshold(&m, &xs, 1e-3).unwrap();
    assert!((m.ccdf(t.threshold).unwrap() - 1e-3).abs() < 1e-9);
}

#[test]
fn parametric_threshold() {
    let m = ParametricModel {
        spec: KernelSpec::gamma(2.0, 1.0).unwrap(),
        fit_mse: 0.0,
    };
    let t = set_threshold(&m, &[1.0], 1e-5).unwrap();
    // Gamma(2, 1): P(X > x) = (1 + x) e^{-x}.
    let c = (1.0 + t.threshold) * (-t.threshold).exp();
    assert!((c - 1e-5).abs() < 1e-11);
}

struct Floored;

impl Density for Floored {
    fn pdf(&self, x: f64) -> Result<f64> {
        Ok((-x).exp())
    }
    fn ccdf(&self, x: f64) -> Result<f64> {
        Ok((-x.max(0.0)).exp())
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 10.0)
    }
    fn tail_floor(&self) -> f64 {
        1e-6
    }
    fn name(&self) -> String {
        "floored".into()
    }
}

#[test]
fn rates_below_the_tail_floor_are_refused() {
    assert!(matches!(
        set_threshold(&Floored, &[1.0], 1e-7),
        Err(Error::TailResolution { .. })
    ));
    assert!(set_threshold(&Floored, &[1.0], 1e-5).is_ok());
}

#[test]
fn bad_inputs() {
    let d = rayleigh(1.0);
    assert!(set_threshold(&d, &[1.0], 0.0).is_err());
    assert!(set_threshold(&d, &[1.0], 1.0).is_err());
    assert!(set_threshold(&d, &[], 0.1).is_err());
    assert!(evaluate(&d, &[1.0], &[], &[1.0], &[0.1]).is_err());
    assert!(evaluate(&d, &[1.0], &[1.0], &[1.0], &[0.1, 0.01]).is_err());
}

#[test]
fn evaluate_counts_exceedances() {
    let d = rayleigh(1.0);
    let held: Vec<f64> = (0..1000).map(|i| i as f64 / 250.0).collect();
    let primary = vec![10.0, 0.0, 10.0, 0.0];
    let reps = evaluate(&d, &[1.0], &held, &primary, &[1e-3, 1e-1]).unwrap();
    for r in &reps {
        let fa = detect(r.threshold, &held).iter().filter(|b| **b).count();
        assert_eq!(r.pfa_empirical, fa as f64 / 1000.0);
        assert_eq!(r.pd_empirical, 0.5);
        assert_eq!(r.n_clutter_trials, 1000);
        assert_eq!(r.n_target_trials, 4);
    }
    let csv = reports_to_csv(&reps);
    assert_eq!(csv.lines().next().unwrap(), REPORT_COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 3);
    let json = serde_json::to_value(reps[0]).unwrap();
    assert!(json.get("T").is_some());
}
