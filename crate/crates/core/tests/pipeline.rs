use clutter_kde::clutter_sim::{generate, ClutterFamily, ClutterScenario};
use clutter_kde::kernels::{KernelFamily, KernelSpec, MomentConvention};
use clutter_kde::pipeline::{
    ccdf_csv, optimal_kde, pdf_table_csv, run_experiment, split, BandwidthGrid, BandwidthSource, ExperimentConfig,
    KernelParamSource,
};
use clutter_kde::{Error, UpdateRule};

fn small(seed: u64, fraction: f64) -> clutter_kde::Dataset {
    generate(&ClutterScenario {
        clutter: ClutterFamily::Rayleigh { sigma: 1.0 },
        target_amplitude: 2.0,
        target_fraction: fraction,
        n_cells: 3,
        samples_per_cell: 300,
        rng_seed: seed,
    })
    .unwrap()
}

fn quick() -> ExperimentConfig {
    ExperimentConfig {
        training_samples: 250,
        bins: 32,
        kernel_params: KernelParamSource::Reference,
        fallback_grid: BandwidthGrid {
            lo: 1e-2,
            hi: 1.0,
            points: 30,
        },
        ..Default::default()
    }
}

#[test]
fn bundled_reference_config_parses() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reference_repro.toml")).unwrap();
    let cfg = ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(cfg.kernel_params, KernelParamSource::Reference);
    assert_eq!(cfg.training_samples, 2048);
    assert_eq!(cfg.moment_convention, MomentConvention::Literal);
    assert_eq!(cfg.fixed_point.update, UpdateRule::ClosedForm);
    for f in KernelFamily::ALL {
        assert_eq!(cfg.kernels.get(f), KernelSpec::reference(f));
    }
}

#[test]
fn config_errors_are_config_errors() {
    for text in [
        "bins = 1",
        "pfa_grid = [0.1, 0.01]",
        "training_samples = 1",
        "[fixed_point]\ntol = 0.0",
        "[kernels.gamma]\nfamily = \"weibull\"\nparams = { c = 1.0, s = 2.0 }",
        "nonsense = [",
    ] {
        assert!(
            matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
            "{text}"
        );
    }
}

#[test]
fn split_takes_leading_clutter() {
    let d = small(1, 0.5);
    let s = split(&d, 250).unwrap();
    let clutter = d.clutter_amplitudes();
    assert_eq!(s.training, clutter[..250]);
    assert_eq!(s.held_out, clutter[250..]);
    assert_eq!(s.primary, d.primary().unwrap().amplitudes);
    assert!(matches!(split(&d, 10_000), Err(Error::DegenerateData(_))));
}

#[test]
fn optimal_kde_records_its_bandwidth_source() {
    let d = small(2, 0.0);
    let s = split(&d, 250).unwrap();
    let mut cfg = quick();
    // The centered kernel has a fixed point here, but the map contracts slowly.
    cfg.fixed_point.max_iter = 500;
    let ok = optimal_kde(KernelSpec::gaussian(0.0, 1.0).unwrap(), &s.training, &cfg).unwrap();
    assert_eq!(ok.source, BandwidthSource::FixedPoint, "{:?}", ok.fallback_reason);
    let fp = ok.fixed_point.unwrap();
    assert_eq!(ok.model.bandwidth, fp.h_opt);
    assert!(ok.fallback_reason.is_none());

    // Location far from zero relative to spread: no fixed point.
    let fb = optimal_kde(KernelSpec::gaussian(1.2, 0.6).unwrap(), &s.training, &cfg).unwrap();
    assert_eq!(fb.source, BandwidthSource::GridSearch);
    let grid = fb.grid_search.unwrap();
    assert_eq!(fb.model.bandwidth, grid.h_opt);
    assert_eq!(grid.profile.len(), 30);
    assert!(fb.fallback_reason.is_some());
}

#[test]
fn experiment_outputs_have_every_model() {
    let d = small(3, 0.5);
    let cfg = quick();
    let out = run_experiment(&d, &[KernelFamily::Gaussian], &cfg).unwrap();
    assert_eq!(out.fit_reports.len(), 2);
    assert_eq!(out.detection.len(), 2);
    let names: Vec<&str> = out.ccdf.iter().map(|c| c.0.as_str()).collect();
    assert_eq!(names, ["parametric-gaussian", "kde-gaussian"]);
    let csv = ccdf_csv(&out.ccdf);
    assert_eq!(csv.lines().count(), 1 + 2 * cfg.ccdf_points);
    for (_, rows) in &out.detection {
        assert!(rows.windows(2).all(|w| w[0].pd_empirical <= w[1].pd_empirical));
    }
    let s = split(&d, cfg.training_samples).unwrap();
    let hist = clutter_kde::HistogramDensity::empirical_pdf(&s.training, cfg.bins).unwrap();
    let table = pdf_table_csv(&out.models.all(), &hist).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "x,histogram,parametric-gaussian,kde-gaussian"
    );
    assert_eq!(table.lines().count(), 1 + cfg.bins);

    let again = run_experiment(&d, &[KernelFamily::Gaussian], &cfg).unwrap();
    assert_eq!(again, out);
}

#[test]
fn detection_is_skipped_without_a_primary_cell() {
    let out = run_experiment(&small(4, 0.0), &[KernelFamily::Gaussian], &quick()).unwrap();
    assert!(out.detection.is_empty());
}
