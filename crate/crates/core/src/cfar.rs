//! Two-step CFAR detection: fix a threshold from a clutter model at the
//! requested false-alarm rate, then compare test amplitudes against it.
//!
//! The threshold is the model's upper `pfa` quantile, found by bisection on
//! the CCDF. `T` is reported as the ratio of that threshold to the
//! background level, the mean amplitude of the training clutter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::Density;

/// Relative accuracy of `CCDF(threshold)` against the requested rate.
pub const PFA_REL_TOL: f64 = 1e-6;
/// Absolute accuracy of `CCDF(threshold)` against the requested rate.
pub const PFA_ABS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub threshold: f64,
    /// Threshold over background level.
    pub t_factor: f64,
    pub background: f64,
}

/// Solves `CCDF(x) = pfa` for the model and scales by the training mean.
pub fn set_threshold<D: Density + ?Sized>(model: &D, training: &[f64], pfa: f64) -> Result<Threshold> {
    if !(pfa > 0.0 && pfa < 1.0) {
        return Err(Error::Domain(format!("pfa must lie in (0, 1), got {pfa}")));
    }
    if training.is_empty() {
        return Err(Error::DegenerateData("no training clutter".into()));
    }
    let background = training.iter().sum::<f64>() / training.len() as f64;
    if !(background.is_finite() && background > 0.0) {
        return Err(Error::DegenerateData(format!("background level is {background}")));
    }
    let floor = model.tail_floor();
    if pfa <= floor {
        return Err(Error::TailResolution { pfa, floor });
    }

    let (mut lo, mut hi) = model.support();
    let mut c_lo = model.ccdf(lo)?;
    let mut c_hi = model.ccdf(hi)?;
    let span = (hi - lo).max(1.0);
    let mut grow = 0;
    while c_hi > pfa {
        if grow == 60 {
            return Err(Error::TailResolution { pfa, floor: c_hi });
        }
        lo = hi;
        c_lo = c_hi;
        hi += span * 2f64.powi(grow);
        c_hi = model.ccdf(hi)?;
        grow += 1;
    }
    if c_lo < pfa {
        // pfa close to 1: the quantile sits at the lower edge of the support
        return Ok(Threshold {
            threshold: lo,
            t_factor: lo / background,
            background,
        });
    }

    let tol = PFA_ABS_TOL.min(PFA_REL_TOL * pfa);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = model.ccdf(mid)?;
        if c > c_lo || c < c_hi {
            return Err(Error::Numerical(format!(
                "CCDF not monotone: {c} at {mid} outside [{c_hi}, {c_lo}]"
            )));
        }
        if (c - pfa).abs() <= tol {
            break;
        }
        if c > pfa {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    Ok(Threshold {
        threshold: mid,
        t_factor: mid / background,
        background,
    })
}

/// `amplitude > threshold` for each test sample.
pub fn detect(threshold: f64, test: &[f64]) -> Vec<bool> {
    test.iter().map(|&a| a > threshold).collect()
}

fn rate(threshold: f64, xs: &[f64]) -> f64 {
    xs.iter().filter(|&&a| a > threshold).count() as f64 / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub pfa_target: f64,
    pub pfa_empirical: f64,
    pub pd_empirical: f64,
    pub n_clutter_trials: usize,
    pub n_target_trials: usize,
    pub threshold: f64,
    #[serde(rename = "T")]
    pub t_factor: f64,
}

/// For each rate in `pfa_grid`: threshold from `training`, false alarms
/// counted on `held_out`, detections on `primary`. Every sample is one trial.
pub fn evaluate<D: Density + ?Sized>(
    model: &D,
    training: &[f64],
    held_out: &[f64],
    primary: &[f64],
    pfa_grid: &[f64],
) -> Result<Vec<DetectionReport>> {
    if held_out.is_empty() || primary.is_empty() {
        return Err(Error::DegenerateData(
            "held-out clutter and primary cell must be non-empty".into(),
        ));
    }
    if pfa_grid.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || pfa_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("pfa grid must be ascending within (0, 1)".into()));
    }
    pfa_grid
        .iter()
        .map(|&pfa| {
            let t = set_threshold(model, training, pfa)?;
            Ok(DetectionReport {
                pfa_target: pfa,
                pfa_empirical: rate(t.threshold, held_out),
                pd_empirical: rate(t.threshold, primary),
                n_clutter_trials: held_out.len(),
                n_target_trials: primary.len(),
                threshold: t.threshold,
                t_factor: t.t_factor,
            })
        })
        .collect()
}

pub const REPORT_COLUMNS: [&str; 5] = ["pfa_target", "pfa_empirical", "pd_empirical", "threshold", "T"];

/// Reports as CSV with the columns of [`REPORT_COLUMNS`].
pub fn reports_to_csv(reports: &[DetectionReport]) -> String {
    let mut out = REPORT_COLUMNS.join(",") + "\n";
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.pfa_target, r.pfa_empirical, r.pd_empirical, r.threshold, r.t_factor
        ));
    }
    out
}
