//! Numerical integration used across the crate.
//!
//! Two flavours live here: fixed-grid rules (composite Simpson and
//! trapezoid) for integrands that are tabulated on a uniform grid, and a
//! globally adaptive 15-point Gauss–Kronrod integrator for smooth
//! integrands that can be evaluated anywhere.

use crate::error::{Error, Result};

// Kronrod abscissae and weights for the 15-point rule; the 7-point Gauss rule
// uses every odd-indexed abscissa.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut values = [(0.0, 0.0); 7];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        values[j] = (f1, f2);
        resk += w * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    // QUADPACK error scaling: a bare |K15 - G7| is too optimistic near cusps.
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (&(f1, f2), &w) in values.iter().zip(WGK.iter()) {
        resasc += w * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    Segment {
        a,
        b,
        value: resk * half,
        error,
    }
}

/// Globally adaptive Gauss–Kronrod (G7/K15) integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the
/// summed error drops below `max(tol.abs, tol.rel * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_with_breakpoints(f, a, b, &[], tol)
}

/// [`integrate`] with the initial partition split at `points`.
///
/// Pass the locations of kinks and jumps. A feature that falls between the
/// outermost Kronrod node and a segment end is invisible to the error
/// estimate, so it never gets refined.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = points.iter().copied().filter(|&p| p > lo && p < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut segments = Vec::with_capacity(cuts.len() + 1);
    let mut left = lo;
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        segments.push(kronrod(&mut f, left, right));
        left = right;
    }
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{lo}, {hi}] after {} intervals",
                segments.len()
            )));
        }
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate {
                value: sign * value,
                abs_error: error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{lo}, {hi}] did not converge: estimate {value:e}, \
                 error {error:e} after {} intervals",
                segments.len()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Numerical(format!(
                "adaptive quadrature cannot subdivide [{}, {}] any further",
                s.a, s.b
            )));
        }
        segments.push(kronrod(&mut f, s.a, mid));
        segments.push(kronrod(&mut f, mid, s.b));
    }
}

/// Integral of `f` over `[a, ∞)` through the substitution `x = a + t/(1-t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let v = f(a + t / one_minus);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Composite Simpson rule for samples on a uniform grid with spacing `dx`.
///
/// Requires an odd number of samples (an even number of intervals).
pub fn simpson(values: &[f64], dx: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "composite Simpson needs an odd number (>= 3) of samples, got {n}"
        )));
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(dx / 3.0 * (values[0] + 4.0 * odd + 2.0 * even + values[n - 1]))
}

/// Composite trapezoid rule for samples on a uniform grid with spacing `dx`.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dx * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                v.exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let est = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-12, "{est:?}");
        assert_eq!(est.intervals, 1);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let est = integrate(|x| (-1e4 * x * x).exp(), -1.0, 1.0, Tolerance::default()).unwrap();
        assert!((est.value - (PI / 1e4).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let fwd = integrate(f64::sin, 0.0, 1.0, Tolerance::default()).unwrap().value;
        let rev = integrate(f64::sin, 1.0, 0.0, Tolerance::default()).unwrap().value;
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn semi_infinite_exponential() {
        let est = integrate_to_infinity(|x| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 0.0,
            max_intervals: 5,
        };
        let err = integrate(|x| 1.0 / x.abs().sqrt(), -1.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let xs = linspace(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        let got = simpson(&ys, 0.2).unwrap();
        assert!((got - (4.0 - 2.0)).abs() < 1e-13);
        assert!(simpson(&ys[..10], 0.2).is_err());
    }

    #[test]
    fn trapezoid_linear() {
        assert_eq!(trapezoid(&[0.0, 1.0, 2.0], 1.0), 2.0);
        assert_eq!(trapezoid(&[3.0], 1.0), 0.0);
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = logspace(1e-3, 1.0, 200);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[199], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
