//! The three kernel families (Gaussian, Gamma, Weibull), their derivatives,
//! and the closed-form roughness `R(K) = ∫K²` and second moment
//! `μ₂(K) = ∫u²K` that enter the AMISE.
//!
//! Gamma and Weibull kernels are one-sided: they vanish for `u < 0`, so a
//! KDE bump built from them sits to the right of its sample point.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, gamma_q, ln_gamma, normal_cdf, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Gamma,
    Weibull,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Gaussian, KernelFamily::Gamma, KernelFamily::Weibull];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Gamma => "gamma",
            KernelFamily::Weibull => "weibull",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "gamma" => Ok(KernelFamily::Gamma),
            "weibull" => Ok(KernelFamily::Weibull),
            other => Err(Error::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Which formula to use for the Gamma kernel's second moment.
///
/// `Literal` is `Γ(α+2)/Γ(α) = α(α+1)`, the value the closed-form fixed-point
/// coefficients are built on. The actual second moment of the Gamma density
/// is `α(α+1)/β²`; the two agree only at `β = 1`. Gaussian and Weibull kernels
/// are unaffected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentConvention {
    #[default]
    Literal,
    DimensionallyCorrected,
}

/// `R(K)` and `μ₂(K)` for one kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub roughness: f64,
    pub second_moment: f64,
}

/// A kernel family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum KernelSpec {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// Shape `alpha`, rate `beta`.
    Gamma {
        alpha: f64,
        beta: f64,
    },
    /// Scale `c`, shape `s`.
    Weibull {
        c: f64,
        s: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// `coef * z^p`, treating a zero coefficient as an exact zero even where
/// `z^p` blows up.
#[inline]
fn term(coef: f64, z: f64, p: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * z.powf(p)
    }
}

impl KernelSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { mu, sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        let k = KernelSpec::Gamma { alpha, beta };
        k.validate()?;
        Ok(k)
    }

    pub fn weibull(c: f64, s: f64) -> Result<Self> {
        let k = KernelSpec::Weibull { c, s };
        k.validate()?;
        Ok(k)
    }

    /// The parameter set fitted on IPIX clutter in the original study.
    pub fn reference(family: KernelFamily) -> Self {
        match family {
            KernelFamily::Gaussian => KernelSpec::Gaussian { mu: 0.32, sigma: 1.38 },
            KernelFamily::Gamma => KernelSpec::Gamma { alpha: 1.8, beta: 0.2 },
            KernelFamily::Weibull => KernelSpec::Weibull { c: 0.27, s: 2.0 },
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Gaussian { .. } => KernelFamily::Gaussian,
            KernelSpec::Gamma { .. } => KernelFamily::Gamma,
            KernelSpec::Weibull { .. } => KernelFamily::Weibull,
        }
    }

    /// Parameters in declaration order (`[mu, sigma]`, `[alpha, beta]`, `[c, s]`).
    pub fn params(&self) -> [f64; 2] {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => [mu, sigma],
            KernelSpec::Gamma { alpha, beta } => [alpha, beta],
            KernelSpec::Weibull { c, s } => [c, s],
        }
    }

    pub fn from_params(family: KernelFamily, p: [f64; 2]) -> Result<Self> {
        match family {
            KernelFamily::Gaussian => KernelSpec::gaussian(p[0], p[1]),
            KernelFamily::Gamma => KernelSpec::gamma(p[0], p[1]),
            KernelFamily::Weibull => KernelSpec::weibull(p[0], p[1]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(Error::Domain(format!("mu must be finite, got {mu}")));
                }
                positive("sigma", sigma)
            }
            KernelSpec::Gamma { alpha, beta } => positive("alpha", alpha).and(positive("beta", beta)),
            KernelSpec::Weibull { c, s } => positive("c", c).and(positive("s", s)),
        }
    }

    pub fn is_one_sided(&self) -> bool {
        !matches!(self, KernelSpec::Gaussian { .. })
    }

    /// Whether `K''` has a pole at `u = 0⁺`.
    ///
    /// Gamma: the `z^(α-3)` and `z^(α-2)` terms, unless their coefficients
    /// vanish (α = 1 or 2) or the exponents are non-negative (α ≥ 3).
    /// Weibull: likewise for `t^(s-3)` and `t^(2s-3)` with s = 1, 2 or s ≥ 3.
    pub fn has_singular_curvature(&self) -> bool {
        match *self {
            KernelSpec::Gaussian { .. } => false,
            KernelSpec::Gamma { alpha, .. } => alpha < 3.0 && alpha != 1.0 && alpha != 2.0,
            KernelSpec::Weibull { s, .. } => s < 3.0 && s != 1.0 && s != 2.0,
        }
    }

    /// Characteristic width used to size integration windows: σ for Gaussian,
    /// the mean α/β for Gamma and c·Γ(1 + 1/s) for Weibull.
    pub fn spread(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma, .. } => sigma,
            KernelSpec::Gamma { alpha, beta } => alpha / beta,
            KernelSpec::Weibull { c, s } => c * gamma(1.0 + 1.0 / s),
        }
    }

    /// Effective support in kernel units: `[μ ± m·σ]` for Gaussian and
    /// `[0, m·spread]` for the one-sided families.
    pub fn window(&self, multiplier: f64) -> (f64, f64) {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => (mu - multiplier * sigma, mu + multiplier * sigma),
            _ => (0.0, multiplier * self.spread()),
        }
    }

    /// Normalizing constant of the Gamma density, `β^α / Γ(α)`.
    fn gamma_norm(alpha: f64, beta: f64) -> f64 {
        (alpha * beta.ln() - ln_gamma(alpha)).exp()
    }

    /// Kernel density `K(u)`.
    pub fn pdf(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("kernel evaluated at non-finite u = {u}")));
        }
        match *self {
            KernelSpec::Gaussian { mu, sigma } => {
                let w = (u - mu) / sigma;
                Ok((-0.5 * w * w).exp() / ((2.0 * PI).sqrt() * sigma))
            }
            KernelSpec::Gamma { alpha, beta } => {
                if u < 0.0 {
                    return Ok(0.0);
                }
                if u == 0.0 && alpha < 1.0 {
                    return Err(Error::Singularity {
                        at: u,
                        msg: format!("Gamma kernel with alpha = {alpha} < 1 has a pole at 0"),
                    });
                }
                Ok(Self::gamma_norm(alpha, beta) * u.powf(alpha - 1.0) * (-beta * u).exp())
            }
            KernelSpec::Weibull { c, s } => {
                if u < 0.0 {
                    return Ok(0.0);
                }
                if u == 0.0 && s < 1.0 {
                    return Err(Error::Singularity {
                        at: u,
                        msg: format!("Weibull kernel with s = {s} < 1 has a pole at 0"),
                    });
                }
                let t = u / c;
                Ok(s / c * t.powf(s - 1.0) * (-t.powf(s)).exp())
            }
        }
    }

    /// Survival function `P(U > u)` of the kernel.
    pub fn sf(&self, u: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => normal_sf((u - mu) / sigma),
            KernelSpec::Gamma { alpha, beta } => gamma_q(alpha, beta * u),
            KernelSpec::Weibull { c, s } => {
                if u <= 0.0 {
                    1.0
                } else {
                    (-(u / c).powf(s)).exp()
                }
            }
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => normal_cdf((u - mu) / sigma),
            _ => 1.0 - self.sf(u),
        }
    }

    fn check_curvature_point(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("kernel derivative at non-finite u = {u}")));
        }
        if u == 0.0 && self.has_singular_curvature() {
            return Err(Error::Singularity {
                at: u,
                msg: format!("{self:?} has a non-removable pole in its derivatives at 0"),
            });
        }
        Ok(())
    }

    /// `K'(u)`.
    pub fn first_derivative(&self, u: f64) -> Result<f64> {
        self.check_curvature_point(u)?;
        match *self {
            KernelSpec::Gaussian { mu, sigma } => {
                let w = (u - mu) / sigma;
                Ok(-w * (-0.5 * w * w).exp() / ((2.0 * PI).sqrt() * sigma * sigma))
            }
            KernelSpec::Gamma { alpha, beta } => {
                if u < 0.0 {
                    return Ok(0.0);
                }
                let inner = term(alpha - 1.0, u, alpha - 2.0) - term(beta, u, alpha - 1.0);
                Ok(Self::gamma_norm(alpha, beta) * (-beta * u).exp() * inner)
            }
            KernelSpec::Weibull { c, s } => {
                if u < 0.0 {
                    return Ok(0.0);
                }
                let t = u / c;
                let inner = term(s - 1.0, t, s - 2.0) - term(s, t, 2.0 * s - 2.0);
                Ok(s / (c * c) * (-t.powf(s)).exp() * inner)
            }
        }
    }

    /// `K''(u)`, equal to `bracket_scale() * bracket(u)` away from `u = 0`.
    pub fn second_derivative(&self, u: f64) -> Result<f64> {
        self.check_curvature_point(u)?;
        if self.is_one_sided() && u < 0.0 {
            return Ok(0.0);
        }
        if u == 0.0 && self.is_one_sided() {
            // Right limit; only reachable when the pole terms vanish.
            let b = match *self {
                KernelSpec::Gamma { alpha, beta } => {
                    term((alpha - 1.0) * (alpha - 2.0), u, alpha - 3.0)
                        - term(2.0 * beta * (alpha - 1.0), u, alpha - 2.0)
                        + term(beta * beta, u, alpha - 1.0)
                }
                KernelSpec::Weibull { s, .. } => {
                    term((s - 1.0) * (s - 2.0), u, s - 3.0) - term(3.0 * s * (s - 1.0), u, 2.0 * s - 3.0)
                        + term(s * s, u, 3.0 * s - 3.0)
                }
                KernelSpec::Gaussian { .. } => unreachable!(),
            };
            return Ok(self.bracket_scale() * b);
        }
        Ok(self.bracket_scale() * self.bracket(u))
    }

    /// Constant factor pulled out of `K''`: `1/(√(2π)σ³)`, `β^α/Γ(α)` or `s/c³`.
    pub fn bracket_scale(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma, .. } => 1.0 / ((2.0 * PI).sqrt() * sigma.powi(3)),
            KernelSpec::Gamma { alpha, beta } => Self::gamma_norm(alpha, beta),
            KernelSpec::Weibull { c, s } => s / c.powi(3),
        }
    }

    /// The per-sample curvature term at `z`: `P(z)` (Gaussian), `G(z)` (Gamma)
    /// or `L(z)` (Weibull). One-sided kernels return 0 for `z <= 0`.
    #[inline]
    pub fn bracket(&self, z: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => {
                let w = (z - mu) / sigma;
                let w2 = w * w;
                (w2 - 1.0) * (-0.5 * w2).exp()
            }
            KernelSpec::Gamma { alpha, beta } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let lead = z.powf(alpha - 3.0);
                let poly = (alpha - 1.0) * (alpha - 2.0) - 2.0 * beta * (alpha - 1.0) * z + beta * beta * z * z;
                (-beta * z).exp() * lead * poly
            }
            KernelSpec::Weibull { c, s } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let t = z / c;
                let ts = t.powf(s);
                let poly = (s - 1.0) * (s - 2.0) - 3.0 * s * (s - 1.0) * ts + s * s * ts * ts;
                (-ts).exp() * (ts / (t * t * t)) * poly
            }
        }
    }

    /// `R(K) = ∫K²`.
    pub fn roughness(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            KernelSpec::Gaussian { sigma, .. } => Ok(1.0 / (2.0 * PI.sqrt() * sigma)),
            KernelSpec::Gamma { alpha, beta } => {
                if 2.0 * alpha - 1.0 <= 0.0 {
                    return Err(Error::Domain(format!(
                        "Gamma kernel roughness needs 2*alpha - 1 > 0, got alpha = {alpha}"
                    )));
                }
                let ln = 2.0 * (alpha * beta.ln() - ln_gamma(alpha)) + ln_gamma(2.0 * alpha - 1.0)
                    - (2.0 * alpha - 1.0) * (2.0 * beta).ln();
                Ok(ln.exp())
            }
            KernelSpec::Weibull { c, s } => {
                if s <= 0.5 {
                    return Err(Error::Domain(format!(
                        "Weibull kernel roughness needs s > 1/2, got s = {s}"
                    )));
                }
                let e = 2.0 - 1.0 / s;
                Ok(gamma(e) * s / (2f64.powf(e) * c))
            }
        }
    }

    /// `μ₂(K)`; see [`MomentConvention`] for the Gamma case.
    pub fn second_moment(&self, convention: MomentConvention) -> f64 {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => sigma * sigma + mu * mu,
            KernelSpec::Gamma { alpha, beta } => {
                let literal = (ln_gamma(alpha + 2.0) - ln_gamma(alpha)).exp();
                match convention {
                    MomentConvention::Literal => literal,
                    MomentConvention::DimensionallyCorrected => alpha * (alpha + 1.0) / (beta * beta),
                }
            }
            KernelSpec::Weibull { c, s } => c * c * gamma(2.0 / s + 1.0),
        }
    }

    pub fn constants(&self, convention: MomentConvention) -> Result<KernelConstants> {
        Ok(KernelConstants {
            roughness: self.roughness()?,
            second_moment: self.second_moment(convention),
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Gaussian { mu, sigma } => write!(f, "gaussian(mu={mu}, sigma={sigma})"),
            KernelSpec::Gamma { alpha, beta } => write!(f, "gamma(alpha={alpha}, beta={beta})"),
            KernelSpec::Weibull { c, s } => write!(f, "weibull(c={c}, s={s})"),
        }
    }
}
