//! Covariance functions.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::special::bessel_k;

/// Covariance family. Matérn carries its smoothness `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Linear,
    SquaredExponential,
    Matern { nu: f64 },
}

/// A validated kernel: family, lengthscale (input units) and scale (output variance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscale: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyName {
    Linear,
    SquaredExponential,
    Matern,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernelSpec {
    family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
    lengthscale: f64,
    scale: f64,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;
    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        let family = match (raw.family, raw.nu) {
            (FamilyName::Linear, None) => KernelFamily::Linear,
            (FamilyName::SquaredExponential, None) => KernelFamily::SquaredExponential,
            (FamilyName::Matern, Some(nu)) => KernelFamily::Matern { nu },
            (FamilyName::Matern, None) => return Err(Error::invalid("matern kernel requires `nu`")),
            (_, Some(_)) => return Err(Error::invalid("`nu` only applies to the matern kernel")),
        };
        KernelSpec::new(family, raw.lengthscale, raw.scale)
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(k: KernelSpec) -> Self {
        let (family, nu) = match k.family {
            KernelFamily::Linear => (FamilyName::Linear, None),
            KernelFamily::SquaredExponential => (FamilyName::SquaredExponential, None),
            KernelFamily::Matern { nu } => (FamilyName::Matern, Some(nu)),
        };
        RawKernelSpec {
            family,
            nu,
            lengthscale: k.lengthscale,
            scale: k.scale,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64, scale: f64) -> Result<Self> {
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(Error::invalid(format!("lengthscale must be positive, got {lengthscale}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!("scale must be positive, got {scale}")));
        }
        if let KernelFamily::Matern { nu } = family {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::invalid(format!("matern nu must be positive, got {nu}")));
            }
        }
        Ok(KernelSpec {
            family,
            lengthscale,
            scale,
        })
    }

    pub fn squared_exponential(lengthscale: f64, scale: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, lengthscale, scale)
    }

    pub fn matern(nu: f64, lengthscale: f64, scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern { nu }, lengthscale, scale)
    }

    pub fn linear(scale: f64) -> Result<Self> {
        Self::new(KernelFamily::Linear, 1.0, scale)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_hyperparams(&self, lengthscale: f64, scale: f64) -> Result<Self> {
        Self::new(self.family, lengthscale, scale)
    }

    /// Whether `k(x, x)` is the same for every `x`.
    pub fn is_stationary(&self) -> bool {
        !matches!(self.family, KernelFamily::Linear)
    }

    /// `k(x, x2)`; fails when the two points have different dimensions.
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        check_dim(x.len(), x2.len())?;
        Ok(self.eval_unchecked(x, x2))
    }

    /// `k(x, x2)` without the dimension check; callers guarantee equal lengths.
    pub(crate) fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Linear => self.scale * x.iter().zip(x2).map(|(a, b)| a * b).sum::<f64>(),
            KernelFamily::SquaredExponential => {
                let r2 = sq_dist(x, x2);
                self.scale * (-0.5 * r2 / (self.lengthscale * self.lengthscale)).exp()
            }
            KernelFamily::Matern { nu } => self.scale * matern_correlation(nu, sq_dist(x, x2).sqrt() / self.lengthscale),
        }
    }

    /// Prior variance `k(x, x)`.
    pub fn diag(&self, x: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Linear => self.scale * x.iter().map(|a| a * a).sum::<f64>(),
            _ => self.scale,
        }
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    spec.eval(x, x2)
}

fn sq_dist(x: &[f64], x2: &[f64]) -> f64 {
    x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `2^{1-nu}/Gamma(nu) * s^nu * K_nu(s)` with `s = sqrt(2 nu) * r`, where `r = z / rho`.
fn matern_correlation(nu: f64, r: f64) -> f64 {
    // closed forms for the common half-integer orders
    if nu == 0.5 {
        return (-r).exp();
    }
    if nu == 1.5 {
        let a = 3f64.sqrt() * r;
        return (1.0 + a) * (-a).exp();
    }
    if nu == 2.5 {
        let a = 5f64.sqrt() * r;
        return (1.0 + a + a * a / 3.0) * (-a).exp();
    }
    let s = (2.0 * nu).sqrt() * r;
    if s < 1e-12 {
        return 1.0;
    }
    let log_norm = (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu);
    let k = bessel_k(nu, s);
    if k == 0.0 {
        return 0.0;
    }
    (log_norm + nu * s.ln() + k.ln()).exp()
}
