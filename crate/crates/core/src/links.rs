//! Monotone link functions `h: R -> R+` applied to the pre-link intensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaling inside the base-10 soft-plus, `log10(1 + exp(2.3 x))`.
///
/// Kept at the literal 2.3 rather than `ln 10`.
pub const LOG10_SOFTPLUS_SCALE: f64 = 2.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "link", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkFunction {
    Identity,
    /// Power Tobit / rectifier, `max(0, x)^eta`.
    Power { eta: f64 },
    #[serde(rename = "softplus")]
    SoftPlus,
    #[serde(rename = "log10_softplus")]
    Log10SoftPlus,
    #[serde(rename = "exp")]
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSign {
    Exciting,
    Inhibiting,
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl LinkFunction {
    pub fn tobit() -> Self {
        LinkFunction::Power { eta: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let LinkFunction::Power { eta } = *self {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power link exponent must be positive, got {eta}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            LinkFunction::Identity => "identity".into(),
            LinkFunction::Power { eta } => format!("power(eta={eta})"),
            LinkFunction::SoftPlus => "softplus".into(),
            LinkFunction::Log10SoftPlus => "log10_softplus".into(),
            LinkFunction::Exponential => "exp".into(),
        }
    }

    /// `h(x)`; the identity link refuses negative arguments.
    #[inline]
    pub fn apply(&self, x: f64) -> Result<f64> {
        match *self {
            LinkFunction::Identity => {
                if x < 0.0 {
                    Err(Error::LinkMisuse(x))
                } else {
                    Ok(x)
                }
            }
            _ => Ok(self.apply_clamped(x)),
        }
    }

    /// `h(x)` with the identity link clamped at zero instead of failing.
    #[inline]
    pub fn apply_clamped(&self, x: f64) -> f64 {
        match *self {
            LinkFunction::Identity => x.max(0.0),
            LinkFunction::Power { eta } => {
                if x <= 0.0 {
                    0.0
                } else if eta == 1.0 {
                    x
                } else {
                    x.powf(eta)
                }
            }
            LinkFunction::SoftPlus => softplus(x),
            LinkFunction::Log10SoftPlus => softplus(LOG10_SOFTPLUS_SCALE * x) / std::f64::consts::LN_10,
            LinkFunction::Exponential => x.exp(),
        }
    }

    /// Whether the link keeps the nonlinear process stable for the given
    /// direction of the kernel. Advisory only.
    pub fn is_lipschitz_stable(&self, sign: AlphaSign) -> (bool, &'static str) {
        match (*self, sign) {
            (LinkFunction::Exponential, AlphaSign::Exciting) => (
                false,
                "exp link is not Lipschitz; an exciting kernel can explode",
            ),
            (LinkFunction::Exponential, AlphaSign::Inhibiting) => (
                true,
                "exp link with an inhibiting kernel cannot explode",
            ),
            (LinkFunction::Power { eta }, AlphaSign::Exciting) if eta > 1.0 => (
                false,
                "power link with eta > 1 is not Lipschitz; an exciting kernel can explode",
            ),
            (LinkFunction::Power { eta }, AlphaSign::Inhibiting) if eta > 1.0 => (
                true,
                "power link with an inhibiting kernel cannot explode",
            ),
            (LinkFunction::Power { .. }, _) => (true, "power link with eta <= 1 is Lipschitz"),
            (LinkFunction::Identity, _) => (true, "identity link is Lipschitz"),
            (LinkFunction::SoftPlus, _) | (LinkFunction::Log10SoftPlus, _) => {
                (true, "soft-plus links are Lipschitz")
            }
        }
    }
}
