//! Prior distributions on model parameters.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Param, Support};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Normal and LogNormal take a variance, Gamma a rate, InverseGamma a scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum Prior {
    Normal { mean: f64, var: f64 },
    Uniform { lower: f64, upper: f64 },
    Gamma { shape: f64, rate: f64 },
    #[serde(rename = "lognormal")]
    LogNormal { mean: f64, var: f64 },
    #[serde(rename = "inverse_gamma")]
    InverseGamma { shape: f64, scale: f64 },
}

impl Prior {
    pub fn name(&self) -> &'static str {
        match self {
            Prior::Normal { .. } => "normal",
            Prior::Uniform { .. } => "uniform",
            Prior::Gamma { .. } => "gamma",
            Prior::LogNormal { .. } => "lognormal",
            Prior::InverseGamma { .. } => "inverse_gamma",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Normal { mean, var } | Prior::LogNormal { mean, var } => {
                mean.is_finite() && var.is_finite() && var > 0.0
            }
            Prior::Uniform { lower, upper } => lower.is_finite() && upper.is_finite() && lower < upper,
            Prior::Gamma { shape, rate } => {
                shape.is_finite() && rate.is_finite() && shape > 0.0 && rate > 0.0
            }
            Prior::InverseGamma { shape, scale } => {
                shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPrior(format!("bad hyperparameters in {self:?}")))
        }
    }

    /// True when every point with positive density lies inside `support`.
    pub fn fits_support(&self, support: Support) -> bool {
        match support {
            Support::Real => true,
            Support::Positive => match *self {
                Prior::Normal { .. } => false,
                Prior::Uniform { lower, .. } => lower >= 0.0,
                Prior::Gamma { .. } | Prior::LogNormal { .. } | Prior::InverseGamma { .. } => true,
            },
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        match *self {
            Prior::Normal { mean, var } => -0.5 * (LN_2PI + var.ln()) - (x - mean).powi(2) / (2.0 * var),
            Prior::Uniform { lower, upper } => {
                if (lower..=upper).contains(&x) {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Prior::Gamma { shape, rate } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            Prior::LogNormal { mean, var } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let l = x.ln();
                -l - 0.5 * (LN_2PI + var.ln()) - (l - mean).powi(2) / (2.0 * var)
            }
            Prior::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Prior::Normal { mean, var } => Normal::new(mean, var.sqrt()).unwrap().sample(rng),
            Prior::Uniform { lower, upper } => rng.random_range(lower..upper),
            Prior::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).unwrap().sample(rng),
            Prior::LogNormal { mean, var } => Normal::new(mean, var.sqrt()).unwrap().sample(rng).exp(),
            Prior::InverseGamma { shape, scale } => {
                1.0 / Gamma::new(shape, 1.0 / scale).unwrap().sample(rng)
            }
        }
    }

    /// Draw restricted to `support` with finite log density.
    pub fn sample_truncated<R: Rng + ?Sized>(&self, rng: &mut R, support: Support) -> Result<f64> {
        for _ in 0..10_000 {
            let x = self.sample(rng);
            if support.contains(x) && self.log_density(x).is_finite() {
                return Ok(x);
            }
        }
        Err(Error::NonFiniteInitial(format!(
            "could not draw a finite-density value from {self:?}"
        )))
    }
}

/// One prior per free parameter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorSpec(pub BTreeMap<Param, Prior>);

impl PriorSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: Param, prior: Prior) -> Self {
        self.0.insert(p, prior);
        self
    }

    pub fn get(&self, p: Param) -> Option<&Prior> {
        self.0.get(&p)
    }

    /// Keeps only the priors of parameters present in `model`.
    pub fn restricted_to(&self, model: &ModelSpec) -> PriorSpec {
        let free = model.free_parameters();
        PriorSpec(
            self.0
                .iter()
                .filter(|(p, _)| free.contains(p))
                .map(|(p, d)| (*p, *d))
                .collect(),
        )
    }

    /// Exactly one prior per free parameter, each compatible with the parameter's support.
    pub fn validate_for(&self, model: &ModelSpec) -> Result<()> {
        let free = model.free_parameters();
        for p in &free {
            let prior = self
                .get(*p)
                .ok_or_else(|| Error::InvalidPrior(format!("missing prior for {}", p.name())))?;
            prior.validate()?;
            if !prior.fits_support(model.support(*p)) {
                return Err(Error::InvalidPrior(format!(
                    "{} prior puts mass outside the support of {}",
                    prior.name(),
                    p.name()
                )));
            }
        }
        if let Some(extra) = self.0.keys().find(|p| !free.contains(p)) {
            return Err(Error::InvalidPrior(format!(
                "prior given for {}, which the model does not have",
                extra.name()
            )));
        }
        Ok(())
    }

    /// Sum of prior log densities over the free parameters of `model`.
    pub fn log_density(&self, model: &ModelSpec) -> f64 {
        let mut lp = 0.0;
        for p in model.free_parameters() {
            let x = model.get(p).unwrap_or(f64::NAN);
            if !model.support(p).contains(x) {
                return f64::NEG_INFINITY;
            }
            lp += match self.get(p) {
                Some(d) => d.log_density(x),
                None => return f64::NEG_INFINITY,
            };
        }
        lp
    }
}
