//! Ogata thinning for evolutionary point processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::TriggerKernel;
use crate::model::{LatentGP, ModelSpec};
use crate::pattern::PointPattern;

fn default_scale() -> f64 {
    1.0
}
fn default_budget() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThinningConfig {
    /// Lookahead is `min(remaining, lookahead_scale / previous bound)`.
    #[serde(default = "default_scale")]
    pub lookahead_scale: f64,
    #[serde(default = "default_budget")]
    pub event_budget: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for ThinningConfig {
    fn default() -> Self {
        Self {
            lookahead_scale: default_scale(),
            event_budget: default_budget(),
            rng_seed: 0,
        }
    }
}

impl ThinningConfig {
    pub fn seeded(rng_seed: u64) -> Self {
        Self {
            rng_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.event_budget == 0 {
            return Err(Error::Config("event_budget must be positive".into()));
        }
        if !(self.lookahead_scale > 0.0 && self.lookahead_scale.is_finite()) {
            return Err(Error::Config("lookahead_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Running kernel state during simulation.
struct History {
    events: Vec<f64>,
    /// Exponential kernel only: kernel value just after the last event.
    after_last: f64,
}

impl History {
    fn kernel_at(&self, kernel: &TriggerKernel, s: f64) -> f64 {
        match *kernel {
            TriggerKernel::None => 0.0,
            TriggerKernel::Exponential { beta, .. } => match self.events.last() {
                Some(&tl) => self.after_last * (-beta * (s - tl)).exp(),
                None => 0.0,
            },
            _ => kernel.sum_over(&self.events, s),
        }
    }

    fn push(&mut self, kernel: &TriggerKernel, t: f64) {
        if let TriggerKernel::Exponential { alpha, beta } = *kernel {
            self.after_last = self.kernel_at(kernel, t) + alpha * beta;
        }
        self.events.push(t);
    }
}

/// Upper bound on `lambda*` over `[t, t + window]` given the events so far (all `<= t`).
///
/// Background is bounded by its window supremum; each excitation term by its
/// largest positive value over the window lags; inhibition terms are dropped.
pub fn valid_upper_bound(model: &ModelSpec, t: f64, history: &[f64], window: f64) -> f64 {
    let bg = model.background.sup_on(t, t + window);
    let k = positive_kernel_sup(&model.kernel, history, t, window, None);
    model.link.apply_clamped(bg + k)
}

fn positive_kernel_sup(
    kernel: &TriggerKernel,
    history: &[f64],
    t: f64,
    window: f64,
    after_last: Option<f64>,
) -> f64 {
    match *kernel {
        TriggerKernel::None => 0.0,
        TriggerKernel::Exponential { alpha, beta } => {
            if alpha <= 0.0 {
                return 0.0;
            }
            // decaying sum: supremum at the right limit at t
            match (after_last, history.last()) {
                (Some(a), Some(&tl)) => a * (-beta * (t - tl)).exp(),
                _ => history
                    .iter()
                    .map(|&ti| alpha * beta * (-beta * (t - ti)).exp())
                    .sum(),
            }
        }
        _ => {
            if kernel.alpha() <= 0.0 {
                return 0.0;
            }
            history
                .iter()
                .rev()
                .map(|&ti| kernel.sup_positive_on(t - ti, t + window - ti))
                .sum()
        }
    }
}

/// One realization on `(0, t_end]`.
pub fn simulate_thinning(model: &ModelSpec, t_end: f64, config: &ThinningConfig) -> Result<PointPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    simulate_with_rng(model, t_end, config, &mut rng)
}

pub fn simulate_with_rng<R: Rng + ?Sized>(
    model: &ModelSpec,
    t_end: f64,
    config: &ThinningConfig,
    rng: &mut R,
) -> Result<PointPattern> {
    config.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "simulation horizon must be positive, got {t_end}"
        )));
    }
    let model = model.clone().bind(t_end)?;
    model.validate()?;
    let kernel = model.kernel;
    let mut hist = History {
        events: Vec::new(),
        after_last: 0.0,
    };
    let mut t = 0.0;
    let mut prev_bound = valid_upper_bound(&model, 0.0, &[], 0.0);

    while t < t_end {
        let remaining = t_end - t;
        let l = if prev_bound > 0.0 {
            remaining.min(config.lookahead_scale / prev_bound)
        } else {
            remaining
        };
        let bg = model.background.sup_on(t, t + l);
        let ks = positive_kernel_sup(
            &kernel,
            &hist.events,
            t,
            l,
            matches!(kernel, TriggerKernel::Exponential { .. }).then_some(hist.after_last),
        );
        let bound = model.link.apply_clamped(bg + ks);
        if !bound.is_finite() {
            // runaway growth overflowed before the budget was reached
            return Err(Error::Instability {
                budget: config.event_budget,
                link: model.link.name().to_string(),
                alpha: kernel.alpha(),
            });
        }
        prev_bound = bound;
        if bound <= 0.0 {
            t = if l == remaining { t_end } else { t + l };
            continue;
        }
        let w: f64 = Exp::new(bound).unwrap().sample(rng);
        if w > l {
            t = if l == remaining { t_end } else { t + l };
            continue;
        }
        t += w;
        let u: f64 = rng.random();
        let bg_t = model.background.at(t)?;
        let lam = model.intensity_from_parts(bg_t, hist.kernel_at(&kernel, t));
        debug_assert!(
            lam <= bound * (1.0 + 1e-9) + 1e-12,
            "intensity {lam} exceeds thinning bound {bound} at t = {t}"
        );
        if u * bound <= lam {
            if hist.events.len() >= config.event_budget {
                return Err(Error::Instability {
                    budget: config.event_budget,
                    link: model.link.name().to_string(),
                    alpha: kernel.alpha(),
                });
            }
            hist.push(&kernel, t);
        }
    }
    if hist.events.last().is_some_and(|&tn| tn > t_end) {
        hist.events.pop();
    }
    PointPattern::new(hist.events, t_end)
}

/// Draw of gridded effects from the AR(1) prior on `(0, horizon]`.
pub fn sample_latent_gp<R: Rng + ?Sized>(
    horizon: f64,
    size: usize,
    sigma2: f64,
    phi: f64,
    rng: &mut R,
) -> Result<LatentGP> {
    let mut gp = LatentGP::new(horizon, size, sigma2, phi)?;
    let rho = gp.rho();
    let sd = sigma2.sqrt();
    let cond_sd = (sigma2 * -(-2.0 * phi * gp.spacing()).exp_m1()).sqrt();
    let mut w = Vec::with_capacity(size);
    let z: f64 = StandardNormal.sample(rng);
    w.push(sd * z);
    for j in 1..size {
        let z: f64 = StandardNormal.sample(rng);
        w.push(rho * w[j - 1] + cond_sd * z);
    }
    gp.set_effects(&w)?;
    Ok(gp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::links::LinkFunction;

    #[test]
    fn bound_examples() {
        let hpp = ModelSpec::hpp(1.0);
        assert_eq!(valid_upper_bound(&hpp, 3.0, &[1.0], 2.0), 1.0);
        let exc = ModelSpec::hawkes(1.0, 0.5, 2.0, LinkFunction::tobit());
        let b = valid_upper_bound(&exc, 1.0, &[1.0], 0.5);
        assert!((b - 2.0).abs() < 1e-12);
        let inh = ModelSpec::hawkes(1.0, -0.5, 2.0, LinkFunction::tobit());
        assert_eq!(valid_upper_bound(&inh, 1.0, &[1.0], 0.5), 1.0);
    }

    #[test]
    fn deterministic_and_in_window() {
        let m = ModelSpec::hawkes(1.0, 0.5, 1.0, LinkFunction::tobit());
        let a = simulate_thinning(&m, 50.0, &ThinningConfig::seeded(4)).unwrap();
        let b = simulate_thinning(&m, 50.0, &ThinningConfig::seeded(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.events().iter().all(|&t| t > 0.0 && t <= 50.0));
    }

    #[test]
    fn budget_guard() {
        let m = ModelSpec::hawkes(0.0, 1.5, 1.0, LinkFunction::Exponential)
            .with_quad_points(100);
        let mut m = m;
        m.background = crate::model::BackgroundModel::log_linear(0.0, None, None);
        let cfg = ThinningConfig {
            event_budget: 500,
            ..ThinningConfig::seeded(1)
        };
        match simulate_thinning(&m, 1000.0, &cfg) {
            Err(Error::Instability { budget, .. }) => assert_eq!(budget, 500),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn gp_draw_has_prior_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut acc = 0.0;
        let reps = 400;
        for _ in 0..reps {
            let gp = sample_latent_gp(100.0, 50, 2.0, 0.3, &mut rng).unwrap();
            acc += gp.effects().iter().map(|w| w * w).sum::<f64>() / 50.0;
        }
        assert!((acc / reps as f64 - 2.0).abs() < 0.15);
    }
}
