//! Signed triggering functions `g(u) = alpha * f(u)` and the exponential-kernel recursion.
//!
//! `f` is a probability density on lags `u > 0`, so `alpha` is the expected
//! number of offspring per event when positive and an inhibition strength when
//! negative. Only the exponential family gets the `O(n)` recursion; the other
//! families are summed directly over the history.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::pattern::PointPattern;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum TriggerKernel {
    /// `g = 0`; the model degenerates to a (nonlinear) Poisson process.
    None,
    Exponential { alpha: f64, beta: f64 },
    Uniform { alpha: f64, beta: f64 },
    /// Half-normal on `(0, inf)` with precision `beta`.
    Gaussian { alpha: f64, beta: f64 },
    Triangle { alpha: f64, beta: f64 },
    Gamma { alpha: f64, beta: f64, nu: f64 },
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl TriggerKernel {
    pub fn exponential(alpha: f64, beta: f64) -> Self {
        TriggerKernel::Exponential { alpha, beta }
    }

    pub fn validate(&self) -> Result<()> {
        let (alpha, beta) = match *self {
            TriggerKernel::None => return Ok(()),
            TriggerKernel::Gamma { alpha, beta, nu } => {
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma kernel shape nu must be positive, got {nu}"
                    )));
                }
                (alpha, beta)
            }
            TriggerKernel::Exponential { alpha, beta }
            | TriggerKernel::Uniform { alpha, beta }
            | TriggerKernel::Gaussian { alpha, beta }
            | TriggerKernel::Triangle { alpha, beta } => (alpha, beta),
        };
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel alpha must be finite, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel beta must be positive, got {beta}"
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            TriggerKernel::None => "none",
            TriggerKernel::Exponential { .. } => "exponential",
            TriggerKernel::Uniform { .. } => "uniform",
            TriggerKernel::Gaussian { .. } => "gaussian",
            TriggerKernel::Triangle { .. } => "triangle",
            TriggerKernel::Gamma { .. } => "gamma",
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, TriggerKernel::None)
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            TriggerKernel::None => 0.0,
            TriggerKernel::Exponential { alpha, .. }
            | TriggerKernel::Uniform { alpha, .. }
            | TriggerKernel::Gaussian { alpha, .. }
            | TriggerKernel::Triangle { alpha, .. }
            | TriggerKernel::Gamma { alpha, .. } => alpha,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            TriggerKernel::None => None,
            TriggerKernel::Exponential { beta, .. }
            | TriggerKernel::Uniform { beta, .. }
            | TriggerKernel::Gaussian { beta, .. }
            | TriggerKernel::Triangle { beta, .. }
            | TriggerKernel::Gamma { beta, .. } => Some(beta),
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match *self {
            TriggerKernel::Gamma { nu, .. } => Some(nu),
            _ => None,
        }
    }

    pub(crate) fn alpha_mut(&mut self) -> Option<&mut f64> {
        match self {
            TriggerKernel::None => None,
            TriggerKernel::Exponential { alpha, .. }
            | TriggerKernel::Uniform { alpha, .. }
            | TriggerKernel::Gaussian { alpha, .. }
            | TriggerKernel::Triangle { alpha, .. }
            | TriggerKernel::Gamma { alpha, .. } => Some(alpha),
        }
    }

    pub(crate) fn beta_mut(&mut self) -> Option<&mut f64> {
        match self {
            TriggerKernel::None => None,
            TriggerKernel::Exponential { beta, .. }
            | TriggerKernel::Uniform { beta, .. }
            | TriggerKernel::Gaussian { beta, .. }
            | TriggerKernel::Triangle { beta, .. }
            | TriggerKernel::Gamma { beta, .. } => Some(beta),
        }
    }

    pub(crate) fn nu_mut(&mut self) -> Option<&mut f64> {
        match self {
            TriggerKernel::Gamma { nu, .. } => Some(nu),
            _ => None,
        }
    }

    /// Normalized density `f(u)` for a lag `u > 0`.
    #[inline]
    pub fn density(&self, u: f64) -> f64 {
        match *self {
            TriggerKernel::None => 0.0,
            TriggerKernel::Exponential { beta, .. } => beta * (-beta * u).exp(),
            TriggerKernel::Uniform { beta, .. } => {
                if u < beta {
                    1.0 / beta
                } else {
                    0.0
                }
            }
            TriggerKernel::Gaussian { beta, .. } => {
                2.0 * INV_SQRT_2PI * beta.sqrt() * (-0.5 * beta * u * u).exp()
            }
            TriggerKernel::Triangle { beta, .. } => {
                if u < beta {
                    2.0 / beta * (1.0 - u / beta)
                } else {
                    0.0
                }
            }
            TriggerKernel::Gamma { beta, nu, .. } => {
                (nu * beta.ln() - ln_gamma(nu) + (nu - 1.0) * u.ln() - beta * u).exp()
            }
        }
    }

    /// `g(u)` without the positivity check on `u`.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match self {
            TriggerKernel::None => 0.0,
            _ => self.alpha() * self.density(u),
        }
    }

    /// `g(dt)` for a strictly positive lag.
    pub fn eval(&self, dt: f64) -> Result<f64> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kernel lag must be positive, got {dt}"
            )));
        }
        Ok(self.value(dt))
    }

    /// Right limit `g(0+)`; infinite for a gamma kernel with `nu < 1` and `alpha != 0`.
    pub fn value_at_zero(&self) -> f64 {
        let alpha = self.alpha();
        match *self {
            TriggerKernel::None => 0.0,
            TriggerKernel::Exponential { beta, .. } => alpha * beta,
            TriggerKernel::Uniform { beta, .. } => alpha / beta,
            TriggerKernel::Gaussian { beta, .. } => alpha * 2.0 * INV_SQRT_2PI * beta.sqrt(),
            TriggerKernel::Triangle { beta, .. } => 2.0 * alpha / beta,
            TriggerKernel::Gamma { beta, nu, .. } => {
                if alpha == 0.0 {
                    0.0
                } else if nu < 1.0 {
                    alpha.signum() * f64::INFINITY
                } else if nu == 1.0 {
                    alpha * beta
                } else {
                    0.0
                }
            }
        }
    }

    /// Supremum of `max(g(u), 0)` over lags `u` in `[lo, hi]`, `0 <= lo <= hi`.
    pub fn sup_positive_on(&self, lo: f64, hi: f64) -> f64 {
        let alpha = self.alpha();
        if alpha <= 0.0 {
            return 0.0;
        }
        let at = |u: f64| {
            if u <= 0.0 {
                self.value_at_zero()
            } else {
                self.value(u)
            }
        };
        match *self {
            TriggerKernel::None => 0.0,
            TriggerKernel::Exponential { .. } | TriggerKernel::Gaussian { .. } => at(lo),
            TriggerKernel::Uniform { beta, .. } | TriggerKernel::Triangle { beta, .. } => {
                if lo < beta {
                    at(lo)
                } else {
                    0.0
                }
            }
            TriggerKernel::Gamma { beta, nu, .. } => {
                if nu <= 1.0 {
                    at(lo)
                } else {
                    at(((nu - 1.0) / beta).clamp(lo, hi))
                }
            }
        }
    }

    /// Direct sum `sum_{t_i in history, t_i < s} g(s - t_i)`.
    pub fn sum_over(&self, history: &[f64], s: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let mut total = 0.0;
        for &ti in history.iter().rev() {
            if ti >= s {
                continue;
            }
            let u = s - ti;
            if let TriggerKernel::Uniform { beta, .. } | TriggerKernel::Triangle { beta, .. } =
                *self
            {
                if u >= beta {
                    break;
                }
            }
            total += self.value(u);
        }
        total
    }
}

/// Ogata's recursion `A_i = exp(-beta (t_i - t_{i-1})) (1 + A_{i-1})`, `A_1 = 0`.
///
/// `A_i = sum_{j < i} exp(-beta (t_i - t_j))`, so the exponential kernel sum at
/// event `i` over its strict history is `alpha * beta * A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpRecursionState {
    a: Vec<f64>,
    beta: f64,
    n: usize,
}

impl ExpRecursionState {
    pub fn build(pattern: &PointPattern, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "recursion needs beta > 0, got {beta}"
            )));
        }
        let ev = pattern.events();
        let mut a = Vec::with_capacity(ev.len());
        for (i, &t) in ev.iter().enumerate() {
            if i == 0 {
                a.push(0.0);
            } else {
                let prev = a[i - 1];
                a.push((-beta * (t - ev[i - 1])).exp() * (1.0 + prev));
            }
        }
        Ok(Self {
            a,
            beta,
            n: ev.len(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn matches(&self, pattern: &PointPattern, beta: f64) -> bool {
        self.n == pattern.len() && self.beta.to_bits() == beta.to_bits()
    }
}

pub fn build_recursion(pattern: &PointPattern, beta: f64) -> Result<ExpRecursionState> {
    ExpRecursionState::build(pattern, beta)
}

/// Kernel sum over the strict history of `s`, `sum_{t_i < s} g(s - t_i)`.
///
/// With a matching recursion state the exponential family costs one binary
/// search and one `exp`; every other case is a direct sum.
pub fn kernel_sum_at(
    kernel: &TriggerKernel,
    pattern: &PointPattern,
    s: f64,
    state: Option<&ExpRecursionState>,
) -> Result<f64> {
    if !(s.is_finite() && (0.0..=pattern.horizon()).contains(&s)) {
        return Err(Error::OutOfWindow {
            t: s,
            horizon: pattern.horizon(),
        });
    }
    match (kernel, state) {
        (TriggerKernel::None, _) => Ok(0.0),
        (TriggerKernel::Exponential { alpha, beta }, Some(st)) => {
            if !st.matches(pattern, *beta) {
                return Err(Error::InconsistentState {
                    beta: st.beta,
                    n: st.n,
                });
            }
            let k = pattern.count_before(s);
            if k == 0 {
                return Ok(0.0);
            }
            let i = k - 1;
            let ti = pattern.events()[i];
            Ok(alpha * beta * (-beta * (s - ti)).exp() * (1.0 + st.a[i]))
        }
        _ => {
            let hist = &pattern.events()[..pattern.count_before(s)];
            Ok(kernel.sum_over(hist, s))
        }
    }
}
