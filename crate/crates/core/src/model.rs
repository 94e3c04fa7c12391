//! Conditional intensity `h(mu(t) + sum_{t_i < t} g(t - t_i))`, its compensator
//! and the point-process log-likelihood.
//!
//! The compensator is integrated with the trapezoid rule on an even base grid of
//! `quad_points` intervals, augmented with every event time (where the
//! intensity jumps) and, for gridded latent-GP backgrounds, every cell boundary.
//! Within each resulting segment the history is fixed, so the left end uses the
//! right limit of the intensity and the right end the left limit. For the
//! exponential kernel a segment spanning several decay lengths is further
//! split on a geometric ladder in `1 / beta`, so fast-decaying excitation on a
//! coarse grid is still integrated accurately.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ExpRecursionState, TriggerKernel};
use crate::links::LinkFunction;
use crate::pattern::PointPattern;

pub const DEFAULT_QUAD_POINTS: usize = 10_000;
pub const MIN_QUAD_POINTS: usize = 100;
pub const DEFAULT_PERIOD: f64 = 24.0;
pub const DEFAULT_GP_SIZE: usize = 100;

fn default_quad_points() -> usize {
    DEFAULT_QUAD_POINTS
}

fn default_period() -> f64 {
    DEFAULT_PERIOD
}

/// Named model parameters, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Mu,
    Gamma1,
    Gamma2,
    Alpha,
    Beta,
    Nu,
    Sigma2,
    Phi,
}

impl Param {
    pub const ALL: [Param; 8] = [
        Param::Mu,
        Param::Gamma1,
        Param::Gamma2,
        Param::Alpha,
        Param::Beta,
        Param::Nu,
        Param::Sigma2,
        Param::Phi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Param::Mu => "mu",
            Param::Gamma1 => "gamma1",
            Param::Gamma2 => "gamma2",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Nu => "nu",
            Param::Sigma2 => "sigma2",
            Param::Phi => "phi",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == name)
    }

    /// GP hyperparameters only enter the latent-field prior, not the likelihood.
    pub fn enters_likelihood(&self) -> bool {
        !matches!(self, Param::Sigma2 | Param::Phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Real,
    Positive,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Support::Real => x.is_finite(),
            Support::Positive => x.is_finite() && x > 0.0,
        }
    }
}

/// Gridded latent Gaussian process with exponential covariance
/// `sigma2 * exp(-phi |t - t'|)`.
///
/// The grid has `size` cells of equal width over `(0, horizon]`; grid time `j`
/// is the centre of cell `(j h, (j+1) h]`, so the nearest grid time to `t` is
/// the cell containing `t` and ties at boundaries go to the earlier point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGp", into = "RawGp")]
pub struct LatentGP {
    horizon: f64,
    w: Vec<f64>,
    sigma2: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGp {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(default)]
    size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<Vec<f64>>,
    sigma2: f64,
    phi: f64,
}

impl TryFrom<RawGp> for LatentGP {
    type Error = Error;

    fn try_from(raw: RawGp) -> Result<Self> {
        let w = match (raw.w, raw.size) {
            (Some(w), Some(size)) if w.len() != size => {
                return Err(Error::Config(format!(
                    "gp.w has {} entries but gp.size = {size}",
                    w.len()
                )))
            }
            (Some(w), _) => w,
            (None, size) => vec![0.0; size.unwrap_or(DEFAULT_GP_SIZE)],
        };
        let gp = LatentGP {
            horizon: raw.horizon.unwrap_or(0.0),
            w,
            sigma2: raw.sigma2,
            phi: raw.phi,
        };
        gp.validate_values()?;
        Ok(gp)
    }
}

impl From<LatentGP> for RawGp {
    fn from(gp: LatentGP) -> Self {
        RawGp {
            horizon: (gp.horizon > 0.0).then_some(gp.horizon),
            size: Some(gp.w.len()),
            w: Some(gp.w),
            sigma2: gp.sigma2,
            phi: gp.phi,
        }
    }
}

impl LatentGP {
    pub fn new(horizon: f64, size: usize, sigma2: f64, phi: f64) -> Result<Self> {
        let gp = Self {
            horizon,
            w: vec![0.0; size],
            sigma2,
            phi,
        };
        gp.validate_values()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gp horizon must be positive, got {horizon}"
            )));
        }
        Ok(gp)
    }

    fn validate_values(&self) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::InvalidParameter("gp grid must be non-empty".into()));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gp sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if !(self.phi.is_finite() && self.phi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gp phi must be positive, got {}",
                self.phi
            )));
        }
        if self.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("gp effects must be finite".into()));
        }
        Ok(())
    }

    pub fn is_bound(&self) -> bool {
        self.horizon > 0.0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn size(&self) -> usize {
        self.w.len()
    }

    pub fn spacing(&self) -> f64 {
        self.horizon / self.w.len() as f64
    }

    pub fn grid_times(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.size()).map(|j| (j as f64 + 0.5) * h).collect()
    }

    pub fn effects(&self) -> &[f64] {
        &self.w
    }

    pub fn set_effects(&mut self, w: &[f64]) -> Result<()> {
        if w.len() != self.w.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} gp effects, got {}",
                self.w.len(),
                w.len()
            )));
        }
        self.w.copy_from_slice(w);
        Ok(())
    }

    pub(crate) fn effects_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Index of the grid point nearest to `t` (earlier point on ties).
    #[inline]
    pub fn cell_of(&self, t: f64) -> usize {
        let g = self.w.len();
        let x = (t / self.spacing()).ceil() - 1.0;
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(g - 1)
        }
    }

    #[inline]
    pub fn value_at(&self, t: f64) -> f64 {
        self.w[self.cell_of(t)]
    }

    /// Lag-one autocorrelation between neighbouring grid points.
    pub fn rho(&self) -> f64 {
        (-self.phi * self.spacing()).exp()
    }

    fn one_minus_rho2(&self) -> f64 {
        -(-2.0 * self.phi * self.spacing()).exp_m1()
    }

    /// Sequential AR(1) log density of the effects:
    /// `w_1 ~ N(0, s2)`, `w_j | w_{j-1} ~ N(rho w_{j-1}, s2 (1 - rho^2))`.
    pub fn log_prior(&self) -> f64 {
        let rho = self.rho();
        let c = self.one_minus_rho2();
        let s2 = self.sigma2;
        let ln2pi = (2.0 * PI).ln();
        let mut lp = -0.5 * (ln2pi + s2.ln()) - self.w[0] * self.w[0] / (2.0 * s2);
        let cond_var = s2 * c;
        let norm = -0.5 * (ln2pi + cond_var.ln());
        for j in 1..self.w.len() {
            let r = self.w[j] - rho * self.w[j - 1];
            lp += norm - r * r / (2.0 * cond_var);
        }
        lp
    }

    /// Terms of the AR(1) log density that involve effect `j` when it takes `value`.
    pub fn log_prior_local(&self, j: usize, value: f64) -> f64 {
        let rho = self.rho();
        let cond_var = self.sigma2 * self.one_minus_rho2();
        let mut lp = if j == 0 {
            -value * value / (2.0 * self.sigma2)
        } else {
            let r = value - rho * self.w[j - 1];
            -r * r / (2.0 * cond_var)
        };
        if j + 1 < self.w.len() {
            let r = self.w[j + 1] - rho * value;
            lp -= r * r / (2.0 * cond_var);
        }
        lp
    }

    /// Quadratic form `w' R^{-1} w` of the unit-variance AR(1) correlation.
    pub fn standardized_quadratic(&self) -> f64 {
        let rho = self.rho();
        let c = self.one_minus_rho2();
        let mut q = self.w[0] * self.w[0];
        for j in 1..self.w.len() {
            let r = self.w[j] - rho * self.w[j - 1];
            q += r * r / c;
        }
        q
    }

    fn max_over(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = (self.cell_of(lo), self.cell_of(hi));
        self.w[a..=b].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Daily (or other periodic) harmonic `gamma1 sin(2 pi t / period) + gamma2 cos(2 pi t / period)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seasonal {
    pub gamma1: f64,
    pub gamma2: f64,
    #[serde(default = "default_period")]
    pub period: f64,
}

impl Seasonal {
    #[inline]
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let (s, c) = (self.omega() * t).sin_cos();
        self.gamma1 * s + self.gamma2 * c
    }

    /// Supremum of the harmonic over `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        let amp = self.gamma1.hypot(self.gamma2);
        if amp == 0.0 {
            return 0.0;
        }
        let w = self.omega();
        if w * (hi - lo) >= 2.0 * PI {
            return amp;
        }
        // gamma1 sin x + gamma2 cos x = amp sin(x + psi), maximal at x = pi/2 - psi + 2 pi m
        let psi = self.gamma2.atan2(self.gamma1);
        let base = PI / 2.0 - psi;
        let m = ((w * lo - base) / (2.0 * PI)).ceil();
        let peak = base + 2.0 * PI * m;
        if peak <= w * hi {
            amp
        } else {
            self.value(lo).max(self.value(hi))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundForm {
    /// `mu(t) = mu`, a direct positive rate.
    Constant,
    /// `mu(t) = exp(mu + harmonic(t) + w(t))`.
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackgroundKind {
    Constant,
    LogLinearSeasonal,
    LogLinearSeasonalGP,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundModel {
    pub form: BackgroundForm,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seasonal: Option<Seasonal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gp: Option<LatentGP>,
}

impl BackgroundModel {
    pub fn constant(mu: f64) -> Self {
        Self {
            form: BackgroundForm::Constant,
            mu,
            seasonal: None,
            gp: None,
        }
    }

    pub fn log_linear(mu: f64, seasonal: Option<Seasonal>, gp: Option<LatentGP>) -> Self {
        Self {
            form: BackgroundForm::LogLinear,
            mu,
            seasonal,
            gp,
        }
    }

    pub fn kind(&self) -> BackgroundKind {
        match (self.form, &self.gp) {
            (BackgroundForm::Constant, _) => BackgroundKind::Constant,
            (BackgroundForm::LogLinear, None) => BackgroundKind::LogLinearSeasonal,
            (BackgroundForm::LogLinear, Some(_)) => BackgroundKind::LogLinearSeasonalGP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "background mu must be finite, got {}",
                self.mu
            )));
        }
        match self.form {
            BackgroundForm::Constant => {
                if self.mu <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "constant background needs mu > 0, got {}",
                        self.mu
                    )));
                }
                if self.seasonal.is_some() || self.gp.is_some() {
                    return Err(Error::InvalidParameter(
                        "constant background takes no seasonal or gp terms".into(),
                    ));
                }
            }
            BackgroundForm::LogLinear => {
                if let Some(s) = &self.seasonal {
                    if !(s.period.is_finite() && s.period > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "seasonal period must be positive, got {}",
                            s.period
                        )));
                    }
                    if !(s.gamma1.is_finite() && s.gamma2.is_finite()) {
                        return Err(Error::InvalidParameter(
                            "seasonal coefficients must be finite".into(),
                        ));
                    }
                }
                if let Some(gp) = &self.gp {
                    gp.validate_values()?;
                }
            }
        }
        Ok(())
    }

    /// Log-scale part without the latent field, `mu + harmonic(t)`.
    #[inline]
    fn log_part(&self, t: f64) -> f64 {
        self.mu + self.seasonal.map_or(0.0, |s| s.value(t))
    }

    /// Background rate `mu(t)`; `t` must be nonnegative (and inside the GP window).
    pub fn at(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::OutOfWindow {
                t,
                horizon: self.gp.as_ref().map_or(f64::INFINITY, |g| g.horizon),
            });
        }
        match self.form {
            BackgroundForm::Constant => Ok(self.mu),
            BackgroundForm::LogLinear => {
                let w = match &self.gp {
                    Some(gp) => {
                        if !gp.is_bound() {
                            return Err(Error::Config(
                                "gp background is not bound to an observation window".into(),
                            ));
                        }
                        if t > gp.horizon {
                            return Err(Error::OutOfWindow {
                                t,
                                horizon: gp.horizon,
                            });
                        }
                        gp.value_at(t)
                    }
                    None => 0.0,
                };
                Ok((self.log_part(t) + w).exp())
            }
        }
    }

    #[inline]
    fn at_unchecked(&self, t: f64) -> f64 {
        match self.form {
            BackgroundForm::Constant => self.mu,
            BackgroundForm::LogLinear => {
                let w = self.gp.as_ref().map_or(0.0, |g| g.value_at(t));
                (self.log_part(t) + w).exp()
            }
        }
    }

    /// Upper bound of `mu(s)` for `s` in `[lo, hi]`.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        match self.form {
            BackgroundForm::Constant => self.mu,
            BackgroundForm::LogLinear => {
                let harm = self.seasonal.map_or(0.0, |s| s.sup_on(lo, hi));
                let w = self.gp.as_ref().map_or(0.0, |g| g.max_over(lo, hi));
                (self.mu + harm + w).exp()
            }
        }
    }
}

pub fn background_at(bg: &BackgroundModel, t: f64) -> Result<f64> {
    bg.at(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub background: BackgroundModel,
    pub kernel: TriggerKernel,
    pub link: LinkFunction,
    #[serde(default = "default_quad_points")]
    pub quad_points: usize,
}

impl ModelSpec {
    pub fn new(background: BackgroundModel, kernel: TriggerKernel, link: LinkFunction) -> Self {
        Self {
            background,
            kernel,
            link,
            quad_points: DEFAULT_QUAD_POINTS,
        }
    }

    /// Homogeneous Poisson process with rate `mu`.
    pub fn hpp(mu: f64) -> Self {
        Self::new(
            BackgroundModel::constant(mu),
            TriggerKernel::None,
            LinkFunction::tobit(),
        )
    }

    /// Constant background, exponential kernel.
    pub fn hawkes(mu: f64, alpha: f64, beta: f64, link: LinkFunction) -> Self {
        Self::new(
            BackgroundModel::constant(mu),
            TriggerKernel::exponential(alpha, beta),
            link,
        )
    }

    pub fn with_quad_points(mut self, k: usize) -> Self {
        self.quad_points = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.background.validate()?;
        self.kernel.validate()?;
        self.link.validate()?;
        if self.quad_points < MIN_QUAD_POINTS {
            return Err(Error::InvalidParameter(format!(
                "quad_points must be at least {MIN_QUAD_POINTS}, got {}",
                self.quad_points
            )));
        }
        if self.link == LinkFunction::Identity
            && (self.background.form != BackgroundForm::Constant || self.kernel.alpha() < 0.0)
        {
            return Err(Error::InvalidParameter(
                "identity link needs a constant background and alpha >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Attaches the observation window to a latent-GP background.
    pub fn bind(mut self, horizon: f64) -> Result<Self> {
        if let Some(gp) = self.background.gp.as_mut() {
            if gp.is_bound() && (gp.horizon - horizon).abs() > 0.0 {
                return Err(Error::Config(format!(
                    "gp window {} does not match data window {horizon}",
                    gp.horizon
                )));
            }
            gp.horizon = horizon;
        }
        Ok(self)
    }

    pub fn gp(&self) -> Option<&LatentGP> {
        self.background.gp.as_ref()
    }

    pub fn gp_mut(&mut self) -> Option<&mut LatentGP> {
        self.background.gp.as_mut()
    }

    /// Parameters with a value in this model, in canonical order.
    pub fn free_parameters(&self) -> Vec<Param> {
        let mut out = vec![Param::Mu];
        if self.background.seasonal.is_some() {
            out.extend([Param::Gamma1, Param::Gamma2]);
        }
        if !self.kernel.is_none() {
            out.extend([Param::Alpha, Param::Beta]);
        }
        if self.kernel.nu().is_some() {
            out.push(Param::Nu);
        }
        if self.background.gp.is_some() {
            out.extend([Param::Sigma2, Param::Phi]);
        }
        out
    }

    pub fn support(&self, p: Param) -> Support {
        match p {
            Param::Mu if self.background.form == BackgroundForm::Constant => Support::Positive,
            Param::Mu | Param::Gamma1 | Param::Gamma2 | Param::Alpha => Support::Real,
            Param::Beta | Param::Nu | Param::Sigma2 | Param::Phi => Support::Positive,
        }
    }

    pub fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::Mu => Some(self.background.mu),
            Param::Gamma1 => self.background.seasonal.map(|s| s.gamma1),
            Param::Gamma2 => self.background.seasonal.map(|s| s.gamma2),
            Param::Alpha => (!self.kernel.is_none()).then(|| self.kernel.alpha()),
            Param::Beta => self.kernel.beta(),
            Param::Nu => self.kernel.nu(),
            Param::Sigma2 => self.background.gp.as_ref().map(|g| g.sigma2),
            Param::Phi => self.background.gp.as_ref().map(|g| g.phi),
        }
    }

    pub fn set(&mut self, p: Param, value: f64) -> Result<()> {
        let slot: Option<&mut f64> = match p {
            Param::Mu => Some(&mut self.background.mu),
            Param::Gamma1 => self.background.seasonal.as_mut().map(|s| &mut s.gamma1),
            Param::Gamma2 => self.background.seasonal.as_mut().map(|s| &mut s.gamma2),
            Param::Alpha => self.kernel.alpha_mut(),
            Param::Beta => self.kernel.beta_mut(),
            Param::Nu => self.kernel.nu_mut(),
            Param::Sigma2 => self.background.gp.as_mut().map(|g| &mut g.sigma2),
            Param::Phi => self.background.gp.as_mut().map(|g| &mut g.phi),
        };
        match slot {
            Some(s) => {
                *s = value;
                Ok(())
            }
            None => Err(Error::InvalidParameter(format!(
                "model has no parameter {}",
                p.name()
            ))),
        }
    }

    /// `h(mu(t) + kernel_sum)` for an already validated model.
    #[inline]
    pub fn intensity_from_parts(&self, background: f64, kernel_sum: f64) -> f64 {
        self.link.apply_clamped(background + kernel_sum)
    }

    /// Intensity at `s` given an arbitrary history (events `< s` are used).
    pub fn intensity_with_history(&self, history: &[f64], s: f64) -> f64 {
        let bg = self.background.at_unchecked(s);
        self.intensity_from_parts(bg, self.kernel.sum_over(history, s))
    }

    fn check_window(&self, pattern: &PointPattern) -> Result<()> {
        if let Some(gp) = self.gp() {
            if !gp.is_bound() {
                return Err(Error::Config(
                    "gp background is not bound to an observation window".into(),
                ));
            }
            if gp.horizon != pattern.horizon() {
                return Err(Error::Config(format!(
                    "gp window {} does not match pattern window {}",
                    gp.horizon,
                    pattern.horizon()
                )));
            }
        }
        Ok(())
    }
}

/// `lambda*(s)` on the strict history of `s`.
pub fn conditional_intensity(
    model: &ModelSpec,
    pattern: &PointPattern,
    s: f64,
    state: Option<&ExpRecursionState>,
) -> Result<f64> {
    model.validate()?;
    model.check_window(pattern)?;
    let k = crate::kernels::kernel_sum_at(&model.kernel, pattern, s, state)?;
    let bg = model.background.at(s)?;
    model.link.apply(bg + k)
}

/// Intensities at several query times, each on the full observed history before it.
pub fn intensities_at(model: &ModelSpec, pattern: &PointPattern, queries: &[f64]) -> Result<Vec<f64>> {
    model.validate()?;
    model.check_window(pattern)?;
    let mut out = Vec::with_capacity(queries.len());
    let ev = pattern.events();
    match model.kernel {
        TriggerKernel::Exponential { alpha, beta } => {
            let st = ExpRecursionState::build(pattern, beta)?;
            let a = st.values();
            for &s in queries {
                check_in(pattern, s)?;
                let k = pattern.count_before(s);
                let ks = if k == 0 {
                    0.0
                } else {
                    alpha * beta * (-beta * (s - ev[k - 1])).exp() * (1.0 + a[k - 1])
                };
                out.push(model.link.apply(model.background.at_unchecked(s) + ks)?);
            }
        }
        _ => {
            for &s in queries {
                check_in(pattern, s)?;
                let hist = &ev[..pattern.count_before(s)];
                out.push(
                    model
                        .link
                        .apply(model.background.at_unchecked(s) + model.kernel.sum_over(hist, s))?,
                );
            }
        }
    }
    Ok(out)
}

fn check_in(pattern: &PointPattern, s: f64) -> Result<()> {
    if s.is_finite() && (0.0..=pattern.horizon()).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfWindow {
            t: s,
            horizon: pattern.horizon(),
        })
    }
}

/// Parameter-free description of the augmented trapezoid grid on `(0, upto]`.
#[derive(Debug, Clone)]
pub struct QuadratureLayout {
    upto: f64,
    quad_points: usize,
    nodes: Vec<f64>,
    /// Index of the event located at each node, if any.
    node_event: Vec<Option<u32>>,
    /// Events strictly before each node.
    node_hist: Vec<u32>,
    n_events: usize,
    cells: usize,
    gp_horizon: f64,
    cell_segments: Vec<std::ops::Range<usize>>,
    cell_events: Vec<std::ops::Range<usize>>,
    period: Option<f64>,
    node_sincos: Vec<(f64, f64)>,
    event_sincos: Vec<(f64, f64)>,
}

impl QuadratureLayout {
    pub fn new(model: &ModelSpec, pattern: &PointPattern, upto: f64) -> Result<Self> {
        if !(upto > 0.0 && upto <= pattern.horizon()) {
            return Err(Error::OutOfWindow {
                t: upto,
                horizon: pattern.horizon(),
            });
        }
        model.check_window(pattern)?;
        let k = model.quad_points;
        let events = &pattern.events()[..pattern.count_upto(upto)];
        let (cells, gp_horizon) = match model.gp() {
            Some(gp) => (gp.size(), gp.horizon),
            None => (1, pattern.horizon()),
        };

        let mut nodes: Vec<f64> = (0..=k).map(|i| upto * i as f64 / k as f64).collect();
        nodes[k] = upto;
        nodes.extend_from_slice(events);
        if cells > 1 {
            let h = gp_horizon / cells as f64;
            nodes.extend((1..cells).map(|j| j as f64 * h).filter(|&b| b < upto));
        }
        nodes.sort_by(|a, b| a.total_cmp(b));
        nodes.dedup();

        let mut node_event = Vec::with_capacity(nodes.len());
        let mut node_hist = Vec::with_capacity(nodes.len());
        let mut ei = 0usize;
        for &x in &nodes {
            node_hist.push(ei as u32);
            if ei < events.len() && events[ei] == x {
                node_event.push(Some(ei as u32));
                ei += 1;
            } else {
                node_event.push(None);
            }
        }

        let cell_of = |t: f64| -> usize {
            match model.gp() {
                Some(gp) => gp.cell_of(t),
                None => 0,
            }
        };
        let seg_cell: Vec<u32> = nodes
            .windows(2)
            .map(|w| cell_of(0.5 * (w[0] + w[1])) as u32)
            .collect();
        let event_cell: Vec<u32> = events.iter().map(|&t| cell_of(t) as u32).collect();
        let cell_segments = ranges_by_cell(&seg_cell, cells);
        let cell_events = ranges_by_cell(&event_cell, cells);

        let period = model.background.seasonal.map(|s| s.period);
        let (node_sincos, event_sincos) = match period {
            Some(p) => {
                let w = 2.0 * PI / p;
                (
                    nodes.iter().map(|&x| (w * x).sin_cos()).collect(),
                    events.iter().map(|&x| (w * x).sin_cos()).collect(),
                )
            }
            None => (Vec::new(), Vec::new()),
        };

        Ok(Self {
            upto,
            quad_points: k,
            nodes,
            node_event,
            node_hist,
            n_events: events.len(),
            cells,
            gp_horizon,
            cell_segments,
            cell_events,
            period,
            node_sincos,
            event_sincos,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn upto(&self) -> f64 {
        self.upto
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    fn compatible(&self, model: &ModelSpec) -> bool {
        let cells = model.gp().map_or(1, |g| g.size());
        self.quad_points == model.quad_points
            && cells == self.cells
            && model.gp().is_none_or(|g| g.horizon == self.gp_horizon)
            && self.period == model.background.seasonal.map(|s| s.period)
    }
}

/// Segments longer than this many kernel decay lengths get sub-nodes.
pub const REFINE_THRESHOLD: f64 = 0.25;
const REFINE_FIRST: f64 = 0.05;
const REFINE_RATIO: f64 = 1.25;
const REFINE_LAST: f64 = 25.0;

/// `(c_j, exp(-c_j))` for the ladder `c_j = 0.05 * 1.25^j <= 25`.
fn refine_ladder() -> &'static [(f64, f64)] {
    static LADDER: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    LADDER.get_or_init(|| {
        std::iter::successors(Some(REFINE_FIRST), |c| Some(c * REFINE_RATIO))
            .take_while(|&c| c <= REFINE_LAST)
            .map(|c| (c, (-c).exp()))
            .collect()
    })
}

/// Trapezoid over `[a, b]` with sub-nodes at `a + c_j / beta`, or its limit
/// when the link is linear and nothing is clamped.
///
/// With the history fixed the exponential kernel sum is `k_a exp(-beta (s - a))`;
/// the background is interpolated linearly between the segment ends.
#[allow(clippy::too_many_arguments)]
fn refined_segment(link: LinkFunction, a: f64, b: f64, ga: f64, gb: f64, k_a: f64, k_b: f64, beta: f64) -> f64 {
    let len = b - a;
    let linear = match link {
        LinkFunction::Identity => true,
        LinkFunction::Power { eta } => eta == 1.0,
        _ => false,
    };
    if linear && k_a >= 0.0 && ga >= 0.0 && gb >= 0.0 {
        // nothing is clamped, so the kernel term integrates exactly
        return 0.5 * (ga + gb) * len + (k_a - k_b) / beta;
    }
    let slope = (gb - ga) / len;
    let mut acc = 0.0;
    let mut u_prev = 0.0;
    let mut f_prev = link.apply_clamped(ga + k_a);
    for &(c, decay) in refine_ladder() {
        let u = c / beta;
        if u >= len {
            break;
        }
        let fu = link.apply_clamped(ga + slope * u + k_a * decay);
        acc += 0.5 * (f_prev + fu) * (u - u_prev);
        u_prev = u;
        f_prev = fu;
    }
    acc + 0.5 * (f_prev + link.apply_clamped(gb + k_b)) * (len - u_prev)
}

fn ranges_by_cell(cell_ids: &[u32], cells: usize) -> Vec<std::ops::Range<usize>> {
    // cell ids are nondecreasing along time
    let mut out = Vec::with_capacity(cells);
    let mut start = 0usize;
    for c in 0..cells as u32 {
        let end = start + cell_ids[start..].partition_point(|&x| x <= c);
        out.push(start..end);
        start = end;
    }
    out
}

/// Reusable evaluation buffers for the log-likelihood of one pattern.
///
/// After [`LikelihoodWorkspace::evaluate`] the per-node kernel sums and
/// background factors are cached, so a single latent-GP effect can be
/// re-scored in time proportional to its cell.
#[derive(Debug, Clone)]
pub struct LikelihoodWorkspace {
    layout: QuadratureLayout,
    /// Kernel sum at each node over events strictly before it.
    k_left: Vec<f64>,
    /// Kernel sum at each node over events at or before it.
    k_right: Vec<f64>,
    /// Background at each node without the latent field.
    bg_node: Vec<f64>,
    ev_kernel: Vec<f64>,
    ev_bg: Vec<f64>,
    comp_cell: Vec<f64>,
    loglam_cell: Vec<f64>,
}

impl LikelihoodWorkspace {
    pub fn new(model: &ModelSpec, pattern: &PointPattern) -> Result<Self> {
        Self::with_upto(model, pattern, pattern.horizon())
    }

    pub fn with_upto(model: &ModelSpec, pattern: &PointPattern, upto: f64) -> Result<Self> {
        model.validate()?;
        let layout = QuadratureLayout::new(model, pattern, upto)?;
        let nn = layout.nodes.len();
        let ne = layout.n_events;
        let cells = layout.cells;
        Ok(Self {
            layout,
            k_left: vec![0.0; nn],
            k_right: vec![0.0; nn],
            bg_node: vec![0.0; nn],
            ev_kernel: vec![0.0; ne],
            ev_bg: vec![0.0; ne],
            comp_cell: vec![0.0; cells],
            loglam_cell: vec![0.0; cells],
        })
    }

    pub fn layout(&self) -> &QuadratureLayout {
        &self.layout
    }

    /// Full evaluation; returns `-Lambda*(upto) + sum_i log lambda*(t_i)` over events `<= upto`.
    ///
    /// The model must be valid and share the layout's structure (grid size,
    /// GP grid, period); an invalid model yields an error.
    pub fn evaluate(&mut self, model: &ModelSpec, pattern: &PointPattern) -> Result<f64> {
        model.validate()?;
        if !self.layout.compatible(model) {
            return Err(Error::Config(
                "model structure does not match the quadrature layout".into(),
            ));
        }
        self.fill_kernel(&model.kernel, pattern);
        self.fill_background(&model.background, pattern);
        let ew: Vec<f64> = match model.gp() {
            Some(gp) => gp.effects().iter().map(|w| w.exp()).collect(),
            None => vec![1.0],
        };
        for c in 0..self.layout.cells {
            let (comp, ll) = self.cell_terms(model, c, ew[c]);
            self.comp_cell[c] = comp;
            self.loglam_cell[c] = ll;
        }
        Ok(self.total())
    }

    pub fn total(&self) -> f64 {
        let ll: f64 = self.loglam_cell.iter().sum();
        let comp: f64 = self.comp_cell.iter().sum();
        ll - comp
    }

    pub fn compensator(&self) -> f64 {
        self.comp_cell.iter().sum()
    }

    pub fn sum_log_intensity(&self) -> f64 {
        self.loglam_cell.iter().sum()
    }

    /// Cached log-likelihood contribution of cell `c`.
    pub fn cell_contribution(&self, c: usize) -> f64 {
        self.loglam_cell[c] - self.comp_cell[c]
    }

    /// Contribution of cell `c` if its latent effect were `w`; other caches untouched.
    pub fn cell_contribution_with(&self, model: &ModelSpec, c: usize, w: f64) -> f64 {
        let (comp, ll) = self.cell_terms(model, c, w.exp());
        ll - comp
    }

    /// Re-scores cell `c` with latent effect `w` and stores the result.
    pub fn update_cell(&mut self, model: &ModelSpec, c: usize, w: f64) {
        let (comp, ll) = self.cell_terms(model, c, w.exp());
        self.comp_cell[c] = comp;
        self.loglam_cell[c] = ll;
    }

    fn cell_terms(&self, model: &ModelSpec, c: usize, ew: f64) -> (f64, f64) {
        let link = model.link;
        let nodes = &self.layout.nodes;
        let decay = match model.kernel {
            TriggerKernel::Exponential { beta, .. } => beta,
            _ => 0.0,
        };
        let mut comp = 0.0;
        for k in self.layout.cell_segments[c].clone() {
            let (a, b) = (nodes[k], nodes[k + 1]);
            let (ga, gb) = (self.bg_node[k] * ew, self.bg_node[k + 1] * ew);
            if decay * (b - a) > REFINE_THRESHOLD && self.k_right[k] != 0.0 {
                comp += refined_segment(link, a, b, ga, gb, self.k_right[k], self.k_left[k + 1], decay);
                continue;
            }
            let la = link.apply_clamped(ga + self.k_right[k]);
            let lb = link.apply_clamped(gb + self.k_left[k + 1]);
            comp += 0.5 * (la + lb) * (b - a);
        }
        let mut ll = 0.0;
        for i in self.layout.cell_events[c].clone() {
            let lam = link.apply_clamped(self.ev_bg[i] * ew + self.ev_kernel[i]);
            ll += lam.ln();
        }
        (comp, ll)
    }

    fn fill_background(&mut self, bg: &BackgroundModel, pattern: &PointPattern) {
        match bg.form {
            BackgroundForm::Constant => {
                self.bg_node.fill(bg.mu);
                self.ev_bg.fill(bg.mu);
            }
            BackgroundForm::LogLinear => match bg.seasonal {
                Some(s) => {
                    for (v, &(sn, cs)) in self.bg_node.iter_mut().zip(&self.layout.node_sincos) {
                        *v = (bg.mu + s.gamma1 * sn + s.gamma2 * cs).exp();
                    }
                    for (v, &(sn, cs)) in self.ev_bg.iter_mut().zip(&self.layout.event_sincos) {
                        *v = (bg.mu + s.gamma1 * sn + s.gamma2 * cs).exp();
                    }
                }
                None => {
                    let e = bg.mu.exp();
                    self.bg_node.fill(e);
                    self.ev_bg.fill(e);
                }
            },
        }
        let _ = pattern;
    }

    fn fill_kernel(&mut self, kernel: &TriggerKernel, pattern: &PointPattern) {
        let nodes = &self.layout.nodes;
        let events = pattern.events();
        match *kernel {
            TriggerKernel::None => {
                self.k_left.fill(0.0);
                self.k_right.fill(0.0);
                self.ev_kernel.fill(0.0);
            }
            TriggerKernel::Exponential { alpha, beta } => {
                let jump = alpha * beta;
                // kernel value just after the last event, alpha beta (1 + A_last)
                let mut after_last = 0.0;
                let mut t_last = 0.0;
                for (k, &x) in nodes.iter().enumerate() {
                    let left = if self.layout.node_hist[k] == 0 {
                        0.0
                    } else {
                        after_last * (-beta * (x - t_last)).exp()
                    };
                    self.k_left[k] = left;
                    match self.layout.node_event[k] {
                        Some(i) => {
                            self.ev_kernel[i as usize] = left;
                            after_last = left + jump;
                            t_last = x;
                            self.k_right[k] = after_last;
                        }
                        None => self.k_right[k] = left,
                    }
                }
            }
            _ => {
                let at_zero = kernel.value_at_zero();
                for (k, &x) in nodes.iter().enumerate() {
                    let h = self.layout.node_hist[k] as usize;
                    let left = kernel.sum_over(&events[..h], x);
                    self.k_left[k] = left;
                    match self.layout.node_event[k] {
                        Some(i) => {
                            self.ev_kernel[i as usize] = left;
                            let fresh = if at_zero.is_finite() {
                                at_zero
                            } else {
                                // unbounded at zero lag: use the lag at the segment midpoint
                                let next = nodes.get(k + 1).copied().unwrap_or(x);
                                kernel.value(0.5 * (next - x).max(f64::MIN_POSITIVE))
                            };
                            self.k_right[k] = left + fresh;
                        }
                        None => self.k_right[k] = left,
                    }
                }
            }
        }
    }
}

/// `Lambda*(upto)` by augmented-grid trapezoid quadrature.
pub fn compensator(model: &ModelSpec, pattern: &PointPattern, upto: f64) -> Result<f64> {
    let mut ws = LikelihoodWorkspace::with_upto(model, pattern, upto)?;
    ws.evaluate(model, pattern)?;
    Ok(ws.compensator())
}

/// `-Lambda*(T) + sum_i log lambda*(t_i)`; `-inf` when the intensity vanishes at an event.
pub fn log_likelihood(model: &ModelSpec, pattern: &PointPattern) -> Result<f64> {
    let mut ws = LikelihoodWorkspace::new(model, pattern)?;
    ws.evaluate(model, pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(ev: &[f64], t: f64) -> PointPattern {
        PointPattern::new(ev.to_vec(), t).unwrap()
    }

    #[test]
    fn background_examples() {
        assert_eq!(BackgroundModel::constant(1.5).at(3.0).unwrap(), 1.5);
        let flat = BackgroundModel::log_linear(
            0.0,
            Some(Seasonal {
                gamma1: 0.0,
                gamma2: 0.0,
                period: 24.0,
            }),
            None,
        );
        assert_eq!(flat.at(7.3).unwrap(), 1.0);
        let s = BackgroundModel::log_linear(
            0.0,
            Some(Seasonal {
                gamma1: 1.0,
                gamma2: 0.0,
                period: 24.0,
            }),
            None,
        );
        assert!((s.at(6.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!(s.at(-1.0).is_err());
    }

    #[test]
    fn gp_nearest_cell_and_ties() {
        let mut gp = LatentGP::new(10.0, 5, 1.0, 1.0).unwrap();
        gp.set_effects(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(gp.grid_times(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(gp.cell_of(0.0), 0);
        assert_eq!(gp.cell_of(1.9), 0);
        // equidistant from grid times 1 and 3: earlier wins
        assert_eq!(gp.cell_of(2.0), 0);
        assert_eq!(gp.cell_of(2.0001), 1);
        assert_eq!(gp.cell_of(10.0), 4);
        assert_eq!(gp.value_at(6.5), 3.0);
    }

    #[test]
    fn gp_log_prior_at_zero() {
        let gp = LatentGP::new(100.0, 100, 2.0, 0.05).unwrap();
        let g = 100.0;
        let delta: f64 = 1.0;
        let expected = -(g / 2.0) * (2.0 * PI * 2.0f64).ln()
            - 99.0 * 0.5 * (1.0 - (-2.0 * 0.05 * delta).exp()).ln();
        assert!((gp.log_prior() - expected).abs() < 1e-9);
    }

    #[test]
    fn gp_local_prior_matches_full_difference() {
        let mut gp = LatentGP::new(50.0, 10, 1.3, 0.2).unwrap();
        gp.set_effects(&[0.1, -0.3, 0.5, 0.2, 0.0, -1.0, 0.4, 0.3, 0.9, -0.2])
            .unwrap();
        for j in [0usize, 4, 9] {
            let before = gp.log_prior();
            let local_before = gp.log_prior_local(j, gp.effects()[j]);
            let local_after = gp.log_prior_local(j, 0.77);
            let mut g2 = gp.clone();
            g2.effects_mut()[j] = 0.77;
            let after = g2.log_prior();
            assert!(((after - before) - (local_after - local_before)).abs() < 1e-12);
        }
    }

    #[test]
    fn intensity_examples() {
        let p = pat(&[1.0], 10.0);
        let hpp = ModelSpec::hpp(1.0);
        assert_eq!(conditional_intensity(&hpp, &p, 4.0, None).unwrap(), 1.0);
        let inh = ModelSpec::hawkes(1.0, -5.0, 1.0, LinkFunction::tobit());
        assert_eq!(conditional_intensity(&inh, &p, 1.001, None).unwrap(), 0.0);
        let e = ModelSpec::new(
            BackgroundModel::log_linear(0.0, None, None),
            TriggerKernel::None,
            LinkFunction::Exponential,
        );
        // background exp(0) = 1 enters the link: exp(1)
        let v = conditional_intensity(&e, &p, 3.0, None).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn compensator_examples() {
        let p = pat(&[], 100.0);
        let c = compensator(&ModelSpec::hpp(1.0), &p, 100.0).unwrap();
        assert!((c - 100.0).abs() < 1e-9);

        let p10 = pat(&[10.0], 100.0);
        let m = ModelSpec::hawkes(1.0, 0.5, 1.0, LinkFunction::Identity);
        let c = compensator(&m, &p10, 100.0).unwrap();
        let exact = 100.0 + 0.5 * (1.0 - (-90.0f64).exp());
        assert!((c - exact).abs() / exact < 1e-3);

        let sp = ModelSpec::new(
            BackgroundModel::log_linear(f64::NEG_INFINITY.max(-1e300), None, None),
            TriggerKernel::None,
            LinkFunction::SoftPlus,
        );
        // log-linear background with mu -> -inf is ~0; softplus(0) = ln 2
        let c = compensator(&sp, &p, 40.0).unwrap();
        assert!((c - std::f64::consts::LN_2 * 40.0).abs() < 1e-9);
        assert!(compensator(&ModelSpec::hpp(1.0), &p, 120.0).is_err());
    }

    #[test]
    fn log_likelihood_examples() {
        let ev: Vec<f64> = (1..=100).map(|i| i as f64 - 0.5).collect();
        let p = pat(&ev, 100.0);
        let ll = log_likelihood(&ModelSpec::hpp(1.0), &p).unwrap();
        assert!((ll + 100.0).abs() < 1e-9);

        let ev: Vec<f64> = (1..=80).map(|i| i as f64 * 0.6).collect();
        let p = pat(&ev, 50.0);
        let ll = log_likelihood(&ModelSpec::hpp(2.0), &p).unwrap();
        let exact = -100.0 + 80.0 * 2f64.ln();
        assert!((ll - exact).abs() < 1e-9);
        assert!((ll + 44.548).abs() < 1e-3);

        let p = pat(&[1.0, 1.001], 10.0);
        let m = ModelSpec::hawkes(1.0, -2.0, 1.0, LinkFunction::tobit());
        assert_eq!(log_likelihood(&m, &p).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn identity_link_validation() {
        let m = ModelSpec::hawkes(1.0, -0.5, 1.0, LinkFunction::Identity);
        assert!(m.validate().is_err());
        let m = ModelSpec::hawkes(1.0, 0.5, 1.0, LinkFunction::Identity).with_quad_points(10);
        assert!(m.validate().is_err());
    }

    #[test]
    fn seasonal_sup_bounds_values() {
        let s = Seasonal {
            gamma1: -0.3,
            gamma2: 0.7,
            period: 24.0,
        };
        for &(lo, hi) in &[(0.0, 3.0), (5.0, 6.0), (10.0, 30.0), (13.3, 14.1)] {
            let sup = s.sup_on(lo, hi);
            let mut best = f64::NEG_INFINITY;
            for i in 0..=10_000 {
                best = best.max(s.value(lo + (hi - lo) * i as f64 / 10_000.0));
            }
            assert!(sup >= best - 1e-12);
            assert!(sup - best < 1e-6, "lo={lo} hi={hi} sup={sup} best={best}");
        }
    }

    #[test]
    fn gp_cell_update_matches_full_evaluation() {
        let ev: Vec<f64> = (1..200).map(|i| i as f64 * 0.37 + 0.011).collect();
        let p = pat(&ev, 80.0);
        let gp = LatentGP::new(80.0, 20, 1.0, 0.1).unwrap();
        let mut m = ModelSpec::new(
            BackgroundModel::log_linear(
                0.2,
                Some(Seasonal {
                    gamma1: 0.3,
                    gamma2: -0.2,
                    period: 24.0,
                }),
                Some(gp),
            ),
            TriggerKernel::exponential(0.4, 3.0),
            LinkFunction::SoftPlus,
        )
        .with_quad_points(2000);
        let mut ws = LikelihoodWorkspace::new(&m, &p).unwrap();
        let base = ws.evaluate(&m, &p).unwrap();
        let c = 7;
        let cand = ws.cell_contribution_with(&m, c, 0.8);
        let delta = cand - ws.cell_contribution(c);
        m.gp_mut().unwrap().effects_mut()[c] = 0.8;
        let full = log_likelihood(&m, &p).unwrap();
        assert!((full - (base + delta)).abs() < 1e-9);
    }

    #[test]
    fn param_get_set_roundtrip() {
        let mut m = ModelSpec::hawkes(1.0, 0.2, 3.0, LinkFunction::tobit());
        assert_eq!(m.free_parameters(), vec![Param::Mu, Param::Alpha, Param::Beta]);
        m.set(Param::Beta, 4.0).unwrap();
        assert_eq!(m.get(Param::Beta), Some(4.0));
        assert!(m.set(Param::Phi, 1.0).is_err());
        assert_eq!(m.support(Param::Mu), Support::Positive);
    }

    #[test]
    fn model_json_roundtrip() {
        let js = r#"{
            "background": {"form": "log_linear", "mu": -1.3,
                "seasonal": {"gamma1": -0.3, "gamma2": -0.27},
                "gp": {"size": 100, "sigma2": 1.0, "phi": 0.001}},
            "kernel": {"family": "exponential", "alpha": 0.008, "beta": 77.0},
            "link": {"link": "power", "eta": 1.0}
        }"#;
        let m: ModelSpec = serde_json::from_str(js).unwrap();
        assert_eq!(m.quad_points, DEFAULT_QUAD_POINTS);
        assert_eq!(m.gp().unwrap().size(), 100);
        assert_eq!(m.background.seasonal.unwrap().period, 24.0);
        assert_eq!(m.background.kind(), BackgroundKind::LogLinearSeasonalGP);
        let bad = js.replace("\"mu\": -1.3", "\"mu\": -1.3, \"extra\": 1");
        assert!(serde_json::from_str::<ModelSpec>(&bad).is_err());
    }

    #[test]
    fn fast_kernel_on_coarse_grid() {
        let p = PointPattern::new(vec![3.0, 10.2, 10.25, 40.0, 77.7], 100.0).unwrap();
        let (mu, alpha, beta) = (0.3, 0.4, 50.0);
        let exact = mu * 100.0
            + p.events().iter().map(|t| alpha * (1.0 - (-beta * (100.0 - t)).exp())).sum::<f64>();
        let coarse = ModelSpec::hawkes(mu, alpha, beta, LinkFunction::Identity).with_quad_points(MIN_QUAD_POINTS);
        let c = compensator(&coarse, &p, 100.0).unwrap();
        assert!((c - exact).abs() / exact < 1e-12, "{c} vs {exact}");

        // clamped and curved links go through the ladder; compare with a grid fine enough not to need it
        for (link, a) in [(LinkFunction::tobit(), -0.4), (LinkFunction::SoftPlus, 0.4), (LinkFunction::Exponential, -0.4)] {
            let coarse = ModelSpec::hawkes(mu, a, beta, link).with_quad_points(MIN_QUAD_POINTS);
            let fine = coarse.clone().with_quad_points(200_000);
            let (c, f) = (compensator(&coarse, &p, 100.0).unwrap(), compensator(&fine, &p, 100.0).unwrap());
            assert!((c - f).abs() / f < 2e-3, "{link:?}: {c} vs {f}");
        }
    }
}
