//! Model comparison: DIC, probabilistic misclassification rate over random
//! windows, and ranked probability score with Poisson predictive draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{intensities_at, log_likelihood, ModelSpec};
use crate::pattern::PointPattern;
use crate::sampler::PosteriorSamples;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dic {
    pub dic: f64,
    pub p_d: f64,
    pub mean_deviance: f64,
    pub deviance_at_mean: f64,
}

impl Dic {
    /// `DIC = 2 Dbar - D(theta_bar)`, `p_D = Dbar - D(theta_bar)`.
    pub fn from_deviances(deviances: &[f64], deviance_at_mean: f64) -> Result<Dic> {
        if deviances.is_empty() {
            return Err(Error::Numerical("DIC needs at least one draw".into()));
        }
        if !deviance_at_mean.is_finite() {
            return Err(Error::Numerical(format!(
                "deviance at the posterior mean is {deviance_at_mean}; the mean parameter \
                 gives zero intensity at an observed event"
            )));
        }
        let mean_deviance = deviances.iter().sum::<f64>() / deviances.len() as f64;
        let p_d = mean_deviance - deviance_at_mean;
        Ok(Dic {
            dic: mean_deviance + p_d,
            p_d,
            mean_deviance,
            deviance_at_mean,
        })
    }
}

/// DIC from the chain's stored log-likelihoods and `evaluator` at the posterior mean.
pub fn dic<F>(evaluator: F, samples: &PosteriorSamples) -> Result<Dic>
where
    F: Fn(&ModelSpec) -> Result<f64>,
{
    let dev: Vec<f64> = samples.loglik.iter().map(|l| -2.0 * l).collect();
    let at_mean = -2.0 * evaluator(&samples.posterior_mean_model())?;
    Dic::from_deviances(&dev, at_mean)
}

/// DIC with the quadrature log-likelihood of `pattern`.
pub fn dic_for(samples: &PosteriorSamples, pattern: &PointPattern) -> Result<Dic> {
    dic(|m| log_likelihood(m, pattern), samples)
}

/// Distribution of the HPP window probability `p_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowSampler {
    #[default]
    Uniform,
    /// `Unif(0, a)`, `0 < a <= 1`.
    UniformTo { a: f64 },
    /// Symmetric `Beta(b, b)`.
    Beta { b: f64 },
}

impl WindowSampler {
    fn validate(&self) -> Result<()> {
        match *self {
            WindowSampler::Uniform => Ok(()),
            WindowSampler::UniformTo { a } if a > 0.0 && a <= 1.0 => Ok(()),
            WindowSampler::Beta { b } if b > 0.0 && b.is_finite() => Ok(()),
            _ => Err(Error::Config(format!("invalid window sampler {self:?}"))),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            WindowSampler::Uniform => rng.random::<f64>(),
            WindowSampler::UniformTo { a } => a * rng.random::<f64>(),
            WindowSampler::Beta { b } => Beta::new(b, b).unwrap().sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub anchor: f64,
    pub delta: f64,
    pub p: f64,
    pub y: bool,
    /// Zero-length after truncation at the horizon; excluded from rates.
    pub degenerate: bool,
    pub truncated: bool,
}

impl Window {
    /// Window `(anchor, anchor + p / rate]`, truncated at the horizon.
    pub fn new(pattern: &PointPattern, anchor: f64, p: f64, rate: f64) -> Result<Window> {
        let t_end = pattern.horizon();
        let mut delta = p / rate;
        let mut p = p;
        let truncated = anchor + delta > t_end;
        if truncated {
            delta = t_end - anchor;
            p = rate * delta;
        }
        let degenerate = delta <= 0.0;
        let y = !degenerate && pattern.count_in(anchor, anchor + delta)? >= 1;
        Ok(Window {
            anchor,
            delta,
            p: if degenerate { 0.0 } else { p },
            y,
            degenerate,
            truncated,
        })
    }

    pub fn midpoint(&self) -> f64 {
        self.anchor + 0.5 * self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    pub rate_hat: f64,
    pub rng_seed: u64,
}

impl WindowSet {
    pub fn active(&self) -> impl Iterator<Item = &Window> {
        self.windows.iter().filter(|w| !w.degenerate)
    }

    pub fn n_active(&self) -> usize {
        self.active().count()
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.p).collect()
    }
}

pub fn build_windows(pattern: &PointPattern, seed: u64) -> Result<WindowSet> {
    build_windows_with(pattern, seed, WindowSampler::Uniform)
}

/// One random window per event, anchored at the event.
pub fn build_windows_with(pattern: &PointPattern, seed: u64, sampler: WindowSampler) -> Result<WindowSet> {
    sampler.validate()?;
    if pattern.is_empty() {
        return Err(Error::InvalidPattern(
            "windows need at least one event".into(),
        ));
    }
    let rate = pattern.mle_rate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let windows = pattern
        .events()
        .iter()
        .map(|&t| {
            let p = sampler.draw(&mut rng);
            Window::new(pattern, t, p, rate)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowSet {
        windows,
        rate_hat: rate,
        rng_seed: seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Excite,
    Inhibit,
}

/// `q_t = min(1, lambda_bar(t + delta/2) delta)` per window.
///
/// With `per_draw`, the clamp is applied draw by draw and the results averaged.
pub fn model_probability(
    samples: &PosteriorSamples,
    pattern: &PointPattern,
    windows: &WindowSet,
    per_draw: bool,
) -> Result<Vec<f64>> {
    let mids: Vec<f64> = windows.windows.iter().map(|w| w.midpoint()).collect();
    let m = samples.n_rows();
    if m == 0 {
        return Err(Error::Numerical("no posterior draws".into()));
    }
    let mut acc = vec![0.0; mids.len()];
    for i in 0..m {
        let lam = intensities_at(&samples.model_at(i), pattern, &mids)?;
        for ((a, l), w) in acc.iter_mut().zip(&lam).zip(&windows.windows) {
            *a += if per_draw { (l * w.delta).min(1.0) } else { *l };
        }
    }
    Ok(acc
        .iter()
        .zip(&windows.windows)
        .map(|(a, w)| {
            let mean = a / m as f64;
            if w.degenerate {
                0.0
            } else if per_draw {
                mean
            } else {
                (mean * w.delta).min(1.0)
            }
        })
        .collect())
}

/// Excite: `sum (1 - q) Y / sum Y`; inhibit: `sum q (1 - Y) / sum (1 - Y)`.
pub fn pmr(windows: &WindowSet, probs: &[f64], direction: Direction) -> Result<f64> {
    if probs.len() != windows.windows.len() {
        return Err(Error::InvalidParameter(format!(
            "{} probabilities for {} windows",
            probs.len(),
            windows.windows.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, &q) in windows.windows.iter().zip(probs) {
        if w.degenerate {
            continue;
        }
        match (direction, w.y) {
            (Direction::Excite, true) => {
                num += 1.0 - q;
                den += 1.0;
            }
            (Direction::Inhibit, false) => {
                num += q;
                den += 1.0;
            }
            _ => {}
        }
    }
    if den == 0.0 {
        return Err(Error::UndefinedRate(format!(
            "no windows with {} for the {direction:?} rate",
            if direction == Direction::Excite { "events" } else { "no events" }
        )));
    }
    Ok(num / den)
}

/// `(1/m) sum |x_j - obs| - (1/2m^2) sum_jk |x_j - x_k|`, second term from sorted order.
pub fn rps_single(draws: &mut [u64], obs: u64) -> f64 {
    let m = draws.len() as f64;
    let first: f64 = draws.iter().map(|&x| (x as f64 - obs as f64).abs()).sum::<f64>() / m;
    draws.sort_unstable();
    let mut g = 0.0;
    for (i, &x) in draws.iter().enumerate() {
        g += (2.0 * (i as f64 + 1.0) - m - 1.0) * x as f64;
    }
    first - g / (m * m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpsResult {
    pub mean: f64,
    pub dt: f64,
    pub per_anchor: Vec<f64>,
    pub observed: Vec<u64>,
    pub predictive_mean: Vec<f64>,
}

/// Default forecast width, two expected events under the fitted HPP rate.
pub fn default_rps_dt(pattern: &PointPattern) -> f64 {
    2.0 / pattern.mle_rate()
}

/// Mean RPS over event anchors using up to `max_draws` evenly spaced posterior draws.
pub fn rps(
    samples: &PosteriorSamples,
    pattern: &PointPattern,
    dt: f64,
    seed: u64,
    max_draws: usize,
) -> Result<RpsResult> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("rps dt must be positive, got {dt}")));
    }
    let rows = samples.n_rows();
    let m = rows.min(max_draws.max(2));
    if m < 2 {
        return Err(Error::Numerical("RPS needs at least two posterior draws".into()));
    }
    let t_end = pattern.horizon();
    let anchors: Vec<(f64, f64)> = pattern
        .events()
        .iter()
        .map(|&t| (t, dt.min(t_end - t)))
        .filter(|&(_, d)| d > 0.0)
        .collect();
    if anchors.is_empty() {
        return Err(Error::UndefinedRate("no anchors with a nonempty forecast window".into()));
    }
    let mids: Vec<f64> = anchors.iter().map(|&(t, d)| t + 0.5 * d).collect();
    let observed: Vec<u64> = anchors
        .iter()
        .map(|&(t, d)| pattern.count_in(t, t + d).map(|c| c as u64))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; anchors.len() * m];
    let mut pred_mean = vec![0.0; anchors.len()];
    for j in 0..m {
        let row = j * rows / m;
        let lam = intensities_at(&samples.model_at(row), pattern, &mids)?;
        for (a, (&l, &(_, d))) in lam.iter().zip(&anchors).enumerate() {
            let mean = l * d;
            pred_mean[a] += mean / m as f64;
            counts[a * m + j] = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| Error::Numerical(format!("poisson rate {mean}: {e}")))?
                    .sample(&mut rng) as u64
            } else {
                0
            };
        }
    }
    let per_anchor: Vec<f64> = counts
        .chunks_mut(m)
        .zip(&observed)
        .map(|(c, &o)| rps_single(c, o))
        .collect();
    let mean = per_anchor.iter().sum::<f64>() / per_anchor.len() as f64;
    Ok(RpsResult {
        mean,
        dt,
        per_anchor,
        observed,
        predictive_mean: pred_mean,
    })
}

fn default_rps_draws() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareOptions {
    #[serde(default)]
    pub window_sampler: WindowSampler,
    /// Average per-draw clamped probabilities instead of clamping the mean intensity.
    #[serde(default)]
    pub per_draw_q: bool,
    /// Forecast width for RPS; `2 n / T` expected events by default.
    #[serde(default)]
    pub rps_dt: Option<f64>,
    #[serde(default = "default_rps_draws")]
    pub rps_max_draws: usize,
    #[serde(default = "crate::compare::default_true")]
    pub compute_rps: bool,
}

pub(crate) fn default_true() -> bool {
    true
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            window_sampler: WindowSampler::Uniform,
            per_draw_q: false,
            rps_dt: None,
            rps_max_draws: default_rps_draws(),
            compute_rps: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub anchor: f64,
    pub delta: f64,
    pub p: f64,
    pub y: bool,
    pub q: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model: String,
    pub dic: Option<f64>,
    pub p_d: Option<f64>,
    /// Why DIC is missing, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dic_error: Option<String>,
    pub pmr_excite: Option<f64>,
    pub pmr_inhibit: Option<f64>,
    pub rps: Option<f64>,
    pub n_windows: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub windows: Vec<WindowRow>,
}

fn rate_or_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedRate(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// All criteria for one fitted model on shared windows.
///
/// An infinite deviance at the posterior mean leaves DIC empty (with the
/// reason) without discarding the other criteria.
pub fn compare_fit(
    name: &str,
    samples: &PosteriorSamples,
    pattern: &PointPattern,
    windows: &WindowSet,
    options: &CompareOptions,
    seed: u64,
) -> Result<ComparisonReport> {
    let (d, dic_error) = match dic_for(samples, pattern) {
        Ok(d) => (Some(d), None),
        Err(e @ Error::Numerical(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let q = model_probability(samples, pattern, windows, options.per_draw_q)?;
    let rps_mean = if options.compute_rps {
        let dt = options.rps_dt.unwrap_or_else(|| default_rps_dt(pattern));
        Some(rps(samples, pattern, dt, seed, options.rps_max_draws)?.mean)
    } else {
        None
    };
    Ok(ComparisonReport {
        model: name.to_string(),
        dic: d.map(|d| d.dic),
        p_d: d.map(|d| d.p_d),
        dic_error,
        pmr_excite: rate_or_none(pmr(windows, &q, Direction::Excite))?,
        pmr_inhibit: rate_or_none(pmr(windows, &q, Direction::Inhibit))?,
        rps: rps_mean,
        n_windows: windows.n_active(),
        seed,
        windows: windows
            .windows
            .iter()
            .zip(&q)
            .map(|(w, &q)| WindowRow {
                anchor: w.anchor,
                delta: w.delta,
                p: w.p,
                y: w.y,
                q,
                degenerate: w.degenerate,
            })
            .collect(),
    })
}

/// PMR of the homogeneous reference, which predicts `p_t` for every window.
pub fn hpp_reference(windows: &WindowSet) -> Result<(Option<f64>, Option<f64>)> {
    let p = windows.p_values();
    Ok((
        rate_or_none(pmr(windows, &p, Direction::Excite))?,
        rate_or_none(pmr(windows, &p, Direction::Inhibit))?,
    ))
}
