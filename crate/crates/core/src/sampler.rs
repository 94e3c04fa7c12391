//! Adaptive Metropolis sampler.
//!
//! Phase 1 runs univariate random-walk updates with step sizes tuned toward an
//! acceptance window. Phase 2 switches to a joint Gaussian random walk whose
//! covariance tracks the empirical covariance of the chain since
//! `burn_in / 2` (Haario et al.). Latent-GP effects get one tuned random-walk
//! update each per iteration, `sigma2` a conjugate inverse-gamma draw when its
//! prior allows it, and `phi` a random walk on the log scale.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LikelihoodWorkspace, ModelSpec, Param};
use crate::pattern::PointPattern;
use crate::priors::{Prior, PriorSpec};

pub const TARGET_ACCEPT_LOW: f64 = 0.15;
pub const TARGET_ACCEPT_HIGH: f64 = 0.6;
pub const HAARIO_SCALE: f64 = 2.38;
pub const COV_RIDGE: f64 = 1e-8;

fn default_iterations() -> usize {
    30_000
}
fn default_burn_in() -> usize {
    10_000
}
fn default_stride() -> usize {
    50
}
fn default_candidates() -> usize {
    20
}
fn default_gp_step() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(default = "default_iterations")]
    pub n_iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Defaults to `burn_in / 2 + 100`.
    #[serde(default)]
    pub univariate_phase_length: Option<usize>,
    #[serde(default = "default_stride")]
    pub adapt_stride: usize,
    /// Starting random-walk scale per parameter; defaults to a tenth of the
    /// initial magnitude.
    #[serde(default)]
    pub initial_steps: BTreeMap<Param, f64>,
    #[serde(default = "default_gp_step")]
    pub initial_gp_step: f64,
    /// Fixed starting values; parameters not listed are drawn from the prior.
    #[serde(default)]
    pub init: BTreeMap<Param, f64>,
    /// Number of prior draws scored when picking the starting point.
    #[serde(default = "default_candidates")]
    pub init_candidates: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_true")]
    pub store_gp: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_iterations: default_iterations(),
            burn_in: default_burn_in(),
            univariate_phase_length: None,
            adapt_stride: default_stride(),
            initial_steps: BTreeMap::new(),
            initial_gp_step: default_gp_step(),
            init: BTreeMap::new(),
            init_candidates: default_candidates(),
            rng_seed: 0,
            store_gp: true,
        }
    }
}

impl SamplerConfig {
    pub fn short(n_iterations: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            n_iterations,
            burn_in,
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn univariate_phase(&self) -> usize {
        self.univariate_phase_length
            .unwrap_or((self.burn_in / 2 + 100).min(self.burn_in.saturating_sub(1)))
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.univariate_phase();
        if !(l < self.burn_in && self.burn_in < self.n_iterations) {
            return Err(Error::Config(format!(
                "need univariate_phase_length ({l}) < burn_in ({}) < n_iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if self.adapt_stride == 0 || self.init_candidates == 0 {
            return Err(Error::Config(
                "adapt_stride and init_candidates must be positive".into(),
            ));
        }
        if !(self.initial_gp_step > 0.0 && self.initial_gp_step.is_finite())
            || self.initial_steps.values().any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(Error::Config("step sizes must be positive".into()));
        }
        Ok(())
    }
}

/// Doubles the step above the acceptance window, halves it below.
pub fn tune_step(current_step: f64, accept_rate: f64) -> f64 {
    if accept_rate > TARGET_ACCEPT_HIGH {
        current_step * 2.0
    } else if accept_rate < TARGET_ACCEPT_LOW {
        current_step * 0.5
    } else {
        current_step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRecord {
    pub iteration: usize,
    pub block: String,
    pub rate: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub params: Vec<Param>,
    /// Model structure; parameter values are those of the last iteration.
    pub template: ModelSpec,
    /// Row-major, `n_rows x params.len()`.
    pub draws: Vec<f64>,
    /// Row-major, `n_rows x gp size`.
    pub gp_draws: Option<Vec<f64>>,
    pub loglik: Vec<f64>,
    pub acceptance: Vec<AcceptanceRecord>,
    pub rng_seed: u64,
    pub burn_in: usize,
    pub n_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q95: f64,
}

impl ParamSummary {
    pub fn from_values(name: &str, values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Self {
            name: name.to_string(),
            mean,
            sd: var.sqrt(),
            q05: quantile_sorted(&sorted, 0.05),
            q95: quantile_sorted(&sorted, 0.95),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let f = pos - lo as f64;
    sorted[lo] * (1.0 - f) + sorted[hi] * f
}

impl PosteriorSamples {
    pub fn n_rows(&self) -> usize {
        self.loglik.len()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.params.len();
        &self.draws[i * d..(i + 1) * d]
    }

    pub fn gp_row(&self, i: usize) -> Option<&[f64]> {
        let g = self.template.gp()?.size();
        self.gp_draws.as_ref().map(|v| &v[i * g..(i + 1) * g])
    }

    pub fn column(&self, p: Param) -> Option<Vec<f64>> {
        let j = self.params.iter().position(|q| *q == p)?;
        Some((0..self.n_rows()).map(|i| self.row(i)[j]).collect())
    }

    pub fn mean(&self, p: Param) -> Option<f64> {
        let c = self.column(p)?;
        Some(c.iter().sum::<f64>() / c.len() as f64)
    }

    pub fn summary(&self) -> Vec<ParamSummary> {
        self.params
            .iter()
            .map(|p| ParamSummary::from_values(p.name(), &self.column(*p).unwrap()))
            .collect()
    }

    /// Model at stored row `i`, including its latent effects.
    pub fn model_at(&self, i: usize) -> ModelSpec {
        let mut m = self.template.clone();
        for (p, v) in self.params.iter().zip(self.row(i)) {
            m.set(*p, *v).expect("parameter belongs to template");
        }
        if let Some(w) = self.gp_row(i) {
            m.gp_mut().unwrap().set_effects(w).unwrap();
        }
        m
    }

    /// Model at the posterior mean of every parameter and latent effect.
    pub fn posterior_mean_model(&self) -> ModelSpec {
        let mut m = self.template.clone();
        for p in &self.params {
            m.set(*p, self.mean(*p).unwrap()).unwrap();
        }
        if let (Some(gd), Some(gp)) = (&self.gp_draws, m.gp_mut()) {
            let g = gp.size();
            let n = self.n_rows() as f64;
            let mut w = vec![0.0; g];
            for row in gd.chunks(g) {
                for (a, b) in w.iter_mut().zip(row) {
                    *a += b / n;
                }
            }
            gp.set_effects(&w).unwrap();
        }
        m
    }

    /// Final acceptance rate per block, from the last adaptation window.
    pub fn final_acceptance(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for r in &self.acceptance {
            out.insert(r.block.clone(), r.rate);
        }
        out
    }
}

/// Log-likelihood plus log-priors, plus the latent-field prior for GP models.
pub fn log_posterior(model: &ModelSpec, priors: &PriorSpec, pattern: &PointPattern) -> Result<f64> {
    let lp = priors.log_density(model);
    if lp == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let gp = model.gp().map_or(0.0, |g| g.log_prior());
    let ll = crate::model::log_likelihood(model, pattern)?;
    Ok(ll + lp + gp)
}

struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(d: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; d],
            m2: vec![0.0; d * d],
        }
    }

    fn push(&mut self, x: &[f64]) {
        let d = self.mean.len();
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, dl) in self.mean.iter_mut().zip(&delta) {
            *m += dl / n;
        }
        for i in 0..d {
            let di2 = x[i] - self.mean[i];
            for j in 0..d {
                self.m2[i * d + j] += delta[j] * di2;
            }
        }
    }

    fn covariance(&self) -> Vec<f64> {
        let denom = (self.n as f64 - 1.0).max(1.0);
        let d = self.mean.len();
        let mut c: Vec<f64> = self.m2.iter().map(|v| v / denom).collect();
        // symmetrize against rounding
        for i in 0..d {
            for j in 0..i {
                let s = 0.5 * (c[i * d + j] + c[j * d + i]);
                c[i * d + j] = s;
                c[j * d + i] = s;
            }
        }
        c
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Haario proposal factor for `(2.38^2 / d) (cov + ridge I)`, growing the ridge until it factors.
fn proposal_factor(cov: &[f64], d: usize) -> Vec<f64> {
    let scale = HAARIO_SCALE * HAARIO_SCALE / d as f64;
    let mut ridge = COV_RIDGE;
    loop {
        let mut a: Vec<f64> = cov.iter().map(|v| v * scale).collect();
        for i in 0..d {
            a[i * d + i] += ridge * scale;
        }
        if let Some(l) = cholesky(&a, d) {
            return l;
        }
        ridge *= 10.0;
    }
}

#[derive(Default, Clone, Copy)]
struct Counter {
    tried: u32,
    accepted: u32,
}

impl Counter {
    fn record(&mut self, acc: bool) {
        self.tried += 1;
        self.accepted += acc as u32;
    }
    fn rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

struct Chain<'a> {
    pattern: &'a PointPattern,
    priors: &'a PriorSpec,
    model: ModelSpec,
    ws: LikelihoodWorkspace,
    scratch: LikelihoodWorkspace,
    ll: f64,
    rng: ChaCha8Rng,
}

impl Chain<'_> {
    fn prior_of(&self, p: Param) -> &Prior {
        self.priors.get(p).expect("validated")
    }

    fn structural_log_prior(&self, m: &ModelSpec, params: &[Param]) -> f64 {
        let mut lp = 0.0;
        for &p in params {
            let x = m.get(p).unwrap();
            if !m.support(p).contains(x) {
                return f64::NEG_INFINITY;
            }
            lp += self.prior_of(p).log_density(x);
        }
        lp
    }

    /// Metropolis step for a proposed structural model; GP effects are unchanged.
    fn try_structural(&mut self, proposal: ModelSpec, params: &[Param]) -> Result<bool> {
        let lp_new = self.structural_log_prior(&proposal, params);
        if lp_new == f64::NEG_INFINITY || proposal.validate().is_err() {
            return Ok(false);
        }
        let lp_old = self.structural_log_prior(&self.model, params);
        let ll_new = self.scratch.evaluate(&proposal, self.pattern)?;
        if ll_new.is_nan() {
            return Err(Error::Numerical("log-likelihood evaluated to NaN".into()));
        }
        let log_ratio = ll_new + lp_new - self.ll - lp_old;
        if accept(&mut self.rng, log_ratio) {
            self.model = proposal;
            self.ll = ll_new;
            std::mem::swap(&mut self.ws, &mut self.scratch);
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

fn accept(rng: &mut ChaCha8Rng, log_ratio: f64) -> bool {
    if log_ratio.is_nan() || log_ratio == f64::NEG_INFINITY {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn initial_point(
    template: &ModelSpec,
    priors: &PriorSpec,
    pattern: &PointPattern,
    config: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ModelSpec> {
    let structural: Vec<Param> = template
        .free_parameters()
        .into_iter()
        .filter(|p| p.enters_likelihood())
        .collect();
    let mut base = template.clone();
    for (p, v) in &config.init {
        base.set(*p, *v)?;
    }
    if let Some(gp) = base.gp_mut() {
        let g = gp.size();
        gp.set_effects(&vec![0.0; g])?;
    }
    let to_draw: Vec<Param> = structural
        .iter()
        .copied()
        .filter(|p| !config.init.contains_key(p))
        .collect();
    let candidates = if to_draw.is_empty() { 1 } else { config.init_candidates };
    let mut best: Option<(f64, ModelSpec)> = None;
    for _ in 0..candidates {
        let mut m = base.clone();
        for &p in &to_draw {
            let v = priors.get(p).unwrap().sample_truncated(rng, m.support(p))?;
            m.set(p, v)?;
        }
        if m.validate().is_err() {
            continue;
        }
        let lp = log_posterior(&m, priors, pattern)?;
        if lp.is_finite() && best.as_ref().is_none_or(|(b, _)| lp > *b) {
            best = Some((lp, m));
        }
    }
    best.map(|(_, m)| m).ok_or_else(|| {
        Error::NonFiniteInitial(
            "no starting point with finite log-posterior; supply init values".into(),
        )
    })
}

/// Runs the adaptive chain and returns the post-burn-in draws.
pub fn run_mcmc(
    template: &ModelSpec,
    priors: &PriorSpec,
    pattern: &PointPattern,
    config: &SamplerConfig,
) -> Result<PosteriorSamples> {
    config.validate()?;
    template.validate()?;
    priors.validate_for(template)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let init = initial_point(template, priors, pattern, config, &mut rng)?;
    let mut ws = LikelihoodWorkspace::new(&init, pattern)?;
    let ll = ws.evaluate(&init, pattern)?;
    if !ll.is_finite() || !priors.log_density(&init).is_finite() {
        return Err(Error::NonFiniteInitial(format!(
            "log-posterior at the initial point is {ll}; supply init values"
        )));
    }
    let scratch = ws.clone();

    let params = template.free_parameters();
    let structural: Vec<Param> = params.iter().copied().filter(|p| p.enters_likelihood()).collect();
    let d = structural.len();
    let has_gp = init.gp().is_some();
    let gp_size = init.gp().map_or(0, |g| g.size());
    let sigma2_conjugate = matches!(priors.get(Param::Sigma2), Some(Prior::InverseGamma { .. }));

    let mut chain = Chain {
        pattern,
        priors,
        model: init,
        ws,
        scratch,
        ll,
        rng,
    };

    let mut steps: Vec<f64> = structural
        .iter()
        .map(|p| {
            config.initial_steps.get(p).copied().unwrap_or_else(|| {
                let v = chain.model.get(*p).unwrap().abs();
                0.1 * v.max(0.1)
            })
        })
        .collect();
    let mut gp_steps = vec![config.initial_gp_step; gp_size];
    let mut sigma2_step = config.initial_steps.get(&Param::Sigma2).copied().unwrap_or(0.5);
    let mut phi_step = config.initial_steps.get(&Param::Phi).copied().unwrap_or(0.5);

    let uni_len = config.univariate_phase();
    let cov_start = config.burn_in / 2;
    let stride = config.adapt_stride;
    let n_rows = config.n_iterations - config.burn_in;

    let mut uni_cnt = vec![Counter::default(); d];
    let mut joint_cnt = Counter::default();
    let mut gp_cnt = vec![Counter::default(); gp_size];
    let mut sigma2_cnt = Counter::default();
    let mut phi_cnt = Counter::default();
    let mut welford = Welford::new(d);
    let mut factor: Vec<f64> = Vec::new();

    let mut draws = Vec::with_capacity(n_rows * params.len());
    let mut gp_draws = (has_gp && config.store_gp).then(|| Vec::with_capacity(n_rows * gp_size));
    let mut loglik = Vec::with_capacity(n_rows);
    let mut acceptance = Vec::new();
    let mut theta = vec![0.0; d];

    for it in 0..config.n_iterations {
        if d > 0 {
            if it < uni_len {
                for k in 0..d {
                    let p = structural[k];
                    let mut prop = chain.model.clone();
                    let z = normal(&mut chain.rng);
                    prop.set(p, chain.model.get(p).unwrap() + steps[k] * z)?;
                    let acc = chain.try_structural(prop, &structural)?;
                    uni_cnt[k].record(acc);
                }
            } else {
                if factor.is_empty() || welford.n >= 2 {
                    let cov = if welford.n >= 2 {
                        welford.covariance()
                    } else {
                        let mut c = vec![0.0; d * d];
                        for k in 0..d {
                            c[k * d + k] = steps[k] * steps[k];
                        }
                        c
                    };
                    factor = proposal_factor(&cov, d);
                }
                let z: Vec<f64> = (0..d).map(|_| normal(&mut chain.rng)).collect();
                let mut prop = chain.model.clone();
                for i in 0..d {
                    let dx: f64 = (0..=i).map(|j| factor[i * d + j] * z[j]).sum();
                    let p = structural[i];
                    prop.set(p, chain.model.get(p).unwrap() + dx)?;
                }
                let acc = chain.try_structural(prop, &structural)?;
                joint_cnt.record(acc);
            }
        }

        if has_gp {
            for j in 0..gp_size {
                let gp = chain.model.gp().unwrap();
                let w_old = gp.effects()[j];
                let w_new = w_old + gp_steps[j] * normal(&mut chain.rng);
                let delta = chain.ws.cell_contribution_with(&chain.model, j, w_new)
                    - chain.ws.cell_contribution(j)
                    + gp.log_prior_local(j, w_new)
                    - gp.log_prior_local(j, w_old);
                let acc = accept(&mut chain.rng, delta);
                if acc {
                    chain.model.gp_mut().unwrap().effects_mut()[j] = w_new;
                    chain.ws.update_cell(&chain.model, j, w_new);
                }
                gp_cnt[j].record(acc);
            }
            chain.ll = chain.ws.total();

            if sigma2_conjugate {
                let Some(Prior::InverseGamma { shape, scale }) = priors.get(Param::Sigma2).copied()
                else {
                    unreachable!()
                };
                let q = chain.model.gp().unwrap().standardized_quadratic();
                let a = shape + gp_size as f64 / 2.0;
                let b = scale + q / 2.0;
                let g: f64 = Gamma::new(a, 1.0 / b)
                    .map_err(|e| Error::Numerical(e.to_string()))?
                    .sample(&mut chain.rng);
                chain.model.set(Param::Sigma2, 1.0 / g)?;
            } else {
                let acc = log_scale_update(&mut chain, Param::Sigma2, sigma2_step)?;
                sigma2_cnt.record(acc);
            }
            let acc = log_scale_update(&mut chain, Param::Phi, phi_step)?;
            phi_cnt.record(acc);
        }

        if it >= cov_start && d > 0 {
            for (k, p) in structural.iter().enumerate() {
                theta[k] = chain.model.get(*p).unwrap();
            }
            welford.push(&theta);
        }

        if (it + 1) % stride == 0 {
            let tuning = it < config.burn_in;
            if it < uni_len {
                for k in 0..d {
                    let rate = uni_cnt[k].rate();
                    steps[k] = tune_step(steps[k], rate);
                    acceptance.push(AcceptanceRecord {
                        iteration: it + 1,
                        block: structural[k].name().to_string(),
                        rate,
                        step: steps[k],
                    });
                    uni_cnt[k] = Counter::default();
                }
            } else if d > 0 {
                acceptance.push(AcceptanceRecord {
                    iteration: it + 1,
                    block: "joint".into(),
                    rate: joint_cnt.rate(),
                    step: HAARIO_SCALE / (d as f64).sqrt(),
                });
                joint_cnt = Counter::default();
            }
            if has_gp {
                let mut mean_rate = 0.0;
                for j in 0..gp_size {
                    let r = gp_cnt[j].rate();
                    mean_rate += r / gp_size as f64;
                    if tuning {
                        gp_steps[j] = tune_step(gp_steps[j], r);
                    }
                    gp_cnt[j] = Counter::default();
                }
                let mean_step = gp_steps.iter().sum::<f64>() / gp_size as f64;
                acceptance.push(AcceptanceRecord {
                    iteration: it + 1,
                    block: "gp".into(),
                    rate: mean_rate,
                    step: mean_step,
                });
                if !sigma2_conjugate {
                    let r = sigma2_cnt.rate();
                    if tuning {
                        sigma2_step = tune_step(sigma2_step, r);
                    }
                    acceptance.push(AcceptanceRecord {
                        iteration: it + 1,
                        block: "sigma2".into(),
                        rate: r,
                        step: sigma2_step,
                    });
                    sigma2_cnt = Counter::default();
                }
                let r = phi_cnt.rate();
                if tuning {
                    phi_step = tune_step(phi_step, r);
                }
                acceptance.push(AcceptanceRecord {
                    iteration: it + 1,
                    block: "phi".into(),
                    rate: r,
                    step: phi_step,
                });
                phi_cnt = Counter::default();
            }
        }

        if it >= config.burn_in {
            for p in &params {
                draws.push(chain.model.get(*p).unwrap());
            }
            if let Some(g) = gp_draws.as_mut() {
                g.extend_from_slice(chain.model.gp().unwrap().effects());
            }
            loglik.push(chain.ll);
        }
    }

    Ok(PosteriorSamples {
        params,
        template: chain.model,
        draws,
        gp_draws,
        loglik,
        acceptance,
        rng_seed: config.rng_seed,
        burn_in: config.burn_in,
        n_iterations: config.n_iterations,
    })
}

/// Random walk on `log x` for a GP hyperparameter, Jacobian included.
fn log_scale_update(chain: &mut Chain<'_>, p: Param, step: f64) -> Result<bool> {
    let old = chain.model.get(p).unwrap();
    let new = old * (step * normal(&mut chain.rng)).exp();
    if !(new > 0.0 && new.is_finite()) {
        return Ok(false);
    }
    let prior = *chain.prior_of(p);
    let gp_old = chain.model.gp().unwrap().log_prior();
    let mut m = chain.model.clone();
    m.set(p, new)?;
    let gp_new = m.gp().unwrap().log_prior();
    let log_ratio =
        gp_new - gp_old + prior.log_density(new) - prior.log_density(old) + new.ln() - old.ln();
    if accept(&mut chain.rng, log_ratio) {
        chain.model.set(p, new)?;
        Ok(true)
    } else {
        Ok(false)
    }
}
