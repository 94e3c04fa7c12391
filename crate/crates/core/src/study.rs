//! Replicate simulation studies: simulate from a generative model, fit a set
//! of candidate models, and average the comparison criteria per cell.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::{
    build_windows_with, compare_fit, hpp_reference, CompareOptions, Direction,
};
use crate::error::{Error, Result};
use crate::kernels::TriggerKernel;
use crate::links::LinkFunction;
use crate::model::{BackgroundModel, LatentGP, ModelSpec, Param};
use crate::pattern::PointPattern;
use crate::priors::{Prior, PriorSpec};
use crate::sampler::{run_mcmc, ParamSummary, SamplerConfig};
use crate::simulate::{sample_latent_gp, simulate_with_rng, ThinningConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyPreset {
    ExciteGrid,
    InhibitGrid,
    LinkGrid,
    EvoLgcp,
}

impl StudyPreset {
    pub fn name(&self) -> &'static str {
        match self {
            StudyPreset::ExciteGrid => "excite_grid",
            StudyPreset::InhibitGrid => "inhibit_grid",
            StudyPreset::LinkGrid => "link_grid",
            StudyPreset::EvoLgcp => "evo_lgcp",
        }
    }

    /// Direction of the PMR reported in the study table.
    pub fn direction(&self) -> Direction {
        match self {
            StudyPreset::InhibitGrid => Direction::Inhibit,
            _ => Direction::Excite,
        }
    }

    /// Whether the HPP reference row is part of the table.
    pub fn has_hpp_reference(&self) -> bool {
        matches!(self, StudyPreset::ExciteGrid | StudyPreset::InhibitGrid)
    }

    pub fn computes_rps(&self) -> bool {
        !matches!(self, StudyPreset::InhibitGrid)
    }
}

/// How the generative background is drawn for each replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    Fixed(ModelSpec),
    /// Log-linear background with a fresh latent-GP draw on `gp_cells` cells.
    Lgcp {
        model: ModelSpec,
        gp_cells: usize,
        sigma2: f64,
        phi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub name: String,
    pub template: ModelSpec,
    pub priors: PriorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub label: String,
    pub generator: Generator,
    pub horizon: f64,
    pub fits: Vec<FitSpec>,
    /// True generating values, for coverage checks.
    pub truth: BTreeMap<String, f64>,
    /// Simulation seed of replicate 0, when the cell has a canonical dataset.
    #[serde(default)]
    pub dataset_seed: Option<u64>,
}

pub const STUDY_HORIZON: f64 = 100.0;
pub const LGCP_SIM_CELLS: usize = 1000;
pub const LGCP_FIT_CELLS: usize = 100;
/// Simulation seed of the canonical LGCP dataset (1989 events).
pub const LGCP_PRESET_SEED: u64 = 86;

/// Priors for constant-background fits with `alpha ~ Unif(lower, upper)`.
pub fn grid_priors(alpha_lower: f64, alpha_upper: f64) -> PriorSpec {
    PriorSpec::new()
        .with(Param::Mu, Prior::Gamma { shape: 1.0, rate: 0.1 })
        .with(
            Param::Alpha,
            Prior::Uniform {
                lower: alpha_lower,
                upper: alpha_upper,
            },
        )
        .with(Param::Beta, Prior::Gamma { shape: 1.0, rate: 1.0 / 24.0 })
}

/// Default priors of a preset's fitted models.
pub fn preset_priors(preset: StudyPreset) -> PriorSpec {
    match preset {
        // the fitted Hawkes process is self-exciting
        StudyPreset::ExciteGrid => grid_priors(0.0, 2.0),
        StudyPreset::InhibitGrid => grid_priors(-2.0, 2.0),
        // generative alpha reaches 4 under the square-root link
        StudyPreset::LinkGrid => grid_priors(0.0, 10.0),
        StudyPreset::EvoLgcp => lgcp_priors(),
    }
}

/// Priors for log-linear backgrounds with a latent field.
pub fn lgcp_priors() -> PriorSpec {
    PriorSpec::new()
        .with(Param::Mu, Prior::Normal { mean: 0.0, var: 10.0 })
        .with(Param::Alpha, Prior::Uniform { lower: -2.0, upper: 2.0 })
        .with(Param::Beta, Prior::Gamma { shape: 1.0, rate: 1.0 / 24.0 })
        .with(Param::Sigma2, Prior::InverseGamma { shape: 1.0, scale: 1.0 })
        .with(Param::Phi, Prior::Gamma { shape: 0.01, rate: 0.01 })
}

fn hawkes_fit(name: &str, link: LinkFunction, priors: &PriorSpec) -> FitSpec {
    let template = ModelSpec::hawkes(1.0, 0.1, 1.0, link);
    FitSpec {
        name: name.into(),
        priors: priors.restricted_to(&template),
        template,
    }
}

fn hpp_fit(priors: &PriorSpec) -> FitSpec {
    let template = ModelSpec::hpp(1.0);
    FitSpec {
        name: "hpp".into(),
        priors: priors.restricted_to(&template),
        template,
    }
}

fn truth(mu: f64, alpha: f64, beta: f64) -> BTreeMap<String, f64> {
    [("mu", mu), ("alpha", alpha), ("beta", beta)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Starting GP settings for fitted latent-field models; the chain moves them.
fn fit_gp(horizon: f64) -> LatentGP {
    LatentGP::new(horizon, LGCP_FIT_CELLS, 1.0, 0.1).expect("valid gp")
}

pub fn preset_cells(preset: StudyPreset, priors: Option<&PriorSpec>) -> Vec<StudyCell> {
    let t = STUDY_HORIZON;
    let pri = priors.cloned().unwrap_or_else(|| preset_priors(preset));
    match preset {
        StudyPreset::ExciteGrid | StudyPreset::InhibitGrid => {
            let (mus, alphas): (&[f64], &[f64]) = if preset == StudyPreset::ExciteGrid {
                (&[0.5, 1.0], &[0.01, 0.03, 0.05, 0.07, 0.09])
            } else {
                (&[2.0, 5.0], &[-0.1, -0.3, -0.5, -0.7, -0.9])
            };
            let mut cells = Vec::new();
            for &mu in mus {
                for &alpha in alphas {
                    cells.push(StudyCell {
                        label: format!("mu={mu},alpha={alpha}"),
                        generator: Generator::Fixed(ModelSpec::hawkes(
                            mu,
                            alpha,
                            1.0,
                            LinkFunction::tobit(),
                        )),
                        horizon: t,
                        fits: vec![
                            hawkes_fit("hawkes", LinkFunction::tobit(), &pri),
                            hpp_fit(&pri),
                        ],
                        truth: truth(mu, alpha, 1.0),
                        dataset_seed: None,
                    });
                }
            }
            cells
        }
        StudyPreset::LinkGrid => {
            let fits = vec![
                hawkes_fit("power_eta=0.5", LinkFunction::Power { eta: 0.5 }, &pri),
                hawkes_fit("power_eta=1", LinkFunction::tobit(), &pri),
                hawkes_fit("softplus", LinkFunction::SoftPlus, &pri),
                hawkes_fit("log10_softplus", LinkFunction::Log10SoftPlus, &pri),
            ];
            vec![
                StudyCell {
                    label: "power_eta=0.5".into(),
                    generator: Generator::Fixed(ModelSpec::hawkes(
                        3.0,
                        4.0,
                        1.0,
                        LinkFunction::Power { eta: 0.5 },
                    )),
                    horizon: t,
                    fits: fits.clone(),
                    truth: truth(3.0, 4.0, 1.0),
                    dataset_seed: None,
                },
                StudyCell {
                    label: "power_eta=1".into(),
                    generator: Generator::Fixed(ModelSpec::hawkes(
                        0.5,
                        0.9,
                        1.0,
                        LinkFunction::tobit(),
                    )),
                    horizon: t,
                    fits,
                    truth: truth(0.5, 0.9, 1.0),
                    dataset_seed: None,
                },
            ]
        }
        StudyPreset::EvoLgcp => {
            let mu = 1.5f64.ln();
            let gen = ModelSpec::new(
                BackgroundModel::log_linear(mu, None, None),
                TriggerKernel::exponential(0.9, 20.0),
                LinkFunction::tobit(),
            );
            let gp_evo = ModelSpec::new(
                BackgroundModel::log_linear(0.0, None, Some(fit_gp(t))),
                TriggerKernel::exponential(0.1, 1.0),
                LinkFunction::tobit(),
            );
            let gp_only = ModelSpec::new(
                BackgroundModel::log_linear(0.0, None, Some(fit_gp(t))),
                TriggerKernel::None,
                LinkFunction::tobit(),
            );
            let evo_only = ModelSpec::new(
                BackgroundModel::log_linear(0.0, None, None),
                TriggerKernel::exponential(0.1, 1.0),
                LinkFunction::tobit(),
            );
            let fits = [("gp_evo", gp_evo), ("gp_only", gp_only), ("evo_only", evo_only)]
                .into_iter()
                .map(|(n, m)| FitSpec {
                    name: n.into(),
                    priors: pri.restricted_to(&m),
                    template: m,
                })
                .collect();
            let mut tr = truth(mu, 0.9, 20.0);
            tr.insert("sigma2".into(), 1.0);
            tr.insert("phi".into(), 0.05);
            vec![StudyCell {
                label: "lgcp".into(),
                generator: Generator::Lgcp {
                    model: gen,
                    gp_cells: LGCP_SIM_CELLS,
                    sigma2: 1.0,
                    phi: 1.0 / 20.0,
                },
                horizon: t,
                fits,
                truth: tr,
                dataset_seed: Some(LGCP_PRESET_SEED),
            }]
        }
    }
}

fn default_replicates() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub preset: StudyPreset,
    #[serde(default = "default_replicates")]
    pub n_replicates: usize,
    /// Restrict to these cell labels; all cells when empty.
    #[serde(default)]
    pub cells: Vec<String>,
    /// Restrict to these fitted models; all when empty.
    #[serde(default)]
    pub models: Vec<String>,
    /// Replaces the preset priors.
    #[serde(default)]
    pub priors: Option<PriorSpec>,
    /// Overrides the quadrature grid size of every fitted model.
    #[serde(default)]
    pub quad_points: Option<usize>,
}

impl StudyConfig {
    pub fn new(preset: StudyPreset, n_replicates: usize) -> Self {
        Self {
            preset,
            n_replicates,
            cells: Vec::new(),
            models: Vec::new(),
            priors: None,
            quad_points: None,
        }
    }

    pub fn resolved_cells(&self) -> Result<Vec<StudyCell>> {
        let mut cells = preset_cells(self.preset, self.priors.as_ref());
        if !self.cells.is_empty() {
            for c in &self.cells {
                if !cells.iter().any(|x| &x.label == c) {
                    return Err(Error::Config(format!(
                        "unknown cell {c:?} for preset {}",
                        self.preset.name()
                    )));
                }
            }
            cells.retain(|c| self.cells.contains(&c.label));
        }
        for cell in &mut cells {
            if !self.models.is_empty() {
                cell.fits.retain(|f| self.models.contains(&f.name));
            }
            if let Some(k) = self.quad_points {
                for f in &mut cell.fits {
                    f.template.quad_points = k;
                }
            }
            for f in &cell.fits {
                f.priors.validate_for(&f.template)?;
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub dic: Option<f64>,
    pub p_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dic_error: Option<String>,
    pub pmr_excite: Option<f64>,
    pub pmr_inhibit: Option<f64>,
    pub rps: Option<f64>,
    pub params: BTreeMap<String, ParamSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub cell: String,
    pub replicate: usize,
    pub seed: u64,
    pub n: Option<usize>,
    pub hpp_pmr_excite: Option<f64>,
    pub hpp_pmr_inhibit: Option<f64>,
    pub fits: BTreeMap<String, std::result::Result<FitOutcome, String>>,
}

impl ReplicateOutcome {
    pub fn fit(&self, name: &str) -> Option<&FitOutcome> {
        self.fits.get(name).and_then(|r| r.as_ref().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub preset_cell: String,
    pub model: String,
    #[serde(rename = "avg_n")]
    pub avg_n: f64,
    #[serde(rename = "avg_DIC")]
    pub avg_dic: Option<f64>,
    #[serde(rename = "avg_PMR")]
    pub avg_pmr: Option<f64>,
    #[serde(rename = "avg_RPS")]
    pub avg_rps: Option<f64>,
    /// Replicates where the fit failed or a criterion could not be computed.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub preset: StudyPreset,
    pub rows: Vec<StudyRow>,
    pub replicates: Vec<ReplicateOutcome>,
}

/// SplitMix64 step, used to derive independent seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Simulates the replicate's point pattern.
pub fn simulate_cell(cell: &StudyCell, seed: u64) -> Result<PointPattern> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cfg = ThinningConfig::seeded(seed);
    match &cell.generator {
        Generator::Fixed(m) => simulate_with_rng(m, cell.horizon, &cfg, &mut rng),
        Generator::Lgcp {
            model,
            gp_cells,
            sigma2,
            phi,
        } => {
            let gp = sample_latent_gp(cell.horizon, *gp_cells, *sigma2, *phi, &mut rng)?;
            let mut m = model.clone();
            m.background.gp = Some(gp);
            simulate_with_rng(&m, cell.horizon, &cfg, &mut rng)
        }
    }
}

/// The single simulated dataset of the LGCP preset.
pub fn lgcp_preset_dataset() -> Result<PointPattern> {
    let cell = preset_cells(StudyPreset::EvoLgcp, None).remove(0);
    simulate_cell(&cell, LGCP_PRESET_SEED)
}

/// Simulates one replicate and scores every fitted model on shared windows.
pub fn run_replicate(
    cell: &StudyCell,
    replicate: usize,
    base_seed: u64,
    sampler: &SamplerConfig,
    options: &CompareOptions,
) -> ReplicateOutcome {
    let seed = derive_seed(base_seed ^ label_hash(&cell.label), replicate as u64);
    let mut out = ReplicateOutcome {
        cell: cell.label.clone(),
        replicate,
        seed,
        n: None,
        hpp_pmr_excite: None,
        hpp_pmr_inhibit: None,
        fits: BTreeMap::new(),
    };
    let fail_all = |out: &mut ReplicateOutcome, msg: String| {
        for f in &cell.fits {
            out.fits.insert(f.name.clone(), Err(msg.clone()));
        }
    };
    let sim_seed = match (replicate, cell.dataset_seed) {
        (0, Some(s)) => s,
        _ => derive_seed(seed, 1),
    };
    let pattern = match simulate_cell(cell, sim_seed) {
        Ok(p) => p,
        Err(e) => {
            fail_all(&mut out, format!("simulation: {e}"));
            return out;
        }
    };
    out.n = Some(pattern.len());
    let windows = match build_windows_with(&pattern, derive_seed(seed, 2), options.window_sampler) {
        Ok(w) => w,
        Err(e) => {
            fail_all(&mut out, format!("windows: {e}"));
            return out;
        }
    };
    if let Ok((e, i)) = hpp_reference(&windows) {
        out.hpp_pmr_excite = e;
        out.hpp_pmr_inhibit = i;
    }
    for (k, fit) in cell.fits.iter().enumerate() {
        let chain_seed = derive_seed(seed, 10 + k as u64);
        let res = fit_and_score(fit, &pattern, &windows, sampler, options, chain_seed);
        out.fits.insert(fit.name.clone(), res.map_err(|e| e.to_string()));
    }
    out
}

fn fit_and_score(
    fit: &FitSpec,
    pattern: &PointPattern,
    windows: &crate::compare::WindowSet,
    sampler: &SamplerConfig,
    options: &CompareOptions,
    seed: u64,
) -> Result<FitOutcome> {
    let template = fit.template.clone().bind(pattern.horizon())?;
    let cfg = SamplerConfig {
        rng_seed: seed,
        ..sampler.clone()
    };
    let samples = run_mcmc(&template, &fit.priors, pattern, &cfg)?;
    let report = compare_fit(&fit.name, &samples, pattern, windows, options, derive_seed(seed, 99))?;
    Ok(FitOutcome {
        dic: report.dic,
        p_d: report.p_d,
        dic_error: report.dic_error,
        pmr_excite: report.pmr_excite,
        pmr_inhibit: report.pmr_inhibit,
        rps: report.rps,
        params: samples
            .summary()
            .into_iter()
            .map(|s| (s.name.clone(), s))
            .collect(),
    })
}

fn mean_of(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Runs every replicate of every cell, in parallel when `threads > 1`.
pub fn run_replicate_study(
    config: &StudyConfig,
    sampler: &SamplerConfig,
    options: &CompareOptions,
    base_seed: u64,
    threads: usize,
) -> Result<StudyResult> {
    sampler.validate()?;
    let cells = config.resolved_cells()?;
    let mut opts = options.clone();
    opts.compute_rps = opts.compute_rps && config.preset.computes_rps();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.n_replicates).map(move |r| (c, r)))
        .collect();
    let run = || -> Vec<ReplicateOutcome> {
        jobs.par_iter()
            .map(|&(c, r)| run_replicate(&cells[c], r, base_seed, sampler, &opts))
            .collect()
    };
    let replicates = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)
    };
    let rows = aggregate(config.preset, &cells, &replicates);
    Ok(StudyResult {
        preset: config.preset,
        rows,
        replicates,
    })
}

pub fn aggregate(
    preset: StudyPreset,
    cells: &[StudyCell],
    replicates: &[ReplicateOutcome],
) -> Vec<StudyRow> {
    let dir = preset.direction();
    let pick = |f: &FitOutcome| match dir {
        Direction::Excite => f.pmr_excite,
        Direction::Inhibit => f.pmr_inhibit,
    };
    let mut rows = Vec::new();
    for cell in cells {
        let reps: Vec<&ReplicateOutcome> = replicates.iter().filter(|r| r.cell == cell.label).collect();
        let avg_n = mean_of(reps.iter().filter_map(|r| r.n.map(|n| n as f64))).unwrap_or(f64::NAN);
        for fit in &cell.fits {
            let ok: Vec<&FitOutcome> = reps.iter().filter_map(|r| r.fit(&fit.name)).collect();
            let failures = reps.len() - ok.iter().filter(|f| f.dic.is_some()).count();
            let is_hpp_ref = preset.has_hpp_reference() && fit.name == "hpp";
            let avg_pmr = if is_hpp_ref {
                mean_of(reps.iter().filter_map(|r| match dir {
                    Direction::Excite => r.hpp_pmr_excite,
                    Direction::Inhibit => r.hpp_pmr_inhibit,
                }))
            } else {
                mean_of(ok.iter().filter_map(|f| pick(f)))
            };
            rows.push(StudyRow {
                preset_cell: cell.label.clone(),
                model: fit.name.clone(),
                avg_n,
                avg_dic: mean_of(ok.iter().filter_map(|f| f.dic)),
                avg_pmr,
                avg_rps: mean_of(ok.iter().filter_map(|f| f.rps)),
                failures,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_shape() {
        assert_eq!(preset_cells(StudyPreset::ExciteGrid, None).len(), 10);
        assert_eq!(preset_cells(StudyPreset::InhibitGrid, None).len(), 10);
        let link = preset_cells(StudyPreset::LinkGrid, None);
        assert_eq!(link.len(), 2);
        assert_eq!(link[0].fits.len(), 4);
        let lg = preset_cells(StudyPreset::EvoLgcp, None);
        assert_eq!(lg[0].fits.len(), 3);
        for c in preset_cells(StudyPreset::EvoLgcp, None) {
            for f in &c.fits {
                f.priors.validate_for(&f.template).unwrap();
            }
        }
    }

    #[test]
    fn seeds_differ_by_stream() {
        let a = derive_seed(1, 0);
        let b = derive_seed(1, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(1, 0));
    }

    #[test]
    fn unknown_cell_is_config_error() {
        let mut c = StudyConfig::new(StudyPreset::ExciteGrid, 1);
        c.cells = vec!["nope".into()];
        assert!(matches!(c.resolved_cells(), Err(Error::Config(_))));
    }

    #[test]
    fn tiny_study_runs() {
        let mut c = StudyConfig::new(StudyPreset::ExciteGrid, 2);
        c.cells = vec!["mu=1,alpha=0.09".into()];
        c.quad_points = Some(500);
        let s = SamplerConfig::short(400, 200, 0);
        let r = run_replicate_study(&c, &s, &CompareOptions::default(), 7, 1).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.replicates.len(), 2);
        assert!(r.rows.iter().all(|row| row.failures == 0));
        let again = run_replicate_study(&c, &s, &CompareOptions::default(), 7, 1).unwrap();
        assert_eq!(r, again);
    }
}
