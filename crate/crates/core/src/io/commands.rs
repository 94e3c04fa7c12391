//! `simulate`, `fit`, `compare` and `study` commands writing into an output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::compare::{build_windows_with, compare_fit, hpp_reference, CompareOptions};
use crate::error::{Error, Result};
use crate::io::config::{Command, DataSource, ExperimentConfig, FitPreset};
use crate::io::ingest::{ingest_events_file, IngestReport};
use crate::io::pattern_csv::{read_pattern, write_pattern};
use crate::kernels::TriggerKernel;
use crate::links::LinkFunction;
use crate::model::{BackgroundModel, LatentGP, ModelSpec, Param, Seasonal, DEFAULT_GP_SIZE};
use crate::pattern::PointPattern;
use crate::priors::{Prior, PriorSpec};
use crate::sampler::{quantile_sorted, run_mcmc, ParamSummary, PosteriorSamples, SamplerConfig};
use crate::simulate::{simulate_thinning, ThinningConfig};
use crate::study::{
    derive_seed, lgcp_preset_dataset, preset_cells, run_replicate_study, simulate_cell, StudyPreset,
};

/// Where to write and how to seed a command run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Overrides the config seed.
    pub seed: Option<u64>,
    /// Worker threads for studies; 0 uses every core.
    pub threads: usize,
}

const CURVE_MAX_DRAWS: usize = 2000;

fn seed_of(cfg: &ExperimentConfig, opts: &RunOptions) -> u64 {
    opts.seed.unwrap_or(cfg.seed)
}

/// Config with the seed actually used, for embedding in reports.
fn resolved(cfg: &ExperimentConfig, seed: u64, command: Command) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        command: Some(command),
        ..cfg.clone()
    }
}

fn sampler_for(cfg: &ExperimentConfig, seed: u64, stream: u64) -> SamplerConfig {
    let mut s = cfg.sampler.clone().unwrap_or_default();
    if s.rng_seed == 0 {
        s.rng_seed = derive_seed(seed, stream);
    }
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Model and priors of a fit preset.
pub fn fit_preset(preset: FitPreset) -> (ModelSpec, PriorSpec) {
    match preset {
        FitPreset::Hpp => (
            ModelSpec::hpp(1.0),
            PriorSpec::new().with(Param::Mu, Prior::Gamma { shape: 1.0, rate: 1.0 }),
        ),
        FitPreset::EvoLgcp => {
            let cell = preset_cells(StudyPreset::EvoLgcp, None).remove(0);
            let f = cell.fits.into_iter().find(|f| f.name == "gp_evo").unwrap();
            (f.template, f.priors)
        }
        FitPreset::Crime => (crime_model(), crime_priors()),
    }
}

/// Log-linear background with a daily harmonic and a 100-cell latent field,
/// exponential excitation and the truncated linear link.
pub fn crime_model() -> ModelSpec {
    let gp = LatentGP::new(8760.0, DEFAULT_GP_SIZE, 1.0, 0.02).expect("valid gp");
    ModelSpec::new(
        BackgroundModel::log_linear(
            -1.0,
            Some(Seasonal {
                gamma1: 0.0,
                gamma2: 0.0,
                period: 24.0,
            }),
            Some(gp),
        ),
        TriggerKernel::exponential(0.01, 24.0),
        LinkFunction::tobit(),
    )
}

pub fn crime_priors() -> PriorSpec {
    let normal = Prior::Normal { mean: 0.0, var: 10.0 };
    PriorSpec::new()
        .with(Param::Mu, normal)
        .with(Param::Gamma1, normal)
        .with(Param::Gamma2, normal)
        .with(Param::Alpha, Prior::Uniform { lower: -2.0, upper: 2.0 })
        .with(Param::Beta, Prior::Gamma { shape: 1.0, rate: 1.0 / 24.0 })
        .with(Param::Sigma2, Prior::InverseGamma { shape: 1.0, scale: 1.0 })
        .with(Param::Phi, Prior::Gamma { shape: 1.0, rate: 50.0 })
}

/// Loads the configured data source; the LGCP preset falls back to its own dataset.
pub fn load_data(cfg: &ExperimentConfig, seed: u64) -> Result<(PointPattern, Option<IngestReport>)> {
    match &cfg.data {
        Some(DataSource::Pattern { path }) => Ok((read_pattern(path, None)?, None)),
        Some(DataSource::Inline { events, horizon }) => Ok((
            PointPattern::new(events.clone(), *horizon).map_err(|e| Error::Data(e.to_string()))?,
            None,
        )),
        Some(DataSource::Events(filter)) => {
            let (p, r) = ingest_events_file(filter, derive_seed(seed, 7))?;
            Ok((p, Some(r)))
        }
        None if cfg.preset == Some(FitPreset::EvoLgcp) => Ok((lgcp_preset_dataset()?, None)),
        None => Err(Error::Config("no `data` source given".into())),
    }
}

fn prepare(cfg: &ExperimentConfig, opts: &RunOptions, command: Command) -> Result<u64> {
    cfg.validate_for(command)?;
    fs::create_dir_all(&opts.out)?;
    Ok(seed_of(cfg, opts))
}

pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    match command {
        Command::Simulate => cmd_simulate(cfg, opts),
        Command::Fit => cmd_fit(cfg, opts),
        Command::Compare => cmd_compare(cfg, opts),
        Command::Study => cmd_study(cfg, opts),
    }
}

/// Writes `pattern.csv`.
pub fn cmd_simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    let seed = prepare(cfg, opts, Command::Simulate)?;
    let sim = cfg.simulation.clone().unwrap();
    let (pattern, model_json) = if let Some(cell_ref) = &sim.study_cell {
        let cell = preset_cells(cell_ref.preset, None)
            .into_iter()
            .find(|c| c.label == cell_ref.label)
            .ok_or_else(|| {
                Error::Config(format!("unknown cell {:?} of {}", cell_ref.label, cell_ref.preset.name()))
            })?;
        let mut cell = cell;
        if let Some(h) = sim.horizon {
            cell.horizon = h;
        }
        let gen = serde_json::to_string(&cell.generator)?;
        (simulate_cell(&cell, seed)?, gen)
    } else {
        let model = cfg.model.clone().unwrap();
        let tc = ThinningConfig {
            lookahead_scale: sim.lookahead_scale,
            event_budget: sim.event_budget,
            rng_seed: seed,
        };
        let p = simulate_thinning(&model, sim.horizon.unwrap(), &tc)?;
        (p, serde_json::to_string(&model)?)
    };
    let path = opts.out.join("pattern.csv");
    write_pattern(&path, &pattern, &[("model", model_json), ("seed", seed.to_string())])?;
    Ok(json!({"pattern": path, "n": pattern.len(), "horizon": pattern.horizon(), "seed": seed}))
}

fn draws_csv(path: &Path, s: &PosteriorSamples) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["draw".to_string(), "loglik".to_string()];
    header.extend(s.params.iter().map(|p| p.name().to_string()));
    w.write_record(&header)?;
    for i in 0..s.n_rows() {
        let mut rec = vec![i.to_string(), s.loglik[i].to_string()];
        rec.extend(s.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn acceptance_csv(path: &Path, s: &PosteriorSamples) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "block", "rate", "step"])?;
    for r in &s.acceptance {
        w.write_record([r.iteration.to_string(), r.block.clone(), r.rate.to_string(), r.step.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn thinned_rows(s: &PosteriorSamples) -> Vec<usize> {
    let n = s.n_rows();
    let m = n.clamp(1, CURVE_MAX_DRAWS);
    (0..m).map(|k| k * n / m).collect()
}

/// Writes `x, mean, q05, q95` of `f(model, x)` over the posterior.
fn curve_csv<F>(path: &Path, x_name: &str, xs: &[f64], s: &PosteriorSamples, f: F) -> Result<()>
where
    F: Fn(&ModelSpec, f64) -> f64,
{
    let rows = thinned_rows(s);
    let models: Vec<ModelSpec> = rows.iter().map(|&i| s.model_at(i)).collect();
    let mut w = csv_writer(path)?;
    w.write_record([x_name, "mean", "q05", "q95"])?;
    for &x in xs {
        let mut v: Vec<f64> = models.iter().map(|m| f(m, x)).collect();
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        w.write_record([x, mean, quantile_sorted(&v, 0.05), quantile_sorted(&v, 0.95)].map(|a| a.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready curves: daily harmonic, latent field and post-event excitation.
fn write_curves(out: &Path, s: &PosteriorSamples) -> Result<Vec<&'static str>> {
    let mut written = Vec::new();
    let t = &s.template;
    if let Some(seas) = t.background.seasonal {
        let xs: Vec<f64> = (0..=96).map(|k| k as f64 * seas.period / 96.0).collect();
        curve_csv(&out.join("curve_seasonal.csv"), "hour", &xs, s, |m, x| {
            m.background.seasonal.map_or(1.0, |h| h.value(x).exp())
        })?;
        written.push("curve_seasonal.csv");
    }
    if let Some(gp) = t.gp() {
        let xs = gp.grid_times();
        curve_csv(&out.join("curve_gp.csv"), "time_hours", &xs, s, |m, x| {
            m.gp().map_or(1.0, |g| g.value_at(x).exp())
        })?;
        written.push("curve_gp.csv");
    }
    if !t.kernel.is_none() {
        let beta = s.mean(Param::Beta).or(t.kernel.beta()).unwrap_or(1.0);
        let span = 5.0 / beta;
        let xs: Vec<f64> = (0..=200).map(|k| k as f64 * span / 200.0).collect();
        curve_csv(&out.join("curve_excitation.csv"), "lag_hours", &xs, s, |m, x| {
            m.kernel.value(x)
        })?;
        written.push("curve_excitation.csv");
    }
    Ok(written)
}

/// Posterior summaries, with `exp_mu` added for log-linear backgrounds.
pub fn summary_rows(s: &PosteriorSamples) -> Vec<ParamSummary> {
    let mut rows = s.summary();
    if s.template.background.form == crate::model::BackgroundForm::LogLinear {
        if let Some(mu) = s.column(Param::Mu) {
            let e: Vec<f64> = mu.iter().map(|v| v.exp()).collect();
            rows.insert(0, ParamSummary::from_values("exp_mu", &e));
        }
    }
    rows
}

/// Writes draws, summary, acceptance log and fitted curves.
pub fn cmd_fit(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    let seed = prepare(cfg, opts, Command::Fit)?;
    let started = Instant::now();
    let (pattern, ingest) = load_data(cfg, seed)?;
    let (model, priors) = match cfg.preset {
        Some(p) => {
            let (m, pr) = fit_preset(p);
            (m, cfg.priors.clone().unwrap_or(pr))
        }
        None => (cfg.model.clone().unwrap(), cfg.priors.clone().unwrap()),
    };
    let template = model.bind(pattern.horizon())?;
    let sampler = sampler_for(cfg, seed, 1);
    let samples = run_mcmc(&template, &priors, &pattern, &sampler)
        .map_err(|e| annotate(e, "fit"))?;

    draws_csv(&opts.out.join("draws.csv"), &samples)?;
    acceptance_csv(&opts.out.join("acceptance.csv"), &samples)?;
    let curves = write_curves(&opts.out, &samples)?;
    let summary = json!({
        "config": resolved(cfg, seed, Command::Fit),
        "seed": seed,
        "sampler": sampler,
        "n": pattern.len(),
        "horizon": pattern.horizon(),
        "ingest": ingest,
        "model": template,
        "priors": priors,
        "summary": summary_rows(&samples),
        "final_acceptance": samples.final_acceptance(),
        "curves": curves,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    write_json(&opts.out.join("summary.json"), &summary)?;
    Ok(json!({"n": pattern.len(), "summary": summary["summary"], "out": opts.out}))
}

fn annotate(e: Error, context: &str) -> Error {
    match e {
        Error::NonFiniteInitial(m) => Error::NonFiniteInitial(format!("{context}: {m}")),
        Error::Numerical(m) => Error::Numerical(format!("{context}: {m}")),
        other => other,
    }
}

/// Fits every listed model on shared windows; writes `report.json` and `windows.csv`.
pub fn cmd_compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    let seed = prepare(cfg, opts, Command::Compare)?;
    let started = Instant::now();
    let (pattern, ingest) = load_data(cfg, seed)?;
    let options: CompareOptions = cfg.comparison.clone().unwrap_or_default();
    let windows = build_windows_with(&pattern, derive_seed(seed, 2), options.window_sampler)?;
    let (hpp_e, hpp_i) = hpp_reference(&windows)?;
    let mut reports = Vec::new();
    for (k, m) in cfg.models.iter().enumerate() {
        let template = m.model.clone().bind(pattern.horizon())?;
        let sampler = sampler_for(cfg, seed, 10 + k as u64);
        let samples = run_mcmc(&template, &m.priors, &pattern, &sampler)
            .map_err(|e| annotate(e, &format!("model {:?}", m.name)))?;
        let rep = compare_fit(&m.name, &samples, &pattern, &windows, &options, derive_seed(seed, 100 + k as u64))?;
        reports.push((rep, summary_rows(&samples)));
    }

    let mut w = csv_writer(&opts.out.join("windows.csv"))?;
    let mut header: Vec<String> = ["anchor", "delta", "p", "y", "degenerate"].map(String::from).to_vec();
    header.extend(reports.iter().map(|(r, _)| format!("q_{}", r.model)));
    w.write_record(&header)?;
    for (i, win) in windows.windows.iter().enumerate() {
        let mut rec = vec![
            win.anchor.to_string(),
            win.delta.to_string(),
            win.p.to_string(),
            (win.y as u8).to_string(),
            (win.degenerate as u8).to_string(),
        ];
        rec.extend(reports.iter().map(|(r, _)| r.windows[i].q.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let models: Vec<Value> = reports
        .into_iter()
        .map(|(mut r, summary)| {
            r.windows.clear();
            let mut v = serde_json::to_value(&r).unwrap();
            v["summary"] = serde_json::to_value(summary).unwrap();
            v
        })
        .collect();
    let report = json!({
        "config": resolved(cfg, seed, Command::Compare),
        "seed": seed,
        "n": pattern.len(),
        "horizon": pattern.horizon(),
        "ingest": ingest,
        "rate_hat": windows.rate_hat,
        "n_windows": windows.n_active(),
        "hpp_reference": {"pmr_excite": hpp_e, "pmr_inhibit": hpp_i},
        "models": models,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    write_json(&opts.out.join("report.json"), &report)?;
    Ok(json!({"hpp_reference": report["hpp_reference"], "models": report["models"], "out": opts.out}))
}

/// Runs a replicate study; writes `study.csv` and `study.json`.
pub fn cmd_study(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Value> {
    let seed = prepare(cfg, opts, Command::Study)?;
    let started = Instant::now();
    let study = cfg.study.clone().unwrap();
    let sampler = cfg.sampler.clone().unwrap_or_default();
    let options = cfg.comparison.clone().unwrap_or_default();
    let result = run_replicate_study(&study, &sampler, &options, seed, opts.threads)?;

    let mut w = csv_writer(&opts.out.join("study.csv"))?;
    w.write_record(["preset_cell", "model", "avg_n", "avg_dic", "avg_pmr", "avg_rps", "failures"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &result.rows {
        w.write_record([
            r.preset_cell.clone(),
            r.model.clone(),
            r.avg_n.to_string(),
            opt(r.avg_dic),
            opt(r.avg_pmr),
            opt(r.avg_rps),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;

    let failed: Vec<Value> = result
        .replicates
        .iter()
        .flat_map(|r| {
            r.fits.iter().filter_map(move |(name, f)| {
                let reason = match f {
                    Err(e) => Some(e.clone()),
                    Ok(o) => o.dic_error.clone(),
                };
                reason.map(|e| json!({"cell": r.cell, "replicate": r.replicate, "model": name, "error": e}))
            })
        })
        .collect();
    let total_fits: usize = result.replicates.iter().map(|r| r.fits.len()).sum();
    let out = json!({
        "config": resolved(cfg, seed, Command::Study),
        "seed": seed,
        "preset": result.preset,
        "sampler": sampler,
        "rows": result.rows,
        "replicates": result.replicates,
        "failure_accounting": {"total_fits": total_fits, "failed": failed.len(), "failures": failed},
        "threads": opts.threads,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    write_json(&opts.out.join("study.json"), &out)?;
    Ok(json!({"rows": out["rows"], "elapsed_seconds": out["elapsed_seconds"]}))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for p in [FitPreset::Hpp, FitPreset::EvoLgcp, FitPreset::Crime] {
            let (m, pr) = fit_preset(p);
            m.validate().unwrap();
            pr.validate_for(&m).unwrap();
        }
        let (m, _) = fit_preset(FitPreset::Crime);
        assert_eq!(m.free_parameters().len(), 7);
    }

    #[test]
    fn simulate_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::from_json(
            r#"{"seed": 4, "model": {"background": {"form": "constant", "mu": 1},
                "kernel": {"family": "none"}, "link": {"link": "power", "eta": 1}},
                "simulation": {"horizon": 100}}"#,
        )
        .unwrap();
        let opts = RunOptions { out: dir.path().to_path_buf(), seed: None, threads: 1 };
        cmd_simulate(&cfg, &opts).unwrap();
        let a = fs::read(dir.path().join("pattern.csv")).unwrap();
        cmd_simulate(&cfg, &opts).unwrap();
        assert_eq!(a, fs::read(dir.path().join("pattern.csv")).unwrap());
        let p = read_pattern(&dir.path().join("pattern.csv"), None).unwrap();
        assert!(p.len() > 60 && p.len() < 140);
    }
}
