//! A log Gaussian Cox process with self-excitation: simulate the preset
//! dataset, then fit the latent-field + excitation model.
//!
//! ```bash
//! cargo run --release --example evo_lgcp
//! ```

use evopp::sampler::{run_mcmc, SamplerConfig};
use evopp::study::{lgcp_preset_dataset, preset_cells, StudyPreset};

fn main() -> evopp::error::Result<()> {
    let pattern = lgcp_preset_dataset()?;
    println!("{} events on (0, {}]", pattern.len(), pattern.horizon());

    let cell = preset_cells(StudyPreset::EvoLgcp, None).remove(0);
    println!("truth: {:?}", cell.truth);
    let fit = cell.fits.iter().find(|f| f.name == "gp_evo").unwrap();
    let template = fit.template.clone().bind(pattern.horizon())?;

    let samples = run_mcmc(&template, &fit.priors, &pattern, &SamplerConfig::short(3000, 1000, 0))?;
    for s in samples.summary() {
        println!("{:>7}  mean {:9.4}  90% [{:.4}, {:.4}]", s.name, s.mean, s.q05, s.q95);
    }
    let w = samples.posterior_mean_model();
    let gp = w.gp().unwrap();
    let range = gp.effects().iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    println!("posterior-mean latent field spans [{:.2}, {:.2}]", range.0, range.1);
    Ok(())
}
