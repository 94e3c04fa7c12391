//! Simulate an inhibiting process and recover the negative jump size.
//!
//! ```bash
//! cargo run --release --example fit_inhibitory_hawkes
//! ```

use evopp::links::LinkFunction;
use evopp::model::ModelSpec;
use evopp::sampler::{run_mcmc, SamplerConfig};
use evopp::simulate::{simulate_thinning, ThinningConfig};
use evopp::study::grid_priors;

fn main() -> evopp::error::Result<()> {
    let truth = ModelSpec::hawkes(2.0, -0.9, 1.0, LinkFunction::tobit());
    let pattern = simulate_thinning(&truth, 100.0, &ThinningConfig::seeded(5))?;
    println!("{} events (a Poisson process with the same mu would give ~200)", pattern.len());

    let template = ModelSpec::hawkes(1.0, 0.0, 1.0, LinkFunction::tobit());
    let priors = grid_priors(-2.0, 2.0);
    let samples = run_mcmc(&template, &priors, &pattern, &SamplerConfig::short(6000, 2000, 1))?;
    for s in samples.summary() {
        println!("{:>6}  mean {:8.4}  sd {:7.4}  90% [{:.4}, {:.4}]", s.name, s.mean, s.sd, s.q05, s.q95);
    }
    Ok(())
}
