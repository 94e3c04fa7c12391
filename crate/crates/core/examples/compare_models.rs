//! Fit a Poisson and a Hawkes model to the same data and compare them by
//! DIC, prediction miss rate and ranked probability score.
//!
//! ```bash
//! cargo run --release --example compare_models
//! ```

use evopp::compare::{build_windows, compare_fit, hpp_reference, CompareOptions};
use evopp::links::LinkFunction;
use evopp::model::ModelSpec;
use evopp::sampler::{run_mcmc, SamplerConfig};
use evopp::simulate::{simulate_thinning, ThinningConfig};
use evopp::study::grid_priors;

fn main() -> evopp::error::Result<()> {
    let truth = ModelSpec::hawkes(0.5, 0.9, 1.0, LinkFunction::tobit());
    let pattern = simulate_thinning(&truth, 100.0, &ThinningConfig::seeded(21))?;
    let windows = build_windows(&pattern, 99)?;
    let priors = grid_priors(0.0, 2.0);
    let options = CompareOptions::default();

    let (hpp_pmr, _) = hpp_reference(&windows)?;
    println!("n = {}, {} windows, reference PMR {:.3}", pattern.len(), windows.n_active(), hpp_pmr.unwrap());

    let candidates = [
        ("hpp", ModelSpec::hpp(1.0)),
        ("hawkes", ModelSpec::hawkes(1.0, 0.1, 1.0, LinkFunction::tobit())),
    ];
    for (k, (name, template)) in candidates.into_iter().enumerate() {
        let pri = priors.restricted_to(&template);
        let samples = run_mcmc(&template, &pri, &pattern, &SamplerConfig::short(4000, 1500, k as u64))?;
        let r = compare_fit(name, &samples, &pattern, &windows, &options, 5)?;
        println!(
            "{name:>7}  DIC {:8.2}  pD {:5.2}  PMR {:.3}  RPS {:.3}",
            r.dic.unwrap_or(f64::NAN),
            r.p_d.unwrap_or(f64::NAN),
            r.pmr_excite.unwrap_or(f64::NAN),
            r.rps.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
