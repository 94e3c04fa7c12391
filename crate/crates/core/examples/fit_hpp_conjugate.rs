//! Fit a homogeneous Poisson rate by MCMC and compare with the exact
//! Gamma posterior.
//!
//! ```bash
//! cargo run --release --example fit_hpp_conjugate
//! ```

use evopp::model::{ModelSpec, Param};
use evopp::priors::{Prior, PriorSpec};
use evopp::sampler::{run_mcmc, SamplerConfig};
use evopp::simulate::{simulate_thinning, ThinningConfig};

fn main() -> evopp::error::Result<()> {
    let truth = ModelSpec::hpp(1.0);
    let pattern = simulate_thinning(&truth, 100.0, &ThinningConfig::seeded(11))?;
    let n = pattern.len() as f64;

    let priors = PriorSpec::new().with(Param::Mu, Prior::Gamma { shape: 1.0, rate: 1.0 });
    let samples = run_mcmc(&ModelSpec::hpp(1.0), &priors, &pattern, &SamplerConfig::short(6000, 2000, 3))?;

    let draws = samples.column(Param::Mu).unwrap();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
    let (a, b) = (1.0 + n, 1.0 + pattern.horizon());
    println!("n = {n}");
    println!("chain   mean {mean:.4}  var {var:.5}");
    println!("exact   mean {:.4}  var {:.5}", a / b, a / (b * b));
    println!("acceptance {:?}", samples.final_acceptance());
    Ok(())
}
