//! Log-likelihood of a pattern under several links, and the quadrature
//! compensator against the closed form for the linear exponential kernel.
//!
//! ```bash
//! cargo run --release --example likelihood_and_compensator
//! ```

use evopp::links::LinkFunction;
use evopp::model::{compensator, log_likelihood, ModelSpec};
use evopp::pattern::PointPattern;

fn main() -> evopp::error::Result<()> {
    let pattern = PointPattern::new(vec![1.2, 3.5, 3.9, 7.0, 12.4, 12.6, 13.1, 19.8], 20.0)?;
    let (mu, alpha, beta) = (0.4, 0.5, 1.5);

    let linear = ModelSpec::hawkes(mu, alpha, beta, LinkFunction::Identity);
    let quad = compensator(&linear, &pattern, pattern.horizon())?;
    let exact = mu * pattern.horizon()
        + pattern
            .events()
            .iter()
            .map(|t| alpha * (1.0 - (-beta * (pattern.horizon() - t)).exp()))
            .sum::<f64>();
    println!("compensator: trapezoid {quad:.8}  closed form {exact:.8}");

    for link in [
        LinkFunction::Identity,
        LinkFunction::tobit(),
        LinkFunction::Power { eta: 0.5 },
        LinkFunction::SoftPlus,
        LinkFunction::Log10SoftPlus,
    ] {
        let m = ModelSpec::hawkes(mu, alpha, beta, link);
        println!("{:>16}  loglik = {:.6}", link.name(), log_likelihood(&m, &pattern)?);
    }

    // an inhibiting kernel under the truncated linear link
    let inhib = ModelSpec::hawkes(1.0, -0.6, 2.0, LinkFunction::tobit());
    println!("inhibiting        loglik = {:.6}", log_likelihood(&inhib, &pattern)?);
    Ok(())
}
