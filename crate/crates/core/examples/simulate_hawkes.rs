//! Simulate a self-exciting process by thinning and look at the result.
//!
//! ```bash
//! cargo run --release --example simulate_hawkes
//! ```

use evopp::links::LinkFunction;
use evopp::model::{conditional_intensity, ModelSpec};
use evopp::simulate::{simulate_thinning, ThinningConfig};

fn main() -> evopp::error::Result<()> {
    let model = ModelSpec::hawkes(0.5, 0.9, 1.0, LinkFunction::tobit());
    let horizon = 100.0;

    let pattern = simulate_thinning(&model, horizon, &ThinningConfig::seeded(7))?;
    println!("{} events on (0, {horizon}]", pattern.len());
    println!("stationary mean count mu T / (1 - alpha) = {:.1}", 0.5 * horizon / (1.0 - 0.9));

    // intensity just after the first few events
    for &t in pattern.events().iter().take(5) {
        let lam = conditional_intensity(&model, &pattern, t + 1e-9, None)?;
        println!("  t = {t:8.4}  lambda(t+) = {lam:.4}");
    }

    // same seed, same pattern
    let again = simulate_thinning(&model, horizon, &ThinningConfig::seeded(7))?;
    assert_eq!(pattern, again);
    Ok(())
}
