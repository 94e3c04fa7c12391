//! Which links can explode, and what the simulator does when one does.
//!
//! ```bash
//! cargo run --release --example link_stability
//! ```

use evopp::error::Error;
use evopp::links::{AlphaSign, LinkFunction};
use evopp::model::ModelSpec;
use evopp::simulate::{simulate_thinning, ThinningConfig};

fn main() {
    let links = [
        LinkFunction::tobit(),
        LinkFunction::Power { eta: 0.5 },
        LinkFunction::Power { eta: 2.0 },
        LinkFunction::SoftPlus,
        LinkFunction::Log10SoftPlus,
        LinkFunction::Exponential,
    ];
    for link in links {
        for sign in [AlphaSign::Exciting, AlphaSign::Inhibiting] {
            let (ok, why) = link.is_lipschitz_stable(sign);
            println!("{:>16} {sign:?}: {}  ({why})", link.name(), if ok { "stable" } else { "may explode" });
        }
    }

    let unstable = ModelSpec::hawkes(1.0, 3.0, 1.0, LinkFunction::Exponential);
    let cfg = ThinningConfig {
        event_budget: 10_000,
        ..ThinningConfig::seeded(1)
    };
    match simulate_thinning(&unstable, 100.0, &cfg) {
        Err(e @ Error::Instability { .. }) => println!("\n{e} (exit code {})", e.exit_code()),
        other => println!("\nunexpected: {other:?}"),
    }

    let damped = ModelSpec::hawkes(1.0, -3.0, 1.0, LinkFunction::Exponential);
    let p = simulate_thinning(&damped, 100.0, &cfg).expect("inhibition cannot explode");
    println!("same jump size with inhibition: {} events", p.len());
}
