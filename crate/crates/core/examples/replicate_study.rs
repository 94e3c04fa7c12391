//! A small replicate study over two cells of the excitation grid.
//!
//! ```bash
//! cargo run --release --example replicate_study
//! ```

use evopp::compare::CompareOptions;
use evopp::sampler::SamplerConfig;
use evopp::study::{run_replicate_study, StudyConfig, StudyPreset};

fn main() -> evopp::error::Result<()> {
    let mut config = StudyConfig::new(StudyPreset::ExciteGrid, 8);
    config.cells = vec!["mu=1,alpha=0.01".into(), "mu=1,alpha=0.09".into()];
    let sampler = SamplerConfig::short(3000, 1000, 0);

    let result = run_replicate_study(&config, &sampler, &CompareOptions::default(), 2024, 0)?;
    println!("{:<18} {:<7} {:>6} {:>9} {:>7} {:>7} {:>4}", "cell", "model", "n", "DIC", "PMR", "RPS", "fail");
    for r in &result.rows {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:<18} {:<7} {:>6.1} {:>9} {:>7} {:>7} {:>4}",
            r.preset_cell, r.model, r.avg_n, f(r.avg_dic), f(r.avg_pmr), f(r.avg_rps), r.failures
        );
    }
    Ok(())
}
