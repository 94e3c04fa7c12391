//! Ingest a crime-portal event table and fit the seasonal latent-field model.
//!
//! With no argument a synthetic year in the portal format is written to a
//! temporary file first. Pass a real export to use it instead:
//!
//! ```bash
//! cargo run --release --example crime_ingest
//! cargo run --release --example crime_ingest -- Crimes_2018.csv 11
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};
use evopp::io::commands::{crime_model, crime_priors};
use evopp::io::{ingest_events_file, EventFilter};
use evopp::model::Param;
use evopp::sampler::{run_mcmc, SamplerConfig};
use evopp::simulate::{sample_latent_gp, simulate_with_rng, ThinningConfig};
use rand::SeedableRng;

fn synthetic_table() -> evopp::error::Result<PathBuf> {
    let mut truth = crime_model();
    for (p, v) in [
        (Param::Mu, -1.34),
        (Param::Gamma1, -0.31),
        (Param::Gamma2, -0.27),
        (Param::Alpha, 0.008),
        (Param::Beta, 77.0),
    ] {
        truth.set(p, v)?;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2018);
    truth.background.gp = Some(sample_latent_gp(8760.0, 100, 0.3, 1.0 / 2000.0, &mut rng)?);
    let pattern = simulate_with_rng(&truth, 8760.0, &ThinningConfig::seeded(2018), &mut rng)?;

    let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut csv = String::from("ID,Date,Primary Type,District\n");
    for (i, t) in pattern.events().iter().enumerate() {
        // the portal reports minutes
        let ts = start + Duration::minutes((t * 60.0).floor() as i64);
        let kind = ["ASSAULT", "ROBBERY", "HOMICIDE"][i % 3];
        writeln!(csv, "{i},{},{kind},11", ts.format("%m/%d/%Y %I:%M:%S %p")).unwrap();
        if i % 10 == 0 {
            writeln!(csv, "{i}b,{},THEFT,11", ts.format("%m/%d/%Y %I:%M:%S %p")).unwrap();
        }
    }
    let path = std::env::temp_dir().join("evopp_synthetic_crimes_2018.csv");
    std::fs::write(&path, csv)?;
    Ok(path)
}

fn main() -> evopp::error::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = match args.first() {
        Some(p) => PathBuf::from(p),
        None => synthetic_table()?,
    };
    let mut filter = EventFilter::new(&path);
    filter.district = Some(args.get(1).and_then(|d| d.parse().ok()).unwrap_or(11));
    filter.year = Some(2018);

    let (pattern, report) = ingest_events_file(&filter, 1)?;
    println!(
        "{}: {} rows read, {} retained, {} skipped, {} tied before jitter, T = {}",
        path.display(),
        report.rows_read,
        report.retained,
        report.skipped.len(),
        report.tied_before_jitter,
        report.horizon
    );

    let template = crime_model().bind(pattern.horizon())?;
    let samples = run_mcmc(&template, &crime_priors(), &pattern, &SamplerConfig::short(3000, 1000, 4))?;
    for s in samples.summary() {
        println!("{:>7}  mean {:10.5}  90% [{:.5}, {:.5}]", s.name, s.mean, s.q05, s.q95);
    }
    Ok(())
}
