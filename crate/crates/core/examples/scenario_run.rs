//! Run one corner of the scenario matrix and print the national summary.
//!
//!     cargo run --release --example scenario_run

use loadcast::cooling::CoolingScenario;
use loadcast::ev::ChargingScheme;
use loadcast::fixtures;
use loadcast::gdp::GdpScenario;
use loadcast::runner::{self, RunConfig};

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let set = fixtures::generate(&tmp.path().join("data"), 42)?;
    let config = RunConfig {
        gdp: vec![GdpScenario::Stable],
        charging: vec![ChargingScheme::Public],
        cooling: vec![CoolingScenario::Efficient],
        ..RunConfig::load(&set.config_path)?
    };
    let out = tmp.path().join("out");
    let manifest = runner::run(&config, &out, None)?;
    println!("weather years: {:?}", manifest.weather_years);
    let summary = out.join("stable/public/efficient/summary/IN.csv");
    println!("{} (GWh per year)", summary.display());
    print!("{}", std::fs::read_to_string(summary)?);
    Ok(())
}
