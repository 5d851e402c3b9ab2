//! EV adoption per GDP scenario and the daily charging shape of each
//! scheme. Energy is the same for every scheme; only its timing differs.
//!
//!     cargo run --example ev_charging

use loadcast::calendar::DayType;
use loadcast::ev::{charging_profile, electrification_share, range_mix, ChargingScheme, EvConfig, Segment};
use loadcast::fixtures;
use loadcast::gdp::GdpScenario;
use loadcast::ingest::InputBundle;
use loadcast::runner::{Pipeline, RunConfig};

fn main() -> anyhow::Result<()> {
    let cfg = EvConfig::default();
    println!("share of new sales that is electric");
    for g in GdpScenario::ALL {
        let row: Vec<String> = [2025, 2030, 2040, 2050]
            .iter()
            .flat_map(|y| Segment::ALL.map(|s| format!("{}:{y}={:.2}", s.as_str(), electrification_share(s, g, *y, &cfg))))
            .collect();
        println!("  {g:<7} {}", row.join(" "));
    }

    let tmp = tempfile::tempdir()?;
    let set = fixtures::generate(tmp.path(), 42)?;
    let bundle = InputBundle::load(&set.dir)?;
    let config = RunConfig::load(&set.config_path)?;
    let pipeline = Pipeline::prepare(&bundle, &config)?;
    for g in GdpScenario::ALL {
        let fleets = pipeline.fleets(g)?;
        let total = |year: i32| -> f64 {
            fleets.values().flatten().filter(|f| f.year == year).map(|f| f.counts.e2w + f.counts.e3w + f.counts.e4w).sum()
        };
        println!("{g:<7} fleet 2020 {:>10.0}  2035 {:>12.0}  2050 {:>12.0}", total(2020), total(2035), total(2050));
    }

    let mix = range_mix(2035, &cfg);
    for scheme in ChargingScheme::ALL {
        let p = charging_profile(&bundle.profiles, scheme, DayType::Weekday, mix, &cfg.kernel)?;
        let bars: String = p.iter().map(|w| char::from_digit(((w * 60.0).round() as u32).min(9), 10).unwrap()).collect();
        println!("{:<7} weekday {bars}", scheme.as_str());
    }
    Ok(())
}
