//! Air-conditioning energy from the bottom-up market model, with climate
//! scaling, for both cooling scenarios.
//!
//!     cargo run --example cooling_demand

use loadcast::cooling::{national_cooling_energy, AcMarket, CddScaler, CoolingScenario};
use loadcast::fixtures;
use loadcast::ingest::InputBundle;

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let set = fixtures::generate(tmp.path(), 42)?;
    let bundle = InputBundle::load(&set.dir)?;
    let market = AcMarket::from_rows(&bundle.ac_market);
    let cdd = CddScaler::default();
    println!("{:>6} {:>8} {:>14} {:>14}", "year", "CDD x", "baseline GWh", "efficient GWh");
    for year in (2020..=2050).step_by(5) {
        let m = cdd.multiplier(year);
        let base = national_cooling_energy(&market, year, CoolingScenario::Baseline)? * m;
        let eff = national_cooling_energy(&market, year, CoolingScenario::Efficient)? * m;
        println!("{year:>6} {m:>8.3} {base:>14.0} {eff:>14.0}");
    }
    let stock = market.year(2050, CoolingScenario::Baseline)?.stock;
    println!("units in service by 2050: {:.1} million", stock / 1e6);
    Ok(())
}
