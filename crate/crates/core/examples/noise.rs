//! Estimate month-wise residual noise and add seeded variation to a daily
//! series. The same seed reproduces the same draws.
//!
//!     cargo run --example noise

use chrono::{Datelike, NaiveDate};
use loadcast::bau::{DailySeries, Target};
use loadcast::variation::{apply_noise, estimate_noise};
use loadcast::Region;

fn main() -> anyhow::Result<()> {
    let dates: Vec<NaiveDate> = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap().iter_days().take(365).collect();
    // residuals that are larger in the monsoon months
    let residuals: Vec<(NaiveDate, f64)> = dates
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let scale = if (6..=9).contains(&d.month()) { 900.0 } else { 300.0 };
            (*d, scale * (((i * 37) % 11) as f64 / 5.0 - 1.0))
        })
        .collect();
    let stats = estimate_noise(&residuals)?;
    for (m, s) in stats.iter().enumerate() {
        println!("month {:>2}: mean |r| {:>7.1}  std {:>7.1}", m + 1, s.mean_abs, s.std_abs);
    }

    let series = DailySeries { region: Region::SR, target: Target::Peak, dates: dates.clone(), values: vec![45_000.0; 365] };
    let a = apply_noise(&series, &stats, 42);
    let b = apply_noise(&series, &stats, 42);
    let c = apply_noise(&series, &stats, 43);
    println!("first week, seed 42: {:?}", a.series.values[..7].iter().map(|v| v.round()).collect::<Vec<_>>());
    println!("first week, seed 43: {:?}", c.series.values[..7].iter().map(|v| v.round()).collect::<Vec<_>>());
    println!("seed 42 reproducible: {}", a.series.values == b.series.values);
    Ok(())
}
