//! Rescale a 24-hour shape so that it carries an exact daily energy and
//! peak, then show what happens with an impossible target.
//!
//!     cargo run --example hourly_downscale

use loadcast::hourly::fit_day;

fn main() -> anyhow::Result<()> {
    // evening-peaking grid shape
    let shape: [f64; 24] = std::array::from_fn(|h| {
        let h = h as f64;
        0.8 + 0.15 * ((h - 14.0) / 24.0 * std::f64::consts::TAU).sin() + 0.25 * (-(h - 20.0).powi(2) / 4.0).exp()
    });
    let (energy, peak) = (1_000_000.0, 52_000.0);
    let day = fit_day(&shape, energy, peak)?;
    let total: f64 = day.values.iter().sum();
    let max = day.values.iter().copied().fold(f64::MIN, f64::max);
    println!("target  energy {energy:.1} MWh  peak {peak:.1} MW");
    println!("fitted  energy {total:.6} MWh  peak {max:.6} MW  floored hours {}", day.floored);
    for (h, v) in day.values.iter().enumerate() {
        println!("{h:02}:00 {v:>10.1} {}", "#".repeat((v / 1000.0) as usize));
    }
    match fit_day(&shape, energy, energy / 30.0) {
        Ok(_) => println!("unexpectedly feasible"),
        Err(e) => println!("peak below the daily mean: {e}"),
    }
    Ok(())
}
