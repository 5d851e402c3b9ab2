//! Fit exponential and Gompertz curves to a national GDP history and
//! project both to 2050.
//!
//!     cargo run --example gdp_curves

use loadcast::gdp::{fit_exponential, fit_gompertz, GrowthCurve};

fn main() -> anyhow::Result<()> {
    // a history whose growth is starting to slow, in USD
    let truth = GrowthCurve::gompertz(8.0e12, 2035.0, 1.0e11, 0.0);
    let xs: Vec<f64> = (1990..=2019).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| truth.eval(*x) * (1.0 + 0.02 * ((i * 7) % 5) as f64 / 4.0 - 0.01)).collect();

    let exp = fit_exponential(&xs, &ys)?;
    let gom = fit_gompertz(&xs, &ys)?;
    println!("exponential  a={:.3e} b={:.4} c={:.3e} R2={:.4}", exp.a, exp.b, exp.c, exp.fit_r2);
    println!("gompertz     a={:.3e} b={:.1} mu={:.3e} R2={:.4}", gom.a, gom.b, gom.mu.unwrap_or(f64::NAN), gom.fit_r2);
    println!("{:>6} {:>14} {:>14}", "year", "exponential", "gompertz");
    for year in (2020..=2050).step_by(5) {
        println!("{year:>6} {:>14.3e} {:>14.3e}", exp.eval(f64::from(year)), gom.eval(f64::from(year)));
    }
    let cagr = |c: &GrowthCurve| (c.eval(2050.0) / c.eval(2020.0)).powf(1.0 / 30.0) - 1.0;
    println!("2020-2050 CAGR: exponential {:.2}%, gompertz {:.2}%", 100.0 * cagr(&exp), 100.0 * cagr(&gom));
    Ok(())
}
