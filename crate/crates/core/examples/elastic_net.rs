//! Elastic net on correlated predictors across a range of penalties.
//!
//!     cargo run --example elastic_net

use loadcast::bau::{fit_elastic_net, r_squared, EnetOptions};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn main() -> anyhow::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let n = 500;
    // three temperature-like columns sharing a common driver, two pure noise
    let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let x = DMatrix::from_fn(n, 5, |i, j| {
        let e: f64 = rng.sample(StandardNormal);
        if j < 3 { common[i] + 0.3 * e } else { e }
    });
    let y: Vec<f64> = (0..n).map(|i| 10.0 + 2.0 * x[(i, 0)] + 1.0 * x[(i, 1)] + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();

    println!("{:>8} {:>7} {:>7}  coefficients", "alpha", "sweeps", "R2");
    for alpha in [0.0, 0.001, 0.01, 0.1, 0.5, 1.0] {
        let fit = fit_elastic_net(&x, &y, alpha, 0.9, EnetOptions::default())?;
        let r2 = r_squared(&fit.predict(&x), &y)?;
        let coefs: Vec<String> = fit.coefficients.iter().map(|b| format!("{b:+.3}")).collect();
        println!("{alpha:>8} {:>7} {r2:>7.4}  [{}]", fit.sweeps, coefs.join(", "));
    }
    Ok(())
}
