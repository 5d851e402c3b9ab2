//! Hold-out evaluation of the business-as-usual regressions.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::Serialize;

use super::pipeline::{demand_history, gdp_projections, target_values};
use super::{RunConfig, RunError};
use crate::bau::{build_features, r_squared, raw_features, DailySeries, PenalizedLinearModel, Target, WeatherIndex};
use crate::calendar::TRAINING_LAST_YEAR;
use crate::gdp::GdpScenario;
use crate::ingest::{InputBundle, Region};
use crate::variation::{apply_noise, estimate_noise};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestRow {
    pub region: Region,
    pub target: Target,
    pub regression_r2: f64,
    pub regression_noise_r2: f64,
    /// Variance of predictions over variance of actuals.
    pub variance_ratio_regression: f64,
    pub variance_ratio_noise: f64,
    pub alpha: f64,
    pub test_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub test_year: i32,
    pub seed: u64,
    pub rows: Vec<BacktestRow>,
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len().max(1) as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
}

impl BacktestReport {
    pub fn row(&self, region: Region, target: Target) -> Option<&BacktestRow> {
        self.rows.iter().find(|r| r.region == region && r.target == target)
    }

    /// Fixed-width text table, one line per region and target.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Back-test on {} (seed {})", self.test_year, self.seed);
        let _ = writeln!(
            s,
            "{:<8}{:<8}{:>16}{:>24}{:>18}{:>24}",
            "Region", "Target", "Regression R2", "Regression + Noise R2", "Var ratio (reg)", "Var ratio (reg+noise)"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8}{:<8}{:>16.3}{:>24.3}{:>18.3}{:>24.3}",
                r.region.code(),
                r.target.as_str(),
                r.regression_r2,
                r.regression_noise_r2,
                r.variance_ratio_regression,
                r.variance_ratio_noise
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::from(
            "region,target,regression_r2,regression_noise_r2,variance_ratio_regression,variance_ratio_noise,alpha,test_days\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{}",
                r.region,
                r.target,
                r.regression_r2,
                r.regression_noise_r2,
                r.variance_ratio_regression,
                r.variance_ratio_noise,
                r.alpha,
                r.test_days
            );
        }
        std::fs::write(path, text).map_err(|e| RunError::io(path, e))?;
        Ok(())
    }
}

/// Fit on the years before the last training year, then score the last
/// training year with and without natural variation.
pub fn backtest(bundle: &InputBundle, config: &RunConfig) -> Result<BacktestReport> {
    let test_year = TRAINING_LAST_YEAR;
    let fit_last = test_year - 1;
    let gdp = gdp_projections(bundle, config)?;
    let weather = WeatherIndex::new(&bundle.weather);
    let cells: Vec<(Region, Target)> =
        Region::ALL.iter().flat_map(|r| Target::ALL.iter().map(move |t| (*r, *t))).collect();
    let rows = cells
        .par_iter()
        .map(|&(region, target)| {
            let history = demand_history(bundle, region);
            let dates: Vec<NaiveDate> = history.iter().map(|h| h.0).collect();
            let path = gdp.region(GdpScenario::Slow, region)?;
            let raw = raw_features(&weather, &bundle.catalog, region, &dates, |d| d, |y| path.get(y))?;
            let features = build_features(raw, |d| d.year() <= fit_last)?;
            let y = target_values(&history, target);
            let model = PenalizedLinearModel::train(&features, &y, target, fit_last, &config.bau)?;
            let test_rows = features.rows_where(|d| d.year() == test_year);
            let actual: Vec<f64> = test_rows.iter().map(|&i| y[i]).collect();
            let mut pred = model.predict(&features.select_rows(&test_rows));
            for v in pred.iter_mut().filter(|v| **v < 0.0) {
                *v = model.historical_min;
            }
            let test_dates: Vec<NaiveDate> = test_rows.iter().map(|&i| dates[i]).collect();
            // variation comes from the last fitted year, as in production,
            // so the hold-out year stays unseen
            let fit_rows = features.rows_where(|d| d.year() == fit_last);
            let fitted = model.predict(&features.select_rows(&fit_rows));
            let residuals: Vec<(NaiveDate, f64)> =
                fit_rows.iter().zip(&fitted).map(|(&i, p)| (dates[i], y[i] - p)).collect();
            let stats = estimate_noise(&residuals)?;
            let series = DailySeries { region, target, dates: test_dates, values: pred.clone() };
            let noisy = apply_noise(&series, &stats, config.seed).series.values;
            let var_actual = variance(&actual);
            Ok(BacktestRow {
                region,
                target,
                regression_r2: r_squared(&pred, &actual)?,
                regression_noise_r2: r_squared(&noisy, &actual)?,
                variance_ratio_regression: variance(&pred) / var_actual,
                variance_ratio_noise: variance(&noisy) / var_actual,
                alpha: model.alpha,
                test_days: actual.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BacktestReport { test_year, seed: config.seed, rows })
}
