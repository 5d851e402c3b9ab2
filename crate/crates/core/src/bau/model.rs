use chrono::Datelike;
use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::enet::{alpha_grid, EnetOptions, Problem};
use super::features::{FeatureMatrix, RawFeatures, Standardization};
use super::{r_squared, rmse, BauError, DailySeries, Target};
use crate::ingest::Region;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BauConfig {
    pub l1_ratio: f64,
    pub grid_size: usize,
    /// Smallest grid alpha as a fraction of the largest.
    pub grid_ratio: f64,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for BauConfig {
    fn default() -> Self {
        BauConfig { l1_ratio: 0.9, grid_size: 30, grid_ratio: 1e-4, max_sweeps: 10_000, tol: 1e-8 }
    }
}

impl BauConfig {
    fn options(&self) -> EnetOptions {
        EnetOptions { max_sweeps: self.max_sweeps, tol: self.tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSelection {
    pub grid: Vec<f64>,
    /// `None` where the solver did not converge.
    pub validation_rmse: Vec<Option<f64>>,
    pub alpha: f64,
}

/// Pick the grid alpha with the lowest validation RMSE. Ties within 1e-12
/// relative go to the larger alpha.
pub fn select_alpha(
    x_train: &DMatrix<f64>,
    y_train: &[f64],
    x_val: &DMatrix<f64>,
    y_val: &[f64],
    grid: &[f64],
    l1_ratio: f64,
    opts: EnetOptions,
) -> Result<AlphaSelection, BauError> {
    if grid.is_empty() {
        return Err(BauError::EmptyGrid);
    }
    let problem = Problem::new(x_train, y_train)?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut scores = vec![None; grid.len()];
    let mut warm: Option<Vec<f64>> = None;
    for &i in &order {
        match problem.solve(grid[i], l1_ratio, warm.as_deref(), opts) {
            Ok((beta, _)) => {
                let b0 = problem.intercept(&beta);
                let pred: Vec<f64> =
                    (0..x_val.nrows()).map(|r| b0 + x_val.row(r).iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>()).collect();
                scores[i] = Some(rmse(&pred, y_val));
                warm = Some(beta);
            }
            Err(e) => warn!("skipping alpha {}: {e}", grid[i]),
        }
    }
    let best = scores
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(BauError::NoConvergence { sweeps: opts.max_sweeps, alpha: grid[order[order.len() - 1]] });
    }
    let alpha = grid
        .iter()
        .zip(&scores)
        .filter(|(_, s)| s.is_some_and(|s| s <= best + 1e-12 * best.abs()))
        .map(|(a, _)| *a)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AlphaSelection { grid: grid.to_vec(), validation_rmse: scores, alpha })
}

/// A fitted regression for one region and target.
#[derive(Debug, Clone, Serialize)]
pub struct PenalizedLinearModel {
    pub region: Region,
    pub target: Target,
    pub intercept: f64,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Penalty strength for the target divided by `target_scale`.
    pub alpha: f64,
    pub l1_ratio: f64,
    /// Standard deviation of the target over the selection rows. The penalty
    /// acts on the target in these units so that alpha selection does not
    /// depend on whether demand is in MW or MWh.
    pub target_scale: f64,
    pub train_r2: f64,
    pub validation_year: i32,
    pub validation_r2: Option<f64>,
    pub selection: AlphaSelection,
    /// Smallest target value seen in training; negative predictions are
    /// raised to it.
    pub historical_min: f64,
    pub scaling: Standardization,
}

impl PenalizedLinearModel {
    /// Choose alpha by training on years before `validation_year` and
    /// scoring on it, then refit on every row up to and including it.
    pub fn train(
        features: &FeatureMatrix,
        y: &[f64],
        target: Target,
        validation_year: i32,
        config: &BauConfig,
    ) -> Result<Self, BauError> {
        if y.len() != features.dates.len() {
            return Err(BauError::ShapeMismatch { rows: features.dates.len(), len: y.len() });
        }
        let fit_rows = features.rows_where(|d| d.year() < validation_year);
        let val_rows = features.rows_where(|d| d.year() == validation_year);
        let all_rows = features.rows_where(|d| d.year() <= validation_year);
        let target_scale = {
            let v: Vec<f64> = fit_rows.iter().map(|&i| y[i]).collect();
            let n = v.len().max(1) as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 { sd } else { 1.0 }
        };
        let pick = |rows: &[usize]| rows.iter().map(|&i| y[i] / target_scale).collect::<Vec<f64>>();
        let (x_fit, y_fit) = (features.select_rows(&fit_rows), pick(&fit_rows));
        let (x_val, y_val) = (features.select_rows(&val_rows), pick(&val_rows));
        let opts = config.options();

        let amax = Problem::new(&x_fit, &y_fit)?.alpha_max(config.l1_ratio);
        let grid = alpha_grid(amax, config.grid_size, config.grid_ratio);
        let selection = select_alpha(&x_fit, &y_fit, &x_val, &y_val, &grid, config.l1_ratio, opts)?;

        let validation_r2 = {
            let problem = Problem::new(&x_fit, &y_fit)?;
            let (beta, _) = problem.solve(selection.alpha, config.l1_ratio, None, opts)?;
            let b0 = problem.intercept(&beta);
            let pred: Vec<f64> =
                (0..x_val.nrows()).map(|r| b0 + x_val.row(r).iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>()).collect();
            r_squared(&pred, &y_val).ok()
        };

        let x_all = features.select_rows(&all_rows);
        let y_all = pick(&all_rows);
        let problem = Problem::new(&x_all, &y_all)?;
        let (beta, _) = problem.solve(selection.alpha, config.l1_ratio, None, opts)?;
        let intercept = problem.intercept(&beta) * target_scale;
        let coefficients: Vec<f64> = beta.iter().map(|b| b * target_scale).collect();
        let y_all: Vec<f64> = y_all.iter().map(|v| v * target_scale).collect();
        let mut model = PenalizedLinearModel {
            region: features.region,
            target,
            intercept,
            columns: features.columns().to_vec(),
            coefficients,
            alpha: selection.alpha,
            l1_ratio: config.l1_ratio,
            target_scale,
            train_r2: 0.0,
            validation_year,
            validation_r2,
            selection,
            historical_min: y_all.iter().copied().fold(f64::INFINITY, f64::min),
            scaling: features.scaling.clone(),
        };
        model.train_r2 = r_squared(&model.predict(&x_all), &y_all).unwrap_or(f64::NAN);
        Ok(model)
    }

    /// Raw linear predictions for standardized rows.
    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|r| self.intercept + x.row(r).iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>())
            .collect()
    }

    pub fn coefficient(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|i| self.coefficients[i])
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub series: DailySeries,
    /// Days whose prediction was negative and was raised to the historical minimum.
    pub clamped: usize,
}

/// Predict daily values for `raw` feature rows, standardized with the
/// model's training statistics.
pub fn project_daily(model: &PenalizedLinearModel, raw: &RawFeatures) -> Result<Projection, BauError> {
    let x = model.scaling.apply(raw)?;
    let mut values = model.predict(&x);
    let mut clamped = 0;
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = model.historical_min;
            clamped += 1;
        }
    }
    if clamped > 0 {
        warn!("{} {}: {clamped} negative daily predictions raised to the historical minimum", model.region, model.target);
    }
    Ok(Projection {
        series: DailySeries { region: model.region, target: model.target, dates: raw.dates.clone(), values },
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_only_grid_picks_zero() {
        let x = DMatrix::from_fn(20, 2, |i, j| (i as f64) * (j as f64 + 1.0) + ((i * j) as f64).sin());
        let y: Vec<f64> = (0..20).map(|i| 1.0 + x[(i, 0)] - 0.5 * x[(i, 1)]).collect();
        let sel = select_alpha(&x, &y, &x, &y, &[0.0], 0.9, EnetOptions::default()).unwrap();
        assert_eq!(sel.alpha, 0.0);
    }

    #[test]
    fn argmin_and_tiebreak() {
        let x = DMatrix::from_fn(30, 1, |i, _| i as f64);
        let y: Vec<f64> = (0..30).map(|i| 2.0 * i as f64).collect();
        let sel = select_alpha(&x, &y, &x, &y, &[0.0, 5.0], 0.9, EnetOptions::default()).unwrap();
        assert_eq!(sel.alpha, 0.0);
        assert!(sel.validation_rmse[1].unwrap() > sel.validation_rmse[0].unwrap());

        // a constant target leaves every alpha with the same validation error
        let flat = vec![4.0; 30];
        let sel = select_alpha(&x, &flat, &x, &flat, &[0.0, 0.5, 2.0], 0.9, EnetOptions::default()).unwrap();
        assert_eq!(sel.alpha, 2.0);
    }
}
