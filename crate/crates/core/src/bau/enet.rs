//! Elastic net by cyclic coordinate descent on the Gram matrix.
//!
//! Minimizes (1/2n)‖y − b0 − Xβ‖² + α(ρ‖β‖₁ + (1−ρ)/2 ‖β‖²) with an
//! unpenalized intercept.

use nalgebra::{DMatrix, DVector};

use super::BauError;

const EXACT_EVERY: usize = 20;

#[derive(Debug, Clone, Copy)]
pub struct EnetOptions {
    pub max_sweeps: usize,
    /// Convergence threshold on the largest coefficient change, measured as
    /// its effect on predictions relative to the standard deviation of `y`.
    pub tol: f64,
}

impl Default for EnetOptions {
    fn default() -> Self {
        EnetOptions { max_sweeps: 10_000, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnetFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub alpha: f64,
    pub l1_ratio: f64,
    pub sweeps: usize,
}

impl EnetFit {
    pub fn predict_row(&self, row: impl Iterator<Item = f64>) -> f64 {
        self.intercept + row.zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows()).map(|i| self.predict_row(x.row(i).iter().copied())).collect()
    }
}

/// Centered sufficient statistics of a regression problem.
pub(crate) struct Problem {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    x_mean: DVector<f64>,
    y_mean: f64,
    y_scale: f64,
}

impl Problem {
    pub(crate) fn new(x: &DMatrix<f64>, y: &[f64]) -> Result<Self, BauError> {
        let n = x.nrows();
        if n != y.len() {
            return Err(BauError::ShapeMismatch { rows: n, len: y.len() });
        }
        if n < 2 {
            return Err(BauError::TooFewRows { found: n, required: 2 });
        }
        let nf = n as f64;
        let y_mean = y.iter().sum::<f64>() / nf;
        let x_mean = DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / nf));
        let mut xc = x.clone();
        for (j, mut col) in xc.column_iter_mut().enumerate() {
            col.add_scalar_mut(-x_mean[j]);
        }
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let gram = xc.tr_mul(&xc) / nf;
        let xty = xc.tr_mul(&yc) / nf;
        let y_scale = (yc.norm_squared() / nf).sqrt();
        Ok(Problem { gram, xty, x_mean, y_mean, y_scale })
    }

    pub(crate) fn alpha_max(&self, l1_ratio: f64) -> f64 {
        let m = self.xty.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if l1_ratio > 0.0 {
            m / l1_ratio
        } else {
            m * 1e3
        }
    }

    /// Coordinate descent from `start`. Returns the coefficients and the
    /// number of sweeps used.
    pub(crate) fn solve(
        &self,
        alpha: f64,
        l1_ratio: f64,
        start: Option<&[f64]>,
        opts: EnetOptions,
    ) -> Result<(Vec<f64>, usize), BauError> {
        let p = self.xty.len();
        let l1 = alpha * l1_ratio;
        let l2 = alpha * (1.0 - l1_ratio);
        let mut beta: Vec<f64> = start.map(|s| s.to_vec()).unwrap_or_else(|| vec![0.0; p]);
        // q = G·β
        let mut q = self.gram_times(&beta);
        let tol = opts.tol * if self.y_scale > 0.0 { self.y_scale } else { 1.0 };
        // Alternate full sweeps with sweeps over the nonzero coefficients
        // only; stop when a full sweep moves nothing.
        let all: Vec<usize> = (0..p).collect();
        let mut active: Vec<usize> = Vec::new();
        let mut full = true;
        for sweep in 1..=opts.max_sweeps {
            let indices = if full { &all } else { &active };
            let mut max_delta = 0.0f64;
            for &j in indices {
                let gjj = self.gram[(j, j)];
                let denom = gjj + l2;
                let old = beta[j];
                let new = if denom <= 0.0 {
                    0.0
                } else {
                    let rho = self.xty[j] - (q[j] - gjj * old);
                    soft_threshold(rho, l1) / denom
                };
                let delta = new - old;
                if delta != 0.0 {
                    beta[j] = new;
                    let col = self.gram.column(j);
                    for (qk, g) in q.iter_mut().zip(col.iter()) {
                        *qk += g * delta;
                    }
                    max_delta = max_delta.max(delta.abs() * gjj.sqrt());
                }
            }
            if max_delta <= tol {
                if full {
                    return Ok((beta, sweep));
                }
                full = true;
            } else if full {
                active = (0..p).filter(|&j| beta[j] != 0.0).collect();
                full = active.is_empty();
            } else if sweep % EXACT_EVERY == 0 {
                // Near-collinear weather columns make plain coordinate descent
                // crawl. Once the support is stable, solve on it directly; the
                // next full sweep confirms optimality or resumes descent.
                if let Some(exact) = self.solve_on_support(&beta, &active, l1, l2) {
                    beta = exact;
                    q = self.gram_times(&beta);
                    full = true;
                }
            }
        }
        Err(BauError::NoConvergence { sweeps: opts.max_sweeps, alpha })
    }

    fn gram_times(&self, beta: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; beta.len()];
        for (k, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (qj, g) in q.iter_mut().zip(self.gram.column(k).iter()) {
                    *qj += g * b;
                }
            }
        }
        q
    }

    /// Active-set refinement from a descent iterate. With the support and
    /// signs fixed the problem is a ridge system
    /// (G_AA + l2·I)·b = c_A − l1·sign(β_A). When the solution flips a sign,
    /// step toward it only until the first coefficient reaches zero, drop
    /// that coefficient and repeat. Every step lowers the objective, and
    /// the result is stationary on its support. `None` if a system is
    /// singular.
    fn solve_on_support(&self, beta: &[f64], support: &[usize], l1: f64, l2: f64) -> Option<Vec<f64>> {
        let mut x = beta.to_vec();
        let mut support: Vec<usize> = support.iter().copied().filter(|&j| x[j] != 0.0).collect();
        while !support.is_empty() {
            let k = support.len();
            let m = DMatrix::from_fn(k, k, |a, b| self.gram[(support[a], support[b])] + if a == b { l2 } else { 0.0 });
            let r = DVector::from_fn(k, |a, _| self.xty[support[a]] - l1 * x[support[a]].signum());
            let b = m.cholesky()?.solve(&r);
            if b.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let mut first: Option<(f64, usize)> = None;
            for (a, &j) in support.iter().enumerate() {
                if b[a].signum() != x[j].signum() || b[a] == 0.0 {
                    let t = x[j] / (x[j] - b[a]);
                    if first.is_none_or(|(t0, _)| t < t0) {
                        first = Some((t, a));
                    }
                }
            }
            match first {
                None => {
                    for (a, &j) in support.iter().enumerate() {
                        x[j] = b[a];
                    }
                    return Some(x);
                }
                Some((t, hit)) => {
                    for (a, &j) in support.iter().enumerate() {
                        x[j] += t * (b[a] - x[j]);
                    }
                    x[support[hit]] = 0.0;
                    support.retain(|&j| x[j] != 0.0);
                }
            }
        }
        Some(x)
    }

    pub(crate) fn intercept(&self, beta: &[f64]) -> f64 {
        self.y_mean - self.x_mean.iter().zip(beta).map(|(m, b)| m * b).sum::<f64>()
    }
}

pub(crate) fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn check_params(alpha: f64, l1_ratio: f64) -> Result<(), BauError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(BauError::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&l1_ratio) {
        return Err(BauError::InvalidParameter(format!("l1_ratio must be in [0, 1], got {l1_ratio}")));
    }
    Ok(())
}

pub fn fit_elastic_net(
    x: &DMatrix<f64>,
    y: &[f64],
    alpha: f64,
    l1_ratio: f64,
    opts: EnetOptions,
) -> Result<EnetFit, BauError> {
    check_params(alpha, l1_ratio)?;
    let problem = Problem::new(x, y)?;
    let (coefficients, sweeps) = problem.solve(alpha, l1_ratio, None, opts)?;
    Ok(EnetFit { intercept: problem.intercept(&coefficients), coefficients, alpha, l1_ratio, sweeps })
}

/// Smallest alpha at which every coefficient is zero.
pub fn alpha_max(x: &DMatrix<f64>, y: &[f64], l1_ratio: f64) -> Result<f64, BauError> {
    Ok(Problem::new(x, y)?.alpha_max(l1_ratio))
}

/// `count` log-spaced alphas from `alpha_max` down to `ratio · alpha_max`.
pub fn alpha_grid(alpha_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    if count == 1 || alpha_max <= 0.0 {
        return vec![alpha_max.max(0.0)];
    }
    let (hi, lo) = (alpha_max.ln(), (alpha_max * ratio).ln());
    (0..count).map(|i| (hi + (lo - hi) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_data_without_penalty() {
        let n = 40;
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64 / 7.0);
        let y: Vec<f64> = (0..n).map(|i| 3.0 + 2.5 * (i as f64 / 7.0)).collect();
        let fit = fit_elastic_net(&x, &y, 0.0, 0.9, EnetOptions::default()).unwrap();
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-8);
        let pred = fit.predict(&x);
        assert!(pred.iter().zip(&y).all(|(p, a)| (p - a).abs() < 1e-8));
    }

    #[test]
    fn huge_alpha_shrinks_everything() {
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * (j + 2)) as f64).sin());
        let y: Vec<f64> = (0..30).map(|i| (i as f64).cos() + 10.0).collect();
        let amax = alpha_max(&x, &y, 0.9).unwrap();
        let fit = fit_elastic_net(&x, &y, amax * 1.0001, 0.9, EnetOptions::default()).unwrap();
        assert!(fit.coefficients.iter().all(|b| *b == 0.0));
        let mean = y.iter().sum::<f64>() / 30.0;
        assert!((fit.intercept - mean).abs() < 1e-12);
        let below = fit_elastic_net(&x, &y, amax * 0.9, 0.9, EnetOptions::default()).unwrap();
        assert!(below.coefficients.iter().any(|b| *b != 0.0));
    }

    #[test]
    fn grid_is_log_spaced() {
        let g = alpha_grid(10.0, 30, 1e-4);
        assert_eq!(g.len(), 30);
        assert!((g[0] - 10.0).abs() < 1e-12);
        assert!((g[29] - 1e-3).abs() < 1e-15);
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
    }

    #[test]
    fn invalid_parameters() {
        let x = DMatrix::from_element(3, 1, 1.0);
        assert!(fit_elastic_net(&x, &[1.0, 2.0, 3.0], -1.0, 0.9, EnetOptions::default()).is_err());
        assert!(fit_elastic_net(&x, &[1.0, 2.0, 3.0], 1.0, 1.5, EnetOptions::default()).is_err());
        assert!(matches!(
            fit_elastic_net(&x, &[1.0, 2.0], 1.0, 0.9, EnetOptions::default()),
            Err(BauError::ShapeMismatch { .. })
        ));
    }
}
