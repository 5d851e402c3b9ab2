//! Damped Gauss-Newton (Levenberg-Marquardt) for small curve fits.

use nalgebra::{DMatrix, DVector};

/// A parametric curve `y = f(params, x)` with an analytic gradient.
pub(crate) trait CurveModel {
    fn n_params(&self) -> usize;
    fn eval(&self, params: &[f64], x: f64) -> f64;
    fn gradient(&self, params: &[f64], x: f64, out: &mut [f64]);
    /// Map a trial point back into the feasible set.
    fn project(&self, _params: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 500, relative_tolerance: 1e-10, initial_damping: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn sse<M: CurveModel>(model: &M, params: &[f64], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (y - model.eval(params, x)).powi(2)).sum()
}

pub(crate) fn minimize<M: CurveModel>(model: &M, xs: &[f64], ys: &[f64], init: &[f64], opts: LmOptions) -> LmOutcome {
    let n = model.n_params();
    let m = xs.len();
    let mut params = init.to_vec();
    model.project(&mut params);
    let mut cost = sse(model, &params, xs, ys);
    let scale: f64 = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut damping = opts.initial_damping;
    let mut jac = DMatrix::<f64>::zeros(m, n);
    let mut resid = DVector::<f64>::zeros(m);
    let mut grad = vec![0.0; n];

    if !cost.is_finite() {
        return LmOutcome { params, sse: cost, iterations: 0, converged: false };
    }

    let mut iterations = 0;
    let mut rebuild = true;
    let mut jtj = DMatrix::<f64>::zeros(n, n);
    let mut jtr = DVector::<f64>::zeros(n);
    while iterations < opts.max_iterations {
        iterations += 1;
        if cost <= 1e-28 * scale {
            return LmOutcome { params, sse: cost, iterations, converged: true };
        }
        if rebuild {
            for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
                model.gradient(&params, x, &mut grad);
                for (j, g) in grad.iter().enumerate() {
                    jac[(i, j)] = *g;
                }
                resid[i] = y - model.eval(&params, x);
            }
            jtj = jac.transpose() * &jac;
            jtr = jac.transpose() * &resid;
            rebuild = false;
        }
        let mut system = jtj.clone();
        for j in 0..n {
            let d = jtj[(j, j)].max(1e-12 * (1.0 + jtj.diagonal().amax()));
            system[(j, j)] += damping * d;
        }
        let step = match system.clone().cholesky() {
            Some(ch) => ch.solve(&jtr),
            None => {
                damping *= 4.0;
                if damping > 1e20 {
                    break;
                }
                continue;
            }
        };
        let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
        let raw = trial.clone();
        model.project(&mut trial);
        // Parameters already sitting on a bound that the step pushes past are
        // frozen, and the step is re-solved over the free ones. Clipping the
        // full step instead crawls along the bound.
        let pinned: Vec<usize> = (0..n).filter(|&j| trial[j] != raw[j] && trial[j] == params[j]).collect();
        if !pinned.is_empty() && pinned.len() < n {
            let mut reduced = system.clone();
            let mut rhs = jtr.clone();
            for &j in &pinned {
                reduced.row_mut(j).fill(0.0);
                reduced.column_mut(j).fill(0.0);
                reduced[(j, j)] = 1.0;
                rhs[j] = 0.0;
            }
            if let Some(ch) = reduced.cholesky() {
                let step = ch.solve(&rhs);
                trial = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                model.project(&mut trial);
            }
        }
        let trial_cost = sse(model, &trial, xs, ys);
        if trial_cost.is_finite() && trial_cost < cost {
            let relative = (cost - trial_cost) / cost;
            params = trial;
            cost = trial_cost;
            damping = (damping / 3.0).max(1e-15);
            rebuild = true;
            if relative < opts.relative_tolerance {
                return LmOutcome { params, sse: cost, iterations, converged: true };
            }
        } else {
            damping *= 4.0;
            if damping > 1e20 {
                // no descent direction left at any damping: stationary point
                return LmOutcome { params, sse: cost, iterations, converged: true };
            }
        }
    }
    LmOutcome { params, sse: cost, iterations, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;
    impl CurveModel for Line {
        fn n_params(&self) -> usize {
            2
        }
        fn eval(&self, p: &[f64], x: f64) -> f64 {
            p[0] + p[1] * x
        }
        fn gradient(&self, _p: &[f64], x: f64, out: &mut [f64]) {
            out[0] = 1.0;
            out[1] = x;
        }
    }

    #[test]
    fn solves_linear_least_squares() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x + if (*x as i32) % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let out = minimize(&Line, &xs, &ys, &[0.0, 0.0], LmOptions::default());
        assert!(out.converged);
        // closed-form OLS on the alternating perturbation
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((out.params[1] - slope).abs() < 1e-8);
        assert!((out.params[0] - (my - slope * mx)).abs() < 1e-8);
    }
}
