use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::lm::{self, CurveModel, LmOptions};
use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveForm {
    /// `y = A·e^(B·x) + C`
    Exponential,
    /// `y = A·e^(1 − e^(μ·e·(B − x)/A)) + C`
    Gompertz,
}

/// A fitted growth curve in the caller's coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub form: CurveForm,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Gompertz growth-rate parameter; `None` for the exponential form.
    pub mu: Option<f64>,
    /// R² on the training points.
    pub fit_r2: f64,
}

impl GrowthCurve {
    pub fn exponential(a: f64, b: f64, c: f64) -> Self {
        GrowthCurve { form: CurveForm::Exponential, a, b, c, mu: None, fit_r2: f64::NAN }
    }

    pub fn gompertz(a: f64, b: f64, mu: f64, c: f64) -> Self {
        GrowthCurve { form: CurveForm::Gompertz, a, b, c, mu: Some(mu), fit_r2: f64::NAN }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.form {
            CurveForm::Exponential => {
                // exp(ln A + Bx) stays finite for tiny A and large x
                if self.a > 0.0 {
                    (self.a.ln() + self.b * x).exp() + self.c
                } else {
                    self.a * (self.b * x).exp() + self.c
                }
            }
            CurveForm::Gompertz => gompertz(self.a, self.b, self.mu.unwrap_or(0.0), self.c, x),
        }
    }
}

fn gompertz(a: f64, b: f64, mu: f64, c: f64, x: f64) -> f64 {
    let u = mu * E * (b - x) / a;
    if u > 700.0 {
        return c;
    }
    a * (1.0 - u.exp()).exp() + c
}

/// 1 − SSE/SST over `(x, y)` pairs.
pub(crate) fn r_squared_of(curve: &GrowthCurve, xs: &[f64], ys: &[f64]) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let sse: f64 = xs.iter().zip(ys).map(|(&x, &y)| (y - curve.eval(x)).powi(2)).sum();
    1.0 - sse / sst
}

struct ExpModel;

impl CurveModel for ExpModel {
    fn n_params(&self) -> usize {
        3
    }
    fn eval(&self, p: &[f64], x: f64) -> f64 {
        p[0] * (p[1] * x).exp() + p[2]
    }
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        let e = (p[1] * x).exp();
        out[0] = e;
        out[1] = p[0] * x * e;
        out[2] = 1.0;
    }
    fn project(&self, p: &mut [f64]) {
        p[2] = p[2].max(0.0);
    }
}

struct GompertzModel;

impl CurveModel for GompertzModel {
    fn n_params(&self) -> usize {
        4
    }
    fn eval(&self, p: &[f64], x: f64) -> f64 {
        gompertz(p[0], p[1], p[2], p[3], x)
    }
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        let (a, b, mu) = (p[0], p[1], p[2]);
        let u = mu * E * (b - x) / a;
        out[3] = 1.0;
        if u > 700.0 {
            out[0] = 0.0;
            out[1] = 0.0;
            out[2] = 0.0;
            return;
        }
        let g = u.exp();
        let h = (1.0 - g).exp();
        out[0] = h * (1.0 + g * u);
        out[1] = -h * g * mu * E;
        out[2] = -h * g * E * (b - x);
    }
    fn project(&self, p: &mut [f64]) {
        p[0] = p[0].max(1e-12);
        p[3] = p[3].max(0.0);
    }
}

struct Scaled {
    x0: f64,
    y_scale: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

fn prepare(xs: &[f64], ys: &[f64], min_points: usize) -> Result<Scaled, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch { x: xs.len(), y: ys.len() });
    }
    if xs.len() < min_points {
        return Err(FitError::InsufficientPoints { found: xs.len(), required: min_points });
    }
    if let Some(&v) = ys.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(FitError::NonPositiveInput(v));
    }
    let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let y_scale = ys.iter().copied().fold(0.0, f64::max);
    Ok(Scaled { x0, y_scale, xs: xs.iter().map(|x| x - x0).collect(), ys: ys.iter().map(|y| y / y_scale).collect() })
}

fn trend_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn has_signal(ys: &[f64]) -> bool {
    let first = ys[0];
    ys.iter().any(|y| (y - first).abs() > 1e-12 * first.abs())
}

/// Least-squares fit of `y = A·e^(B·x) + C` with `C ≥ 0`.
///
/// Starts from a log-linear fit and refines with damped Gauss-Newton.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<GrowthCurve, FitError> {
    let s = prepare(xs, ys, 4)?;
    if !has_signal(&s.ys) {
        return Err(FitError::SingularFit("series has no growth signal".into()));
    }
    let logs: Vec<f64> = s.ys.iter().map(|y| y.ln()).collect();
    let (b0, log_a0) = trend_slope(&s.xs, &logs);
    let out = lm::minimize(&ExpModel, &s.xs, &s.ys, &[log_a0.exp(), b0, 0.0], LmOptions::default());
    if !out.converged {
        return Err(FitError::SingularFit(format!("no convergence after {} iterations", out.iterations)));
    }
    let [a, b, c] = [out.params[0], out.params[1], out.params[2]];
    if !(b > 1e-12) || !(a > 0.0) {
        return Err(FitError::SingularFit(format!("no growth: fitted rate {b:e}")));
    }
    let mut curve = GrowthCurve::exponential(s.y_scale * a * (-b * s.x0).exp(), b, s.y_scale * c);
    if !curve.a.is_finite() || curve.a == 0.0 {
        // x0 so large that A underflows; keep the log form exact
        curve.a = (s.y_scale.ln() + a.ln() - b * s.x0).exp();
    }
    curve.fit_r2 = r_squared_of(&curve, xs, ys);
    Ok(curve)
}

/// Least-squares fit of the Gompertz growth curve with `C ≥ 0`.
///
/// Initial guess: `A = 1.05·max(y)`, `B` at the midpoint of the x range and
/// `μ` from the linear trend of the data.
pub fn fit_gompertz(xs: &[f64], ys: &[f64]) -> Result<GrowthCurve, FitError> {
    let s = prepare(xs, ys, 5)?;
    if !has_signal(&s.ys) {
        return Err(FitError::SingularFit("series has no growth signal".into()));
    }
    let (slope, _) = trend_slope(&s.xs, &s.ys);
    if slope <= 0.0 {
        return Err(FitError::SingularFit("series does not grow".into()));
    }
    let x_max = s.xs.iter().copied().fold(0.0, f64::max);
    let y_max = s.ys.iter().copied().fold(0.0, f64::max);
    let starts = [
        [1.05 * y_max, 0.5 * x_max, slope, 0.0],
        // asymptote e·A near the data maximum
        [1.05 * y_max / E, 0.5 * x_max, slope, 0.0],
        [1.05 * y_max, x_max, slope, 0.0],
    ];
    let mut best: Option<lm::LmOutcome> = None;
    for start in starts {
        let out = lm::minimize(&GompertzModel, &s.xs, &s.ys, &start, LmOptions::default());
        if out.converged && out.params[2] > 0.0 && best.as_ref().is_none_or(|b| out.sse < b.sse) {
            best = Some(out);
        }
    }
    let out = best.ok_or_else(|| FitError::SingularFit("no Gompertz start converged to a growing curve".into()))?;
    let p = &out.params;
    let mut curve = GrowthCurve::gompertz(s.y_scale * p[0], p[1] + s.x0, s.y_scale * p[2], s.y_scale * p[3]);
    curve.fit_r2 = r_squared_of(&curve, xs, ys);
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn table_exponential_anchors() {
        let rapid = GrowthCurve::exponential(1e-64, 8.7e-2, 0.0);
        // independent evaluation of the same closed form
        let at = |x: f64| 1e-64 * (0.087f64 * x).exp();
        assert!(rel(rapid.eval(2020.0), at(2020.0)) < 1e-12);
        assert!(rel(rapid.eval(2020.0), 2.1e12) < 0.05);
        assert!(rel(rapid.eval(2050.0), 2.87e13) < 0.005);
    }

    #[test]
    fn recovers_exponential() {
        let xs: Vec<f64> = (0..30).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (0.05 * x).exp()).collect();
        let c = fit_exponential(&xs, &ys).unwrap();
        assert!(rel(c.a, 2.0) < 0.01, "A = {}", c.a);
        assert!(rel(c.b, 0.05) < 0.01, "B = {}", c.b);
        assert!(c.c >= 0.0);
        assert!(c.fit_r2 > 1.0 - 1e-9);
    }

    #[test]
    fn constant_series_is_singular() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(matches!(fit_exponential(&xs, &[5.0; 10]), Err(FitError::SingularFit(_))));
        assert!(matches!(fit_gompertz(&xs, &[5.0; 10]), Err(FitError::SingularFit(_))));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(fit_exponential(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]), Err(FitError::InsufficientPoints { .. })));
        assert!(matches!(
            fit_exponential(&[0.0, 1.0, 2.0, 3.0], &[1.0, -2.0, 3.0, 4.0]),
            Err(FitError::NonPositiveInput(_))
        ));
    }

    #[test]
    fn recovers_gompertz() {
        let truth = GrowthCurve::gompertz(10.0, 15.0, 1.0, 0.0);
        let xs: Vec<f64> = (0..30).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(x)).collect();
        let c = fit_gompertz(&xs, &ys).unwrap();
        assert!(rel(c.a, 10.0) < 0.02, "{c:?}");
        assert!(rel(c.b, 15.0) < 0.02, "{c:?}");
        assert!(rel(c.mu.unwrap(), 1.0) < 0.02, "{c:?}");
    }

    #[test]
    fn decreasing_series_is_singular_for_gompertz() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 20.0 - x).collect();
        assert!(matches!(fit_gompertz(&xs, &ys), Err(FitError::SingularFit(_))));
    }
}
