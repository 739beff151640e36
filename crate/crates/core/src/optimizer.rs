//! Limited-memory BFGS with a strong Wolfe line search.
//!
//! This is the unbounded path of L-BFGS-B: search directions come from the
//! two-loop recursion over the last `m` curvature pairs, steps from a
//! bracketing/zoom line search with safeguarded cubic interpolation.
//! Stopping rules follow the usual L-BFGS-B conventions: projected-gradient
//! infinity norm (`pgtol`) and relative objective reduction (`factr * eps`).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairs with `s.y` at or below this are discarded.
pub const CURVATURE_EPS: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub max_iterations: usize,
    pub memory: usize,
    pub gradient_tolerance: f64,
    pub relative_f_tolerance: f64,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub max_line_search_steps: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iterations: 25,
            memory: 10,
            gradient_tolerance: 1e-5,
            relative_f_tolerance: 1e7 * f64::EPSILON,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            max_line_search_steps: 20,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be >= 1"));
        }
        if self.memory < 1 {
            return Err(Error::invalid("memory must be >= 1"));
        }
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(Error::invalid(format!(
                "need 0 < wolfe_c1 < wolfe_c2 < 1, got c1={} c2={}",
                self.wolfe_c1, self.wolfe_c2
            )));
        }
        if self.max_line_search_steps < 1 {
            return Err(Error::invalid("max_line_search_steps must be >= 1"));
        }
        if !(self.gradient_tolerance >= 0.0 && self.relative_f_tolerance >= 0.0) {
            return Err(Error::invalid("tolerances must be non-negative"));
        }
        Ok(())
    }

    fn line_search(&self) -> LineSearchParams {
        LineSearchParams {
            c1: self.wolfe_c1,
            c2: self.wolfe_c2,
            max_steps: self.max_line_search_steps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::LineSearchFailed => "line_search_failed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Objective at `x0` followed by one entry per accepted iterate.
    pub trace: Vec<TracePoint>,
    pub status: Status,
    pub objective_evaluations: usize,
    pub gradient_evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[derive(Clone, Debug)]
struct CurvaturePair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Ring buffer of the most recent `(s, y)` pairs.
#[derive(Clone, Debug)]
pub struct CurvatureHistory {
    pairs: VecDeque<CurvaturePair>,
    capacity: usize,
}

impl CurvatureHistory {
    pub fn new(capacity: usize) -> Self {
        CurvatureHistory {
            pairs: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
        }
    }

    /// Stores the pair if `s.y > CURVATURE_EPS`; returns whether it was kept.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > CURVATURE_EPS) {
            return false;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(CurvaturePair {
            s,
            y,
            rho: 1.0 / sy,
        });
        true
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// `s.y / y.y` of the newest pair, or 1 with no history.
    pub fn gamma(&self) -> f64 {
        self.pairs
            .back()
            .map(|p| 1.0 / (p.rho * dot(&p.y, &p.y)))
            .unwrap_or(1.0)
    }

    /// Smallest `s.y` currently stored.
    pub fn min_curvature(&self) -> Option<f64> {
        self.pairs
            .iter()
            .map(|p| 1.0 / p.rho)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// `-H g` for the implicit limited-memory inverse Hessian `H` with
/// initial scaling `gamma * I`.
pub fn two_loop_recursion(gradient: &[f64], history: &CurvatureHistory) -> Vec<f64> {
    let mut q = gradient.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for p in history.pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let gamma = history.gamma();
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for (p, a) in history.pairs.iter().zip(alphas.into_iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchParams {
    pub c1: f64,
    pub c2: f64,
    pub max_steps: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        o.line_search()
    }
}

/// A trial step with `phi(alpha)` and `phi'(alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinePoint {
    pub alpha: f64,
    pub value: f64,
    pub slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineSearchOutcome {
    Accepted(LinePoint),
    /// No step met both Wolfe conditions within the step budget.
    Failed {
        evaluations: usize,
    },
}

/// Minimizer of the cubic through two points with slopes, or `None` if the
/// cubic has no real local minimum.
fn cubic_minimizer(a: &LinePoint, b: &LinePoint) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

fn is_finite_point(p: &LinePoint) -> bool {
    p.value.is_finite() && p.slope.is_finite()
}

/// Strong Wolfe line search: bracketing followed by zoom.
///
/// `phi` returns `(phi(alpha), phi'(alpha))`. Non-finite trial values are
/// treated as overshooting. `origin` must be `alpha = 0` with a negative
/// slope.
pub fn line_search_strong_wolfe<F>(
    mut phi: F,
    origin: LinePoint,
    initial_step: f64,
    params: LineSearchParams,
) -> Result<LineSearchOutcome>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(origin.slope < 0.0) {
        return Err(Error::invalid(format!(
            "line search needs a descent direction, phi'(0) = {}",
            origin.slope
        )));
    }
    if !(initial_step > 0.0 && initial_step.is_finite()) {
        return Err(Error::invalid(format!("bad initial step {initial_step}")));
    }
    let LineSearchParams { c1, c2, max_steps } = params;
    let armijo = |p: &LinePoint| p.value <= origin.value + c1 * p.alpha * origin.slope;
    let curvature = |p: &LinePoint| p.slope.abs() <= -c2 * origin.slope;

    let mut evals = 0usize;
    let mut eval = |alpha: f64, evals: &mut usize| {
        *evals += 1;
        let (value, slope) = phi(alpha);
        LinePoint {
            alpha,
            value,
            slope,
        }
    };

    let mut prev = origin;
    let mut alpha = initial_step;
    let (mut lo, mut hi);
    loop {
        if evals >= max_steps {
            return Ok(LineSearchOutcome::Failed { evaluations: evals });
        }
        let cur = eval(alpha, &mut evals);
        if !is_finite_point(&cur) || !armijo(&cur) || (evals > 1 && cur.value >= prev.value) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature(&cur) {
            return Ok(LineSearchOutcome::Accepted(cur));
        }
        if cur.slope >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        prev = cur;
        alpha *= 2.0;
    }

    // Zoom: `lo` always satisfies Armijo and has the lowest value seen so far
    // in the bracket; the minimizer lies between `lo` and `hi`.
    while evals < max_steps {
        let width = hi.alpha - lo.alpha;
        if width.abs() <= f64::EPSILON * lo.alpha.abs().max(1.0) {
            break;
        }
        let (left, right) = if lo.alpha < hi.alpha {
            (lo.alpha, hi.alpha)
        } else {
            (hi.alpha, lo.alpha)
        };
        let margin = 0.1 * (right - left);
        let trial = if is_finite_point(&hi) {
            cubic_minimizer(&lo, &hi)
        } else {
            None
        }
        .filter(|t| *t >= left + margin && *t <= right - margin)
        .unwrap_or(0.5 * (lo.alpha + hi.alpha));

        let cur = eval(trial, &mut evals);
        if !is_finite_point(&cur) || !armijo(&cur) || cur.value >= lo.value {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Ok(LineSearchOutcome::Accepted(cur));
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    Ok(LineSearchOutcome::Failed { evaluations: evals })
}

/// Minimizes `objective` from `x0`.
///
/// The trace holds the objective at `x0` followed by one entry per accepted
/// iterate, so it never exceeds `max_iterations + 1` entries.
pub fn minimize<F, G>(
    mut objective: F,
    mut gradient: G,
    x0: &[f64],
    options: &OptimizerOptions,
) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    options.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("starting point has non-finite entries"));
    }
    let mut f_evals = 1usize;
    let mut g_evals = 1usize;
    let mut x = x0.to_vec();
    let mut f = objective(&x);
    let mut g = gradient(&x);
    if !f.is_finite() || g.len() != x.len() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "objective or gradient is non-finite (or mis-sized) at the starting point",
        ));
    }

    let mut trace = vec![TracePoint {
        iteration: 0,
        value: f,
    }];
    let mut history = CurvatureHistory::new(options.memory);
    let finish = |x: Vec<f64>, f: f64, trace: Vec<TracePoint>, status, fe, ge| OptimizeResult {
        best_point: x,
        best_value: f,
        trace,
        status,
        objective_evaluations: fe,
        gradient_evaluations: ge,
    };

    if inf_norm(&g) <= options.gradient_tolerance {
        return Ok(finish(x, f, trace, Status::Converged, f_evals, g_evals));
    }

    for iteration in 1..=options.max_iterations {
        let mut direction = two_loop_recursion(&g, &history);
        let mut slope = dot(&direction, &g);
        if !(slope < 0.0) {
            // Stale curvature; fall back to steepest descent.
            history.clear();
            direction = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut last: Option<(f64, Vec<f64>, f64, Vec<f64>)> = None;
        let outcome = line_search_strong_wolfe(
            |alpha| {
                let xt: Vec<f64> = x
                    .iter()
                    .zip(&direction)
                    .map(|(a, d)| a + alpha * d)
                    .collect();
                let ft = objective(&xt);
                f_evals += 1;
                if !ft.is_finite() {
                    return (ft, f64::NAN);
                }
                let gt = gradient(&xt);
                g_evals += 1;
                let st = dot(&gt, &direction);
                last = Some((alpha, xt, ft, gt));
                (ft, st)
            },
            LinePoint {
                alpha: 0.0,
                value: f,
                slope,
            },
            1.0,
            options.line_search(),
        )?;

        let accepted = match outcome {
            LineSearchOutcome::Accepted(p) => p,
            LineSearchOutcome::Failed { .. } => {
                return Ok(finish(
                    x,
                    f,
                    trace,
                    Status::LineSearchFailed,
                    f_evals,
                    g_evals,
                ));
            }
        };
        let (x_new, f_new, g_new) = match last {
            Some((alpha, xt, ft, gt)) if alpha == accepted.alpha => (xt, ft, gt),
            _ => {
                let xt: Vec<f64> = x
                    .iter()
                    .zip(&direction)
                    .map(|(a, d)| a + accepted.alpha * d)
                    .collect();
                f_evals += 1;
                g_evals += 1;
                let ft = objective(&xt);
                let gt = gradient(&xt);
                (xt, ft, gt)
            }
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        history.push(s, y);

        let f_old = f;
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(TracePoint {
            iteration,
            value: f,
        });

        if inf_norm(&g) <= options.gradient_tolerance {
            return Ok(finish(x, f, trace, Status::Converged, f_evals, g_evals));
        }
        let scale = f_old.abs().max(f.abs()).max(1.0);
        if (f_old - f) / scale <= options.relative_f_tolerance {
            return Ok(finish(x, f, trace, Status::Converged, f_evals, g_evals));
        }
    }
    Ok(finish(x, f, trace, Status::MaxIterations, f_evals, g_evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn quadratic_phi(alpha: f64) -> (f64, f64) {
        ((alpha - 1.0).powi(2), 2.0 * (alpha - 1.0))
    }

    #[test]
    fn line_search_finds_quadratic_minimum() {
        let origin = LinePoint {
            alpha: 0.0,
            value: 1.0,
            slope: -2.0,
        };
        for init in [0.1, 1.0, 3.0, 10.0] {
            let out = line_search_strong_wolfe(
                quadratic_phi,
                origin,
                init,
                LineSearchParams {
                    c1: 1e-4,
                    c2: 0.1,
                    max_steps: 20,
                },
            )
            .unwrap();
            let LineSearchOutcome::Accepted(p) = out else {
                panic!("no step from {init}");
            };
            assert!((p.alpha - 1.0).abs() < 0.1, "alpha {}", p.alpha);
        }
    }

    #[test]
    fn line_search_wolfe_conditions_hold() {
        // phi(a) = 3a^2 - 5a + 2
        let phi = |a: f64| (3.0 * a * a - 5.0 * a + 2.0, 6.0 * a - 5.0);
        let origin = LinePoint {
            alpha: 0.0,
            value: 2.0,
            slope: -5.0,
        };
        let params = LineSearchParams::default();
        let LineSearchOutcome::Accepted(p) =
            line_search_strong_wolfe(phi, origin, 1.0, params).unwrap()
        else {
            panic!("line search failed");
        };
        let (v, s) = phi(p.alpha);
        assert!(v <= origin.value + params.c1 * p.alpha * origin.slope);
        assert!(s.abs() <= -params.c2 * origin.slope);
    }

    #[test]
    fn line_search_rejects_ascent() {
        let origin = LinePoint {
            alpha: 0.0,
            value: 1.0,
            slope: 0.5,
        };
        assert!(matches!(
            line_search_strong_wolfe(quadratic_phi, origin, 1.0, LineSearchParams::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn line_search_reports_exhaustion() {
        // Unbounded below: doubling never finds a curvature-satisfying step.
        let phi = |a: f64| (-a, -1.0);
        let origin = LinePoint {
            alpha: 0.0,
            value: 0.0,
            slope: -1.0,
        };
        let params = LineSearchParams {
            max_steps: 5,
            ..Default::default()
        };
        assert_eq!(
            line_search_strong_wolfe(phi, origin, 1.0, params).unwrap(),
            LineSearchOutcome::Failed { evaluations: 5 }
        );
    }

    #[test]
    fn empty_history_gives_steepest_descent() {
        let h = CurvatureHistory::new(5);
        let g = [1.0, -2.0, 0.5];
        assert_eq!(two_loop_recursion(&g, &h), vec![-1.0, 2.0, -0.5]);
        assert_eq!(h.gamma(), 1.0);
    }

    #[test]
    fn one_dimensional_pair_gives_newton_step() {
        // f(x) = 2.5 x^2 has f'' = 5; any secant pair reproduces it.
        let mut h = CurvatureHistory::new(3);
        assert!(h.push(vec![0.4], vec![2.0]));
        let g = [7.0];
        let d = two_loop_recursion(&g, &h);
        assert_abs_diff_eq!(d[0], -7.0 / 5.0, epsilon = 1e-14);
    }

    /// Dense BFGS inverse update `(I - r s y^T) H (I - r y s^T) + r s s^T`.
    fn dense_bfgs_direction(g: &[f64], pairs: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
        let n = g.len();
        let (s_last, y_last) = pairs.last().unwrap();
        let gamma = dot(s_last, y_last) / dot(y_last, y_last);
        let mut h = vec![vec![0.0; n]; n];
        for (i, row) in h.iter_mut().enumerate() {
            row[i] = gamma;
        }
        for (s, y) in pairs {
            let r = 1.0 / dot(s, y);
            let mut left = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    left[i][j] = if i == j { 1.0 } else { 0.0 } - r * s[i] * y[j];
                }
            }
            let mut tmp = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    tmp[i][j] = (0..n).map(|k| left[i][k] * h[k][j]).sum();
                }
            }
            for i in 0..n {
                for j in 0..n {
                    h[i][j] = (0..n).map(|k| tmp[i][k] * left[j][k]).sum::<f64>() + r * s[i] * s[j];
                }
            }
        }
        (0..n)
            .map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>())
            .collect()
    }

    #[test]
    fn two_loop_matches_dense_bfgs() {
        // Pairs generated on the quadratic with Hessian A.
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
        let hess = |s: &[f64]| -> Vec<f64> {
            (0..3)
                .map(|i| (0..3).map(|j| a[i][j] * s[j]).sum())
                .collect()
        };
        let steps = [
            vec![1.0, 0.0, 0.2],
            vec![0.3, -0.7, 0.1],
            vec![-0.2, 0.4, 0.9],
        ];
        let pairs: Vec<_> = steps.iter().map(|s| (s.clone(), hess(s))).collect();
        let mut h = CurvatureHistory::new(3);
        for (s, y) in &pairs {
            assert!(h.push(s.clone(), y.clone()));
        }
        let g = [0.5, -1.5, 2.0];
        let fast = two_loop_recursion(&g, &h);
        let dense = dense_bfgs_direction(&g, &pairs);
        for (u, v) in fast.iter().zip(&dense) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn history_rejects_flat_curvature() {
        let mut h = CurvatureHistory::new(2);
        assert!(!h.push(vec![1.0, 0.0], vec![0.0, 1.0]));
        assert!(!h.push(vec![1e-6, 0.0], vec![1e-5, 0.0]));
        assert!(h.push(vec![1.0, 0.0], vec![1.0, 0.0]));
        assert!(h.push(vec![0.0, 1.0], vec![0.0, 2.0]));
        assert!(h.push(vec![1.0, 1.0], vec![1.0, 1.0]));
        assert_eq!(h.len(), 2);
        assert!(h.min_curvature().unwrap() > CURVATURE_EPS);
    }

    #[test]
    fn quadratic_bowl_in_few_iterations() {
        let c = [1.5, -0.3, 2.2, 0.7];
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let g = |x: &[f64]| {
            x.iter()
                .zip(&c)
                .map(|(a, b)| 2.0 * (a - b))
                .collect::<Vec<_>>()
        };
        let res = minimize(f, g, &[-4.0, 3.0, 0.0, 9.0], &OptimizerOptions::default()).unwrap();
        let dist = res
            .best_point
            .iter()
            .zip(&c)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dist < 1e-8, "distance {dist}");
        assert!(res.trace.len() <= 4);
        assert_eq!(res.status, Status::Converged);
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn rosenbrock_grad(x: &[f64]) -> Vec<f64> {
        vec![
            -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
            200.0 * (x[1] - x[0] * x[0]),
        ]
    }

    #[test]
    fn rosenbrock_converges() {
        let opts = OptimizerOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-10,
            relative_f_tolerance: 0.0,
            ..Default::default()
        };
        let res = minimize(rosenbrock, rosenbrock_grad, &[-1.2, 1.0], &opts).unwrap();
        let err = ((res.best_point[0] - 1.0).powi(2) + (res.best_point[1] - 1.0).powi(2)).sqrt();
        assert!(err < 1e-6, "err {err}, status {:?}", res.status);
    }

    #[test]
    fn iteration_cap_bounds_trace() {
        let opts = OptimizerOptions {
            max_iterations: 5,
            ..Default::default()
        };
        let res = minimize(rosenbrock, rosenbrock_grad, &[-1.2, 1.0], &opts).unwrap();
        assert_eq!(res.status, Status::MaxIterations);
        assert_eq!(res.trace.len(), 6);
        assert_eq!(res.best_value, res.trace.last().unwrap().value);
    }

    #[test]
    fn already_optimal_start() {
        let res = minimize(
            |x| x[0] * x[0],
            |x| vec![2.0 * x[0]],
            &[0.0],
            &OptimizerOptions::default(),
        )
        .unwrap();
        assert_eq!(res.status, Status::Converged);
        assert_eq!(res.trace.len(), 1);
    }

    #[test]
    fn rejects_non_finite_start() {
        let opts = OptimizerOptions::default();
        assert!(minimize(|x| x[0], |_| vec![1.0], &[f64::NAN], &opts).is_err());
        assert!(minimize(|_| f64::INFINITY, |_| vec![1.0], &[0.0], &opts).is_err());
    }

    #[test]
    fn options_validation() {
        let bad = OptimizerOptions {
            wolfe_c1: 0.95,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerOptions {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(OptimizerOptions::default().validate().is_ok());
    }

    #[test]
    fn exact_line_search_quadratic_terminates_in_d_plus_one() {
        // Ill-conditioned SPD quadratic; tight c2 forces near-exact steps.
        let a = [
            [10.0, 2.0, 0.0, 1.0],
            [2.0, 5.0, 1.0, 0.0],
            [0.0, 1.0, 3.0, 0.5],
            [1.0, 0.0, 0.5, 1.0],
        ];
        let b = [1.0, -2.0, 0.5, 3.0];
        let f = |x: &[f64]| {
            let mut v = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    v += 0.5 * x[i] * a[i][j] * x[j];
                }
                v -= b[i] * x[i];
            }
            v
        };
        let g = |x: &[f64]| {
            (0..4)
                .map(|i| (0..4).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i])
                .collect::<Vec<_>>()
        };
        let opts = OptimizerOptions {
            memory: 4,
            wolfe_c2: 1e-3,
            gradient_tolerance: 1e-8,
            relative_f_tolerance: 0.0,
            max_line_search_steps: 40,
            ..Default::default()
        };
        let res = minimize(f, g, &[0.0; 4], &opts).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(
            res.trace.len() - 1 <= 5,
            "took {} iterations",
            res.trace.len() - 1
        );
    }

    proptest! {
        #[test]
        fn two_loop_is_descent(
            g in prop::collection::vec(-5.0f64..5.0, 3),
            raw in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 3), 0.1f64..4.0), 1..6),
        ) {
            prop_assume!(g.iter().any(|v| v.abs() > 1e-3));
            let mut h = CurvatureHistory::new(5);
            for (s, scale) in raw {
                // y = D s with D positive diagonal keeps s.y > 0.
                let y: Vec<f64> = s.iter().enumerate().map(|(i, v)| v * scale * (1.0 + i as f64)).collect();
                h.push(s, y);
            }
            let d = two_loop_recursion(&g, &h);
            prop_assert!(dot(&d, &g) < 0.0);
        }

        #[test]
        fn trace_never_increases(x0 in -2.0f64..2.0, y0 in -1.0f64..3.0) {
            let res = minimize(rosenbrock, rosenbrock_grad, &[x0, y0], &OptimizerOptions::default()).unwrap();
            prop_assert!(res.trace.len() <= 26);
            for w in res.trace.windows(2) {
                prop_assert!(w[1].value <= w[0].value + 1e-15);
            }
        }
    }
}
