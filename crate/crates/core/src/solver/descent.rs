//! Limited-memory BFGS for the convex covolume objectives.
//!
//! Step acceptance uses convexity: `F(x + t d) − F(x) ≤ t ⟨∇F(x + t d), d⟩`,
//! so a trial point whose directional derivative is at most `c₁ ⟨∇F(x), d⟩`
//! satisfies sufficient decrease without any function value. Otherwise the
//! decrease is measured by integrating the directional derivative along the
//! step, which stays accurate where differences of large values would not.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

const C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const RESYNC_EVERY: usize = 25;

pub(crate) trait Objective {
    /// Gradient of the objective; the stopping test uses its sup norm.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Full objective value.
    fn value(&self, x: &[f64]) -> Result<f64>;
    /// Sorted break points in `[0, 1]` for the segment `x → x + d`.
    fn breaks(&self, x: &[f64], d: &[f64]) -> Vec<f64>;
    /// Upper bound on the gradient entries, used as a noise scale.
    fn gradient_scale(&self) -> f64;
    /// Projects a direction onto the search subspace.
    fn project(&self, _v: &mut [f64]) {}
    /// Whether the objective can be evaluated at `x`.
    fn admissible(&self, _x: &[f64]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DescentOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    pub max_step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Objective at each accepted iterate, starting with the initial point.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Relative tolerance of the increments inside the line search.
const LINE_SEARCH_REL_TOL: f64 = 1e-10;

/// `F(x + t d) − F(x)` by quadrature of `τ ↦ ⟨∇F(x + τ d), d⟩`, to within
/// `max(tol, rel_tol |value|)` up to a rounding floor.
pub(crate) fn increment<O: Objective>(obj: &O, x: &[f64], d: &[f64], t: f64, tol: f64, rel_tol: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let step: Vec<f64> = d.iter().map(|v| t * v).collect();
    let breaks = obj.breaks(x, &step);
    let mut failure = None;
    let integrand = |tau: f64| {
        let p = axpy(x, tau, &step);
        match obj.gradient(&p) {
            Ok(g) => dot(&g, &step),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let l1: f64 = step.iter().map(|v| v.abs()).sum();
    let floor = 64.0 * f64::EPSILON * l1 * obj.gradient_scale();
    let opts = QuadOptions {
        abs_tol: tol.max(floor),
        rel_tol,
        max_intervals: 2000,
    };
    let result = integrate_with_breaks(integrand, &breaks, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(result?.value)
}

/// Two-loop recursion for `−H g`.
fn direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

pub(crate) fn minimize<O: Objective>(obj: &O, x0: Vec<f64>, opts: &DescentOptions, quad_tol: f64) -> Result<Outcome> {
    let mut x = x0;
    obj.project(&mut x);
    if !obj.admissible(&x) {
        return Err(Error::Domain("initial point outside the evaluation domain".into()));
    }
    let mut g_full = obj.gradient(&x)?;
    let mut g = g_full.clone();
    obj.project(&mut g);
    let mut residual = sup(&g_full);
    let mut value = obj.value(&x)?;
    let mut trace = vec![value];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    for iter in 0..opts.max_iter {
        if residual <= opts.tol {
            return Ok(Outcome {
                x,
                residual,
                iterations: iter,
                trace,
            });
        }
        let mut accepted = None;
        for _ in 0..2 {
            let mut d = if pairs.is_empty() {
                g.iter().map(|v| -v).collect()
            } else {
                direction(&g, &pairs)
            };
            obj.project(&mut d);
            let mut slope = dot(&g, &d);
            if !(slope < 0.0) {
                pairs.clear();
                d = g.iter().map(|v| -v).collect();
                slope = dot(&g, &d);
            }
            let dmax = sup(&d);
            let mut t: f64 = if pairs.is_empty() { (1.0 / dmax).min(1.0) } else { 1.0 };
            t = t.min(opts.max_step / dmax);
            for _ in 0..MAX_BACKTRACKS {
                let y = axpy(&x, t, &d);
                if obj.admissible(&y) {
                    if let Ok(gy_full) = obj.gradient(&y) {
                        let mut gy = gy_full.clone();
                        obj.project(&mut gy);
                        let slope_t = dot(&gy, &d);
                        let delta = increment(obj, &x, &d, t, quad_tol, LINE_SEARCH_REL_TOL);
                        let ok = match &delta {
                            Ok(dv) => slope_t <= C1 * slope || *dv <= C1 * t * slope,
                            Err(_) => false,
                        };
                        if ok {
                            accepted = Some((y, gy_full, gy, delta?, t, d.clone()));
                            break;
                        }
                        if let Ok(dv) = delta {
                            // Minimizer of the quadratic through the two values and the slope.
                            let denom = 2.0 * (dv - slope * t);
                            let trial = if denom > 0.0 { -slope * t * t / denom } else { 0.5 * t };
                            t = trial.clamp(0.1 * t, 0.5 * t);
                            continue;
                        }
                    }
                }
                t *= 0.5;
            }
            if accepted.is_some() || pairs.is_empty() {
                break;
            }
            // Retry once along steepest descent with a fresh memory.
            pairs.clear();
        }
        let Some((y, gy_full, gy, delta, t, d)) = accepted else {
            return Err(Error::LineSearchFailure {
                iteration: iter,
                residual,
            });
        };
        let s: Vec<f64> = d.iter().map(|v| t * v).collect();
        let yv: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, yv, 1.0 / sy));
        }
        x = y;
        g_full = gy_full;
        g = gy;
        residual = sup(&g_full);
        value += delta;
        if (iter + 1) % RESYNC_EVERY == 0 {
            value = obj.value(&x)?;
        }
        trace.push(value);
    }
    if residual <= opts.tol {
        return Ok(Outcome {
            x,
            residual,
            iterations: opts.max_iter,
            trace,
        });
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A smooth convex quadratic plus a softplus term.
    struct Toy;

    impl Objective for Toy {
        fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![
                4.0 * (x[0] - 1.0) + x[1],
                x[0] + 2.0 * x[1] + 1.0 / (1.0 + (-x[1]).exp()) - 0.5,
            ])
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok(2.0 * (x[0] - 1.0).powi(2) + x[0] * x[1] + x[1] * x[1] + (1.0 + x[1].exp()).ln() - 0.5 * x[1])
        }
        fn breaks(&self, _x: &[f64], _d: &[f64]) -> Vec<f64> {
            vec![0.0, 1.0]
        }
        fn gradient_scale(&self) -> f64 {
            10.0
        }
    }

    #[test]
    fn increment_matches_values() {
        let x = [0.3, -0.2];
        let d = [1.0, 0.5];
        let inc = increment(&Toy, &x, &d, 0.7, 1e-14, 0.0).unwrap();
        let direct = Toy.value(&axpy(&x, 0.7, &d)).unwrap() - Toy.value(&x).unwrap();
        assert!((inc - direct).abs() < 1e-13);
    }

    #[test]
    fn converges_with_monotone_trace() {
        let opts = DescentOptions {
            tol: 1e-11,
            max_iter: 200,
            memory: 5,
            max_step: 5.0,
        };
        let out = minimize(&Toy, vec![5.0, -7.0], &opts, 1e-14).unwrap();
        assert!(out.residual <= 1e-11);
        for w in out.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
