//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use hypmet::metrics::{self, ConeAngles, Flavor, MetricVector};
use hypmet::solver::{feasibility, FeasibilityStatus};
use hypmet::Complex;
use rand::Rng;

/// `Λ(x)` for `x ∈ [0, π]` from the defining integral.
///
/// `ln(2 sin t) = ln 2 + ln t + ln(π − t) + g(t)` with `g` smooth on `[0, π]`;
/// the logarithms are integrated in closed form and `g` by composite Simpson.
pub fn lobachevsky_oracle(x: f64) -> f64 {
    assert!((0.0..=PI).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    let g = |t: f64| {
        if t < 1e-9 || PI - t < 1e-9 {
            -PI.ln()
        } else {
            (t.sin() / (t * (PI - t))).ln()
        }
    };
    let n = 20_000;
    let h = x / n as f64;
    let mut simpson = g(0.0) + g(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        simpson += w * g(i as f64 * h);
    }
    simpson *= h / 3.0;
    let xlogx = |u: f64| if u == 0.0 { 0.0 } else { u * u.ln() };
    let int_log_t = xlogx(x) - x;
    let int_log_pi_minus_t = -xlogx(PI - x) + (PI - x) + xlogx(PI) - PI;
    -(x * 2f64.ln() + int_log_t + int_log_pi_minus_t + simpson)
}

/// Central difference of `f` along coordinate `i`.
pub fn central_difference(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[i] += h;
    m[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Uniform random lengths for the given flavor.
pub fn random_metric(c: &Complex, flavor: Flavor, rng: &mut impl Rng) -> MetricVector {
    let (lo, hi) = match flavor {
        Flavor::Ideal => (-1.0, 1.0),
        Flavor::Hyper => (0.3, 2.5),
    };
    MetricVector((0..c.num_edges()).map(|_| rng.gen_range(lo..=hi)).collect())
}

/// A positively feasible target: the cone angles of a random metric, kept
/// only when the angle polytope has positive slack.
pub fn random_target(c: &Complex, flavor: Flavor, rng: &mut impl Rng) -> (MetricVector, ConeAngles) {
    loop {
        let l = random_metric(c, flavor, rng);
        let k = metrics::cone_angles_of_metric(c, &l, flavor).unwrap();
        if feasibility(c, &k, flavor).unwrap().status == FeasibilityStatus::PositiveFeasible {
            return (l, k);
        }
    }
}

/// A uniformly random type I dihedral angle vector: positive angles with
/// every vertex sum below `π − margin`.
pub fn random_type_one(rng: &mut impl Rng, margin: f64) -> [f64; 6] {
    loop {
        let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(margin..PI - margin));
        let ok = hypmet::tet::VERTEX_SLOTS
            .iter()
            .all(|v| v.iter().map(|&s| a[s]).sum::<f64>() < PI - margin);
        if ok {
            return a;
        }
    }
}
