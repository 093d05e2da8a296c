//! Feasibility, covolume minimization and the checks built on it.
//!
//! For a target cone-angle vector `k` the solver minimizes
//! `F(l) = cov(l) − ⟨l, k⟩`, whose gradient is `k_l − k`. At the minimizer the
//! dihedral angles of `l` are the volume-maximizing angle assignment with
//! cone angles `k`, and `W(k) = ⟨l, k⟩ − cov(l) = −2 vol`.

mod descent;
pub mod lp;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::hyperideal::{self, HyperLengths6, LengthClass, DEFAULT_CLASSIFY_TOL, DEFAULT_QUAD_TOL, MAX_LENGTH};
use crate::metrics::{self, Assignment, ConeAngles, Flavor, MetricVector};

use descent::{DescentOptions, Objective};
pub use lp::{extreme_assignment, feasibility, FeasibilityReport, FeasibilityStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stopping tolerance on `‖k_l − k‖∞`.
    pub tol: f64,
    pub max_iter: usize,
    /// Absolute tolerance of covolume path integrals.
    pub quad_tol: f64,
    /// L-BFGS memory.
    pub memory: usize,
    /// Starting lengths; defaults to `0` (ideal) or `1` (hyper).
    pub initial: Option<MetricVector>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 5000,
            quad_tol: DEFAULT_QUAD_TOL,
            memory: 10,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub flavor: Flavor,
    /// Minimizing lengths; minimum-norm gauge representative for the ideal flavor.
    pub lengths: MetricVector,
    pub assignment: Assignment,
    /// Cone angles recomputed from `assignment`.
    pub achieved: ConeAngles,
    pub volume: f64,
    /// `⟨l, k⟩ − cov(l)`.
    pub w: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Objective values at the accepted iterates.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

struct CovObjective<'a> {
    c: &'a Complex,
    k: &'a [f64],
    flavor: Flavor,
    quad_tol: f64,
    scale: f64,
}

impl<'a> CovObjective<'a> {
    fn new(c: &'a Complex, k: &'a [f64], flavor: Flavor, quad_tol: f64) -> Self {
        let most = c.edges().iter().map(|e| e.instances.len()).max().unwrap_or(0) as f64;
        let scale = PI * most + k.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        Self {
            c,
            k,
            flavor,
            quad_tol,
            scale,
        }
    }
}

impl Objective for CovObjective<'_> {
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ka = metrics::cone_angles_of_metric(self.c, &MetricVector(x.to_vec()), self.flavor)?;
        let g: Vec<f64> = ka.0.iter().zip(self.k).map(|(a, b)| a - b).collect();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite gradient".into()));
        }
        Ok(g)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let l = MetricVector(x.to_vec());
        let cov = metrics::cov_complex_with_tol(self.c, &l, self.flavor, self.quad_tol)?;
        Ok(cov.value - x.iter().zip(self.k).map(|(a, b)| a * b).sum::<f64>())
    }

    fn breaks(&self, x: &[f64], d: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0, 1.0];
        if self.flavor == Flavor::Hyper {
            let to: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + b).collect();
            for t in 0..self.c.num_tets() {
                out.extend(hyperideal::segment_breaks(&self.c.restrict(t, x), &self.c.restrict(t, &to)));
            }
            out.sort_by(f64::total_cmp);
            out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        }
        out
    }

    fn gradient_scale(&self) -> f64 {
        self.scale
    }

    fn project(&self, v: &mut [f64]) {
        if self.flavor == Flavor::Ideal {
            let p = self.c.project_slice(v);
            v.copy_from_slice(&p);
        }
    }

    fn admissible(&self, x: &[f64]) -> bool {
        match self.flavor {
            Flavor::Ideal => x.iter().all(|v| v.is_finite()),
            Flavor::Hyper => x.iter().all(|v| v.is_finite() && *v <= MAX_LENGTH),
        }
    }
}

/// `F(x + t d) − F(x)` by quadrature of the directional derivative, as used
/// inside the line search, to absolute tolerance `quad_tol`.
pub fn objective_increment(
    c: &Complex,
    k: &ConeAngles,
    flavor: Flavor,
    x: &MetricVector,
    d: &MetricVector,
    quad_tol: f64,
) -> Result<f64> {
    c.check_edges(&k.0)?;
    c.check_edges(&x.0)?;
    c.check_edges(&d.0)?;
    let obj = CovObjective::new(c, &k.0, flavor, quad_tol);
    descent::increment(&obj, &x.0, &d.0, 1.0, quad_tol, 0.0)
}

fn require_positive(c: &Complex, k: &ConeAngles, flavor: Flavor) -> Result<()> {
    if !c.is_closed() {
        return Err(Error::NotClosed);
    }
    let report = feasibility(c, k, flavor)?;
    if report.status != FeasibilityStatus::PositiveFeasible {
        let detail = match report.max_slack {
            Some(s) => format!("{:?}, max slack {s:e}", report.status),
            None => format!("{:?}", report.status),
        };
        return Err(Error::NotPositiveFeasible(detail));
    }
    Ok(())
}

/// Minimizes `cov − ⟨·, k⟩` and assembles the resulting metric data.
pub fn solve_metric(c: &Complex, k: &ConeAngles, flavor: Flavor, opts: &SolveOptions) -> Result<SolveResult> {
    require_positive(c, k, flavor)?;
    let x0 = match &opts.initial {
        Some(l) => {
            c.check_edges(&l.0)?;
            l.0.clone()
        }
        None => match flavor {
            Flavor::Ideal => vec![0.0; c.num_edges()],
            Flavor::Hyper => vec![1.0; c.num_edges()],
        },
    };
    let obj = CovObjective::new(c, &k.0, flavor, opts.quad_tol);
    let dopts = DescentOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        memory: opts.memory.max(1),
        max_step: 5.0,
    };
    let out = descent::minimize(&obj, x0, &dopts, opts.quad_tol)?;
    let x = match flavor {
        Flavor::Ideal => c.project_slice(&out.x),
        Flavor::Hyper => {
            if let Some(v) = out.x.iter().find(|&&v| v <= 0.0) {
                return Err(Error::Inconsistent(format!("critical point has nonpositive length {v}")));
            }
            out.x
        }
    };
    let lengths = MetricVector(x);
    let assignment = metrics::angles_of_metric(c, &lengths, flavor)?;
    let achieved = metrics::cone_angles(c, &assignment)?;
    let volume = metrics::metric_volume(c, &lengths, flavor, opts.quad_tol)?;
    let cov = metrics::cov_complex_with_tol(c, &lengths, flavor, opts.quad_tol)?;
    let w = lengths.0.iter().zip(&k.0).map(|(a, b)| a * b).sum::<f64>() - cov.value;
    Ok(SolveResult {
        flavor,
        lengths,
        assignment,
        achieved,
        volume,
        w,
        iterations: out.iterations,
        gradient_norm: out.residual,
        trace: out.trace,
    })
}

/// The volume-maximizing assignment with cone angles `k` and its volume.
pub fn max_volume_angles(c: &Complex, k: &ConeAngles, flavor: Flavor, opts: &SolveOptions) -> Result<(Assignment, f64)> {
    let r = solve_metric(c, k, flavor, opts)?;
    Ok((r.assignment, r.volume))
}

/// `max_x ⟨x, k⟩ − cov(x)` over `points`, minus `result.w`. Never positive
/// beyond rounding when `result` is a minimizer.
pub fn duality_gap(c: &Complex, k: &ConeAngles, result: &SolveResult, points: &[MetricVector]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for x in points {
        let cov = metrics::cov_complex(c, x, result.flavor)?;
        let pairing: f64 = x.0.iter().zip(&k.0).map(|(a, b)| a * b).sum();
        best = best.max(pairing - cov.value);
    }
    Ok(best - result.w)
}

/// `count` points drawn uniformly from the box of half-width `radius` around `center`.
pub fn sample_points(center: &MetricVector, count: usize, radius: f64, seed: u64) -> Vec<MetricVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| MetricVector(center.0.iter().map(|&x| x + rng.gen_range(-radius..=radius)).collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Realized,
    FlatIdeal,
    FlatHyper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TetVerdict {
    pub tet: usize,
    pub kind: VerdictKind,
    /// Realized: smallest angle. FlatIdeal: `e^{(l_q+l_{q+3})/2}` minus the
    /// sum of the other two. FlatHyper: `|φ| − 1` on the flat quad.
    pub residual: f64,
}

/// Per-tetrahedron structure of a maximizer: genuine, or flat with the
/// `(0, 0, 0, 0, π, π)` pattern and the matching length condition.
pub fn classify_maximizer(c: &Complex, result: &SolveResult, angle_tol: f64) -> Result<Vec<TetVerdict>> {
    let mut out = Vec::with_capacity(c.num_tets());
    for t in 0..c.num_tets() {
        let a = result.assignment.tet_angles(t).0;
        let l = c.restrict(t, &result.lengths.0);
        let smallest = a.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest > angle_tol {
            out.push(TetVerdict {
                tet: t,
                kind: VerdictKind::Realized,
                residual: smallest,
            });
            continue;
        }
        let flat_quad = (0..3).find(|&q| {
            (0..6).all(|s| {
                let target = if s % 3 == q { PI } else { 0.0 };
                (a[s] - target).abs() <= angle_tol
            })
        });
        let Some(q) = flat_quad else {
            return Err(Error::Inconsistent(format!("tet {t} has a zero angle without the flat pattern: {a:?}")));
        };
        match result.flavor {
            Flavor::Ideal => {
                let side = |p: usize| (0.5 * (l[p] + l[p + 3])).exp();
                let (i, j) = ((q + 1) % 3, (q + 2) % 3);
                let residual = side(q) - side(i) - side(j);
                if residual < -angle_tol * side(q) {
                    return Err(Error::Inconsistent(format!("tet {t}: flat inequality fails by {residual:e}")));
                }
                out.push(TetVerdict {
                    tet: t,
                    kind: VerdictKind::FlatIdeal,
                    residual,
                });
            }
            Flavor::Hyper => {
                let class = hyperideal::classify_lengths(&HyperLengths6(l), DEFAULT_CLASSIFY_TOL)?;
                if class == LengthClass::HyperIdeal {
                    return Err(Error::Inconsistent(format!("tet {t} is flat but its lengths are hyper-ideal")));
                }
                let p = hyperideal::phi(&HyperLengths6(l))?;
                out.push(TetVerdict {
                    tet: t,
                    kind: VerdictKind::FlatHyper,
                    residual: p[q].abs() - 1.0,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub starts: usize,
    pub agree: bool,
    /// Largest pairwise sup-norm difference of the angle assignments.
    pub angle_spread: f64,
    /// Largest pairwise sup-norm difference of the lengths (gauge-projected
    /// for the ideal flavor).
    pub length_spread: f64,
    pub tolerance: f64,
    pub results: Vec<SolveResult>,
}

/// Uniform random starting lengths for the given flavor.
pub fn random_start(c: &Complex, flavor: Flavor, rng: &mut impl Rng) -> MetricVector {
    let (lo, hi) = match flavor {
        Flavor::Ideal => (-1.0, 1.0),
        Flavor::Hyper => (0.2, 3.0),
    };
    MetricVector((0..c.num_edges()).map(|_| rng.gen_range(lo..=hi)).collect())
}

fn flat_angles(a: &Assignment) -> Vec<f64> {
    match a {
        Assignment::Ideal(q) => q.clone(),
        Assignment::Hyper(s) => s.iter().flatten().copied().collect(),
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Solves from `starts` random initial points and compares the results.
pub fn rigidity_check(
    c: &Complex,
    k: &ConeAngles,
    flavor: Flavor,
    starts: usize,
    seed: u64,
    opts: &SolveOptions,
) -> Result<RigidityReport> {
    const AGREEMENT: f64 = 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(starts);
    for _ in 0..starts {
        let run = SolveOptions {
            initial: Some(random_start(c, flavor, &mut rng)),
            ..opts.clone()
        };
        results.push(solve_metric(c, k, flavor, &run)?);
    }
    let (mut angle_spread, mut length_spread) = (0.0f64, 0.0f64);
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (a, b) = (&results[i], &results[j]);
            angle_spread = angle_spread.max(sup_diff(&flat_angles(&a.assignment), &flat_angles(&b.assignment)));
            length_spread = length_spread.max(sup_diff(&a.lengths.0, &b.lengths.0));
        }
    }
    let agree = match flavor {
        Flavor::Ideal => angle_spread <= AGREEMENT && length_spread <= AGREEMENT,
        Flavor::Hyper => length_spread <= AGREEMENT,
    };
    Ok(RigidityReport {
        starts,
        agree,
        angle_spread,
        length_spread,
        tolerance: AGREEMENT,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const REGULAR_VOLUME: f64 = 1.014_941_606_409_653_6;

    #[test]
    fn fig8_complete_structure() {
        let c = Complex::fig8();
        let k = ConeAngles(vec![2.0 * PI; 2]);
        let r = solve_metric(&c, &k, Flavor::Ideal, &SolveOptions::default()).unwrap();
        let Assignment::Ideal(q) = &r.assignment else { panic!() };
        assert!(q.iter().all(|x| (x - PI / 3.0).abs() < 1e-9));
        assert!((r.volume - 2.0 * REGULAR_VOLUME).abs() < 1e-9);
        assert!((r.w + 2.0 * r.volume).abs() < 1e-7);
        let verdicts = classify_maximizer(&c, &r, 1e-7).unwrap();
        assert!(verdicts.iter().all(|v| v.kind == VerdictKind::Realized));
    }

    #[test]
    fn double_tet_hyper_symmetric() {
        let c = Complex::double_tet();
        let k = ConeAngles(vec![2.0 * (2.0f64 / 3.0).acos(); 6]);
        let r = solve_metric(&c, &k, Flavor::Hyper, &SolveOptions::default()).unwrap();
        for x in &r.lengths.0 {
            assert!((x - 2f64.acosh()).abs() < 1e-8, "{x}");
        }
        assert!((r.w + 2.0 * r.volume).abs() < 1e-7);
    }

    #[test]
    fn rejects_infeasible_and_open() {
        let c = Complex::fig8();
        let err = solve_metric(&c, &ConeAngles(vec![6.0 * PI; 2]), Flavor::Ideal, &SolveOptions::default());
        assert!(matches!(err, Err(Error::NotPositiveFeasible(_))));
        let single = Complex::build(&crate::complex::GluingSpec::single_tet()).unwrap();
        let err = solve_metric(&single, &ConeAngles(vec![PI / 3.0; 6]), Flavor::Ideal, &SolveOptions::default());
        assert!(matches!(err, Err(Error::NotClosed)));
    }

    #[test]
    fn flat_ideal_verdict() {
        let c = Complex::double_tet();
        let l2 = 2.0 * std::f64::consts::LN_2;
        // Slots 0 and 3 of both tets are the same two edge classes.
        let mut lengths = vec![0.0; 6];
        lengths[c.edge(0, 0)] = l2;
        lengths[c.edge(0, 3)] = l2;
        let lengths = MetricVector(lengths);
        let assignment = metrics::angles_of_metric(&c, &lengths, Flavor::Ideal).unwrap();
        let result = SolveResult {
            flavor: Flavor::Ideal,
            achieved: metrics::cone_angles(&c, &assignment).unwrap(),
            assignment,
            lengths,
            volume: 0.0,
            w: 0.0,
            iterations: 0,
            gradient_norm: 0.0,
            trace: vec![],
        };
        let v = classify_maximizer(&c, &result, 1e-9).unwrap();
        assert!(v.iter().all(|v| v.kind == VerdictKind::FlatIdeal && (v.residual - 2.0).abs() < 1e-12));
    }
}
