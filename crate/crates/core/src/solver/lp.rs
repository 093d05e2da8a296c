//! Linear programs over the angle-assignment polytopes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::metrics::{Assignment, ConeAngles, Flavor};
use crate::tet::{quad_of, VERTEX_SLOTS};

/// Slack separating positive feasibility from the boundary.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityStatus {
    PositiveFeasible,
    NonnegativeOnly,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub status: FeasibilityStatus,
    /// A maximal-slack assignment, when one exists.
    pub witness: Option<Assignment>,
    /// Largest achievable minimum slack; absent when the equalities have no solution.
    pub max_slack: Option<f64>,
}

/// Angle variables: one per quad (ideal) or per tet slot (hyper).
fn num_vars(c: &Complex, flavor: Flavor) -> usize {
    match flavor {
        Flavor::Ideal => c.num_quads(),
        Flavor::Hyper => 6 * c.num_tets(),
    }
}

fn var_index(flavor: Flavor, t: usize, s: usize) -> usize {
    match flavor {
        Flavor::Ideal => 3 * t + quad_of(s),
        Flavor::Hyper => 6 * t + s,
    }
}

/// Adds the polytope constraints. Every angle is at least `slack` and, for
/// the hyper flavor, every vertex sum is at most `π − slack`.
fn add_constraints(
    problem: &mut Problem,
    c: &Complex,
    k: &ConeAngles,
    flavor: Flavor,
    vars: &[Variable],
    slack: Option<Variable>,
) {
    let with_slack = |terms: &mut Vec<(Variable, f64)>, coeff: f64| {
        if let Some(s) = slack {
            terms.push((s, coeff));
        }
    };
    for &v in vars {
        let mut terms = vec![(v, 1.0)];
        with_slack(&mut terms, -1.0);
        problem.add_constraint(terms, ComparisonOp::Ge, 0.0);
    }
    for t in 0..c.num_tets() {
        match flavor {
            Flavor::Ideal => {
                let terms: Vec<_> = (0..3).map(|q| (vars[3 * t + q], 1.0)).collect();
                problem.add_constraint(terms, ComparisonOp::Eq, PI);
            }
            Flavor::Hyper => {
                for slots in VERTEX_SLOTS {
                    let mut terms: Vec<_> = slots.iter().map(|&s| (vars[6 * t + s], 1.0)).collect();
                    with_slack(&mut terms, 1.0);
                    problem.add_constraint(terms, ComparisonOp::Le, PI);
                }
            }
        }
    }
    for (e, class) in c.edges().iter().enumerate() {
        // Several instances may land on the same variable; merge coefficients.
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        for &(t, s) in &class.instances {
            *coeffs.entry(var_index(flavor, t, s)).or_default() += 1.0;
        }
        let terms: Vec<_> = coeffs.into_iter().map(|(i, w)| (vars[i], w)).collect();
        problem.add_constraint(terms, ComparisonOp::Eq, k.0[e]);
    }
}

fn to_assignment(c: &Complex, flavor: Flavor, x: &[f64]) -> Assignment {
    match flavor {
        Flavor::Ideal => Assignment::Ideal(x.to_vec()),
        Flavor::Hyper => Assignment::Hyper((0..c.num_tets()).map(|t| std::array::from_fn(|s| x[6 * t + s])).collect()),
    }
}

fn check_target(c: &Complex, k: &ConeAngles) -> Result<()> {
    c.check_edges(&k.0)?;
    if k.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("cone angles must be finite".into()));
    }
    Ok(())
}

/// Maximizes the minimum slack over the angle polytope with cone angles `k`.
pub fn feasibility(c: &Complex, k: &ConeAngles, flavor: Flavor) -> Result<FeasibilityReport> {
    check_target(c, k)?;
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = (0..num_vars(c, flavor))
        .map(|_| problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    // Angles are bounded by π, so the slack is bounded by the constraints;
    // the explicit bounds only keep the program well posed.
    let slack = problem.add_var(1.0, (-2.0 * PI, PI));
    add_constraints(&mut problem, c, k, flavor, &vars, Some(slack));
    match problem.solve() {
        Ok(sol) => {
            let s = *sol.var_value(slack);
            let x: Vec<f64> = vars.iter().map(|&v| *sol.var_value(v)).collect();
            let status = if s > SLACK_TOL {
                FeasibilityStatus::PositiveFeasible
            } else if s >= -SLACK_TOL {
                FeasibilityStatus::NonnegativeOnly
            } else {
                FeasibilityStatus::Infeasible
            };
            let witness = (status != FeasibilityStatus::Infeasible).then(|| to_assignment(c, flavor, &x));
            Ok(FeasibilityReport {
                status,
                witness,
                max_slack: Some(s),
            })
        }
        Err(minilp::Error::Infeasible) => Ok(FeasibilityReport {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            max_slack: None,
        }),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}

/// A vertex of the angle polytope (angles at least `min_angle`) maximizing
/// `objective · x`, or `None` when the polytope is empty.
pub fn extreme_assignment(
    c: &Complex,
    k: &ConeAngles,
    flavor: Flavor,
    objective: &[f64],
    min_angle: f64,
) -> Result<Option<Assignment>> {
    check_target(c, k)?;
    let n = num_vars(c, flavor);
    if objective.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: objective.len(),
        });
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<Variable> = objective
        .iter()
        .map(|&w| problem.add_var(w, (min_angle, f64::INFINITY)))
        .collect();
    add_constraints(&mut problem, c, k, flavor, &vars, None);
    if flavor == Flavor::Hyper && min_angle > 0.0 {
        // Mirror the strict vertex inequality with the same margin.
        for t in 0..c.num_tets() {
            for slots in VERTEX_SLOTS {
                let terms: Vec<_> = slots.iter().map(|&s| (vars[6 * t + s], 1.0)).collect();
                problem.add_constraint(terms, ComparisonOp::Le, PI - min_angle);
            }
        }
    }
    match problem.solve() {
        Ok(sol) => {
            let x: Vec<f64> = vars.iter().map(|&v| *sol.var_value(v)).collect();
            Ok(Some(to_assignment(c, flavor, &x)))
        }
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::cone_angles;

    fn witness_ok(c: &Complex, k: &ConeAngles, r: &FeasibilityReport) {
        let w = r.witness.as_ref().unwrap();
        w.validate(c).unwrap();
        let got = cone_angles(c, w).unwrap();
        for (a, b) in got.0.iter().zip(&k.0) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fig8_complete_structure() {
        let c = Complex::fig8();
        let k = ConeAngles(vec![2.0 * PI; 2]);
        let r = feasibility(&c, &k, Flavor::Ideal).unwrap();
        assert_eq!(r.status, FeasibilityStatus::PositiveFeasible);
        assert!((r.max_slack.unwrap() - PI / 3.0).abs() < 1e-9);
        witness_ok(&c, &k, &r);
    }

    #[test]
    fn fig8_over_budget() {
        let c = Complex::fig8();
        let r = feasibility(&c, &ConeAngles(vec![6.0 * PI; 2]), Flavor::Ideal).unwrap();
        assert_eq!(r.status, FeasibilityStatus::Infeasible);
        assert!(r.witness.is_none());
    }

    #[test]
    fn double_tet_hyper_symmetric() {
        let c = Complex::double_tet();
        let k = ConeAngles(vec![2.0 * (2.0f64 / 3.0).acos(); 6]);
        let r = feasibility(&c, &k, Flavor::Hyper).unwrap();
        assert_eq!(r.status, FeasibilityStatus::PositiveFeasible);
        witness_ok(&c, &k, &r);
    }

    #[test]
    fn boundary_target_is_nonnegative_only() {
        // Angles (π, 0, 0) in both tets of the doubled tetrahedron.
        let c = Complex::double_tet();
        let mut k = vec![0.0; 6];
        for (e, class) in c.edges().iter().enumerate() {
            k[e] = class.instances.iter().filter(|&&(_, s)| quad_of(s) == 0).count() as f64 * PI;
        }
        let k = ConeAngles(k);
        let r = feasibility(&c, &k, Flavor::Ideal).unwrap();
        assert_eq!(r.status, FeasibilityStatus::NonnegativeOnly);
        witness_ok(&c, &k, &r);
    }

    #[test]
    fn extreme_points_are_feasible() {
        let c = Complex::fig8();
        let k = ConeAngles(vec![2.0 * PI; 2]);
        for obj in [[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, -1.0, 2.0, 0.5, 0.0, 1.0]] {
            let a = extreme_assignment(&c, &k, Flavor::Ideal, &obj, 0.0).unwrap().unwrap();
            a.validate(&c).unwrap();
        }
    }
}
