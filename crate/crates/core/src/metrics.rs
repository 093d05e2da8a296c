//! Quantities assembled over a [`Complex`]: angle assignments, cone angles,
//! curvature, volume and covolume.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::hyperideal::{self, HyperLengths6, DEFAULT_QUAD_TOL};
use crate::ideal::{self, DihedralAngles6, TetLengths6};
use crate::lobachevsky::lob;
use crate::tet::{quad_of, VERTEX_SLOTS};

/// Tolerance on the per-tetrahedron angle-sum constraints.
pub const ASSIGNMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Ideal,
    Hyper,
}

/// Edge lengths indexed by edge class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector(pub Vec<f64>);

/// Cone angles indexed by edge class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeAngles(pub Vec<f64>);

/// Curvatures indexed by edge class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curvature(pub Vec<f64>);

/// Dihedral angles on a complex.
///
/// Ideal assignments have one angle per quad, indexed `3 t + q`. Hyper-ideal
/// assignments have one angle per edge slot of each tetrahedron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", content = "angles", rename_all = "lowercase")]
pub enum Assignment {
    Ideal(Vec<f64>),
    Hyper(Vec<[f64; 6]>),
}

impl Assignment {
    pub fn flavor(&self) -> Flavor {
        match self {
            Self::Ideal(_) => Flavor::Ideal,
            Self::Hyper(_) => Flavor::Hyper,
        }
    }

    pub fn num_tets(&self) -> usize {
        match self {
            Self::Ideal(q) => q.len() / 3,
            Self::Hyper(s) => s.len(),
        }
    }

    /// The six slot angles of tetrahedron `t`.
    pub fn tet_angles(&self, t: usize) -> DihedralAngles6 {
        match self {
            Self::Ideal(q) => DihedralAngles6::from_quads([q[3 * t], q[3 * t + 1], q[3 * t + 2]]),
            Self::Hyper(s) => DihedralAngles6(s[t]),
        }
    }

    /// Checks shape, nonnegativity and the per-tetrahedron angle constraints.
    pub fn validate(&self, c: &Complex) -> Result<()> {
        let (expected, got) = match self {
            Self::Ideal(q) => (c.num_quads(), q.len()),
            Self::Hyper(s) => (c.num_tets(), s.len()),
        };
        if expected != got {
            return Err(Error::Shape { expected, got });
        }
        for t in 0..c.num_tets() {
            let a = self.tet_angles(t).0;
            if a.iter().any(|&x| !x.is_finite() || x < -ASSIGNMENT_TOL) {
                return Err(Error::Domain(format!("tet {t}: angles must be finite and nonnegative, got {a:?}")));
            }
            match self {
                Self::Ideal(_) => {
                    let sum = a[0] + a[1] + a[2];
                    if (sum - PI).abs() > ASSIGNMENT_TOL {
                        return Err(Error::Domain(format!("tet {t}: quad angles sum to {sum}, not π")));
                    }
                }
                Self::Hyper(_) => {
                    for (v, slots) in VERTEX_SLOTS.iter().enumerate() {
                        let sum: f64 = slots.iter().map(|&s| a[s]).sum();
                        if sum > PI + ASSIGNMENT_TOL {
                            return Err(Error::Domain(format!("tet {t}: angles at vertex {v} sum to {sum} > π")));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Value and gradient of the covolume of a complex.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCovolume {
    pub value: f64,
    pub gradient: ConeAngles,
}

/// Dihedral angles of the metric `l`, tetrahedron by tetrahedron.
pub fn angles_of_metric(c: &Complex, l: &MetricVector, flavor: Flavor) -> Result<Assignment> {
    c.check_edges(&l.0)?;
    if l.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("edge lengths must be finite".into()));
    }
    match flavor {
        Flavor::Ideal => {
            let mut quads = Vec::with_capacity(c.num_quads());
            for t in 0..c.num_tets() {
                let a = ideal::ideal_lengths_to_angles(&TetLengths6(c.restrict(t, &l.0)));
                quads.extend_from_slice(&a.quads());
            }
            Ok(Assignment::Ideal(quads))
        }
        Flavor::Hyper => {
            if let Some(x) = l.0.iter().find(|&&x| x <= 0.0) {
                return Err(Error::Domain(format!("hyper-ideal edge lengths must be positive, got {x}")));
            }
            Ok(Assignment::Hyper(
                (0..c.num_tets())
                    .map(|t| hyperideal::hyper_angles_from_lengths(&c.restrict(t, &l.0)).0)
                    .collect(),
            ))
        }
    }
}

/// Sum of dihedral angles over all instances of each edge class.
pub fn cone_angles(c: &Complex, a: &Assignment) -> Result<ConeAngles> {
    let (expected, got) = match a {
        Assignment::Ideal(q) => (c.num_quads(), q.len()),
        Assignment::Hyper(s) => (c.num_tets(), s.len()),
    };
    if expected != got {
        return Err(Error::Shape { expected, got });
    }
    let mut k = vec![0.0; c.num_edges()];
    for (e, class) in c.edges().iter().enumerate() {
        k[e] = class.instances.iter().map(|&(t, s)| a.tet_angles(t).0[s]).sum();
    }
    Ok(ConeAngles(k))
}

/// `2π − k` on interior edges and `π − k` on boundary edges.
pub fn curvature(c: &Complex, k: &ConeAngles) -> Result<Curvature> {
    c.check_edges(&k.0)?;
    Ok(Curvature(
        k.0.iter()
            .enumerate()
            .map(|(e, &ke)| full_angle(c, e) - ke)
            .collect(),
    ))
}

/// Inverse of [`curvature`].
pub fn cone_angles_from_curvature(c: &Complex, curv: &Curvature) -> Result<ConeAngles> {
    c.check_edges(&curv.0)?;
    Ok(ConeAngles(
        curv.0
            .iter()
            .enumerate()
            .map(|(e, &ke)| full_angle(c, e) - ke)
            .collect(),
    ))
}

fn full_angle(c: &Complex, e: usize) -> f64 {
    if c.is_boundary_edge(e) {
        PI
    } else {
        2.0 * PI
    }
}

/// Volume of an angle assignment.
///
/// Hyper-ideal tetrahedra are evaluated through their associated lengths;
/// flat (type II) tetrahedra contribute 0 and type III ones are rejected.
pub fn volume(c: &Complex, a: &Assignment) -> Result<f64> {
    volume_with_tol(c, a, DEFAULT_QUAD_TOL)
}

pub fn volume_with_tol(c: &Complex, a: &Assignment, tol: f64) -> Result<f64> {
    a.validate(c)?;
    match a {
        Assignment::Ideal(q) => Ok(q.iter().map(|&x| lob(x)).sum()),
        Assignment::Hyper(_) => {
            let mut total = 0.0;
            for t in 0..c.num_tets() {
                total += hyperideal::vol_from_angles(&a.tet_angles(t), tol)?;
            }
            Ok(total)
        }
    }
}

/// Volume of the metric `l`, computed from the lengths directly.
pub fn metric_volume(c: &Complex, l: &MetricVector, flavor: Flavor, tol: f64) -> Result<f64> {
    match flavor {
        Flavor::Ideal => volume(c, &angles_of_metric(c, l, flavor)?),
        Flavor::Hyper => {
            angles_of_metric(c, l, flavor)?;
            let mut total = 0.0;
            for t in 0..c.num_tets() {
                total += hyperideal::vol_hyper(&HyperLengths6(c.restrict(t, &l.0)), tol)?;
            }
            Ok(total)
        }
    }
}

/// Covolume `Σ_σ cov(l_σ)` with gradient the cone angles of `l`.
pub fn cov_complex(c: &Complex, l: &MetricVector, flavor: Flavor) -> Result<ComplexCovolume> {
    cov_complex_with_tol(c, l, flavor, DEFAULT_QUAD_TOL)
}

pub fn cov_complex_with_tol(c: &Complex, l: &MetricVector, flavor: Flavor, tol: f64) -> Result<ComplexCovolume> {
    c.check_edges(&l.0)?;
    let mut value = 0.0;
    let mut grad = vec![0.0; c.num_edges()];
    for t in 0..c.num_tets() {
        let lt = c.restrict(t, &l.0);
        let (v, a) = match flavor {
            Flavor::Ideal => {
                let cv = ideal::cov_ideal(&TetLengths6(lt));
                (cv.value, cv.gradient)
            }
            Flavor::Hyper => (
                hyperideal::cov_hyper(&lt, tol)?,
                hyperideal::hyper_angles_from_lengths(&lt),
            ),
        };
        value += v;
        for (s, &e) in c.tet_edges(t).iter().enumerate() {
            grad[e] += a.0[s];
        }
    }
    Ok(ComplexCovolume {
        value,
        gradient: ConeAngles(grad),
    })
}

/// Cone angles of `l` without the covolume value.
pub fn cone_angles_of_metric(c: &Complex, l: &MetricVector, flavor: Flavor) -> Result<ConeAngles> {
    c.check_edges(&l.0)?;
    let mut grad = vec![0.0; c.num_edges()];
    for t in 0..c.num_tets() {
        let lt = c.restrict(t, &l.0);
        let a = match flavor {
            Flavor::Ideal => ideal::ideal_lengths_to_angles(&TetLengths6(lt)),
            Flavor::Hyper => hyperideal::hyper_angles_from_lengths(&lt),
        };
        for (s, &e) in c.tet_edges(t).iter().enumerate() {
            grad[e] += a.0[s];
        }
    }
    Ok(ConeAngles(grad))
}

/// Per-quad angles of an ideal assignment given per slot; slots of a quad
/// must agree.
pub fn ideal_assignment_from_slots(slots: &[[f64; 6]]) -> Result<Assignment> {
    let mut quads = Vec::with_capacity(3 * slots.len());
    for (t, a) in slots.iter().enumerate() {
        for q in 0..3 {
            if (a[q] - a[q + 3]).abs() > ASSIGNMENT_TOL {
                return Err(Error::Domain(format!("tet {t}: opposite slots of quad {q} disagree")));
            }
        }
        quads.extend((0..3).map(|s| a[quad_of(s)]));
    }
    Ok(Assignment::Ideal(quads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::GluingSpec;

    const REGULAR_VOLUME: f64 = 1.014_941_606_409_653_6;

    #[test]
    fn angles_of_symmetric_metrics() {
        let d = Complex::double_tet();
        let a = angles_of_metric(&d, &MetricVector(vec![0.0; 6]), Flavor::Ideal).unwrap();
        let Assignment::Ideal(q) = &a else { panic!() };
        assert!(q.iter().all(|&x| (x - PI / 3.0).abs() < 1e-15));

        let c = 2f64.acosh();
        let a = angles_of_metric(&d, &MetricVector(vec![c; 6]), Flavor::Hyper).unwrap();
        let target = (2.0f64 / 3.0).acos();
        for t in 0..2 {
            assert!(a.tet_angles(t).0.iter().all(|&x| (x - target).abs() < 1e-14));
        }
        let k = cone_angles(&d, &a).unwrap();
        assert!(k.0.iter().all(|&x| (x - 2.0 * target).abs() < 1e-13));

        assert!(angles_of_metric(&d, &MetricVector(vec![0.0; 6]), Flavor::Hyper).is_err());
    }

    #[test]
    fn fig8_cone_angles_and_curvature() {
        let f = Complex::fig8();
        let a = angles_of_metric(&f, &MetricVector(vec![0.0; 2]), Flavor::Ideal).unwrap();
        let k = cone_angles(&f, &a).unwrap();
        for x in &k.0 {
            assert!((x - 2.0 * PI).abs() < 1e-13);
        }
        let curv = curvature(&f, &k).unwrap();
        assert!(curv.0.iter().all(|x| x.abs() < 1e-13));
        assert!((volume(&f, &a).unwrap() - 2.0 * REGULAR_VOLUME).abs() < 1e-12);

        let zero = cone_angles(&f, &Assignment::Ideal(vec![0.0; 6])).unwrap();
        assert_eq!(zero.0, vec![0.0, 0.0]);
        assert_eq!(curvature(&f, &zero).unwrap().0, vec![2.0 * PI; 2]);
    }

    #[test]
    fn single_tet_boundary_curvature() {
        let c = Complex::build(&GluingSpec::single_tet()).unwrap();
        let a = Assignment::Ideal(vec![PI / 3.0; 3]);
        let k = cone_angles(&c, &a).unwrap();
        let curv = curvature(&c, &k).unwrap();
        assert!(curv.0.iter().all(|&x| (x - 2.0 * PI / 3.0).abs() < 1e-15));
        let back = cone_angles_from_curvature(&c, &curv).unwrap();
        for (x, y) in back.0.iter().zip(&k.0) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_ideal_volume_is_zero() {
        let f = Complex::fig8();
        let a = Assignment::Ideal(vec![PI, 0.0, 0.0, 0.0, PI / 2.0, PI / 2.0]);
        assert!(volume(&f, &a).unwrap().abs() < 1e-14);
    }

    #[test]
    fn fig8_covolume_at_origin() {
        let f = Complex::fig8();
        let cv = cov_complex(&f, &MetricVector(vec![0.0; 2]), Flavor::Ideal).unwrap();
        assert!((cv.value - 4.0 * REGULAR_VOLUME).abs() < 1e-12);
        for g in &cv.gradient.0 {
            assert!((g - 2.0 * PI).abs() < 1e-13);
        }
    }

    #[test]
    fn hyper_covolume_near_origin() {
        let d = Complex::double_tet();
        let cv = cov_complex(&d, &MetricVector(vec![1e-9; 6]), Flavor::Hyper).unwrap();
        let expected = 2.0 * 7.327_724_753_417_752;
        assert!((cv.value - expected).abs() < 1e-7);
    }

    #[test]
    fn hyper_volume_of_symmetric_assignment() {
        let d = Complex::double_tet();
        let c = 2f64.acosh();
        let l = MetricVector(vec![c; 6]);
        let a = angles_of_metric(&d, &l, Flavor::Hyper).unwrap();
        let from_angles = volume(&d, &a).unwrap();
        let from_lengths = metric_volume(&d, &l, Flavor::Hyper, DEFAULT_QUAD_TOL).unwrap();
        let kernel = hyperideal::vol_hyper(&HyperLengths6([c; 6]), DEFAULT_QUAD_TOL).unwrap();
        assert!((from_angles - 2.0 * kernel).abs() < 1e-9);
        assert!((from_lengths - 2.0 * kernel).abs() < 1e-12);
    }

    #[test]
    fn decomposition_matches_kernels() {
        let f = Complex::fig8();
        let l = MetricVector(vec![0.7, -0.4]);
        let cv = cov_complex(&f, &l, Flavor::Ideal).unwrap();
        let direct: f64 = (0..2).map(|t| ideal::cov_ideal(&TetLengths6(f.restrict(t, &l.0))).value).sum();
        assert_eq!(cv.value, direct);
    }

    #[test]
    fn validation_rejects_bad_assignments() {
        let f = Complex::fig8();
        assert!(Assignment::Ideal(vec![PI / 3.0; 5]).validate(&f).is_err());
        assert!(Assignment::Ideal(vec![1.0; 6]).validate(&f).is_err());
        assert!(Assignment::Hyper(vec![[1.2; 6]; 2]).validate(&f).is_err());
        assert!(Assignment::Hyper(vec![[0.5; 6]; 2]).validate(&f).is_ok());
    }

    #[test]
    fn assignment_json_round_trip() {
        let a = Assignment::Hyper(vec![[0.25; 6]]);
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.contains("\"hyper\""));
        let back: Assignment = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }
}
