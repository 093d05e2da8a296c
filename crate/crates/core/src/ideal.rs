//! Generalized decorated ideal tetrahedra.
//!
//! A length vector `l ∈ R⁶` (slot convention of [`crate::tet`]) determines a
//! generalized Euclidean triangle with sides `e^{(l_s + l_{s+3})/2}`. Its inner
//! angles are the dihedral angles of the three quads; when the triangle
//! inequality fails the angles degenerate to `(π, 0, 0)`. The covolume is
//! `2 φ*` of the half sums and is C¹ and convex on all of `R⁶`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lobachevsky::lob;
use crate::tet::quad_of;

/// Six signed edge lengths; slots `s` and `s + 3` are opposite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TetLengths6(pub [f64; 6]);

/// Six dihedral angles in slot order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DihedralAngles6(pub [f64; 6]);

impl DihedralAngles6 {
    /// Builds the six-slot vector from three quad angles.
    pub fn from_quads(q: [f64; 3]) -> Self {
        Self([q[0], q[1], q[2], q[0], q[1], q[2]])
    }

    pub fn quads(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }
}

/// Positive Euclidean side lengths; `x[i]` is opposite the angle `a[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSides(pub [f64; 3]);

/// Value and gradient of the Fenchel dual of minus the ideal volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiStar {
    pub value: f64,
    pub gradient: [f64; 3],
}

/// Covolume of one tetrahedron and its gradient (the dihedral angles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covolume {
    pub value: f64,
    pub gradient: DihedralAngles6,
}

/// Inner angles of a generalized Euclidean triangle.
pub fn triangle_angles(x: TriangleSides) -> Result<[f64; 3]> {
    if x.0.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain(format!("triangle sides must be positive, got {:?}", x.0)));
    }
    Ok(angles_from_log_sides([x.0[0].ln(), x.0[1].ln(), x.0[2].ln()]))
}

/// Inner angles of the generalized triangle with sides `e^{y_i}`.
///
/// Sides are rescaled so the largest is 1 before exponentiating, so the
/// result is defined for every finite `y`.
pub fn angles_from_log_sides(y: [f64; 3]) -> [f64; 3] {
    // order[0] indexes the largest side.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| y[j].total_cmp(&y[i]));
    let top = y[order[0]];
    let a = 1.0;
    let b = (y[order[1]] - top).exp();
    let c = (y[order[2]] - top).exp();

    let mut angles = [0.0; 3];
    // Kahan's ordering-aware factors, valid for a ≥ b ≥ c.
    let bca = c - (a - b);
    if bca <= 0.0 {
        angles[order[0]] = PI;
        return angles;
    }
    let abc = a + (b - c);
    let acb = c + (a - b);
    let sum = a + (b + c);
    let big_b = 2.0 * (bca * abc).sqrt().atan2((sum * acb).sqrt());
    let big_c = 2.0 * (bca * acb).sqrt().atan2((sum * abc).sqrt());
    angles[order[1]] = big_b;
    angles[order[2]] = big_c;
    angles[order[0]] = PI - big_b - big_c;
    angles
}

/// Penner's horocyclic angle `e^{(l_jk − l_ij − l_ik)/2}` at the vertex
/// between the edges `ij` and `ik` of a decorated ideal triangle.
pub fn penner_angle(l_jk: f64, l_ij: f64, l_ik: f64) -> f64 {
    (0.5 * (l_jk - l_ij - l_ik)).exp()
}

fn half_sums(l: &TetLengths6) -> [f64; 3] {
    let v = &l.0;
    [0.5 * (v[0] + v[3]), 0.5 * (v[1] + v[4]), 0.5 * (v[2] + v[5])]
}

/// Dihedral angles of a generalized decorated tetrahedron.
pub fn ideal_lengths_to_angles(l: &TetLengths6) -> DihedralAngles6 {
    DihedralAngles6::from_quads(angles_from_log_sides(half_sums(l)))
}

/// Whether `l` is the length vector of a genuine decorated ideal tetrahedron.
pub fn is_decorated_ideal(l: &TetLengths6) -> bool {
    let y = half_sums(l);
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x = y.map(|v| (v - top).exp());
    x[0] + x[1] > x[2] && x[0] + x[2] > x[1] && x[1] + x[2] > x[0]
}

/// Volume `Λ(a₁) + Λ(a₂) + Λ(a₃)` over the three quads.
pub fn ideal_volume(a: &DihedralAngles6) -> f64 {
    a.quads().iter().map(|&x| lob(x)).sum()
}

/// `φ*(y) = Σ Λ(a_i) + a_i y_i`, with gradient `a(y)`.
///
/// On the degenerate region the closed form `π y_i` is returned.
pub fn phi_star(y: [f64; 3]) -> PhiStar {
    let a = angles_from_log_sides(y);
    if let Some(i) = a.iter().position(|&x| x == PI) {
        return PhiStar {
            value: PI * y[i],
            gradient: a,
        };
    }
    let value = (0..3).map(|i| lob(a[i]) + a[i] * y[i]).sum();
    PhiStar { value, gradient: a }
}

/// Covolume `2 φ*((l₁+l₄)/2, (l₂+l₅)/2, (l₃+l₆)/2)` and its gradient.
pub fn cov_ideal(l: &TetLengths6) -> Covolume {
    let ps = phi_star(half_sums(l));
    let mut grad = [0.0; 6];
    for (s, g) in grad.iter_mut().enumerate() {
        *g = ps.gradient[quad_of(s)];
    }
    Covolume {
        value: 2.0 * ps.value,
        gradient: DihedralAngles6(grad),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;
    const REGULAR_VOLUME: f64 = 1.014_941_606_409_653_6;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn equilateral() {
        let a = triangle_angles(TriangleSides([1.0, 1.0, 1.0])).unwrap();
        for x in a {
            assert!(close(x, PI / 3.0, 1e-15));
        }
    }

    #[test]
    fn degenerate_triangle() {
        assert_eq!(triangle_angles(TriangleSides([3.0, 1.0, 1.0])).unwrap(), [PI, 0.0, 0.0]);
        // Exact tie maps to the closed extension.
        assert_eq!(triangle_angles(TriangleSides([1.0, 2.0, 1.0])).unwrap(), [0.0, PI, 0.0]);
    }

    #[test]
    fn right_triangle() {
        let a = triangle_angles(TriangleSides([3.0, 4.0, 5.0])).unwrap();
        assert!(close(a[0], (0.6f64).asin(), 1e-15));
        assert!(close(a[1], (0.8f64).asin(), 1e-15));
        assert!(close(a[2], PI / 2.0, 1e-15));
    }

    #[test]
    fn non_positive_side_rejected() {
        assert!(triangle_angles(TriangleSides([0.0, 1.0, 1.0])).is_err());
        assert!(triangle_angles(TriangleSides([-1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn penner_examples() {
        assert_eq!(penner_angle(0.0, 0.0, 0.0), 1.0);
        assert_eq!(penner_angle(2.0, 1.0, 1.0), 1.0);
        assert!(close(penner_angle(0.0, 1.0, 1.0), (-1.0f64).exp(), 1e-16));
    }

    #[test]
    fn lengths_to_angles_examples() {
        let a = ideal_lengths_to_angles(&TetLengths6([0.0; 6]));
        assert!(a.0.iter().all(|&x| close(x, PI / 3.0, 1e-15)));

        let flat = ideal_lengths_to_angles(&TetLengths6([2.0 * LN2, 0.0, 0.0, 2.0 * LN2, 0.0, 0.0]));
        assert_eq!(flat.0, [PI, 0.0, 0.0, PI, 0.0, 0.0]);

        let tie = ideal_lengths_to_angles(&TetLengths6([0.0, 0.0, 0.0, 2.0 * 3f64.ln(), 0.0, 0.0]));
        assert_eq!(tie.0, [PI, 0.0, 0.0, PI, 0.0, 0.0]);
    }

    #[test]
    fn huge_lengths_do_not_overflow() {
        let a = ideal_lengths_to_angles(&TetLengths6([2000.0, 1999.0, 1999.5, 2000.0, 2001.0, 1998.0]));
        assert!(a.0.iter().all(|x| x.is_finite()));
        assert!(close(a.quads().iter().sum::<f64>(), PI, 1e-12));
    }

    #[test]
    fn decorated_ideal_predicate() {
        assert!(is_decorated_ideal(&TetLengths6([0.0; 6])));
        assert!(!is_decorated_ideal(&TetLengths6([2.0 * LN2, 0.0, 0.0, 2.0 * LN2, 0.0, 0.0])));
        // Sides (2, 1, 1) sit exactly on the degenerate boundary.
        assert!(!is_decorated_ideal(&TetLengths6([LN2, 0.0, 0.0, LN2, 0.0, 0.0])));
        let l = 1.5f64.ln();
        assert!(is_decorated_ideal(&TetLengths6([l, 0.0, 0.0, l, 0.0, 0.0])));
    }

    #[test]
    fn volume_examples() {
        assert!(close(ideal_volume(&DihedralAngles6([PI / 3.0; 6])), REGULAR_VOLUME, 1e-14));
        assert!(ideal_volume(&DihedralAngles6([PI, 0.0, 0.0, PI, 0.0, 0.0])).abs() < 1e-14);
        let catalan = 0.915_965_594_177_219;
        let a = DihedralAngles6::from_quads([PI / 2.0, PI / 4.0, PI / 4.0]);
        assert!(close(ideal_volume(&a), catalan, 1e-14));
    }

    #[test]
    fn phi_star_examples() {
        let p = phi_star([0.0; 3]);
        assert!(close(p.value, REGULAR_VOLUME, 1e-14));
        assert!(p.gradient.iter().all(|&x| close(x, PI / 3.0, 1e-15)));

        let q = phi_star([2.0, 0.0, 0.0]);
        assert_eq!(q.value, 2.0 * PI);
        assert_eq!(q.gradient, [PI, 0.0, 0.0]);

        for k in [-3.0, 0.5, 7.0] {
            let r = phi_star([0.3 + k, -0.2 + k, 0.1 + k]);
            let s = phi_star([0.3, -0.2, 0.1]);
            assert!(close(r.value - s.value, k * PI, 1e-12));
        }
    }

    #[test]
    fn cov_examples() {
        let c = cov_ideal(&TetLengths6([0.0; 6]));
        assert!(close(c.value, 2.029_883_212_819_307_3, 1e-14));
        let d = cov_ideal(&TetLengths6([2.0 * LN2, 0.0, 0.0, 2.0 * LN2, 0.0, 0.0]));
        assert!(close(d.value, 4.0 * PI * LN2, 1e-14));
        assert_eq!(d.gradient.0, [PI, 0.0, 0.0, PI, 0.0, 0.0]);
    }

    #[test]
    fn penner_law_matches_cosine_formula() {
        // The horocyclic triangle at vertex 0 of a decorated tetrahedron has
        // sides penner_angle(l_jk, l_0j, l_0k) for the three faces at vertex 0.
        // Its shape must match the triangle of the dihedral angles.
        let l = [0.3, -0.4, 1.1, 0.2, 0.7, -0.1];
        let (l01, l02, l03, l23, l13, l12) = (l[0], l[1], l[2], l[3], l[4], l[5]);
        let h1 = penner_angle(l23, l02, l03); // opposite the corner on edge 01
        let h2 = penner_angle(l13, l01, l03); // edge 02
        let h3 = penner_angle(l12, l01, l02); // edge 03
        let from_horo = triangle_angles(TriangleSides([h1, h2, h3])).unwrap();
        let dihedral = ideal_lengths_to_angles(&TetLengths6(l));
        for i in 0..3 {
            assert!(close(from_horo[i], dihedral.0[i], 1e-14));
        }
    }
}
