//! Generalized hyper-ideal tetrahedra.
//!
//! For positive edge lengths `l` the quantity `φ_s(l)` is the cosine of the
//! dihedral angle at slot `s` whenever `l` is realized by a hyper-ideal
//! tetrahedron, i.e. when every `φ_s ∈ (−1, 1)`. Outside that region the
//! angles are extended by `a_s = arccos(clamp(φ_s, −1, 1))`, and to all of
//! `R⁶` by `a(l) = a(l⁺)`. The 1-form `μ = Σ a_s dl_s` is closed, so the
//! covolume is recovered by integrating `μ` from the origin.
//!
//! All six-vectors use the slot order of [`crate::tet`]; use
//! [`crate::tet::from_lex`] for vectors written as `(l₁₂, l₁₃, …, l₃₄)`.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal::DihedralAngles6;
use crate::lobachevsky::lob;
use crate::quadrature::{integrate_with_breaks, Integral, QuadOptions};
use crate::tet::{opposite, quad_of, slot_of, EDGE_VERTICES, VERTEX_SLOTS};

/// Slack allowed on arccos / arccosh arguments before a domain error.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Default tolerance for [`classify_lengths`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Default absolute quadrature tolerance for covolume path integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Largest accepted edge length; the Gram determinant is quartic in `cosh`.
pub const MAX_LENGTH: f64 = 150.0;

/// Samples per segment used to locate crossings of `φ_s = ±1`.
const CROSSING_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperLengths6(pub [f64; 6]);

/// Where a positive length vector sits relative to the realizable set.
/// Quad indices are 0-based: quad `q` is the slot pair `(q, q + 3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthClass {
    HyperIdeal,
    FlatBoundary(usize),
    FlatInterior(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleType {
    TypeI,
    TypeII,
    TypeIII,
}

fn check_lengths(l: &[f64; 6], strictly_positive: bool) -> Result<()> {
    for &x in l {
        if !x.is_finite() || x > MAX_LENGTH {
            return Err(Error::Domain(format!("edge length {x} out of range")));
        }
        if strictly_positive && x <= 0.0 {
            return Err(Error::Domain(format!("edge length {x} must be positive")));
        }
    }
    Ok(())
}

/// Length of the vertex edge `Δ_i ∩ H_ijk`, from the three edges of the
/// hexagonal face around vertex `i`.
pub fn vertex_edge_length(l_ij: f64, l_ik: f64, l_jk: f64) -> Result<f64> {
    if [l_ij, l_ik, l_jk].iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "vertex edge needs positive lengths, got ({l_ij}, {l_ik}, {l_jk})"
        )));
    }
    // cosh x − 1 = (cosh(l_ij − l_ik) + cosh l_jk) / (sinh l_ij sinh l_ik), which
    // stays accurate when x is small.
    let d = ((l_ij - l_ik).cosh() + l_jk.cosh()) / (l_ij.sinh() * l_ik.sinh());
    Ok((d + (d * (d + 2.0)).sqrt()).ln_1p())
}

// 2 c_ab c_ac c_bc + c_ab² + c_ac² + c_bc² − 1, for three cosh or cos values.
fn gram_term(x: f64, y: f64, z: f64) -> f64 {
    2.0 * x * y * z + x * x + y * y + z * z - 1.0
}

/// `gram_term(cos a, cos b, cos c)` in product form, which keeps its
/// relative accuracy when `a + b + c` is close to π.
fn angle_gram_term(a: f64, b: f64, c: f64) -> f64 {
    let half = 0.5 * (a + b + c);
    4.0 * half.cos() * (half - a).cos() * (half - b).cos() * (half - c).cos()
}

// Numerator and denominator of `φ_s` for each slot.
fn phi_parts(l: &[f64; 6]) -> ([f64; 6], [f64; 6]) {
    let c = l.map(f64::cosh);
    let sh = l.map(f64::sinh);
    let cc = |u: usize, v: usize| c[slot_of(u, v)];
    let mut num = [0.0; 6];
    let mut den = [0.0; 6];
    for s in 0..6 {
        let (i, j) = EDGE_VERTICES[s];
        let (k, h) = EDGE_VERTICES[opposite(s)];
        let (cij, cik, cih, cjk, cjh, ckh) = (c[s], cc(i, k), cc(i, h), cc(j, k), cc(j, h), c[opposite(s)]);
        num[s] = cik * cih + cjk * cjh + cij * cik * cjh + cij * cih * cjk - sh[s] * sh[s] * ckh;
        den[s] = gram_term(cij, cik, cjk).sqrt() * gram_term(cij, cih, cjh).sqrt();
    }
    (num, den)
}

/// `φ` on `R⁶_{≥0}` without validation.
pub(crate) fn phi_raw(l: &[f64; 6]) -> [f64; 6] {
    let (num, den) = phi_parts(l);
    std::array::from_fn(|s| num[s] / den[s])
}

/// Determinant of the Gram matrix with unit diagonal and `−cosh l_ij` off it.
fn gram_det(l: &[f64; 6]) -> f64 {
    let mut g = Matrix4::identity();
    for (s, &(i, j)) in EDGE_VERTICES.iter().enumerate() {
        let c = -l[s].cosh();
        g[(i, j)] = c;
        g[(j, i)] = c;
    }
    g.determinant()
}

/// Closed-form `φ_s` for each slot. Defined for `l ≥ 0`; `φ_s = 1` when `l_s = 0`.
pub fn phi(l: &HyperLengths6) -> Result<[f64; 6]> {
    if l.0.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain(format!("φ needs non-negative lengths, got {:?}", l.0)));
    }
    check_lengths(&l.0, false)?;
    Ok(phi_raw(&l.0))
}

/// `φ` at slot `s` computed from the vertex triangle at `vertex`, which must
/// be an endpoint of the edge at `s`. Both endpoints give the same value.
pub fn phi_from_vertex(l: &HyperLengths6, s: usize, vertex: usize) -> Result<f64> {
    check_lengths(&l.0, true)?;
    let (i, j) = EDGE_VERTICES[s];
    let other = if vertex == i {
        j
    } else if vertex == j {
        i
    } else {
        return Err(Error::Domain(format!("vertex {vertex} is not an endpoint of slot {s}")));
    };
    let (k, h) = EDGE_VERTICES[opposite(s)];
    let len = |u: usize, v: usize| l.0[slot_of(u, v)];
    // Vertex triangle at `vertex` has sides x_{other,k}, x_{other,h}, x_{kh};
    // the corner on the edge (vertex, other) is opposite x_{kh}.
    let cosh_x = |a: usize, b: usize| {
        (len(vertex, a).cosh() * len(vertex, b).cosh() + len(a, b).cosh())
            / (len(vertex, a).sinh() * len(vertex, b).sinh())
    };
    let c1 = cosh_x(other, k);
    let c2 = cosh_x(other, h);
    let c3 = cosh_x(k, h);
    Ok((c1 * c2 - c3) / ((c1 * c1 - 1.0).sqrt() * (c2 * c2 - 1.0).sqrt()))
}

/// Classifies a positive length vector as realizable, on the frontier of a
/// flat region, or inside one. The answer depends on `tol`, which is the
/// band on `|φ + 1|` treated as the frontier.
pub fn classify_lengths(l: &HyperLengths6, tol: f64) -> Result<LengthClass> {
    check_lengths(&l.0, true)?;
    let p = phi_raw(&l.0);
    let flagged: Vec<usize> = (0..3)
        .filter(|&q| p[q].min(p[q + 3]) <= -1.0 + tol)
        .collect();
    let argmin = (0..6).min_by(|&a, &b| p[a].total_cmp(&p[b])).expect("six slots");
    match flagged.as_slice() {
        [] => {
            if p.iter().any(|&x| x >= 1.0 - tol) {
                Ok(LengthClass::FlatBoundary(quad_of(argmin)))
            } else {
                Ok(LengthClass::HyperIdeal)
            }
        }
        [q] => {
            let low = p[*q].min(p[*q + 3]);
            if low < -1.0 - tol {
                Ok(LengthClass::FlatInterior(*q))
            } else {
                Ok(LengthClass::FlatBoundary(*q))
            }
        }
        _ => Err(Error::Numerical(format!(
            "two opposite pairs with φ ≤ −1 (quads {flagged:?}, φ = {p:?})"
        ))),
    }
}

/// Extended dihedral angles, defined on all of `R⁶`.
///
/// Evaluated as `atan2(√(−det G) sinh l_s, N_s)`, where `N_s / D_s = φ_s`
/// and `√(−det G) sinh l_s / D_s` is the sine of the angle. This equals
/// `arccos(clamp(φ_s))` but keeps full accuracy when `φ_s` is near ±1, in
/// particular an angle is exactly 0 at a zero-length edge. Where
/// `det G ≥ 0` every `|φ_s| ≥ 1` and the angles are 0 or π.
pub fn hyper_angles_from_lengths(l: &[f64; 6]) -> DihedralAngles6 {
    let plus = l.map(|x| x.max(0.0));
    let (num, _) = phi_parts(&plus);
    let root = (-gram_det(&plus)).max(0.0).sqrt();
    DihedralAngles6(std::array::from_fn(|s| (root * plus[s].sinh()).atan2(num[s])))
}

fn vertex_sums(a: &[f64; 6]) -> [f64; 4] {
    VERTEX_SLOTS.map(|slots| slots.iter().map(|&s| a[s]).sum())
}

/// Type of a generalized dihedral angle vector in the closed polytope.
pub fn classify_angles(a: &DihedralAngles6) -> Result<AngleType> {
    let v = &a.0;
    if v.iter().any(|&x| !x.is_finite() || x < -DOMAIN_SLACK) {
        return Err(Error::Domain(format!("angles must be non-negative, got {v:?}")));
    }
    let sums = vertex_sums(v);
    if sums.iter().any(|&x| x > PI + DOMAIN_SLACK) {
        return Err(Error::Domain(format!("vertex sums {sums:?} exceed π")));
    }
    if sums.iter().all(|&x| x < PI) {
        return Ok(AngleType::TypeI);
    }
    for q in 0..3 {
        let flat = (0..6).all(|s| {
            let target = if quad_of(s) == q { PI } else { 0.0 };
            (v[s] - target).abs() <= DOMAIN_SLACK
        });
        if flat {
            return Ok(AngleType::TypeII);
        }
    }
    Ok(AngleType::TypeIII)
}

/// `ψ_s(a)`, the hyperbolic cosine of the edge lengths of the hyper-ideal
/// tetrahedron with dihedral angles `a`. Requires a type I vector.
pub fn psi(a: &DihedralAngles6) -> Result<[f64; 6]> {
    match classify_angles(a)? {
        AngleType::TypeI => {}
        t => return Err(Error::Domain(format!("ψ needs type I angles, got {t:?}"))),
    }
    let c = a.0.map(f64::cos);
    let sn = a.0.map(f64::sin);
    let cc = |u: usize, v: usize| c[slot_of(u, v)];
    let mut out = [0.0; 6];
    for (s, slot) in out.iter_mut().enumerate() {
        let (i, j) = EDGE_VERTICES[s];
        let (k, h) = EDGE_VERTICES[opposite(s)];
        let (cij, cik, cih, cjk, cjh, ckh) = (c[s], cc(i, k), cc(i, h), cc(j, k), cc(j, h), c[opposite(s)]);
        let num = sn[s] * sn[s] * ckh + cik * cjk + cih * cjh + cij * cik * cjh + cij * cih * cjk;
        let aa = |u: usize, v: usize| a.0[slot_of(u, v)];
        let den = angle_gram_term(a.0[s], aa(i, k), aa(i, h)).sqrt() * angle_gram_term(a.0[s], aa(j, k), aa(j, h)).sqrt();
        *slot = num / den;
    }
    Ok(out)
}

/// Edge lengths `arccosh ψ(a)` of a type I angle vector.
pub fn lengths_from_angles(a: &DihedralAngles6) -> Result<[f64; 6]> {
    let p = psi(a)?;
    let mut out = [0.0; 6];
    for (o, &x) in out.iter_mut().zip(p.iter()) {
        if !(x >= 1.0 - DOMAIN_SLACK) {
            return Err(Error::Domain(format!("ψ = {x} below 1")));
        }
        *o = x.max(1.0).acosh();
    }
    Ok(out)
}

/// Parameters `t ∈ (0, 1)` where the segment `from → to` crosses a
/// coordinate hyperplane or a level set `φ_s = ±1`. Sorted, with 0 and 1.
pub(crate) fn segment_breaks(from: &[f64; 6], to: &[f64; 6]) -> Vec<f64> {
    let point = |t: f64| -> [f64; 6] {
        let mut p = [0.0; 6];
        for s in 0..6 {
            p[s] = (from[s] + t * (to[s] - from[s])).max(0.0);
        }
        p
    };
    let mut breaks = vec![0.0, 1.0];
    for s in 0..6 {
        let d = to[s] - from[s];
        if d != 0.0 {
            let t = -from[s] / d;
            if t > 0.0 && t < 1.0 {
                breaks.push(t);
            }
        }
    }
    let level = |t: f64, s: usize, sign: f64| phi_raw(&point(t))[s] - sign;
    let samples: Vec<[f64; 6]> = (0..=CROSSING_SAMPLES)
        .map(|n| phi_raw(&point(n as f64 / CROSSING_SAMPLES as f64)))
        .collect();
    for n in 0..CROSSING_SAMPLES {
        let (t0, t1) = (n as f64 / CROSSING_SAMPLES as f64, (n + 1) as f64 / CROSSING_SAMPLES as f64);
        for s in 0..6 {
            // A slot clamped to zero length has angle 0 identically.
            if from[s] <= 0.0 && to[s] <= 0.0 {
                continue;
            }
            for sign in [-1.0, 1.0] {
                let (g0, g1) = (samples[n][s] - sign, samples[n + 1][s] - sign);
                if g0 * g1 < 0.0 {
                    let (mut lo, mut hi, mut glo) = (t0, t1, g0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let gm = level(mid, s, sign);
                        if gm * glo <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            glo = gm;
                        }
                    }
                    breaks.push(0.5 * (lo + hi));
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    breaks
}

/// `∫ μ` along the straight segment from `from` to `to`.
pub fn cov_segment(from: &[f64; 6], to: &[f64; 6], tol: f64) -> Result<Integral> {
    check_lengths(from, false)?;
    check_lengths(to, false)?;
    let d: [f64; 6] = std::array::from_fn(|s| to[s] - from[s]);
    if d.iter().all(|&x| x == 0.0) {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let breaks = segment_breaks(from, to);
    let integrand = |t: f64| {
        let p: [f64; 6] = std::array::from_fn(|s| from[s] + t * d[s]);
        let a = hyper_angles_from_lengths(&p);
        (0..6).map(|s| a.0[s] * d[s]).sum::<f64>()
    };
    integrate_with_breaks(integrand, &breaks, &QuadOptions::with_abs_tol(tol))
}

/// Covolume at the origin, `2 vol(0) = 16 Λ(π/4)`.
pub fn cov_at_origin() -> f64 {
    16.0 * lob(PI / 4.0)
}

/// The C¹ convex covolume on `R⁶`: `16 Λ(π/4) + ∫₀ˡ μ`.
pub fn cov_hyper(l: &[f64; 6], tol: f64) -> Result<f64> {
    let path = cov_segment(&[0.0; 6], l, tol)?;
    Ok(cov_at_origin() + path.value)
}

// Volume from covolume; allows zero lengths.
fn vol_nonnegative(l: &[f64; 6], tol: f64) -> Result<f64> {
    let cov = cov_hyper(l, tol)?;
    let a = hyper_angles_from_lengths(l);
    let pairing: f64 = (0..6).map(|s| a.0[s] * l[s]).sum();
    Ok(0.5 * (cov - pairing))
}

/// Volume `(cov(l) − Σ a_s l_s) / 2`: the hyperbolic volume on the
/// realizable set, zero on the flat regions.
pub fn vol_hyper(l: &HyperLengths6, tol: f64) -> Result<f64> {
    check_lengths(&l.0, true)?;
    vol_nonnegative(&l.0, tol)
}

/// Maximum entrywise difference between `a` and the angles of its own
/// associated lengths.
fn round_trip_defect(a: &DihedralAngles6) -> Result<([f64; 6], f64)> {
    let l = lengths_from_angles(a)?;
    let back = hyper_angles_from_lengths(&l);
    let defect = (0..6).map(|s| (back.0[s] - a.0[s]).abs()).fold(0.0, f64::max);
    Ok((l, defect))
}

const ROUND_TRIP_TOL: f64 = 1e-8;

/// Volume of a generalized dihedral angle vector of type I or II.
///
/// Type I vectors go through their associated lengths; when the round trip
/// does not reproduce the angles the volume is extrapolated from a short
/// inward segment. Type II vectors are flat and have volume 0.
pub fn vol_from_angles(a: &DihedralAngles6, tol: f64) -> Result<f64> {
    match classify_angles(a)? {
        AngleType::TypeII => return Ok(0.0),
        AngleType::TypeIII => {
            return Err(Error::Unsupported(
                "volume at type III angle vectors is not evaluated".into(),
            ))
        }
        AngleType::TypeI => {}
    }
    if let Ok((l, defect)) = round_trip_defect(a) {
        if defect <= ROUND_TRIP_TOL {
            return vol_nonnegative(&l, tol);
        }
    }
    // Inward extrapolation toward an interior point of the polytope.
    let center = [PI / 8.0; 6];
    let h = 1e-3;
    let mut values = [0.0; 3];
    for (n, v) in values.iter_mut().enumerate() {
        let t = h * (n + 1) as f64;
        let at = DihedralAngles6(std::array::from_fn(|s| a.0[s] + t * (center[s] - a.0[s])));
        let (l, defect) = round_trip_defect(&at)?;
        if defect > ROUND_TRIP_TOL {
            return Err(Error::Numerical(format!(
                "angle/length round trip failed near {:?} (defect {defect:e})",
                a.0
            )));
        }
        *v = vol_nonnegative(&l, tol)?;
    }
    Ok(3.0 * values[0] - 3.0 * values[1] + values[2])
}
