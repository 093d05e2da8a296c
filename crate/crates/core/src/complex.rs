//! Triangulated compact pseudo 3-manifolds.
//!
//! A [`GluingSpec`] lists face pairings between tetrahedra. [`Complex::build`]
//! identifies edge and vertex instances under the pairings with union-find and
//! assigns stable class IDs in order of first appearance, scanning
//! `(tet, slot)` instances in order. Edge classes keep every instance, so a
//! class meeting one tetrahedron in several slots is counted with
//! multiplicity.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricVector;
use crate::tet::{face_vertices, quad_of, slot_of, EDGE_VERTICES};

pub const DOUBLE_TET_JSON: &str = include_str!("../fixtures/double_tet.json");
pub const FIG8_JSON: &str = include_str!("../fixtures/fig8.json");

/// One face pairing. `perm[n]` is the image in `to_tet` of the `n`-th vertex
/// (in increasing order) of face `face` of `tet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gluing {
    pub tet: usize,
    pub face: usize,
    pub to_tet: usize,
    pub to_face: usize,
    pub perm: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingSpec {
    pub tets: usize,
    pub gluings: Vec<Gluing>,
}

impl GluingSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Gluing(format!("malformed triangulation JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gluing spec serializes")
    }

    /// A single tetrahedron with no gluings.
    pub fn single_tet() -> Self {
        Self {
            tets: 1,
            gluings: Vec::new(),
        }
    }
}

/// Per-vertex reals acting on edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeVector(pub Vec<f64>);

/// An edge class with all of its `(tet, slot)` instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeClass {
    pub instances: Vec<(usize, usize)>,
    /// Vertex classes of the two endpoints; equal for a loop.
    pub endpoints: (usize, usize),
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub struct Complex {
    num_tets: usize,
    edge_of: Vec<[usize; 6]>,
    vertex_of: Vec<[usize; 4]>,
    edges: Vec<EdgeClass>,
    num_vertices: usize,
    glued: Vec<[bool; 4]>,
    gauge_basis: OnceLock<DMatrix<f64>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller root so the partition is independent of order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Relabels union-find roots as 0, 1, ... in order of first appearance.
fn label_classes(uf: &mut UnionFind, n: usize) -> (Vec<usize>, usize) {
    let mut id_of_root = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut next = 0;
    for (x, label) in labels.iter_mut().enumerate() {
        let r = uf.find(x);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = next;
            next += 1;
        }
        *label = id_of_root[r];
    }
    (labels, next)
}

/// Per tetrahedron and face: the glued tetrahedron and the vertex map.
type FaceMaps = Vec<[Option<(usize, [usize; 4])>; 4]>;

fn validate(spec: &GluingSpec) -> Result<FaceMaps> {
    if spec.tets == 0 {
        return Err(Error::Gluing("triangulation has no tetrahedra".into()));
    }
    let mut maps: FaceMaps = vec![[None; 4]; spec.tets];
    for (n, g) in spec.gluings.iter().enumerate() {
        if g.tet >= spec.tets || g.to_tet >= spec.tets {
            return Err(Error::Gluing(format!("gluing {n}: tetrahedron index out of range")));
        }
        if g.face > 3 || g.to_face > 3 {
            return Err(Error::Gluing(format!("gluing {n}: face index out of range")));
        }
        if g.tet == g.to_tet && g.face == g.to_face {
            return Err(Error::Gluing(format!("gluing {n}: face glued to itself")));
        }
        let mut seen = [false; 4];
        for &v in &g.perm {
            if v > 3 || v == g.to_face || seen[v] {
                return Err(Error::Gluing(format!(
                    "gluing {n}: perm {:?} is not a bijection onto face {} of tet {}",
                    g.perm, g.to_face, g.to_tet
                )));
            }
            seen[v] = true;
        }
        let mut forward = [0usize; 4];
        forward[g.face] = g.to_face;
        for (k, &v) in face_vertices(g.face).iter().enumerate() {
            forward[v] = g.perm[k];
        }
        let mut backward = [0usize; 4];
        for v in 0..4 {
            backward[forward[v]] = v;
        }
        for (t, f, map, other) in [(g.tet, g.face, forward, g.to_tet), (g.to_tet, g.to_face, backward, g.tet)] {
            if maps[t][f].is_some() {
                return Err(Error::Gluing(format!("gluing {n}: face {f} of tet {t} glued twice")));
            }
            maps[t][f] = Some((other, map));
        }
    }
    Ok(maps)
}

impl Complex {
    pub fn build(spec: &GluingSpec) -> Result<Self> {
        let maps = validate(spec)?;
        let nt = spec.tets;
        let mut edge_uf = UnionFind::new(6 * nt);
        let mut vert_uf = UnionFind::new(4 * nt);
        for (t, faces) in maps.iter().enumerate() {
            for (f, entry) in faces.iter().enumerate() {
                let Some((other, map)) = entry else { continue };
                let fv = face_vertices(f);
                for &v in &fv {
                    vert_uf.union(4 * t + v, 4 * other + map[v]);
                }
                for (a, b) in [(fv[0], fv[1]), (fv[0], fv[2]), (fv[1], fv[2])] {
                    edge_uf.union(6 * t + slot_of(a, b), 6 * other + slot_of(map[a], map[b]));
                }
            }
        }
        let (edge_labels, num_edges) = label_classes(&mut edge_uf, 6 * nt);
        let (vert_labels, num_vertices) = label_classes(&mut vert_uf, 4 * nt);

        let edge_of: Vec<[usize; 6]> = (0..nt).map(|t| std::array::from_fn(|s| edge_labels[6 * t + s])).collect();
        let vertex_of: Vec<[usize; 4]> = (0..nt).map(|t| std::array::from_fn(|v| vert_labels[4 * t + v])).collect();
        let glued: Vec<[bool; 4]> = maps.iter().map(|m| m.map(|e| e.is_some())).collect();

        let mut edges: Vec<EdgeClass> = (0..num_edges)
            .map(|_| EdgeClass {
                instances: Vec::new(),
                endpoints: (0, 0),
                boundary: false,
            })
            .collect();
        for t in 0..nt {
            for s in 0..6 {
                let e = &mut edges[edge_of[t][s]];
                let (u, v) = EDGE_VERTICES[s];
                if e.instances.is_empty() {
                    let (a, b) = (vertex_of[t][u], vertex_of[t][v]);
                    e.endpoints = (a.min(b), a.max(b));
                }
                e.instances.push((t, s));
                // The edge lies in the two faces opposite its non-endpoints.
                if (0..4).any(|f| f != u && f != v && !glued[t][f]) {
                    e.boundary = true;
                }
            }
        }

        Ok(Self {
            num_tets: nt,
            edge_of,
            vertex_of,
            edges,
            num_vertices,
            glued,
            gauge_basis: OnceLock::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::build(&GluingSpec::from_json(text)?)
    }

    /// Two tetrahedra glued along all four faces by the identity.
    pub fn double_tet() -> Self {
        Self::from_json(DOUBLE_TET_JSON).expect("bundled fixture")
    }

    /// Two-tetrahedron triangulation of the figure-eight knot complement.
    pub fn fig8() -> Self {
        Self::from_json(FIG8_JSON).expect("bundled fixture")
    }

    pub fn num_tets(&self) -> usize {
        self.num_tets
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_quads(&self) -> usize {
        3 * self.num_tets
    }

    pub fn is_closed(&self) -> bool {
        self.glued.iter().all(|g| g.iter().all(|&x| x))
    }

    pub fn edges(&self) -> &[EdgeClass] {
        &self.edges
    }

    /// Edge class of slot `s` of tetrahedron `t`.
    pub fn edge(&self, t: usize, s: usize) -> usize {
        self.edge_of[t][s]
    }

    /// Edge classes of the six slots of tetrahedron `t`.
    pub fn tet_edges(&self, t: usize) -> [usize; 6] {
        self.edge_of[t]
    }

    pub fn vertex(&self, t: usize, v: usize) -> usize {
        self.vertex_of[t][v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].boundary
    }

    /// Quad ID `3 t + q` of quad `q` in tetrahedron `t`.
    pub fn quad_id(t: usize, q: usize) -> usize {
        3 * t + q
    }

    /// Number of instances of edge class `e` among the two edges of quad `quad`.
    pub fn quad_edge_multiplicity(&self, quad: usize, e: usize) -> usize {
        let (t, q) = (quad / 3, quad % 3);
        (0..6)
            .filter(|&s| quad_of(s) == q && self.edge_of[t][s] == e)
            .count()
    }

    /// Restricts an edge-class vector to the six slots of tetrahedron `t`.
    pub fn restrict(&self, t: usize, x: &[f64]) -> [f64; 6] {
        std::array::from_fn(|s| x[self.edge_of[t][s]])
    }

    /// The linear map `R^V → R^E`: entry `(e, v)` counts endpoints of `e` in class `v`.
    pub fn gauge_matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.num_edges(), self.num_vertices);
        for (e, class) in self.edges.iter().enumerate() {
            b[(e, class.endpoints.0)] += 1.0;
            b[(e, class.endpoints.1)] += 1.0;
        }
        b
    }

    /// `(w + x)(vv′) = w(v) + w(v′) + x(vv′)`.
    pub fn gauge_apply(&self, w: &GaugeVector, x: &MetricVector) -> Result<MetricVector> {
        if w.0.len() != self.num_vertices {
            return Err(Error::Shape {
                expected: self.num_vertices,
                got: w.0.len(),
            });
        }
        self.check_edges(&x.0)?;
        Ok(MetricVector(
            self.edges
                .iter()
                .zip(&x.0)
                .map(|(class, &xe)| xe + w.0[class.endpoints.0] + w.0[class.endpoints.1])
                .collect(),
        ))
    }

    /// Orthonormal basis of the column space of the gauge matrix.
    pub fn gauge_basis(&self) -> &DMatrix<f64> {
        self.gauge_basis.get_or_init(|| {
            let b = self.gauge_matrix();
            let svd = b.clone().svd(true, false);
            let u = svd.u.expect("left singular vectors");
            let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > 1e-10 * top.max(1.0))
                .collect();
            DMatrix::from_fn(b.nrows(), keep.len(), |r, c| u[(r, keep[c])])
        })
    }

    /// Rank of the gauge matrix.
    pub fn gauge_rank(&self) -> usize {
        self.gauge_basis().ncols()
    }

    /// Removes the gauge component: returns `x − B w*` with `w*` the least
    /// squares fit, i.e. the minimum-norm representative of `x` modulo gauge.
    pub fn gauge_project(&self, x: &MetricVector) -> Result<MetricVector> {
        self.check_edges(&x.0)?;
        Ok(MetricVector(self.project_slice(&x.0)))
    }

    pub(crate) fn project_slice(&self, x: &[f64]) -> Vec<f64> {
        let q = self.gauge_basis();
        let v = DVector::from_column_slice(x);
        let coeffs = q.transpose() * &v;
        let out = v - q * coeffs;
        out.iter().copied().collect()
    }

    /// Checks that `x` has one entry per edge class.
    pub fn check_edges(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_edges() {
            return Err(Error::Shape {
                expected: self.num_edges(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tet() {
        let c = Complex::build(&GluingSpec::single_tet()).unwrap();
        assert_eq!((c.num_edges(), c.num_vertices()), (6, 4));
        assert!(!c.is_closed());
        assert!(c.edges().iter().all(|e| e.boundary));
        let b = c.gauge_matrix();
        for e in 0..6 {
            let (u, v) = EDGE_VERTICES[e];
            for w in 0..4 {
                let expected = if w == u || w == v { 1.0 } else { 0.0 };
                assert_eq!(b[(e, w)], expected);
            }
        }
    }

    #[test]
    fn double_tet() {
        let c = Complex::double_tet();
        assert_eq!((c.num_edges(), c.num_vertices()), (6, 4));
        assert!(c.is_closed());
        assert!(c.edges().iter().all(|e| e.instances.len() == 2 && !e.boundary));
        assert_eq!(c.gauge_rank(), 4);
    }

    #[test]
    fn fig8() {
        let c = Complex::fig8();
        assert_eq!((c.num_edges(), c.num_vertices()), (2, 1));
        assert!(c.is_closed());
        assert!(c.edges().iter().all(|e| e.instances.len() == 6));
        let b = c.gauge_matrix();
        assert_eq!((b.nrows(), b.ncols()), (2, 1));
        assert_eq!((b[(0, 0)], b[(1, 0)]), (2.0, 2.0));
        // Each quad holds one edge of each class... or two of one class; total 12 incidences.
        let total: usize = (0..c.num_quads())
            .map(|q| (0..2).map(|e| c.quad_edge_multiplicity(q, e)).sum::<usize>())
            .sum();
        assert_eq!(total, 12);
    }

    #[test]
    fn instance_total() {
        for c in [Complex::double_tet(), Complex::fig8()] {
            let n: usize = c.edges().iter().map(|e| e.instances.len()).sum();
            assert_eq!(n, 6 * c.num_tets());
        }
    }

    #[test]
    fn gauge_apply_examples() {
        let c = Complex::double_tet();
        let x = MetricVector(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(c.gauge_apply(&GaugeVector(vec![0.0; 4]), &x).unwrap(), x);
        let y = c.gauge_apply(&GaugeVector(vec![0.25; 4]), &x).unwrap();
        for (a, b) in y.0.iter().zip(&x.0) {
            assert!((a - b - 0.5).abs() < 1e-15);
        }
        let f = Complex::fig8();
        let z = f.gauge_apply(&GaugeVector(vec![1.5]), &MetricVector(vec![0.0, 1.0])).unwrap();
        assert_eq!(z.0, vec![3.0, 4.0]);
        assert!(c.gauge_apply(&GaugeVector(vec![0.0; 3]), &x).is_err());
    }

    #[test]
    fn gauge_project_examples() {
        let c = Complex::double_tet();
        let w = GaugeVector(vec![0.3, -1.0, 2.0, 0.5]);
        let in_col = c.gauge_apply(&w, &MetricVector(vec![0.0; 6])).unwrap();
        let p = c.gauge_project(&in_col).unwrap();
        assert!(p.0.iter().all(|x| x.abs() < 1e-12));

        let f = Complex::fig8();
        let perp = MetricVector(vec![1.0, -1.0]);
        let q = f.gauge_project(&perp).unwrap();
        assert!((q.0[0] - 1.0).abs() < 1e-15 && (q.0[1] + 1.0).abs() < 1e-15);

        let x = MetricVector(vec![0.4, -0.3, 1.2, 0.0, 2.0, -1.1]);
        let once = c.gauge_project(&x).unwrap();
        let twice = c.gauge_project(&once).unwrap();
        for (a, b) in once.0.iter().zip(&twice.0) {
            assert!((a - b).abs() < 1e-12);
        }
        let b = c.gauge_matrix();
        let dot = b.transpose() * DVector::from_vec(once.0.clone());
        assert!(dot.amax() < 1e-10);
    }

    #[test]
    fn malformed_gluings() {
        let bad = |g: Gluing| Complex::build(&GluingSpec { tets: 2, gluings: vec![g] });
        let ok = Gluing {
            tet: 0,
            face: 0,
            to_tet: 1,
            to_face: 0,
            perm: [1, 2, 3],
        };
        assert!(bad(ok).is_ok());
        assert!(bad(Gluing { to_tet: 5, ..ok }).is_err());
        assert!(bad(Gluing { face: 4, ..ok }).is_err());
        assert!(bad(Gluing { perm: [1, 1, 3], ..ok }).is_err());
        assert!(bad(Gluing { perm: [0, 2, 3], ..ok }).is_err());
        assert!(bad(Gluing { to_tet: 0, ..ok }).is_err());
        let twice = GluingSpec {
            tets: 2,
            gluings: vec![ok, Gluing { to_face: 1, perm: [0, 2, 3], ..ok }],
        };
        assert!(matches!(Complex::build(&twice), Err(Error::Gluing(_))));
        assert!(Complex::build(&GluingSpec { tets: 0, gluings: vec![] }).is_err());
        assert!(GluingSpec::from_json("{\"tets\": 1}").is_err());
    }

    #[test]
    fn partition_independent_of_gluing_order() {
        let spec = GluingSpec::from_json(FIG8_JSON).unwrap();
        let base = Complex::build(&spec).unwrap();
        let mut reversed = spec.clone();
        reversed.gluings.reverse();
        let other = Complex::build(&reversed).unwrap();
        for t in 0..2 {
            assert_eq!(base.tet_edges(t), other.tet_edges(t));
        }
    }
}
