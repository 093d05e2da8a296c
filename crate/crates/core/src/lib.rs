//! Decorated ideal and hyper-ideal hyperbolic polyhedral metrics on
//! triangulated pseudo 3-manifolds.
//!
//! Metrics with prescribed cone angles are found by minimizing convex
//! covolume functions; their dihedral angles are the unique volume
//! maximizers among angle assignments with the same cone angles.
//!
//! Module map:
//! - [`lobachevsky`]: the volume primitive Λ.
//! - [`ideal`]: one generalized decorated ideal tetrahedron.
//! - [`hyperideal`]: one generalized hyper-ideal tetrahedron.
//! - [`complex`]: gluings, edge and vertex classes, the vertex gauge action.
//! - [`metrics`]: angles, cone angles, curvature, volume and covolume over a complex.
//! - [`solver`]: feasibility, covolume minimization and the checks built on it.

pub mod complex;
pub mod error;
pub mod hyperideal;
pub mod ideal;
pub mod lobachevsky;
pub mod metrics;
pub mod quadrature;
pub mod solver;
pub mod tet;

pub use complex::{Complex, GaugeVector, GluingSpec};
pub use error::{Error, Result};
pub use lobachevsky::{lobachevsky, Radians};
pub use metrics::{Assignment, ConeAngles, Curvature, Flavor, MetricVector};
