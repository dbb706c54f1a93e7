//! Numerical laboratory for the sharp quantitative polygonal isoperimetric
//! inequality
//!
//! ```text
//! c_n (L^2 - 4n tan(pi/n) |P|) >= sigma_r^2 + |P| sigma_a^2
//! ```
//!
//! on convex n-gons. Polygons are represented by vertices or by central angles
//! and radii `(x; r)` on the polygonal manifold; the crate evaluates every
//! functional in both, checks the closed-form derivatives and the circulant
//! spectrum behind the local analysis at the regular polygon, estimates the
//! constant numerically, and convexifies simple polygons by pocket flips.

pub mod calculus;
pub mod convexify;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod manifold;
pub mod polygon;
pub mod spectral;

pub use error::{Error, Result};
pub use manifold::{ConstraintResiduals, SamplerConfig, TangentBasis};
pub use polygon::{ManifoldPoint, Point, PolygonSummary, VertexPolygon};
pub use spectral::{BlockHessian, CirculantSystem};
