//! Geodesics of metric connections with vectorial torsion on surfaces.
//!
//! A vector field `V` on a Riemannian manifold `(M, g)` defines the metric
//! connection `∇_X Y = ∇^g_X Y + g(X,Y)V − g(V,Y)X`. This crate integrates its
//! geodesics on 2D charts, audits the known constants of motion along the
//! resulting traces, and builds the standard scenarios: surfaces of revolution
//! with their flat connection (loxodromes, Mercator coordinates), conformal
//! changes of metric for gradient fields, and plane fields such as the
//! winding field and the shear field `y∂ₓ`.

pub mod algebra;
pub mod audit;
pub mod conformal;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod integrator;
pub mod io;
pub mod plane;
pub mod quad;
pub mod scenario;
pub mod suite;
pub mod surfaces;

pub use error::{GeoError, Result};
pub use geometry::{ChartGeometry, DomainBox, OrthoFrame, Vec2, VectorFieldSpec};
pub use integrator::{integrate, GeodesicState, IntegratorSettings, Trace};
