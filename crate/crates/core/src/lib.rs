//! Finite element simulation of the chemo-repulsion system with nonlinear
//! production
//!
//! ```text
//! ∂t u - Δu = ∇·(u∇v),    ∂t v - Δv + v = u^p,    1 < p < 2,
//! ```
//!
//! on a rectangle with homogeneous Neumann conditions, discretized by P1
//! elements on a right-angled structured mesh and backward Euler in time.
//! Four fully discrete schemes are provided (see [`schemes::Scheme`]); three
//! of them satisfy a discrete energy law that [`diagnostics`] evaluates.

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod lambda_ops;
pub mod linsolve;
pub mod mesh;
pub mod presets;
pub mod regularization;
pub mod schemes;
pub mod sparse;

pub use error::{Error, Result};
pub use fem::{Operators, ScalarField, VectorField};
pub use linsolve::SolverConfig;
pub use mesh::StructuredTriMesh;
pub use regularization::RegularizedPotential;
pub use schemes::{PicardReport, Scheme, SchemeConfig, SchemeState, Simulator};
