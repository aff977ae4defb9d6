//! P1 finite element machinery on [`StructuredTriMesh`].

pub mod assembly;
pub mod field;
pub mod projection;
pub mod quadrature;

pub use assembly::{
    consistent_mass, convection, element_means, grad_p1, gradient_load, lumped_mass, lumped_weights,
    normal_constraints, op_ah, op_bh, op_bh_unconstrained, stiffness, vector_mass, weighted_sq_integral,
    weighted_vector_load, ConvectingField,
};
pub use field::{ScalarField, VectorField};
pub use projection::{
    integrate, interp, l2_norm, project_qh, project_qh_vec, project_qh_vec_nodal, project_rh, project_rh_field,
    L2Source,
};

use crate::mesh::StructuredTriMesh;
use crate::sparse::CsrMatrix;

/// Mesh-dependent operators shared by every time step.
#[derive(Debug, Clone)]
pub struct Operators {
    /// Lumped mass diagonal.
    pub lumped: Vec<f64>,
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub ah: CsrMatrix,
    /// Vector consistent mass, unconstrained.
    pub vmass: CsrMatrix,
    /// `B_h` with normal DOFs eliminated.
    pub bh: CsrMatrix,
    pub constraints: Vec<bool>,
}

impl Operators {
    pub fn new(mesh: &StructuredTriMesh) -> Self {
        Self {
            lumped: lumped_weights(mesh),
            mass: consistent_mass(mesh),
            stiffness: stiffness(mesh),
            ah: op_ah(mesh),
            vmass: vector_mass(mesh),
            bh: op_bh(mesh),
            constraints: normal_constraints(mesh),
        }
    }

    /// `(u, w)^h`
    pub fn lumped_dot(&self, u: &[f64], w: &[f64]) -> f64 {
        self.lumped.iter().zip(u).zip(w).map(|((d, a), b)| d * a * b).sum()
    }

    /// `‖u‖₀²`
    pub fn l2_sq(&self, u: &[f64]) -> f64 {
        self.mass.bilinear(u, u).max(0.0)
    }

    /// `‖σ‖₀²` for interleaved vector DOFs.
    pub fn vl2_sq(&self, s: &[f64]) -> f64 {
        self.vmass.bilinear(s, s).max(0.0)
    }

    /// `‖∇u‖₀²`
    pub fn grad_sq(&self, u: &[f64]) -> f64 {
        self.stiffness.bilinear(u, u).max(0.0)
    }
}
