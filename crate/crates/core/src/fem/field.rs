use crate::error::{Error, Result};
use crate::mesh::StructuredTriMesh;

/// Nodal coefficients of a P1 scalar function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

/// Nodal coefficients of a P1 vector function.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub Vec<[f64; 2]>);

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn for_mesh(mesh: &StructuredTriMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_nodes(),
                got: values.len(),
            });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Nodal composition `Π^h(f(u))`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn positive_part(&self) -> Self {
        self.map(|x| x.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map(|x| x.min(0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl VectorField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![[0.0; 2]; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Interleaved DOF vector `[x0, y0, x1, y1, ...]`.
    pub fn to_dofs(&self) -> Vec<f64> {
        self.0.iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_dofs(dofs: &[f64]) -> Self {
        Self(dofs.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v[0].is_finite() && v[1].is_finite())
    }
}

/// Index of component `d` of node `i` in an interleaved vector DOF array.
#[inline]
pub fn vdof(i: usize, d: usize) -> usize {
    2 * i + d
}
