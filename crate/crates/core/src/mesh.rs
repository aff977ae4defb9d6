//! Structured right-angled triangulation of a rectangle.
//!
//! Every cell `[x_i, x_{i+1}] x [y_j, y_{j+1}]` is cut along its lower-left to
//! upper-right diagonal. Each element stores its vertices as `[a0, a1, a2]`
//! where `a0` is the right-angle vertex, `a0 -> a1` runs along the x axis and
//! `a0 -> a2` along the y axis.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFlag {
    Interior,
    /// On a vertical side (x = 0 or x = lx), excluding corners.
    EdgeX,
    /// On a horizontal side (y = 0 or y = ly), excluding corners.
    EdgeY,
    Corner,
}

impl BoundaryFlag {
    /// Whether the x component of a vector field with zero normal flux vanishes here.
    pub fn fixes_x(self) -> bool {
        matches!(self, BoundaryFlag::EdgeX | BoundaryFlag::Corner)
    }

    pub fn fixes_y(self) -> bool {
        matches!(self, BoundaryFlag::EdgeY | BoundaryFlag::Corner)
    }
}

/// Area and P1 shape-function gradients of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

#[derive(Debug, Clone)]
pub struct StructuredTriMesh {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    boundary: Vec<BoundaryFlag>,
    geometry: Vec<ElementGeometry>,
}

impl StructuredTriMesh {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(format!(
                "cell counts must be positive, got nx={nx} ny={ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "side lengths must be positive and finite, got lx={lx} ly={ly}"
            )));
        }
        let dx = lx / nx as f64;
        let dy = ly / ny as f64;
        let node = |i: usize, j: usize| j * (nx + 1) + i;

        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                // exact end coordinates so boundary tests are exact
                let x = if i == nx { lx } else { i as f64 * dx };
                let y = if j == ny { ly } else { j as f64 * dy };
                nodes.push([x, y]);
                let on_x = i == 0 || i == nx;
                let on_y = j == 0 || j == ny;
                boundary.push(match (on_x, on_y) {
                    (true, true) => BoundaryFlag::Corner,
                    (true, false) => BoundaryFlag::EdgeX,
                    (false, true) => BoundaryFlag::EdgeY,
                    (false, false) => BoundaryFlag::Interior,
                });
            }
        }

        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let sw = node(i, j);
                let se = node(i + 1, j);
                let ne = node(i + 1, j + 1);
                let nw = node(i, j + 1);
                // right angle at SE: legs SE->SW (x) and SE->NE (y)
                elements.push([se, sw, ne]);
                // right angle at NW: legs NW->NE (x) and NW->SW (y)
                elements.push([nw, ne, sw]);
            }
        }

        let geometry = elements
            .iter()
            .map(|tri| triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]))
            .collect();

        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            nodes,
            elements,
            boundary,
            geometry,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_flags(&self) -> &[BoundaryFlag] {
        &self.boundary
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        let dx = self.lx / self.nx as f64;
        let dy = self.ly / self.ny as f64;
        dx.hypot(dy)
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry> {
        self.geometry.get(e).copied().ok_or(Error::ElementOutOfRange {
            index: e,
            count: self.elements.len(),
        })
    }

    /// Unchecked per-element geometry, for assembly loops.
    pub(crate) fn geom(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    /// Signed leg lengths `(x(a1) - x(a0), y(a2) - y(a0))` of element `e`.
    pub fn legs(&self, e: usize) -> [f64; 2] {
        let [a0, a1, a2] = self.elements[e];
        [
            self.nodes[a1][0] - self.nodes[a0][0],
            self.nodes[a2][1] - self.nodes[a0][1],
        ]
    }
}

/// Area and constant hat-function gradients of a triangle.
pub fn triangle_geometry(p0: Point, p1: Point, p2: Point) -> ElementGeometry {
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let area = 0.5 * det.abs();
    let inv = 1.0 / det;
    let g1 = [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv];
    let g2 = [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    ElementGeometry {
        area,
        grads: [g0, g1, g2],
    }
}
