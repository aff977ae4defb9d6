//! Legacy ASCII VTK output of a state.

use std::fmt::Write as _;
use std::path::Path;

use chemrep_core::{SchemeState, StructuredTriMesh};

use crate::CliError;

const VTK_TRIANGLE: u8 = 5;

pub fn render(mesh: &StructuredTriMesh, state: &SchemeState) -> String {
    let n = mesh.num_nodes();
    let ne = mesh.num_elements();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "chemrep step {} t {}", state.step, state.time);
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for [x, y] in mesh.nodes() {
        let _ = writeln!(s, "{x} {y} 0");
    }
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for [a, b, c] in mesh.elements() {
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, field) in [("u", &state.u), ("v", &state.v)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for x in field.values() {
            let _ = writeln!(s, "{x}");
        }
    }
    if let Some(sigma) = &state.sigma {
        let _ = writeln!(s, "VECTORS sigma double");
        for [a, b] in &sigma.0 {
            let _ = writeln!(s, "{a} {b} 0");
        }
    }
    s
}

pub fn write_file(path: &Path, mesh: &StructuredTriMesh, state: &SchemeState) -> Result<(), CliError> {
    std::fs::write(path, render(mesh, state)).map_err(CliError::io(path))
}
