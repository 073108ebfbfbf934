//! Legacy ASCII VTK writers. Floats are written with 17 significant digits.

use std::fmt::Write;

use crate::fixed_point::State;
use crate::mesh::{ChannelMesh, FacetTag};
use crate::space::DiscreteSpace;

const VTK_QUAD: u8 = 9;
const VTK_HEXAHEDRON: u8 = 12;

fn header(out: &mut String, title: &str) {
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title);
    out.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
}

fn points(out: &mut String, pts: &[[f64; 3]]) {
    writeln!(out, "POINTS {} double", pts.len()).unwrap();
    for p in pts {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
    }
}

fn cells<const N: usize>(out: &mut String, cells: &[[usize; N]], kind: u8) {
    writeln!(out, "CELLS {} {}", cells.len(), cells.len() * (N + 1)).unwrap();
    for c in cells {
        out.push_str(&N.to_string());
        for v in c {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "CELL_TYPES {}", cells.len()).unwrap();
    for _ in cells {
        writeln!(out, "{kind}").unwrap();
    }
}

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        writeln!(out, "{v:.16e}").unwrap();
    }
}

/// Hexahedral cells of the mesh.
pub fn mesh_vtk(mesh: &ChannelMesh) -> String {
    let mut out = String::new();
    header(&mut out, "channel mesh");
    points(&mut out, &mesh.vertices);
    cells(&mut out, &mesh.cells, VTK_HEXAHEDRON);
    out
}

/// Boundary quadrilaterals with the integer cell field `facet_tag` (0 wall, 1 open end).
pub fn facets_vtk(mesh: &ChannelMesh) -> String {
    let mut out = String::new();
    header(&mut out, "channel boundary facets");
    points(&mut out, &mesh.vertices);
    let quads: Vec<[usize; 4]> = mesh.facets.iter().map(|f| f.vertices).collect();
    cells(&mut out, &quads, VTK_QUAD);
    writeln!(out, "CELL_DATA {}\nSCALARS facet_tag int 1\nLOOKUP_TABLE default", quads.len()).unwrap();
    for f in &mesh.facets {
        let tag = match f.tag {
            FacetTag::GammaD => 0,
            FacetTag::GammaN => 1,
        };
        writeln!(out, "{tag}").unwrap();
    }
    out
}

/// Solution on the Q2 node lattice, each element split into 8 sub-hexahedra.
/// Point data: vector `u`, scalars `P` (Q1 pressure evaluated at the lattice nodes) and `theta`.
pub fn state_vtk(space: &DiscreteSpace, state: &State) -> String {
    let [lx, ly, lz] = space.lattice;
    let n = space.n_scalar();
    let mut out = String::new();
    header(&mut out, "channel state");
    let pts: Vec<[f64; 3]> = (0..n).map(|i| space.node_coord(i)).collect();
    points(&mut out, &pts);
    let id = |i: usize, j: usize, k: usize| i + lx * (j + ly * k);
    let mut hexes = Vec::with_capacity((lx - 1) * (ly - 1) * (lz - 1));
    for k in 0..lz - 1 {
        for j in 0..ly - 1 {
            for i in 0..lx - 1 {
                hexes.push([
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ]);
            }
        }
    }
    cells(&mut out, &hexes, VTK_HEXAHEDRON);
    writeln!(out, "POINT_DATA {n}\nVECTORS u double").unwrap();
    for i in 0..n {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", state.u[i], state.u[n + i], state.u[2 * n + i]).unwrap();
    }
    scalars(&mut out, "P", space.pressure_on_lattice(&state.p).into_iter());
    scalars(&mut out, "theta", state.theta.iter().copied());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_channel_mesh;
    use crate::space::build_spaces;

    #[test]
    fn counts() {
        let mesh = build_channel_mesh([1.0, 1.0, 2.0], [1, 2, 2]).unwrap();
        let s = mesh_vtk(&mesh);
        assert!(s.contains("POINTS 18 double"));
        assert!(s.contains("CELLS 4 36"));
        let f = facets_vtk(&mesh);
        assert!(f.contains("CELL_DATA 16"));
        let space = build_spaces(&mesh, 3).unwrap();
        let state = State {
            u: vec![0.0; space.n_velocity()],
            p: vec![1.0; space.n_pressure()],
            theta: vec![2.0; space.n_scalar()],
            vartheta: vec![0.0; space.n_scalar()],
        };
        let v = state_vtk(&space, &state);
        assert!(v.contains(&format!("POINT_DATA {}", space.n_scalar())));
        assert!(v.contains("CELLS 32 288"));
    }
}
