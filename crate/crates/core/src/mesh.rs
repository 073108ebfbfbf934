//! Structured hexahedral mesh of a straight box channel.
//!
//! The channel occupies `[0, Lx] x [0, Ly] x [0, Lz]`. The two x-normal faces
//! are the open ends (do-nothing / Neumann boundary), every other face is a
//! wall (Dirichlet boundary). The edges where a wall meets an open end form
//! the junction set on which the boundary condition changes type.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Boundary tag of a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FacetTag {
    /// Wall: no-slip velocity, prescribed temperature.
    GammaD,
    /// Open end: do-nothing outflow, insulated.
    GammaN,
}

/// A boundary quadrilateral. Vertices are ordered counter-clockwise when seen
/// from outside the domain, so the right-hand normal points outward.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 4],
    pub tag: FacetTag,
}

#[derive(Debug, Clone)]
pub struct ChannelMesh {
    pub dims: [f64; 3],
    pub divisions: [usize; 3],
    pub vertices: Vec<[f64; 3]>,
    /// Hexahedra in VTK ordering: bottom face (z low) counter-clockwise, then top face.
    pub cells: Vec<[usize; 8]>,
    pub facets: Vec<BoundaryFacet>,
    /// Junction edges as sorted vertex pairs.
    pub edges_m: Vec<[usize; 2]>,
    /// For every junction edge: (wall facet, open-end facet).
    junction_facets: BTreeMap<[usize; 2], (usize, usize)>,
}

/// Builds the box channel mesh. Vertex ordering is x fastest, then y, then z.
pub fn build_channel_mesh(dims: [f64; 3], divisions: [usize; 3]) -> Result<ChannelMesh> {
    for (axis, &l) in dims.iter().enumerate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidMesh(format!("length along axis {axis} must be positive, got {l}")));
        }
    }
    for (axis, &n) in divisions.iter().enumerate() {
        if n == 0 {
            return Err(Error::InvalidMesh(format!("division count along axis {axis} must be at least 1")));
        }
    }
    let [nx, ny, nz] = divisions;
    let [lx, ly, lz] = dims;
    let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    lx * i as f64 / nx as f64,
                    ly * j as f64 / ny as f64,
                    lz * k as f64 / nz as f64,
                ]);
            }
        }
    }

    let mut cells = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                cells.push([
                    vid(i, j, k),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i, j + 1, k),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k + 1),
                    vid(i + 1, j + 1, k + 1),
                    vid(i, j + 1, k + 1),
                ]);
            }
        }
    }

    let mut facets = Vec::new();
    // x = 0 (outward normal -x) and x = Lx (outward +x)
    for k in 0..nz {
        for j in 0..ny {
            facets.push(BoundaryFacet {
                vertices: [vid(0, j, k), vid(0, j, k + 1), vid(0, j + 1, k + 1), vid(0, j + 1, k)],
                tag: FacetTag::GammaN,
            });
            facets.push(BoundaryFacet {
                vertices: [vid(nx, j, k), vid(nx, j + 1, k), vid(nx, j + 1, k + 1), vid(nx, j, k + 1)],
                tag: FacetTag::GammaN,
            });
        }
    }
    // y = 0 (outward -y) and y = Ly
    for k in 0..nz {
        for i in 0..nx {
            facets.push(BoundaryFacet {
                vertices: [vid(i, 0, k), vid(i + 1, 0, k), vid(i + 1, 0, k + 1), vid(i, 0, k + 1)],
                tag: FacetTag::GammaD,
            });
            facets.push(BoundaryFacet {
                vertices: [vid(i, ny, k), vid(i, ny, k + 1), vid(i + 1, ny, k + 1), vid(i + 1, ny, k)],
                tag: FacetTag::GammaD,
            });
        }
    }
    // z = 0 (outward -z) and z = Lz
    for j in 0..ny {
        for i in 0..nx {
            facets.push(BoundaryFacet {
                vertices: [vid(i, j, 0), vid(i, j + 1, 0), vid(i + 1, j + 1, 0), vid(i + 1, j, 0)],
                tag: FacetTag::GammaD,
            });
            facets.push(BoundaryFacet {
                vertices: [vid(i, j, nz), vid(i + 1, j, nz), vid(i + 1, j + 1, nz), vid(i, j + 1, nz)],
                tag: FacetTag::GammaD,
            });
        }
    }

    let (edges_m, junction_facets) = junction_edges(&facets);

    Ok(ChannelMesh {
        dims,
        divisions,
        vertices,
        cells,
        facets,
        edges_m,
        junction_facets,
    })
}

/// Edges shared by exactly one wall facet and one open-end facet.
fn junction_edges(facets: &[BoundaryFacet]) -> (Vec<[usize; 2]>, BTreeMap<[usize; 2], (usize, usize)>) {
    let mut by_edge: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (f, facet) in facets.iter().enumerate() {
        for e in 0..4 {
            let a = facet.vertices[e];
            let b = facet.vertices[(e + 1) % 4];
            by_edge.entry([a.min(b), a.max(b)]).or_default().push(f);
        }
    }
    let mut map = BTreeMap::new();
    for (edge, owners) in by_edge {
        if owners.len() != 2 {
            continue;
        }
        let (t0, t1) = (facets[owners[0]].tag, facets[owners[1]].tag);
        match (t0, t1) {
            (FacetTag::GammaD, FacetTag::GammaN) => {
                map.insert(edge, (owners[0], owners[1]));
            }
            (FacetTag::GammaN, FacetTag::GammaD) => {
                map.insert(edge, (owners[1], owners[0]));
            }
            _ => {}
        }
    }
    (map.keys().copied().collect(), map)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl ChannelMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Cell widths along each axis.
    pub fn spacing(&self) -> [f64; 3] {
        [
            self.dims[0] / self.divisions[0] as f64,
            self.dims[1] / self.divisions[1] as f64,
            self.dims[2] / self.divisions[2] as f64,
        ]
    }

    pub fn volume(&self) -> f64 {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn facets_with(&self, tag: FacetTag) -> impl Iterator<Item = &BoundaryFacet> {
        self.facets.iter().filter(move |f| f.tag == tag)
    }

    /// Area vector of a facet (outward normal scaled by area) from its vertices.
    pub fn facet_area_vector(&self, facet: &BoundaryFacet) -> [f64; 3] {
        let p = facet.vertices.map(|v| self.vertices[v]);
        let c = cross(sub(p[2], p[0]), sub(p[3], p[1]));
        [0.5 * c[0], 0.5 * c[1], 0.5 * c[2]]
    }

    pub fn facet_area(&self, facet: &BoundaryFacet) -> f64 {
        norm(self.facet_area_vector(facet))
    }

    pub fn facet_normal(&self, facet: &BoundaryFacet) -> [f64; 3] {
        let a = self.facet_area_vector(facet);
        let n = norm(a);
        [a[0] / n, a[1] / n, a[2] / n]
    }

    pub fn tagged_area(&self, tag: FacetTag) -> f64 {
        self.facets_with(tag).map(|f| self.facet_area(f)).sum()
    }

    /// Interior dihedral angle between the wall and open-end facets meeting at a junction edge.
    pub fn junction_angle(&self, edge: [usize; 2]) -> Result<f64> {
        let key = [edge[0].min(edge[1]), edge[0].max(edge[1])];
        let &(wall, open) = self
            .junction_facets
            .get(&key)
            .ok_or(Error::NotJunctionEdge(key[0], key[1]))?;
        let n1 = self.facet_normal(&self.facets[wall]);
        let n2 = self.facet_normal(&self.facets[open]);
        let c = (n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]).clamp(-1.0, 1.0);
        Ok(PI - c.acos())
    }

    /// Same grid with every division doubled.
    pub fn refined(&self) -> Result<ChannelMesh> {
        build_channel_mesh(self.dims, self.divisions.map(|n| 2 * n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_counts() {
        let m = build_channel_mesh([1.0; 3], [1, 1, 1]).unwrap();
        assert_eq!(m.vertex_count(), 8);
        assert_eq!(m.cell_count(), 1);
        assert_eq!(m.facets_with(FacetTag::GammaN).count(), 2);
        assert_eq!(m.facets_with(FacetTag::GammaD).count(), 4);
        assert_eq!(m.edges_m.len(), 8);
    }

    #[test]
    fn two_cell_counts() {
        let m = build_channel_mesh([1.0; 3], [2, 1, 1]).unwrap();
        assert_eq!(m.vertex_count(), 12);
        assert_eq!(m.cell_count(), 2);
        assert_eq!(m.facets_with(FacetTag::GammaN).count(), 2);
        assert_eq!(m.facets_with(FacetTag::GammaD).count(), 8);
    }

    #[test]
    fn long_channel_counts() {
        let m = build_channel_mesh([4.0, 1.0, 1.0], [4, 4, 4]).unwrap();
        assert_eq!(m.vertex_count(), 125);
        assert_eq!(m.cell_count(), 64);
        // 2 faces * (2*ny + 2*nz) perimeter edges
        assert_eq!(m.edges_m.len(), 2 * (2 * 4 + 2 * 4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_channel_mesh([0.0, 1.0, 1.0], [1, 1, 1]).is_err());
        assert!(build_channel_mesh([1.0, -1.0, 1.0], [1, 1, 1]).is_err());
        assert!(build_channel_mesh([1.0, 1.0, 1.0], [1, 0, 1]).is_err());
    }

    #[test]
    fn tagged_areas() {
        for div in [[1, 1, 1], [3, 2, 5], [4, 1, 2]] {
            let m = build_channel_mesh([2.0, 0.5, 1.5], div).unwrap();
            assert!((m.tagged_area(FacetTag::GammaN) - 2.0 * 0.5 * 1.5).abs() < 1e-12);
            assert!((m.tagged_area(FacetTag::GammaD) - 2.0 * 2.0 * (0.5 + 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn outward_normals() {
        let m = build_channel_mesh([2.0, 1.0, 1.0], [2, 2, 2]).unwrap();
        let centre = [1.0, 0.5, 0.5];
        for f in &m.facets {
            let n = m.facet_normal(f);
            let p = m.vertices[f.vertices[0]];
            let d = sub(p, centre);
            assert!(n[0] * d[0] + n[1] * d[1] + n[2] * d[2] > 0.0);
            let axis = n.iter().position(|c| c.abs() > 0.5).unwrap();
            match f.tag {
                FacetTag::GammaN => assert_eq!(axis, 0),
                FacetTag::GammaD => assert_ne!(axis, 0),
            }
        }
    }

    #[test]
    fn junction_edges_have_right_angle() {
        let m = build_channel_mesh([1.0, 2.0, 1.0], [2, 3, 2]).unwrap();
        for &e in &m.edges_m {
            assert!((m.junction_angle(e).unwrap() - PI / 2.0).abs() < 1e-14);
            // both endpoints on an open end
            for v in e {
                let x = m.vertices[v][0];
                assert!(x == 0.0 || x == 1.0);
            }
        }
    }

    #[test]
    fn wall_interior_edge_rejected() {
        let m = build_channel_mesh([1.0; 3], [2, 2, 2]).unwrap();
        // edge along x on the y=0 wall, between x=0.5 and x=1
        let vid = |i: usize, j: usize, k: usize| i + 3 * (j + 3 * k);
        assert!(matches!(
            m.junction_angle([vid(1, 0, 1), vid(2, 0, 1)]),
            Err(Error::NotJunctionEdge(..))
        ));
    }

    #[test]
    fn perturbed_vertex_changes_angle() {
        let mut m = build_channel_mesh([1.0; 3], [1, 1, 1]).unwrap();
        // tilt the x = 0 face by moving one of its far vertices
        let e = m.edges_m[0];
        m.vertices[7][0] += 0.2;
        let any_off = m
            .edges_m
            .iter()
            .any(|&e| (m.junction_angle(e).unwrap() - PI / 2.0).abs() > 1e-3);
        assert!(any_off);
        assert!(m.junction_angle(e).is_ok());
    }

    #[test]
    fn refinement_nests_vertices() {
        let coarse = build_channel_mesh([3.0, 1.0, 2.0], [3, 2, 2]).unwrap();
        let fine = coarse.refined().unwrap();
        let [nx, ny, _] = coarse.divisions;
        let [fx, fy, _] = fine.divisions;
        for (v, p) in coarse.vertices.iter().enumerate() {
            let i = v % (nx + 1);
            let j = (v / (nx + 1)) % (ny + 1);
            let k = v / ((nx + 1) * (ny + 1));
            let fv = 2 * i + (fx + 1) * (2 * j + (fy + 1) * 2 * k);
            assert_eq!(&fine.vertices[fv], p);
        }
    }
}
