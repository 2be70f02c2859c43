//! Global continuous-Galerkin numbering: vertex DoFs first, then edge-interior
//! DoFs (ordered from the lower to the higher global vertex index), then
//! element-interior DoFs.

use std::collections::HashMap;

use crate::basis::{BasisKind, BasisSpec, RefDomain};
use crate::error::Result;
use crate::mesh::Mesh;

#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    basis: BasisSpec,
    nloc: usize,
    element_dofs: Vec<usize>,
    ndofs: usize,
    coords: Vec<[f64; 2]>,
    boundary_dofs: Vec<usize>,
}

pub fn build_dofmap(mesh: &Mesh, order: usize, kind: BasisKind) -> Result<DofMap> {
    let basis = BasisSpec::new(kind, order, RefDomain::for_dimension(mesh.dimension()))?;
    let p = order;
    let nloc = basis.ndofs();
    let ne = mesh.num_elements();
    let nv = mesh.num_vertices();
    let mut element_dofs = vec![usize::MAX; ne * nloc];
    let mut next = nv;

    // local layout: vertices, then p-1 points per face, then interior
    let nvert = mesh.vertices_per_element();
    if mesh.dimension() == 2 && p > 1 {
        let mut edge_base: HashMap<(usize, usize), usize> = HashMap::new();
        for e in 0..ne {
            let el = mesh.element(e);
            for f in 0..3 {
                let (a, b) = (el[f], el[(f + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let base = *edge_base.entry(key).or_insert_with(|| {
                    let b0 = next;
                    next += p - 1;
                    b0
                });
                for t in 1..p {
                    let g = if a < b {
                        base + t - 1
                    } else {
                        base + p - 1 - t
                    };
                    element_dofs[e * nloc + 3 + f * (p - 1) + t - 1] = g;
                }
            }
        }
    }
    let interior_start = if mesh.dimension() == 2 {
        3 + 3 * (p - 1)
    } else {
        2
    };
    for e in 0..ne {
        let el = mesh.element(e);
        element_dofs[e * nloc..e * nloc + nvert].copy_from_slice(el);
        for k in interior_start..nloc {
            element_dofs[e * nloc + k] = next;
            next += 1;
        }
    }
    debug_assert!(element_dofs.iter().all(|&d| d != usize::MAX));

    let ref_nodes = basis.nodes();
    let mut coords = vec![[0.0; 2]; next];
    for e in 0..ne {
        let el = mesh.element(e);
        let v = |i: usize| mesh.vertices()[el[i]];
        for (k, xi) in ref_nodes.iter().enumerate() {
            let x = if mesh.dimension() == 1 {
                [v(0)[0] + xi[0] * (v(1)[0] - v(0)[0]), 0.0]
            } else {
                let (a, b, c) = (v(0), v(1), v(2));
                [
                    a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (c[0] - a[0]),
                    a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (c[1] - a[1]),
                ]
            };
            coords[element_dofs[e * nloc + k]] = x;
        }
    }

    let mut boundary_dofs: Vec<usize> = mesh
        .boundary_faces()
        .iter()
        .flat_map(|f| {
            basis
                .face_dofs(f.local_face)
                .into_iter()
                .map(|k| element_dofs[f.element * nloc + k])
                .collect::<Vec<_>>()
        })
        .collect();
    boundary_dofs.sort_unstable();
    boundary_dofs.dedup();

    Ok(DofMap {
        basis,
        nloc,
        element_dofs,
        ndofs: next,
        coords,
        boundary_dofs,
    })
}

impl DofMap {
    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn kind(&self) -> BasisKind {
        self.basis.kind()
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn local_count(&self) -> usize {
        self.nloc
    }

    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e * self.nloc..(e + 1) * self.nloc]
    }

    /// Physical position of each DoF's node (Lagrange) or control point
    /// (Bernstein).
    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    /// Sorted DoFs whose basis functions are nonzero somewhere on ∂Ω.
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn is_boundary(&self) -> Vec<bool> {
        let mut mask = vec![false; self.ndofs];
        for &d in &self.boundary_dofs {
            mask[d] = true;
        }
        mask
    }

    /// Global DoFs supported on a boundary face, in the basis' local order.
    pub fn face_dofs(&self, element: usize, local_face: usize) -> Vec<usize> {
        self.basis
            .face_dofs(local_face)
            .into_iter()
            .map(|k| self.element_dofs[element * self.nloc + k])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{interval, unit_square};

    #[test]
    fn interval_p1() {
        let m = interval(2, false, 0).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        assert_eq!(d.ndofs(), 3);
        assert_eq!(d.boundary_dofs(), &[0, 2]);
    }

    #[test]
    fn square_p1_is_vertex_count() {
        let m = unit_square(6).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        assert_eq!(d.ndofs(), m.num_vertices());
    }

    #[test]
    fn triangle_pair_p3() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let m = Mesh::with_tagger(2, v, vec![0, 1, 2, 1, 3, 2], |_, _| "b".into()).unwrap();
        let d = build_dofmap(&m, 3, BasisKind::Bernstein).unwrap();
        assert_eq!(d.ndofs(), 16);
        let a: std::collections::HashSet<_> = d.element_dofs(0).iter().copied().collect();
        let b: std::collections::HashSet<_> = d.element_dofs(1).iter().copied().collect();
        assert_eq!(a.intersection(&b).count(), 4);
    }

    #[test]
    fn shared_dofs_coincide_geometrically() {
        let m = crate::mesh::unit_disk(4).unwrap();
        for kind in [BasisKind::Lagrange, BasisKind::Bernstein] {
            for p in 1..=3 {
                let d = build_dofmap(&m, p, kind).unwrap();
                let nodes = d.basis().nodes();
                for e in 0..m.num_elements() {
                    let el = m.element(e);
                    let v = |i: usize| m.vertices()[el[i]];
                    for (k, xi) in nodes.iter().enumerate() {
                        let x = [
                            v(0)[0] + xi[0] * (v(1)[0] - v(0)[0]) + xi[1] * (v(2)[0] - v(0)[0]),
                            v(0)[1] + xi[0] * (v(1)[1] - v(0)[1]) + xi[1] * (v(2)[1] - v(0)[1]),
                        ];
                        let g = d.dof_coords()[d.element_dofs(e)[k]];
                        assert!((x[0] - g[0]).abs() < 1e-13 && (x[1] - g[1]).abs() < 1e-13);
                    }
                }
                let (nv, ne) = (m.num_vertices(), m.num_elements());
                let nedges = nv + ne - 1; // Euler, simply connected
                let expected = nv + nedges * (p - 1) + ne * (p - 1) * p.saturating_sub(2) / 2;
                assert_eq!(d.ndofs(), expected);
            }
        }
    }
}
