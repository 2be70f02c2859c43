//! Field writers: VTK legacy ASCII for 2D, CSV for 1D.

use std::fmt::Write as _;

use cgsat::discretization::Discretization;

/// Unstructured grid whose points are the DoF nodes; every element is split
/// into `p²` sub-triangles of its node lattice so higher-order fields are
/// drawn at full nodal resolution. `nodal` holds interleaved node values.
pub fn vtk_string(disc: &Discretization, nodal: &[f64], title: &str) -> String {
    let dm = &disc.dofmap;
    let m = disc.problem.components;
    let p = dm.order();
    let coords = dm.dof_coords();
    let idx = dm.basis().multi_indices();
    let local = |i: usize, j: usize| {
        idx.iter()
            .position(|k| k[1] == i && k[2] == j)
            .expect("lattice node")
    };
    let mut tris = Vec::new();
    for e in 0..disc.mesh.num_elements() {
        let dofs = dm.element_dofs(e);
        for i in 0..p {
            for j in 0..p - i {
                tris.push([
                    dofs[local(i, j)],
                    dofs[local(i + 1, j)],
                    dofs[local(i, j + 1)],
                ]);
                if i + j + 2 <= p {
                    tris.push([
                        dofs[local(i + 1, j)],
                        dofs[local(i + 1, j + 1)],
                        dofs[local(i, j + 1)],
                    ]);
                }
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", coords.len());
    for x in coords {
        let _ = writeln!(s, "{:e} {:e} 0", x[0], x[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in &tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", tris.len());
    for _ in &tris {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(s, "POINT_DATA {}", coords.len());
    for c in 0..m {
        let _ = writeln!(s, "SCALARS u{} double 1", c + 1);
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for d in 0..coords.len() {
            let _ = writeln!(s, "{:e}", nodal[d * m + c]);
        }
    }
    s
}

/// `x,u1..um` sorted by `x`.
pub fn csv_1d(disc: &Discretization, nodal: &[f64]) -> String {
    let m = disc.problem.components;
    let coords = disc.dofmap.dof_coords();
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a][0].total_cmp(&coords[b][0]));
    let mut s = String::from("x");
    for c in 0..m {
        let _ = write!(s, ",u{}", c + 1);
    }
    s.push('\n');
    for d in order {
        let _ = write!(s, "{:e}", coords[d][0]);
        for c in 0..m {
            let _ = write!(s, ",{:e}", nodal[d * m + c]);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use cgsat::mesh::MeshSpec;
    use cgsat::problems::{linear_advection, wave_1d};

    #[test]
    fn vtk_subdivides_elements() {
        let mut p = linear_advection();
        p.mesh = MeshSpec::UnitSquare(2);
        p.order = 3;
        let d = Discretization::new(&p).unwrap();
        let u = d.initial_state();
        let s = vtk_string(&d, &d.nodal(&u), "t");
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        // 8 triangles, 9 sub-triangles each; 7x7 lattice of nodes
        assert!(s.contains("CELLS 72 288"));
        assert!(s.contains("POINTS 49 double"));
        assert!(s.contains("POINT_DATA 49"));
    }

    #[test]
    fn csv_is_sorted() {
        let mut p = wave_1d();
        p.mesh = MeshSpec::Interval {
            n: 3,
            random: false,
            seed: 0,
        };
        let d = Discretization::new(&p).unwrap();
        let u = vec![0.0; d.ndofs()];
        let s = csv_1d(&d, &u);
        let xs: Vec<f64> = s
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(s.lines().next().unwrap(), "x,u1,u2");
        assert_eq!(xs.len(), 7);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
