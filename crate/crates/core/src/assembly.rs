//! Global mass matrix M, stiffness Q (split form) and boundary form Bq, and
//! the discrete summation-by-parts check `Q + Qᵀ = Bq`.

use std::fmt::Write as _;
use std::path::Path;

use crate::basis::BasisSpec;
use crate::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, TripletBuilder};
use crate::mesh::Mesh;
use crate::quadrature::{quad_rule, QuadDomain};

/// Scalar advection velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityField {
    Constant([f64; 2]),
    /// Rigid rotation `a = (ω y, −ω x)` (clockwise for ω > 0).
    Rotation {
        omega: f64,
    },
}

impl VelocityField {
    pub fn at(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Self::Constant(a) => a,
            Self::Rotation { omega } => [omega * x[1], -omega * x[0]],
        }
    }

    pub fn divergence(&self, _x: [f64; 2]) -> f64 {
        0.0
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    /// Maximum speed over the mesh vertices (exact for fields linear in x).
    pub fn max_speed(&self, mesh: &Mesh) -> f64 {
        mesh.vertices()
            .iter()
            .map(|&x| {
                let a = self.at(x);
                a[0].hypot(a[1])
            })
            .fold(0.0, f64::max)
    }
}

pub fn default_quad_degree(order: usize) -> usize {
    (2 * order).max(order + 2)
}

/// Affine map from the reference element.
#[derive(Clone, Copy, Debug)]
pub struct ElementMap {
    pub origin: [f64; 2],
    /// Columns are the images of the reference axes.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    inv_t: [[f64; 2]; 2],
}

impl ElementMap {
    pub fn new(mesh: &Mesh, e: usize) -> Result<Self> {
        let el = mesh.element(e);
        let v = |i: usize| mesh.vertices()[el[i]];
        let origin = v(0);
        let jac = if mesh.dimension() == 1 {
            [[v(1)[0] - origin[0], 0.0], [0.0, 1.0]]
        } else {
            [
                [v(1)[0] - origin[0], v(2)[0] - origin[0]],
                [v(1)[1] - origin[1], v(2)[1] - origin[1]],
            ]
        };
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateElement {
                element: e,
                measure: det,
            });
        }
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Ok(Self {
            origin,
            jac,
            det,
            inv_t,
        })
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Basis values and reference gradients at the points of a volume rule.
pub(crate) struct Tabulation {
    pub weights: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    pub fn volume(basis: &BasisSpec, degree: usize) -> Result<Self> {
        let domain = match basis.domain() {
            crate::basis::RefDomain::Interval => QuadDomain::Interval,
            crate::basis::RefDomain::Triangle => QuadDomain::Triangle,
        };
        let rule = quad_rule(domain, degree)?;
        Ok(Self {
            values: rule
                .points
                .iter()
                .map(|&p| basis.eval_unchecked(p))
                .collect(),
            grads: rule
                .points
                .iter()
                .map(|&p| basis.grad_unchecked(p))
                .collect(),
            weights: rule.weights,
            points: rule.points,
        })
    }
}

/// One edge-quadrature point on ∂Ω with the traces of the face's basis
/// functions.
#[derive(Clone, Debug)]
pub struct TracePoint {
    /// Index into `mesh.boundary_faces()`.
    pub face: usize,
    pub x: [f64; 2],
    pub normal: [f64; 2],
    /// Quadrature weight times face measure.
    pub weight: f64,
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

pub fn boundary_trace(mesh: &Mesh, dofmap: &DofMap, edge_degree: usize) -> Result<Vec<TracePoint>> {
    let basis = dofmap.basis();
    let rule = quad_rule(QuadDomain::Edge, edge_degree)?;
    let ref_vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mut out = Vec::new();
    for (fi, face) in mesh.boundary_faces().iter().enumerate() {
        let local = basis.face_dofs(face.local_face);
        let dofs = dofmap.face_dofs(face.element, face.local_face);
        let map = ElementMap::new(mesh, face.element)?;
        let points: Vec<([f64; 2], f64)> = if mesh.dimension() == 1 {
            vec![([face.local_face as f64, 0.0], 1.0)]
        } else {
            let a = ref_vertices[face.local_face];
            let b = ref_vertices[(face.local_face + 1) % 3];
            rule.iter()
                .map(|(p, w)| {
                    let s = p[0];
                    (
                        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
                        w * face.measure,
                    )
                })
                .collect()
        };
        for (xi, weight) in points {
            let all = basis.eval_unchecked(xi);
            out.push(TracePoint {
                face: fi,
                x: map.map(xi),
                normal: face.normal,
                weight,
                dofs: dofs.clone(),
                values: local.iter().map(|&k| all[k]).collect(),
            });
        }
    }
    Ok(out)
}

pub fn assemble_mass(mesh: &Mesh, dofmap: &DofMap, quad_degree: usize) -> Result<CsrMatrix> {
    let tab = Tabulation::volume(dofmap.basis(), quad_degree)?;
    let n = dofmap.ndofs();
    let nloc = dofmap.local_count();
    let mut t = TripletBuilder::new(n, n);
    let mut local = vec![0.0; nloc * nloc];
    for e in 0..mesh.num_elements() {
        let map = ElementMap::new(mesh, e)?;
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, &w) in tab.weights.iter().enumerate() {
            let phi = &tab.values[q];
            let wd = w * map.det;
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += wd * phi[i] * phi[j];
                }
            }
        }
        scatter(&mut t, dofmap.element_dofs(e), &local);
    }
    Ok(t.build())
}

fn scatter(t: &mut TripletBuilder, dofs: &[usize], local: &[f64]) {
    let n = dofs.len();
    for i in 0..n {
        for j in 0..n {
            let v = local[i * n + j];
            if v != 0.0 {
                t.push(dofs[i], dofs[j], v);
            }
        }
    }
}

/// Split-form stiffness `Q(α) = α Q_weak + (1 − α) Q_adv` with
///
/// * `Q_weak_ij = ∮ a_n φ_i φ_j − ∫ φ_j a·∇φ_i` (conservative, integrated by parts)
/// * `Q_adv_ij  = ∫ φ_i a·∇φ_j + ∫ (∇·a) φ_i φ_j`
///
/// The boundary integral uses the edge rule of `edge_degree`, so only the
/// weak part is sensitive to a mismatch between volume and edge quadrature.
pub fn assemble_stiffness(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeff: &VelocityField,
    quad_degree: usize,
    edge_degree: usize,
    split_alpha: f64,
) -> Result<CsrMatrix> {
    if !(0.0..=1.0).contains(&split_alpha) {
        return Err(Error::InvalidParameter(format!(
            "split parameter {split_alpha} outside [0, 1]"
        )));
    }
    let tab = Tabulation::volume(dofmap.basis(), quad_degree)?;
    let n = dofmap.ndofs();
    let nloc = dofmap.local_count();
    let mut t = TripletBuilder::new(n, n);
    let mut local = vec![0.0; nloc * nloc];
    let mut adv = vec![0.0; nloc];
    let alpha = split_alpha;
    for e in 0..mesh.num_elements() {
        let map = ElementMap::new(mesh, e)?;
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, &w) in tab.weights.iter().enumerate() {
            let x = map.map(tab.points[q]);
            let a = coeff.at(x);
            let div = coeff.divergence(x);
            let phi = &tab.values[q];
            for (k, g) in tab.grads[q].iter().enumerate() {
                let g = map.grad(*g);
                adv[k] = a[0] * g[0] + a[1] * g[1];
            }
            let wd = w * map.det;
            for i in 0..nloc {
                for j in 0..nloc {
                    local[i * nloc + j] += wd
                        * (-alpha * phi[j] * adv[i]
                            + (1.0 - alpha) * (phi[i] * adv[j] + div * phi[i] * phi[j]));
                }
            }
        }
        scatter(&mut t, dofmap.element_dofs(e), &local);
    }
    if alpha != 0.0 {
        for tp in boundary_trace(mesh, dofmap, edge_degree)? {
            let a = coeff.at(tp.x);
            let an = a[0] * tp.normal[0] + a[1] * tp.normal[1];
            push_trace_product(&mut t, &tp, alpha * an * tp.weight);
        }
    }
    Ok(t.build())
}

fn push_trace_product(t: &mut TripletBuilder, tp: &TracePoint, scale: f64) {
    if scale == 0.0 {
        return;
    }
    for (a, &i) in tp.dofs.iter().enumerate() {
        for (b, &j) in tp.dofs.iter().enumerate() {
            t.push(i, j, scale * tp.values[a] * tp.values[b]);
        }
    }
}

/// `∮ w(x, n) φ_i φ_j` over ∂Ω with the given edge rule.
pub fn assemble_boundary_form(
    mesh: &Mesh,
    dofmap: &DofMap,
    edge_degree: usize,
    weight: impl Fn([f64; 2], [f64; 2]) -> f64,
) -> Result<CsrMatrix> {
    let n = dofmap.ndofs();
    let mut t = TripletBuilder::new(n, n);
    for tp in boundary_trace(mesh, dofmap, edge_degree)? {
        push_trace_product(&mut t, &tp, weight(tp.x, tp.normal) * tp.weight);
    }
    Ok(t.build())
}

/// `Bq_ij = ∮ a_n φ_i φ_j`.
pub fn assemble_boundary_quadratic(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeff: &VelocityField,
    edge_degree: usize,
) -> Result<CsrMatrix> {
    assemble_boundary_form(mesh, dofmap, edge_degree, |x, nrm| {
        let a = coeff.at(x);
        a[0] * nrm[0] + a[1] * nrm[1]
    })
}

/// Assembled operators for `M du/dt + Q u = Π u + G`.
///
/// For systems with `m` components the DoF layout is interleaved
/// (`dof * m + component`); `mass` stays scalar and acts as `M ⊗ I_m`.
#[derive(Clone, Debug)]
pub struct GlobalOperators {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub boundary: CsrMatrix,
    pub components: usize,
    /// Scalar DoFs touching ∂Ω.
    pub boundary_dofs: Vec<usize>,
    pub volume_degree: usize,
    pub edge_degree: usize,
    pub split_alpha: f64,
    /// Inverse symmetrizer `P⁻¹` of a system; SBP and energy statements hold
    /// for `(I ⊗ P⁻¹) Q`.
    pub symmetrizer_inv: Option<DenseMatrix>,
}

impl GlobalOperators {
    pub fn scalar(
        mesh: &Mesh,
        dofmap: &DofMap,
        coeff: &VelocityField,
        volume_degree: usize,
        edge_degree: usize,
        split_alpha: f64,
    ) -> Result<Self> {
        Ok(Self {
            mass: assemble_mass(mesh, dofmap, volume_degree)?,
            stiffness: assemble_stiffness(
                mesh,
                dofmap,
                coeff,
                volume_degree,
                edge_degree,
                split_alpha,
            )?,
            boundary: assemble_boundary_quadratic(mesh, dofmap, coeff, edge_degree)?,
            components: 1,
            boundary_dofs: dofmap.boundary_dofs().to_vec(),
            volume_degree,
            edge_degree,
            split_alpha,
            symmetrizer_inv: None,
        })
    }

    /// Constant-coefficient system `U_t + A U_x + B U_y`:
    /// `Q = Q_x ⊗ A + Q_y ⊗ B`, `Bq = B_x ⊗ A + B_y ⊗ B`.
    pub fn system(
        mesh: &Mesh,
        dofmap: &DofMap,
        a: &DenseMatrix,
        b: &DenseMatrix,
        volume_degree: usize,
        edge_degree: usize,
        split_alpha: f64,
    ) -> Result<Self> {
        let m = a.nrows();
        if !a.is_square() || b.nrows() != m || !b.is_square() {
            return Err(Error::DimensionMismatch(
                "A and B must be square and of equal size".into(),
            ));
        }
        let ex = VelocityField::Constant([1.0, 0.0]);
        let ey = VelocityField::Constant([0.0, 1.0]);
        let qx = assemble_stiffness(mesh, dofmap, &ex, volume_degree, edge_degree, split_alpha)?;
        let bx = assemble_boundary_quadratic(mesh, dofmap, &ex, edge_degree)?;
        let (stiffness, boundary) = if mesh.dimension() == 1 {
            (qx.kron(a), bx.kron(a))
        } else {
            let qy =
                assemble_stiffness(mesh, dofmap, &ey, volume_degree, edge_degree, split_alpha)?;
            let by = assemble_boundary_quadratic(mesh, dofmap, &ey, edge_degree)?;
            (
                qx.kron(a).linear_combination(1.0, &qy.kron(b), 1.0),
                bx.kron(a).linear_combination(1.0, &by.kron(b), 1.0),
            )
        };
        Ok(Self {
            mass: assemble_mass(mesh, dofmap, volume_degree)?,
            stiffness,
            boundary,
            components: m,
            boundary_dofs: dofmap.boundary_dofs().to_vec(),
            volume_degree,
            edge_degree,
            split_alpha,
            symmetrizer_inv: None,
        })
    }

    /// Attaches the symmetrizer `P` (`A P`, `B P` symmetric).
    pub fn with_symmetrizer(mut self, p: &DenseMatrix) -> Result<Self> {
        if p.nrows() != self.components || !p.is_square() {
            return Err(Error::DimensionMismatch(
                "symmetrizer size differs from component count".into(),
            ));
        }
        self.symmetrizer_inv = Some(p.inverse()?);
        Ok(self)
    }

    pub fn ndofs(&self) -> usize {
        self.mass.nrows() * self.components
    }

    /// `M ⊗ I_m` as an explicit matrix.
    pub fn mass_block(&self) -> CsrMatrix {
        if self.components == 1 {
            self.mass.clone()
        } else {
            self.mass.kron(&DenseMatrix::identity(self.components))
        }
    }

    /// Boundary mask on the (possibly block-expanded) DoF set.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let m = self.components;
        let mut mask = vec![false; self.ndofs()];
        for &d in &self.boundary_dofs {
            for c in 0..m {
                mask[d * m + c] = true;
            }
        }
        mask
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SbpReport {
    /// Max |Q + Qᵀ − Bq| over entries touching an interior DoF.
    pub interior_residual: f64,
    /// Max |Q + Qᵀ − Bq| over boundary-boundary entries.
    pub boundary_residual: f64,
    pub q_max: f64,
    pub pass: bool,
}

pub fn check_sbp(ops: &GlobalOperators) -> SbpReport {
    let (q, b) = match &ops.symmetrizer_inv {
        Some(w) => (
            ops.stiffness.left_block_diagonal(w),
            ops.boundary.left_block_diagonal(w),
        ),
        None => (ops.stiffness.clone(), ops.boundary.clone()),
    };
    let r = q
        .linear_combination(1.0, &q.transpose(), 1.0)
        .linear_combination(1.0, &b, -1.0);
    let mask = ops.boundary_mask();
    let (mut interior, mut boundary) = (0.0_f64, 0.0_f64);
    for (i, j, v) in r.triplets() {
        if mask[i] && mask[j] {
            boundary = boundary.max(v.abs());
        } else {
            interior = interior.max(v.abs());
        }
    }
    let q_max = q.max_abs();
    let tol = 1e-12 * q_max;
    SbpReport {
        interior_residual: interior,
        boundary_residual: boundary,
        q_max,
        pass: interior <= tol && boundary <= tol,
    }
}

/// Coefficients of the interpolant of `f` (nodal values, converted to
/// Bernstein coefficients where needed). `f` returns `m` components.
pub fn interpolate(
    mesh: &Mesh,
    dofmap: &DofMap,
    m: usize,
    f: impl Fn([f64; 2]) -> Vec<f64>,
) -> Vec<f64> {
    let nloc = dofmap.local_count();
    let coords = dofmap.dof_coords();
    let conv = dofmap.basis().interpolation_matrix();
    let nodal: Vec<Vec<f64>> = coords.iter().map(|&x| f(x)).collect();
    let mut out = vec![0.0; dofmap.ndofs() * m];
    let mut local = vec![0.0; nloc];
    for e in 0..mesh.num_elements() {
        let dofs = dofmap.element_dofs(e);
        for c in 0..m {
            for (k, &d) in dofs.iter().enumerate() {
                local[k] = nodal[d][c];
            }
            let coeffs = conv.matvec(&local);
            for (k, &d) in dofs.iter().enumerate() {
                out[d * m + c] = coeffs[k];
            }
        }
    }
    out
}

/// Solution values at the DoF nodes (identity for Lagrange).
pub fn nodal_values(mesh: &Mesh, dofmap: &DofMap, m: usize, coeffs: &[f64]) -> Vec<f64> {
    if dofmap.kind() == crate::basis::BasisKind::Lagrange {
        return coeffs.to_vec();
    }
    let v = dofmap.basis().nodal_matrix();
    let nloc = dofmap.local_count();
    let mut out = vec![0.0; coeffs.len()];
    let mut local = vec![0.0; nloc];
    for e in 0..mesh.num_elements() {
        let dofs = dofmap.element_dofs(e);
        for c in 0..m {
            for (k, &d) in dofs.iter().enumerate() {
                local[k] = coeffs[d * m + c];
            }
            let vals = v.matvec(&local);
            for (k, &d) in dofs.iter().enumerate() {
                out[d * m + c] = vals[k];
            }
        }
    }
    out
}

/// Writes a sparse matrix in Matrix Market coordinate format (1-based).
pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "%%MatrixMarket matrix coordinate real general");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisKind;
    use crate::dofmap::build_dofmap;
    use crate::linalg::symmetric_eigen;
    use crate::mesh::{interval, unit_disk, unit_square, Mesh};

    fn setup(mesh: &Mesh, p: usize, kind: BasisKind) -> DofMap {
        build_dofmap(mesh, p, kind).unwrap()
    }

    #[test]
    fn interval_mass_p1() {
        let m = interval(2, false, 0).unwrap();
        let d = setup(&m, 1, BasisKind::Lagrange);
        let mass = assemble_mass(&m, &d, 2).unwrap().to_dense();
        let expected = DenseMatrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 2.0]])
            .scale(1.0 / 12.0);
        assert!(mass.sub(&expected).max_abs() < 1e-15);
    }

    #[test]
    fn reference_triangle_mass() {
        let m = Mesh::with_tagger(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![0, 1, 2],
            |_, _| "b".into(),
        )
        .unwrap();
        let d = setup(&m, 1, BasisKind::Lagrange);
        let mass = assemble_mass(&m, &d, 2).unwrap().to_dense();
        let expected = DenseMatrix::from_rows(&[[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])
            .scale(0.5 / 12.0);
        assert!(mass.sub(&expected).max_abs() < 1e-15);
    }

    #[test]
    fn interval_stiffness_p1() {
        let m = interval(2, false, 0).unwrap();
        let d = setup(&m, 1, BasisKind::Lagrange);
        let a = VelocityField::Constant([1.0, 0.0]);
        for alpha in [0.0, 0.5, 1.0] {
            let q = assemble_stiffness(&m, &d, &a, 2, 2, alpha)
                .unwrap()
                .to_dense();
            let expected =
                DenseMatrix::from_rows(&[[-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]])
                    .scale(0.5);
            assert!(q.sub(&expected).max_abs() < 1e-15, "alpha {alpha}");
        }
        let b = assemble_boundary_quadratic(&m, &d, &a, 2)
            .unwrap()
            .to_dense();
        assert!(
            b.sub(&DenseMatrix::from_diagonal(&[-1.0, 0.0, 1.0]))
                .max_abs()
                < 1e-15
        );
    }

    #[test]
    fn mass_totals_and_constant_kernel() {
        let m = unit_square(4).unwrap();
        for kind in [BasisKind::Lagrange, BasisKind::Bernstein] {
            for p in 1..=3 {
                let d = setup(&m, p, kind);
                let deg = default_quad_degree(p);
                let mass = assemble_mass(&m, &d, deg).unwrap();
                let ones = vec![1.0; d.ndofs()];
                let total: f64 = mass.matvec(&ones).iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                let dense = mass.to_dense();
                assert!(dense.asymmetry() < 1e-14);
                let eig = symmetric_eigen(&dense).unwrap();
                assert!(eig.values[0] > 0.0);
                let q =
                    assemble_stiffness(&m, &d, &VelocityField::Constant([1.0, 0.0]), deg, deg, 1.0)
                        .unwrap();
                assert!(crate::linalg::max_abs(&q.matvec(&ones)) < 1e-13);
            }
        }
    }

    #[test]
    fn boundary_form_fluxes() {
        let m = unit_square(3).unwrap();
        let d = setup(&m, 2, BasisKind::Lagrange);
        let b =
            assemble_boundary_quadratic(&m, &d, &VelocityField::Constant([1.0, 0.0]), 4).unwrap();
        let ones = vec![1.0; d.ndofs()];
        assert!(crate::linalg::dot(&ones, &b.matvec(&ones)).abs() < 1e-13);
        let x: Vec<f64> = d.dof_coords().iter().map(|c| c[0]).collect();
        // ∮ x² n_x = 1 (right side) − 0 (left side)
        assert!((crate::linalg::dot(&x, &b.matvec(&x)) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sbp_holds_with_matched_quadrature() {
        let m = unit_square(3).unwrap();
        for kind in [BasisKind::Lagrange, BasisKind::Bernstein] {
            for p in 1..=3 {
                let d = setup(&m, p, kind);
                let deg = default_quad_degree(p);
                let ops = GlobalOperators::scalar(
                    &m,
                    &d,
                    &VelocityField::Constant([1.0, 0.3]),
                    deg,
                    deg,
                    1.0,
                )
                .unwrap();
                let r = check_sbp(&ops);
                assert!(r.pass, "{kind} p={p}: {r:?}");
            }
        }
    }

    #[test]
    fn sbp_rotation_split_form() {
        let m = unit_disk(4).unwrap();
        let d = setup(&m, 2, BasisKind::Lagrange);
        let ops = GlobalOperators::scalar(
            &m,
            &d,
            &VelocityField::Rotation {
                omega: 2.0 * std::f64::consts::PI,
            },
            4,
            4,
            0.5,
        )
        .unwrap();
        let r = check_sbp(&ops);
        assert!(r.interior_residual < 1e-12 * r.q_max, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn degraded_edge_quadrature_breaks_sbp() {
        let m = unit_square(3).unwrap();
        let d = setup(&m, 3, BasisKind::Lagrange);
        let ops = GlobalOperators::scalar(&m, &d, &VelocityField::Constant([1.0, 0.0]), 6, 5, 1.0)
            .unwrap();
        let r = check_sbp(&ops);
        assert!(!r.pass);
        assert!(r.boundary_residual > 1e-8, "{r:?}");
        assert!(r.interior_residual < 1e-12 * r.q_max);
    }

    #[test]
    fn zero_velocity_passes() {
        let m = unit_square(2).unwrap();
        let d = setup(&m, 1, BasisKind::Lagrange);
        let ops = GlobalOperators::scalar(&m, &d, &VelocityField::Constant([0.0, 0.0]), 3, 3, 1.0)
            .unwrap();
        let r = check_sbp(&ops);
        assert!(r.pass);
        assert_eq!((r.interior_residual, r.boundary_residual), (0.0, 0.0));
    }

    #[test]
    fn derivative_accuracy() {
        // M⁻¹ Q x^j = j x^{j−1} at interior nodes (Lagrange, 1D)
        let m = interval(6, true, 2).unwrap();
        for p in 1..=3 {
            let d = setup(&m, p, BasisKind::Lagrange);
            let deg = default_quad_degree(p);
            let ops = GlobalOperators::scalar(
                &m,
                &d,
                &VelocityField::Constant([1.0, 0.0]),
                deg,
                deg,
                1.0,
            )
            .unwrap();
            let mass = ops.mass.to_dense();
            let q = ops.stiffness.to_dense();
            for j in 1..=p as i32 {
                let xj: Vec<f64> = d.dof_coords().iter().map(|c| c[0].powi(j)).collect();
                let du = mass.solve(&q.matvec(&xj)).unwrap();
                for (k, c) in d.dof_coords().iter().enumerate() {
                    let exact = j as f64 * c[0].powi(j - 1);
                    assert!((du[k] - exact).abs() < 1e-10, "p={p} j={j}");
                }
            }
        }
    }

    #[test]
    fn system_block_structure() {
        let m = unit_square(2).unwrap();
        let d = setup(&m, 1, BasisKind::Lagrange);
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]);
        let ops = GlobalOperators::system(&m, &d, &a, &b, 3, 3, 1.0).unwrap();
        let mb = ops.mass_block();
        for (i, j) in [(0, 0), (3, 5), (4, 1), (7, 9)] {
            let expected = if i % 2 == j % 2 {
                ops.mass.get(i / 2, j / 2)
            } else {
                0.0
            };
            assert_eq!(mb.get(i, j), expected);
        }
        assert!(check_sbp(&ops).pass);
    }

    #[test]
    fn bernstein_interpolation_round_trip() {
        let m = unit_disk(3).unwrap();
        let d = setup(&m, 3, BasisKind::Bernstein);
        let f = |x: [f64; 2]| vec![x[0] * x[0] * x[1] - 2.0 * x[1] + 0.25];
        let c = interpolate(&m, &d, 1, f);
        let nodal = nodal_values(&m, &d, 1, &c);
        for (k, x) in d.dof_coords().iter().enumerate() {
            assert!((nodal[k] - f(*x)[0]).abs() < 1e-13);
        }
    }
}
