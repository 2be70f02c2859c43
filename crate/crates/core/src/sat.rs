//! Weakly imposed boundary conditions: the SAT operator Π and the data
//! functional G(t).
//!
//! Every constructor reduces to a pointwise rule on ∂Ω,
//! `Π_n(U, g) = S U + D g` (`S` is `m x m`, `D` is `m x q`), which is then
//! integrated against the test functions with the edge rule used for the
//! boundary form, so the SBP cancellation in `(Π − Q) + (Π − Q)ᵀ` is exact.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use crate::assembly::{boundary_trace, TracePoint, VelocityField};
use crate::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CsrMatrix, DenseMatrix, TripletBuilder};
use crate::mesh::Mesh;

/// Location handed to boundary-data callbacks.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint<'a> {
    pub x: [f64; 2],
    pub normal: [f64; 2],
    pub tag: &'a str,
}

/// Boundary data `g(x, t)` with `q` components.
pub type BoundaryData = Arc<dyn Fn(&BoundaryPoint, f64) -> Vec<f64> + Send + Sync>;

/// Pointwise operator `Π_n(U, g) = state · U + data · g`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseSat {
    pub state: DenseMatrix,
    pub data: DenseMatrix,
}

impl PointwiseSat {
    pub fn apply(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = self.state.matvec(u);
        if self.data.ncols() > 0 {
            for (o, v) in out.iter_mut().zip(self.data.matvec(g)) {
                *o += v;
            }
        }
        out
    }
}

#[derive(Clone)]
struct SatPoint {
    trace: TracePoint,
    tag: usize,
    op: PointwiseSat,
}

/// Assembled SAT: matrix Π on the (block-expanded) DoF set and the data
/// functional G(t).
#[derive(Clone)]
pub struct BoundaryOperator {
    pub pi: CsrMatrix,
    components: usize,
    tags: Vec<String>,
    points: Vec<SatPoint>,
    data: Option<BoundaryData>,
}

impl std::fmt::Debug for BoundaryOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryOperator")
            .field("pi_nnz", &self.pi.nnz())
            .field("components", &self.components)
            .field("points", &self.points.len())
            .field("has_data", &self.data.is_some())
            .finish()
    }
}

impl BoundaryOperator {
    /// Integrates a pointwise rule over ∂Ω.
    pub fn assemble(
        mesh: &Mesh,
        dofmap: &DofMap,
        components: usize,
        edge_degree: usize,
        mut pointwise: impl FnMut(&BoundaryPoint) -> Result<PointwiseSat>,
        data: Option<BoundaryData>,
    ) -> Result<Self> {
        let m = components;
        let n = dofmap.ndofs() * m;
        let mut tags: Vec<String> = Vec::new();
        let mut points = Vec::new();
        let mut t = TripletBuilder::new(n, n);
        for trace in boundary_trace(mesh, dofmap, edge_degree)? {
            let tag_name = &mesh.boundary_faces()[trace.face].tag;
            let tag = match tags.iter().position(|s| s == tag_name) {
                Some(k) => k,
                None => {
                    tags.push(tag_name.clone());
                    tags.len() - 1
                }
            };
            let bp = BoundaryPoint {
                x: trace.x,
                normal: trace.normal,
                tag: tag_name,
            };
            let op = pointwise(&bp)?;
            if op.state.nrows() != m || op.state.ncols() != m || op.data.nrows() != m {
                return Err(Error::DimensionMismatch(format!(
                    "pointwise SAT has shape {}x{} for {m} components",
                    op.state.nrows(),
                    op.state.ncols()
                )));
            }
            for (a, &i) in trace.dofs.iter().enumerate() {
                for (b, &j) in trace.dofs.iter().enumerate() {
                    let w = trace.weight * trace.values[a] * trace.values[b];
                    if w == 0.0 {
                        continue;
                    }
                    for r in 0..m {
                        for c in 0..m {
                            let s = op.state[(r, c)];
                            if s != 0.0 {
                                t.push(i * m + r, j * m + c, w * s);
                            }
                        }
                    }
                }
            }
            points.push(SatPoint { trace, tag, op });
        }
        Ok(Self {
            pi: t.build(),
            components,
            tags,
            points,
            data,
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn has_data(&self) -> bool {
        self.data.is_some()
    }

    /// Same operator with homogeneous data.
    pub fn homogeneous(&self) -> Self {
        Self {
            data: None,
            ..self.clone()
        }
    }

    /// Pointwise operators at the boundary quadrature points:
    /// `(x, normal, tag, operator)`.
    pub fn pointwise(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2], &str, &PointwiseSat)> {
        self.points
            .iter()
            .map(|p| (p.trace.x, p.trace.normal, self.tags[p.tag].as_str(), &p.op))
    }

    /// `G(t)_i = ∮ φ_i D g(x, t)`; zero without data.
    pub fn data_vector(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.pi.nrows()];
        self.add_data(t, &mut out);
        out
    }

    /// Adds G(t) into `out`.
    pub fn add_data(&self, t: f64, out: &mut [f64]) {
        let Some(data) = &self.data else { return };
        let m = self.components;
        for p in &self.points {
            if p.op.data.ncols() == 0 {
                continue;
            }
            let bp = BoundaryPoint {
                x: p.trace.x,
                normal: p.trace.normal,
                tag: &self.tags[p.tag],
            };
            let g = data(&bp, t);
            if g.len() != p.op.data.ncols() {
                // a data callback with the wrong arity is a programming error
                panic!(
                    "boundary data returned {} values, operator expects {}",
                    g.len(),
                    p.op.data.ncols()
                );
            }
            let dg = p.op.data.matvec(&g);
            for (a, &i) in p.trace.dofs.iter().enumerate() {
                let w = p.trace.weight * p.trace.values[a];
                for r in 0..m {
                    out[i * m + r] += w * dg[r];
                }
            }
        }
    }
}

/// Scalar upwind rule `Π_n(u) = σ a_n⁻ (u − g)` with `a_n⁻ = min(a·n, 0)`.
pub fn scalar_upwind(an: f64, strength: f64) -> PointwiseSat {
    let s = strength * an.min(0.0);
    PointwiseSat {
        state: DenseMatrix::from_rows(&[[s]]),
        data: DenseMatrix::from_rows(&[[-s]]),
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau < -0.5 {
        Ok(())
    } else {
        Err(Error::StabilityViolation(format!(
            "SAT penalty tau = {tau} must be < -1/2"
        )))
    }
}

/// 1D scalar SAT with independent penalties `tau = (τ₀, τ_N)`, both < −1/2.
///
/// The penalty weight at each end is `τ |a_n⁻|`: `τ a⁺` at x = 0 and
/// `−τ a⁻` at x = 1, so only inflow ends are penalized. `b(x, t)` supplies
/// the boundary values.
pub fn scalar_sat_1d(
    mesh: &Mesh,
    dofmap: &DofMap,
    a: f64,
    tau: (f64, f64),
    b: Option<BoundaryData>,
) -> Result<BoundaryOperator> {
    check_tau(tau.0)?;
    check_tau(tau.1)?;
    if mesh.dimension() != 1 {
        return Err(Error::InvalidParameter(
            "scalar_sat_1d needs a 1D mesh".into(),
        ));
    }
    BoundaryOperator::assemble(
        mesh,
        dofmap,
        1,
        1,
        |bp| {
            let t = if bp.normal[0] < 0.0 { tau.0 } else { tau.1 };
            Ok(scalar_upwind(a * bp.normal[0], -t))
        },
        b,
    )
}

/// Scalar upwind SAT on any mesh; `strength` (σ > 1/2, default 1) scales the
/// full `a_n⁻` weight.
pub fn scalar_sat_2d(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeff: &VelocityField,
    g: Option<BoundaryData>,
    edge_degree: usize,
    strength: f64,
) -> Result<BoundaryOperator> {
    if !(strength > 0.5) {
        return Err(Error::StabilityViolation(format!(
            "SAT strength {strength} must exceed 1/2"
        )));
    }
    BoundaryOperator::assemble(
        mesh,
        dofmap,
        1,
        edge_degree,
        |bp| {
            let a = coeff.at(bp.x);
            Ok(scalar_upwind(
                a[0] * bp.normal[0] + a[1] * bp.normal[1],
                strength,
            ))
        },
        g,
    )
}

/// Eigen-decomposition of `C_n = A_n P` at one boundary normal.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicDecomposition {
    pub normal: [f64; 2],
    pub a_n: DenseMatrix,
    pub c_n: DenseMatrix,
    pub p_inv: DenseMatrix,
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, first nonzero entry positive.
    pub vectors: DenseMatrix,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    pub zero: Vec<usize>,
}

impl CharacteristicDecomposition {
    pub fn x_plus(&self) -> DenseMatrix {
        self.vectors.select_columns(&self.positive)
    }

    pub fn x_minus(&self) -> DenseMatrix {
        self.vectors.select_columns(&self.negative)
    }

    pub fn lambda_plus(&self) -> DenseMatrix {
        DenseMatrix::from_diagonal(
            &self
                .positive
                .iter()
                .map(|&k| self.values[k])
                .collect::<Vec<_>>(),
        )
    }

    pub fn lambda_minus(&self) -> DenseMatrix {
        DenseMatrix::from_diagonal(
            &self
                .negative
                .iter()
                .map(|&k| self.values[k])
                .collect::<Vec<_>>(),
        )
    }
}

pub fn characteristic_decompose(
    a: &DenseMatrix,
    b: &DenseMatrix,
    p: &DenseMatrix,
    normal: [f64; 2],
) -> Result<CharacteristicDecomposition> {
    let m = a.nrows();
    if [a.ncols(), b.nrows(), b.ncols(), p.nrows(), p.ncols()]
        .iter()
        .any(|&d| d != m)
    {
        return Err(Error::DimensionMismatch("A, B, P must all be m x m".into()));
    }
    if p.asymmetry() > 1e-14 * p.max_abs().max(1.0) {
        return Err(Error::InvalidParameter(
            "symmetrizer P is not symmetric".into(),
        ));
    }
    if symmetric_eigen(p)?.values[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "symmetrizer P is not positive definite".into(),
        ));
    }
    let a_n = a.scale(normal[0]).add(&b.scale(normal[1]));
    let c = a_n.matmul(p);
    let asym = c.asymmetry();
    if asym > 1e-12 * c.max_abs().max(1.0) {
        return Err(Error::NotSymmetrizable(asym));
    }
    let c_n = c.symmetric_part();
    let eig = symmetric_eigen(&c_n)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));
    let values: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
    let mut vectors = DenseMatrix::zeros(m, m);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.vectors.column(k);
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        for (r, x) in v.into_iter().enumerate() {
            vectors[(r, col)] = x;
        }
    }
    let scale = values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    let thr = 1e-10 * scale;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut zero = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        if v > thr {
            positive.push(k);
        } else if v < -thr {
            negative.push(k);
        } else {
            zero.push(k);
        }
    }
    Ok(CharacteristicDecomposition {
        normal,
        a_n,
        c_n,
        p_inv: p.inverse()?,
        values,
        vectors,
        positive,
        negative,
        zero,
    })
}

/// Characteristic SAT enforcing `W⁻ − R W⁺ = g` with `W = Xᵀ P⁻¹ U` and
/// weight `Λ⁻`:
///
/// `state = σ X₋ Λ⁻ (X₋ᵀ − R X₊ᵀ) P⁻¹`, `data = −σ X₋ Λ⁻`.
///
/// `R` is `#negative x #positive` (pass an empty matrix of that shape for
/// pure upwinding). Requires `Λ⁺ + Rᵀ Λ⁻ R` positive definite; the strength
/// σ may differ from 1 only when `R = 0`.
pub fn build_pi_system(
    decomp: &CharacteristicDecomposition,
    r: &DenseMatrix,
    strength: f64,
) -> Result<PointwiseSat> {
    let (nn, np) = (decomp.negative.len(), decomp.positive.len());
    if r.nrows() != nn || r.ncols() != np {
        return Err(Error::DimensionMismatch(format!(
            "reflection matrix is {}x{}, expected {nn}x{np}",
            r.nrows(),
            r.ncols()
        )));
    }
    let lp = decomp.lambda_plus();
    let lm = decomp.lambda_minus();
    if np > 0 {
        let cond = lp.add(&r.transpose().matmul(&lm).matmul(r));
        let min = symmetric_eigen(&cond.symmetric_part())?.values[0];
        let scale = decomp.values.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        if min <= 1e-12 * scale {
            return Err(Error::StabilityViolation(format!(
                "Λ⁺ + RᵀΛ⁻R is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
    }
    let r_is_zero = r.max_abs() == 0.0;
    if strength != 1.0 && !r_is_zero {
        return Err(Error::InvalidParameter(
            "SAT strength other than 1 is only supported for R = 0".into(),
        ));
    }
    if !(strength > 0.5) {
        return Err(Error::StabilityViolation(format!(
            "SAT strength {strength} must exceed 1/2"
        )));
    }
    let xm = decomp.x_minus();
    let xp = decomp.x_plus();
    let xl = xm.matmul(&lm).scale(strength);
    let inner = if np > 0 {
        xm.transpose().sub(&r.matmul(&xp.transpose()))
    } else {
        xm.transpose()
    };
    Ok(PointwiseSat {
        state: xl.matmul(&inner).matmul(&decomp.p_inv),
        data: xl.scale(-1.0),
    })
}

/// Characteristic SAT for a constant-coefficient system with a reflection
/// matrix per boundary tag (missing tags mean pure upwinding).
#[allow(clippy::too_many_arguments)]
pub fn system_sat(
    mesh: &Mesh,
    dofmap: &DofMap,
    a: &DenseMatrix,
    b: &DenseMatrix,
    p: &DenseMatrix,
    reflection: &[(String, DenseMatrix)],
    strength: f64,
    edge_degree: usize,
    data: Option<BoundaryData>,
) -> Result<BoundaryOperator> {
    BoundaryOperator::assemble(
        mesh,
        dofmap,
        a.nrows(),
        edge_degree,
        |bp| {
            let d = characteristic_decompose(a, b, p, bp.normal)?;
            let r = reflection
                .iter()
                .find(|(tag, _)| tag == bp.tag)
                .map(|(_, r)| r.clone())
                .unwrap_or_else(|| DenseMatrix::zeros(d.negative.len(), d.positive.len()));
            build_pi_system(&d, &r, strength)
        },
        data,
    )
}

// ---------------------------------------------------------------------------
// R13 heat-conduction sub-system, U = (θ, s_x, s_y, R_xx, R_xy, R_yy)

/// `A cos γ + B sin γ` for the R13 sub-system.
pub fn r13_a_n(gamma: f64) -> DenseMatrix {
    let (s, c) = gamma.sin_cos();
    DenseMatrix::from_rows(&[
        [0.0, c, s, 0.0, 0.0, 0.0],
        [c, 0.0, 0.0, c, s, 0.0],
        [s, 0.0, 0.0, 0.0, c, s],
        [0.0, c, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5 * s, 0.5 * c, 0.0, 0.0, 0.0],
        [0.0, 0.0, s, 0.0, 0.0, 0.0],
    ])
}

pub fn r13_symmetrizer() -> DenseMatrix {
    DenseMatrix::from_diagonal(&[1.0, 1.0, 1.0, 1.0, 0.5, 1.0])
}

/// Boundary operator `L_n` of the Maxwell accommodation model (2 x 6).
pub fn r13_l_n(alpha: f64, beta: f64, gamma: f64) -> DenseMatrix {
    let (s, c) = gamma.sin_cos();
    DenseMatrix::from_rows(&[
        [
            -alpha,
            c,
            s,
            -alpha * c * c,
            -2.0 * alpha * c * s,
            -alpha * s * s,
        ],
        [0.0, -beta * s, beta * c, -c * s, (2.0 * gamma).cos(), s * c],
    ])
}

/// Rotation of U into the frame (normal, tangential) at angle γ.
pub fn r13_frame_rotation(gamma: f64) -> DenseMatrix {
    let (s, c) = gamma.sin_cos();
    let mut t = DenseMatrix::zeros(6, 6);
    t[(0, 0)] = 1.0;
    t[(1, 1)] = c;
    t[(1, 2)] = s;
    t[(2, 1)] = -s;
    t[(2, 2)] = c;
    let tensor = [
        [c * c, 2.0 * c * s, s * s],
        [-c * s, c * c - s * s, c * s],
        [s * s, -2.0 * c * s, c * c],
    ];
    for i in 0..3 {
        for j in 0..3 {
            t[(3 + i, 3 + j)] = tensor[i][j];
        }
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum R13Variant {
    /// `Π = (½A_n + λI) P L_nᵀ (L_n P L_nᵀ)⁻¹`, λ ≤ ½ min eig(A_n).
    EigenShift { lambda: f64 },
    /// `Π₀ = P^{-1/2}(δ P^{-1/2} + ½A₀) L₀ᵀ (L₀ L₀ᵀ)⁻¹` with δ < 0, built in
    /// the boundary-aligned frame (γ = 0) and rotated back with `T(γ)⁻¹`.
    Identity { delta: f64 },
}

/// `Π` (6 x 2) for the R13 boundary at outward-normal angle γ, applied as
/// `Π (L_n U − G_n)`; validated to give a non-positive boundary energy
/// contribution in the `P⁻¹` norm.
pub fn build_pi_r13(alpha: f64, beta: f64, gamma: f64, variant: R13Variant) -> Result<DenseMatrix> {
    let p = r13_symmetrizer();
    let l = r13_l_n(alpha, beta, gamma);
    let a_n = r13_a_n(gamma);
    let pi = match variant {
        R13Variant::EigenShift { lambda } => {
            let bound = -0.5 * std::f64::consts::SQRT_2;
            if lambda > bound {
                return Err(Error::StabilityViolation(format!(
                    "eigen-shift λ = {lambda} must be ≤ ½ min eig(A_n) = {bound:.6}"
                )));
            }
            let lpl = l.matmul(&p).matmul(&l.transpose());
            let shifted = a_n.scale(0.5).add(&DenseMatrix::identity(6).scale(lambda));
            shifted
                .matmul(&p)
                .matmul(&l.transpose())
                .matmul(&lpl.inverse()?)
        }
        R13Variant::Identity { delta } => {
            if !(delta < 0.0) {
                return Err(Error::StabilityViolation(format!(
                    "δ = {delta} must be negative"
                )));
            }
            let p_isqrt = DenseMatrix::from_diagonal(&[1.0, 1.0, 1.0, 1.0, 2f64.sqrt(), 1.0]);
            let l0 = r13_l_n(alpha, beta, 0.0);
            let a0 = r13_a_n(0.0);
            let ll = l0.matmul(&l0.transpose());
            let pi0 = p_isqrt
                .matmul(&p_isqrt.scale(delta).add(&a0.scale(0.5)))
                .matmul(&l0.transpose())
                .matmul(&ll.inverse()?);
            r13_frame_rotation(gamma).inverse()?.matmul(&pi0)
        }
    };
    // boundary energy production: sym(P⁻¹ (Π L_n − ½ A_n)) ⪯ 0
    let p_inv = p.inverse()?;
    let k = p_inv
        .matmul(&pi.matmul(&l).sub(&a_n.scale(0.5)))
        .symmetric_part();
    let max = symmetric_eigen(&k)?.values[5];
    if max > 1e-12 {
        return Err(Error::StabilityViolation(format!(
            "R13 boundary operator produces energy: largest eigenvalue {max:e} at γ = {gamma}"
        )));
    }
    Ok(pi)
}

/// R13 data `G_n`: `(−α θ₀, −u_x sin γ + u_y cos γ)` on the tag `inner`,
/// `(−α θ₁, 0)` elsewhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R13Data {
    pub alpha: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub ux: f64,
    pub uy: f64,
}

impl R13Data {
    pub fn g(&self, bp: &BoundaryPoint) -> Vec<f64> {
        let gamma = bp.normal[1].atan2(bp.normal[0]);
        if bp.tag == "inner" {
            vec![
                -self.alpha * self.theta0,
                -self.ux * gamma.sin() + self.uy * gamma.cos(),
            ]
        } else {
            vec![-self.alpha * self.theta1, 0.0]
        }
    }
}

pub fn r13_sat(
    mesh: &Mesh,
    dofmap: &DofMap,
    alpha: f64,
    beta: f64,
    variant: R13Variant,
    edge_degree: usize,
    data: Option<BoundaryData>,
) -> Result<BoundaryOperator> {
    BoundaryOperator::assemble(
        mesh,
        dofmap,
        6,
        edge_degree,
        |bp| {
            let gamma = bp.normal[1].atan2(bp.normal[0]);
            let pi = build_pi_r13(alpha, beta, gamma, variant)?;
            Ok(PointwiseSat {
                state: pi.matmul(&r13_l_n(alpha, beta, gamma)),
                data: pi.scale(-1.0),
            })
        },
        data,
    )
}

/// Characteristic matrix of the 1D wave system at `n = ±1`, handy for tests.
pub fn wave_eigenvectors() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::GlobalOperators;
    use crate::basis::BasisKind;
    use crate::dofmap::build_dofmap;
    use crate::mesh::{interval, unit_square};

    #[test]
    fn sat_1d_left_inflow() {
        let m = interval(2, false, 0).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        let b: BoundaryData = Arc::new(|_, _| vec![0.0]);
        let op = scalar_sat_1d(&m, &d, 1.0, (-1.0, -1.0), Some(b)).unwrap();
        let u = [2.0, 0.0, 0.0];
        let r = op.pi.matvec(&u);
        assert_eq!(r, vec![-2.0, 0.0, 0.0]);
        let op = scalar_sat_1d(&m, &d, -1.0, (-1.0, -1.0), None).unwrap();
        assert_eq!(op.pi.get(0, 0), 0.0);
        assert_eq!(op.pi.get(2, 2), -1.0);
    }

    #[test]
    fn sat_1d_rejects_weak_penalty() {
        let m = interval(2, false, 0).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        assert!(matches!(
            scalar_sat_1d(&m, &d, 1.0, (-0.49, -1.0), None),
            Err(Error::StabilityViolation(_))
        ));
        assert!(scalar_sat_1d(&m, &d, 1.0, (-0.51, -0.51), None).is_ok());
    }

    #[test]
    fn sat_1d_data_functional() {
        let m = interval(2, false, 0).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        let b: BoundaryData = Arc::new(|bp, t| vec![if bp.tag == "left" { 3.0 * t } else { 5.0 }]);
        let op = scalar_sat_1d(&m, &d, 1.0, (-1.0, -1.0), Some(b)).unwrap();
        // G = −τ a⁺ b₀ at the left end only
        assert_eq!(op.data_vector(2.0), vec![6.0, 0.0, 0.0]);
    }

    #[test]
    fn scalar_2d_inflow_only() {
        let m = unit_square(2).unwrap();
        let d = build_dofmap(&m, 1, BasisKind::Lagrange).unwrap();
        let op = scalar_sat_2d(&m, &d, &VelocityField::Constant([1.0, 0.0]), None, 2, 1.0).unwrap();
        for (x, n, tag, p) in op.pointwise() {
            let s = p.state[(0, 0)];
            match tag {
                "left" => assert_eq!(s, -1.0, "{x:?}"),
                _ => assert_eq!(s, 0.0, "{tag} {n:?}"),
            }
        }
    }

    #[test]
    fn wave_decomposition() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let z = DenseMatrix::zeros(2, 2);
        let d = characteristic_decompose(&a, &z, &DenseMatrix::identity(2), [1.0, 0.0]).unwrap();
        assert!((d.values[0] - 1.0).abs() < 1e-14 && (d.values[1] + 1.0).abs() < 1e-14);
        assert!(d.vectors.sub(&wave_eigenvectors()).max_abs() < 1e-14);
    }

    #[test]
    fn zero_operator_decomposition() {
        let z = DenseMatrix::zeros(3, 3);
        let d = characteristic_decompose(&z, &z, &DenseMatrix::identity(3), [0.6, 0.8]).unwrap();
        assert_eq!(d.values, vec![0.0; 3]);
        assert_eq!(d.vectors, DenseMatrix::identity(3));
        assert_eq!(d.zero.len(), 3);
    }

    #[test]
    fn non_symmetrizable_rejected() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [2.0, 0.0]]);
        let z = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            characteristic_decompose(&a, &z, &DenseMatrix::identity(2), [1.0, 0.0]),
            Err(Error::NotSymmetrizable(_))
        ));
    }

    #[test]
    fn wave_reflection_bounds() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let z = DenseMatrix::zeros(2, 2);
        let d = characteristic_decompose(&a, &z, &DenseMatrix::identity(2), [-1.0, 0.0]).unwrap();
        for r in [0.0, 0.5, -0.99] {
            assert!(build_pi_system(&d, &DenseMatrix::from_rows(&[[r]]), 1.0).is_ok());
        }
        for r in [1.0, -1.0, 1.5] {
            assert!(matches!(
                build_pi_system(&d, &DenseMatrix::from_rows(&[[r]]), 1.0),
                Err(Error::StabilityViolation(_))
            ));
        }
        // W⁻ at x = 0 is (u + v)/√2
        let op = build_pi_system(&d, &DenseMatrix::from_rows(&[[0.0]]), 1.0).unwrap();
        let e = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.x_minus()[(0, 0)] - e).abs() < 1e-15 && (d.x_minus()[(1, 0)] - e).abs() < 1e-15);
        // Π(U) = −X₋ (W⁻ − g) with Λ⁻ = −1
        let out = op.apply(&[1.0, 1.0], &[0.0]);
        assert!((out[0] + 1.0).abs() < 1e-14 && (out[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_characteristic_matches_upwind() {
        let one = DenseMatrix::identity(1);
        for (nx, ny) in [(0.6, 0.8), (-1.0, 0.0), (0.0, -1.0), (-0.28, 0.96)] {
            let a = DenseMatrix::from_rows(&[[0.7]]);
            let b = DenseMatrix::from_rows(&[[-0.4]]);
            let d = characteristic_decompose(&a, &b, &one, [nx, ny]).unwrap();
            let r = DenseMatrix::zeros(d.negative.len(), d.positive.len());
            let op = build_pi_system(&d, &r, 1.0).unwrap();
            let expected = scalar_upwind(0.7 * nx - 0.4 * ny, 1.0);
            assert!((op.state[(0, 0)] - expected.state[(0, 0)]).abs() < 1e-14);
            if d.negative.is_empty() {
                assert_eq!(op.data.ncols(), 0);
            } else {
                assert!((op.data[(0, 0)] - expected.data[(0, 0)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn r13_structure() {
        let p = r13_symmetrizer();
        let l = r13_l_n(3.0, -0.5, 0.0);
        assert_eq!(l.row(0), &[-3.0, 1.0, 0.0, -3.0, 0.0, 0.0]);
        for gamma in [0.0, 0.3, 1.7, -2.4] {
            let l = r13_l_n(3.0, -0.5, gamma);
            let lpl = l.matmul(&p).matmul(&l.transpose());
            assert!(
                lpl.sub(&DenseMatrix::from_diagonal(&[19.0, 0.75]))
                    .max_abs()
                    < 1e-13
            );
            // frame rotation relations
            let t = r13_frame_rotation(gamma);
            assert!(l.sub(&r13_l_n(3.0, -0.5, 0.0).matmul(&t)).max_abs() < 1e-14);
            let rot = t.inverse().unwrap().matmul(&r13_a_n(0.0)).matmul(&t);
            assert!(rot.sub(&r13_a_n(gamma)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn r13_operators_dissipate() {
        for gamma in (0..24).map(|k| k as f64 * 0.27) {
            for v in [
                R13Variant::Identity { delta: -2.0 },
                R13Variant::Identity { delta: -0.5 },
                R13Variant::EigenShift { lambda: -1.0 },
            ] {
                build_pi_r13(3.0, -0.5, gamma, v).unwrap();
            }
        }
        assert!(build_pi_r13(3.0, -0.5, 0.0, R13Variant::Identity { delta: 0.5 }).is_err());
        assert!(build_pi_r13(3.0, -0.5, 0.0, R13Variant::EigenShift { lambda: -0.1 }).is_err());
    }

    #[test]
    fn system_sat_certificate_on_square() {
        let m = unit_square(3).unwrap();
        let d = build_dofmap(&m, 2, BasisKind::Lagrange).unwrap();
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, -1.0]]);
        let ops = GlobalOperators::system(&m, &d, &a, &b, 4, 4, 1.0).unwrap();
        let sat = system_sat(&m, &d, &a, &b, &DenseMatrix::identity(2), &[], 1.0, 4, None).unwrap();
        let s = crate::spectra::stability_matrix(&ops, Some(&sat)).unwrap();
        let max = *symmetric_eigen(&s).unwrap().values.last().unwrap();
        assert!(max <= 1e-12 * ops.stiffness.max_abs(), "{max}");
    }
}
