//! Reference-element Lagrange (equispaced) and Bernstein bases on the unit
//! interval and the unit triangle, up to order 3.
//!
//! Local degrees of freedom are labelled by barycentric multi-indices
//! `(i0, i1, i2)` with `i0 + i1 + i2 = p`, ordered vertices first, then the
//! interior points of each face (face `f` runs from vertex `f` to vertex
//! `f + 1`), then element-interior points. The same layout is used for
//! Lagrange nodes and Bernstein control points.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const MAX_ORDER: usize = 3;
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Lagrange,
    Bernstein,
}

impl FromStr for BasisKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lagrange" | "p" => Ok(Self::Lagrange),
            "bernstein" | "b" => Ok(Self::Bernstein),
            other => Err(Error::InvalidParameter(format!(
                "unknown basis kind {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lagrange => "lagrange",
            Self::Bernstein => "bernstein",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefDomain {
    Interval,
    Triangle,
}

impl RefDomain {
    pub fn for_dimension(dim: usize) -> Self {
        if dim == 1 {
            Self::Interval
        } else {
            Self::Triangle
        }
    }

    pub fn vertex_count(self) -> usize {
        match self {
            Self::Interval => 2,
            Self::Triangle => 3,
        }
    }

    pub fn contains(self, p: [f64; 2]) -> bool {
        match self {
            Self::Interval => p[0] >= -DOMAIN_TOL && p[0] <= 1.0 + DOMAIN_TOL,
            Self::Triangle => {
                p[0] >= -DOMAIN_TOL && p[1] >= -DOMAIN_TOL && p[0] + p[1] <= 1.0 + DOMAIN_TOL
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    kind: BasisKind,
    order: usize,
    domain: RefDomain,
    indices: Vec<[usize; 3]>,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, order: usize, domain: RefDomain) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(Self {
            kind,
            order,
            domain,
            indices: local_layout(order, domain),
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn domain(&self) -> RefDomain {
        self.domain
    }

    pub fn ndofs(&self) -> usize {
        self.indices.len()
    }

    pub fn multi_indices(&self) -> &[[usize; 3]] {
        &self.indices
    }

    /// Reference coordinates of the nodes (Lagrange) or control points
    /// (Bernstein), in local DoF order.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        let p = self.order as f64;
        self.indices
            .iter()
            .map(|idx| [idx[1] as f64 / p, idx[2] as f64 / p])
            .collect()
    }

    /// Local DoFs whose basis function does not vanish on face `f`.
    pub fn face_dofs(&self, face: usize) -> Vec<usize> {
        match self.domain {
            RefDomain::Interval => vec![face],
            RefDomain::Triangle => {
                let opposite = (face + 2) % 3;
                (0..self.ndofs())
                    .filter(|&k| self.indices[k][opposite] == 0)
                    .collect()
            }
        }
    }

    pub fn eval(&self, point: [f64; 2]) -> Result<Vec<f64>> {
        self.check(point)?;
        Ok(self.eval_unchecked(point))
    }

    pub fn eval_grad(&self, point: [f64; 2]) -> Result<Vec<[f64; 2]>> {
        self.check(point)?;
        Ok(self.grad_unchecked(point))
    }

    fn check(&self, point: [f64; 2]) -> Result<()> {
        if self.domain.contains(point) {
            Ok(())
        } else {
            Err(Error::OutsideReference(point.to_vec()))
        }
    }

    fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let lam = match self.domain {
            RefDomain::Interval => [1.0 - p[0], p[0], 0.0],
            RefDomain::Triangle => [1.0 - p[0] - p[1], p[0], p[1]],
        };
        match self.kind {
            // keep Bernstein values nonnegative under roundoff at the boundary
            BasisKind::Bernstein => lam.map(|l| l.max(0.0)),
            BasisKind::Lagrange => lam,
        }
    }

    pub fn eval_unchecked(&self, point: [f64; 2]) -> Vec<f64> {
        let lam = self.barycentric(point);
        self.indices
            .iter()
            .map(|idx| match self.kind {
                BasisKind::Lagrange => (0..3)
                    .map(|k| lagrange_factor(self.order, idx[k], lam[k]).0)
                    .product(),
                BasisKind::Bernstein => bernstein(self.order, idx, lam),
            })
            .collect()
    }

    pub fn grad_unchecked(&self, point: [f64; 2]) -> Vec<[f64; 2]> {
        let lam = self.barycentric(point);
        self.indices
            .iter()
            .map(|idx| {
                // derivatives with respect to each barycentric coordinate
                let dlam: [f64; 3] = match self.kind {
                    BasisKind::Lagrange => {
                        let f: Vec<(f64, f64)> = (0..3)
                            .map(|k| lagrange_factor(self.order, idx[k], lam[k]))
                            .collect();
                        [
                            f[0].1 * f[1].0 * f[2].0,
                            f[0].0 * f[1].1 * f[2].0,
                            f[0].0 * f[1].0 * f[2].1,
                        ]
                    }
                    BasisKind::Bernstein => bernstein_dlam(self.order, idx, lam),
                };
                match self.domain {
                    RefDomain::Interval => [dlam[1] - dlam[0], 0.0],
                    RefDomain::Triangle => [dlam[1] - dlam[0], dlam[2] - dlam[0]],
                }
            })
            .collect()
    }

    /// Matrix `V` with `V[i][j] = φ_j(node_i)`: maps coefficients to nodal
    /// values. Identity for the Lagrange basis.
    pub fn nodal_matrix(&self) -> DenseMatrix {
        let nodes = self.nodes();
        let n = self.ndofs();
        let mut v = DenseMatrix::zeros(n, n);
        for (i, node) in nodes.iter().enumerate() {
            for (j, val) in self.eval_unchecked(*node).into_iter().enumerate() {
                v[(i, j)] = val;
            }
        }
        v
    }

    /// Maps nodal values to coefficients (inverse of [`Self::nodal_matrix`]).
    pub fn interpolation_matrix(&self) -> DenseMatrix {
        match self.kind {
            BasisKind::Lagrange => DenseMatrix::identity(self.ndofs()),
            BasisKind::Bernstein => self
                .nodal_matrix()
                .inverse()
                .expect("Bernstein nodal matrix is invertible on the equispaced lattice"),
        }
    }
}

fn local_layout(p: usize, domain: RefDomain) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    match domain {
        RefDomain::Interval => {
            out.push([p, 0, 0]);
            out.push([0, p, 0]);
            for t in 1..p {
                out.push([p - t, t, 0]);
            }
        }
        RefDomain::Triangle => {
            for v in 0..3 {
                let mut idx = [0; 3];
                idx[v] = p;
                out.push(idx);
            }
            for f in 0..3 {
                let (a, b) = (f, (f + 1) % 3);
                for t in 1..p {
                    let mut idx = [0; 3];
                    idx[a] = p - t;
                    idx[b] = t;
                    out.push(idx);
                }
            }
            for i1 in 1..p {
                for i2 in 1..p {
                    if i1 + i2 < p {
                        out.push([p - i1 - i2, i1, i2]);
                    }
                }
            }
        }
    }
    out
}

// ℓ_i(s) = Π_{m<i} (p s - m) / (m + 1) and its derivative.
fn lagrange_factor(p: usize, i: usize, s: f64) -> (f64, f64) {
    let pf = p as f64;
    let mut value = 1.0;
    let mut deriv = 0.0;
    for m in 0..i {
        let mf = m as f64;
        let factor = (pf * s - mf) / (mf + 1.0);
        let dfactor = pf / (mf + 1.0);
        deriv = deriv * factor + value * dfactor;
        value *= factor;
    }
    (value, deriv)
}

fn multinomial(p: usize, idx: &[usize; 3]) -> f64 {
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    fact(p) / (fact(idx[0]) * fact(idx[1]) * fact(idx[2]))
}

fn bernstein(p: usize, idx: &[usize; 3], lam: [f64; 3]) -> f64 {
    multinomial(p, idx) * (0..3).map(|k| lam[k].powi(idx[k] as i32)).product::<f64>()
}

fn bernstein_dlam(p: usize, idx: &[usize; 3], lam: [f64; 3]) -> [f64; 3] {
    let c = multinomial(p, idx);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        if idx[k] == 0 {
            continue;
        }
        let mut term = c * idx[k] as f64 * lam[k].powi(idx[k] as i32 - 1);
        for j in 0..3 {
            if j != k {
                term *= lam[j].powi(idx[j] as i32);
            }
        }
        *o = term;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<BasisSpec> {
        let mut v = Vec::new();
        for kind in [BasisKind::Lagrange, BasisKind::Bernstein] {
            for domain in [RefDomain::Interval, RefDomain::Triangle] {
                for p in 1..=3 {
                    v.push(BasisSpec::new(kind, p, domain).unwrap());
                }
            }
        }
        v
    }

    #[test]
    fn local_dof_counts() {
        for s in all_specs() {
            let expected = match s.domain() {
                RefDomain::Interval => s.order() + 1,
                RefDomain::Triangle => (s.order() + 1) * (s.order() + 2) / 2,
            };
            assert_eq!(s.ndofs(), expected);
        }
    }

    #[test]
    fn lagrange_p1_interval_at_zero() {
        let s = BasisSpec::new(BasisKind::Lagrange, 1, RefDomain::Interval).unwrap();
        assert_eq!(s.eval([0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            s.eval_grad([0.3, 0.0]).unwrap(),
            vec![[-1.0, 0.0], [1.0, 0.0]]
        );
    }

    #[test]
    fn bernstein_p2_interval_midpoint() {
        let s = BasisSpec::new(BasisKind::Bernstein, 2, RefDomain::Interval).unwrap();
        // local order: vertex 0, vertex 1, interior -> B0, B2, B1
        let v = s.eval([0.5, 0.0]).unwrap();
        assert_eq!(v, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn lagrange_p1_triangle_gradients() {
        let s = BasisSpec::new(BasisKind::Lagrange, 1, RefDomain::Triangle).unwrap();
        for p in [[0.1, 0.2], [0.7, 0.05], [0.0, 1.0]] {
            let g = s.eval_grad(p).unwrap();
            assert_eq!(g, vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
        }
    }

    #[test]
    fn lagrange_is_nodal() {
        for s in all_specs()
            .into_iter()
            .filter(|s| s.kind() == BasisKind::Lagrange)
        {
            let v = s.nodal_matrix();
            assert!(v.sub(&DenseMatrix::identity(s.ndofs())).max_abs() < 1e-14);
        }
    }

    #[test]
    fn partition_of_unity_and_gradient_sum() {
        let pts = [[1.0 / 3.0, 1.0 / 3.0], [0.2, 0.1], [0.0, 0.0], [0.5, 0.5]];
        for s in all_specs() {
            for mut p in pts {
                if s.domain() == RefDomain::Interval {
                    p[1] = 0.0;
                }
                let v = s.eval(p).unwrap();
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
                let g = s.eval_grad(p).unwrap();
                let gx: f64 = g.iter().map(|d| d[0]).sum();
                let gy: f64 = g.iter().map(|d| d[1]).sum();
                assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bernstein_nonnegative() {
        let s = BasisSpec::new(BasisKind::Bernstein, 3, RefDomain::Triangle).unwrap();
        for i in 0..=10 {
            for j in 0..=(10 - i) {
                let v = s.eval([i as f64 / 10.0, j as f64 / 10.0]).unwrap();
                assert!(v.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn bernstein_p3_gradient_matches_finite_differences() {
        let s = BasisSpec::new(BasisKind::Bernstein, 3, RefDomain::Triangle).unwrap();
        let p = [0.237, 0.411];
        let h = 1e-6;
        let g = s.eval_grad(p).unwrap();
        let fx = |dx: f64, dy: f64| s.eval([p[0] + dx, p[1] + dy]).unwrap();
        let (xp, xm, yp, ym) = (fx(h, 0.0), fx(-h, 0.0), fx(0.0, h), fx(0.0, -h));
        for k in 0..s.ndofs() {
            let dx = (xp[k] - xm[k]) / (2.0 * h);
            let dy = (yp[k] - ym[k]) / (2.0 * h);
            assert!((dx - g[k][0]).abs() < 1e-6, "dof {k}");
            assert!((dy - g[k][1]).abs() < 1e-6, "dof {k}");
        }
    }

    #[test]
    fn outside_point_rejected() {
        let s = BasisSpec::new(BasisKind::Lagrange, 2, RefDomain::Triangle).unwrap();
        assert!(matches!(
            s.eval([0.8, 0.3]),
            Err(Error::OutsideReference(_))
        ));
        assert!(BasisSpec::new(BasisKind::Lagrange, 4, RefDomain::Triangle).is_err());
    }

    #[test]
    fn face_dofs_layout() {
        let s = BasisSpec::new(BasisKind::Bernstein, 3, RefDomain::Triangle).unwrap();
        assert_eq!(s.face_dofs(0), vec![0, 1, 3, 4]);
        assert_eq!(s.face_dofs(1), vec![1, 2, 5, 6]);
        assert_eq!(s.face_dofs(2), vec![0, 2, 7, 8]);
    }

    #[test]
    fn both_bases_reproduce_polynomials() {
        // interpolate q(x, y) = 1 + x - 2y + x y (degree 2) and x^3 - y^2 x for p = 3
        type Poly = fn([f64; 2]) -> f64;
        let polys: [(usize, Poly); 2] = [
            (2, |p| 1.0 + p[0] - 2.0 * p[1] + p[0] * p[1]),
            (3, |p| p[0].powi(3) - p[1] * p[1] * p[0] + 0.5),
        ];
        for kind in [BasisKind::Lagrange, BasisKind::Bernstein] {
            for (p, q) in polys {
                let s = BasisSpec::new(kind, p, RefDomain::Triangle).unwrap();
                let nodal: Vec<f64> = s.nodes().into_iter().map(q).collect();
                let coeffs = s.interpolation_matrix().matvec(&nodal);
                for pt in [[0.1, 0.7], [0.33, 0.21], [0.9, 0.05]] {
                    let v = s.eval(pt).unwrap();
                    let uh: f64 = v.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
                    assert!((uh - q(pt)).abs() < 1e-12);
                }
            }
        }
    }
}
