//! A problem pushed through the whole pipeline: mesh, DoFs, operators, SAT
//! and the semidiscrete system `M du/dt = (Π − Q − M D) u + G(t)`.

use crate::assembly::{
    check_sbp, default_quad_degree, interpolate, nodal_values, ElementMap, GlobalOperators,
    SbpReport, Tabulation,
};
use crate::dofmap::{build_dofmap, DofMap};
use crate::error::{Error, Result};
use crate::linalg::{dot, CsrMatrix, DenseMatrix, EnvelopeCholesky};
use crate::mesh::{generate_mesh, Mesh};
use crate::problems::{BoundarySpec, Coefficients, ProblemSpec};
use crate::sat::{
    r13_sat, scalar_sat_1d, scalar_sat_2d, system_sat, BoundaryData, BoundaryOperator,
};
use crate::spectra::{spectrum_report, SpectrumReport};
use crate::timeint::{mass_solve, run, Evolution, IntegratorConfig, MassSolver, Trajectory};

pub struct Discretization {
    pub problem: ProblemSpec,
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub ops: GlobalOperators,
    pub sat: BoundaryOperator,
    /// Inverse symmetrizer for systems.
    pub p_inv: Option<DenseMatrix>,
    mass: CsrMatrix,
    operator: CsrMatrix,
    energy_weight: CsrMatrix,
    warm: Vec<f64>,
    buf: Vec<f64>,
    mass_tol: f64,
    max_iter: usize,
    solver: MassSolver,
    factor: Option<EnvelopeCholesky>,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("problem", &self.problem.name)
            .field("elements", &self.mesh.num_elements())
            .field("unknowns", &self.ops.ndofs())
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2_m: f64,
    pub linf: f64,
}

impl Discretization {
    pub fn new(problem: &ProblemSpec) -> Result<Self> {
        Self::with_mesh(problem, generate_mesh(&problem.mesh)?)
    }

    pub fn with_mesh(problem: &ProblemSpec, mesh: Mesh) -> Result<Self> {
        if mesh.dimension() != problem.dimension {
            return Err(Error::DimensionMismatch(format!(
                "problem '{}' is {}D, mesh is {}D",
                problem.name,
                problem.dimension,
                mesh.dimension()
            )));
        }
        let dofmap = build_dofmap(&mesh, problem.order, problem.basis)?;
        let vol = problem
            .volume_degree
            .unwrap_or_else(|| default_quad_degree(problem.order));
        let edge = problem.edge_degree.unwrap_or(vol);
        let (ops, p_inv) = match &problem.coefficients {
            Coefficients::Scalar(v) => (
                GlobalOperators::scalar(&mesh, &dofmap, v, vol, edge, problem.split_alpha)?,
                None,
            ),
            Coefficients::System { a, b, p } => {
                let ops =
                    GlobalOperators::system(&mesh, &dofmap, a, b, vol, edge, problem.split_alpha)?
                        .with_symmetrizer(p)?;
                let w = ops.symmetrizer_inv.clone();
                (ops, w)
            }
        };
        if ops.components != problem.components {
            return Err(Error::DimensionMismatch(format!(
                "problem declares {} components, coefficients have {}",
                problem.components, ops.components
            )));
        }
        let sat = build_sat(problem, &mesh, &dofmap, edge)?;
        let mass = ops.mass_block();
        let mut operator = sat.pi.linear_combination(1.0, &ops.stiffness, -1.0);
        if let Some(d) = &problem.damping {
            if d.len() != problem.components {
                return Err(Error::DimensionMismatch(
                    "damping rates per component".into(),
                ));
            }
            operator = operator.linear_combination(
                1.0,
                &ops.mass.kron(&DenseMatrix::from_diagonal(d)),
                -1.0,
            );
        }
        let energy_weight = match &p_inv {
            Some(w) => ops.mass.kron(w),
            None => mass.clone(),
        };
        let n = ops.ndofs();
        Ok(Self {
            problem: problem.clone(),
            mesh,
            dofmap,
            ops,
            sat,
            p_inv,
            mass,
            operator,
            energy_weight,
            warm: vec![0.0; n],
            buf: vec![0.0; n],
            mass_tol: problem.integrator.mass_tol,
            max_iter: problem.integrator.max_iter,
            solver: problem.integrator.mass_solver,
            factor: None,
        })
    }

    pub fn ndofs(&self) -> usize {
        self.ops.ndofs()
    }

    pub fn check_sbp(&self) -> SbpReport {
        check_sbp(&self.ops)
    }

    pub fn spectrum(&self, k: usize) -> Result<SpectrumReport> {
        spectrum_report(&self.ops, &self.sat.homogeneous(), k)
    }

    /// `(Π − Q) + (Π − Q)ᵀ` weighted by the inverse symmetrizer.
    pub fn stability_matrix(&self) -> Result<DenseMatrix> {
        crate::spectra::stability_matrix(&self.ops, Some(&self.sat))
    }

    /// Largest characteristic speed over the mesh.
    pub fn max_speed(&self) -> Result<f64> {
        match &self.problem.coefficients {
            Coefficients::Scalar(v) => Ok(v.max_speed(&self.mesh)),
            Coefficients::System { a, b, p } => {
                // spectral radius of A_n is rotation-dependent; sample normals
                let mut s = 0.0_f64;
                let samples = if self.mesh.dimension() == 1 { 1 } else { 64 };
                for k in 0..samples {
                    let g = k as f64 * std::f64::consts::PI / samples as f64;
                    let d = crate::sat::characteristic_decompose(a, b, p, [g.cos(), g.sin()])?;
                    s = d.values.iter().fold(s, |m, v| m.max(v.abs()));
                }
                Ok(s)
            }
        }
    }

    /// `dt = cfl · h_min / (p · λ_max)` with `h_min` the smallest incircle
    /// diameter (cell width in 1D).
    pub fn time_step(&self, cfl: f64) -> Result<f64> {
        let speed = self.max_speed()?;
        if !(speed > 0.0) {
            return Err(Error::InvalidParameter(
                "zero wave speed gives no CFL time step".into(),
            ));
        }
        Ok(cfl * self.mesh.min_element_size() / (self.problem.order as f64 * speed))
    }

    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> Vec<f64>) -> Vec<f64> {
        interpolate(&self.mesh, &self.dofmap, self.problem.components, f)
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let f = self.problem.initial.clone();
        self.interpolate(|x| f(x))
    }

    pub fn exact_state(&self, t: f64) -> Result<Vec<f64>> {
        let f = self.problem.exact.clone().ok_or(Error::MissingExact)?;
        Ok(self.interpolate(|x| f(x, t)))
    }

    /// Node values of the state (coefficients for Lagrange).
    pub fn nodal(&self, u: &[f64]) -> Vec<f64> {
        nodal_values(&self.mesh, &self.dofmap, self.problem.components, u)
    }

    /// Marches the initial state with the problem's integrator settings
    /// (overridable), refusing non-SBP operators unless allowed.
    pub fn run(&mut self, config: Option<&IntegratorConfig>) -> Result<Trajectory> {
        let u0 = self.initial_state();
        self.run_from(&u0, config)
    }

    pub fn run_from(
        &mut self,
        u0: &[f64],
        config: Option<&IntegratorConfig>,
    ) -> Result<Trajectory> {
        let config = config
            .cloned()
            .unwrap_or_else(|| self.problem.integrator.clone());
        if !self.problem.allow_non_sbp {
            let r = self.check_sbp();
            if !r.pass {
                return Err(Error::StabilityViolation(format!(
                    "operators violate summation by parts (boundary residual {:e}, interior {:e})",
                    r.boundary_residual, r.interior_residual
                )));
            }
        }
        self.mass_tol = config.mass_tol;
        self.max_iter = config.max_iter;
        self.solver = config.mass_solver;
        if self.solver == MassSolver::Direct && self.factor.is_none() {
            self.factor = Some(EnvelopeCholesky::new(&self.ops.mass)?);
        }
        let dt = self.time_step(config.cfl)?;
        self.warm.iter_mut().for_each(|x| *x = 0.0);
        run(self, u0, 0.0, dt, &config)
    }

    /// L1 by quadrature of `|u_h − u|`, `L2_M = ‖I u − u_h‖_M` with the
    /// interpolant `I u`, and the max nodal deviation.
    pub fn error_norms(&self, u: &[f64], t: f64) -> Result<ErrorNorms> {
        let exact = self.problem.exact.clone().ok_or(Error::MissingExact)?;
        let m = self.problem.components;
        let e = self.exact_state(t)?;
        let diff: Vec<f64> = u.iter().zip(&e).map(|(a, b)| a - b).collect();
        let l2_m = dot(&diff, &self.mass.matvec(&diff)).max(0.0).sqrt();
        let nodal_u = self.nodal(u);
        let coords = self.dofmap.dof_coords();
        let mut linf = 0.0_f64;
        for (d, x) in coords.iter().enumerate() {
            let ex = exact(*x, t);
            for c in 0..m {
                linf = linf.max((nodal_u[d * m + c] - ex[c]).abs());
            }
        }
        let deg = (self.ops.volume_degree + 2).min(crate::quadrature::MAX_DEGREE);
        let tab = Tabulation::volume(self.dofmap.basis(), deg)?;
        let mut l1 = 0.0;
        for el in 0..self.mesh.num_elements() {
            let map = ElementMap::new(&self.mesh, el)?;
            let dofs = self.dofmap.element_dofs(el);
            for (q, xi) in tab.points.iter().enumerate() {
                let x = map.map(*xi);
                let ex = exact(x, t);
                for c in 0..m {
                    let uh: f64 = dofs
                        .iter()
                        .zip(&tab.values[q])
                        .map(|(&d, v)| u[d * m + c] * v)
                        .sum();
                    l1 += tab.weights[q] * map.det * (uh - ex[c]).abs();
                }
            }
        }
        Ok(ErrorNorms { l1, l2_m, linf })
    }
}

fn build_sat(
    problem: &ProblemSpec,
    mesh: &Mesh,
    dofmap: &DofMap,
    edge: usize,
) -> Result<BoundaryOperator> {
    let scale = problem.sat_scale;
    match (&problem.boundary, &problem.coefficients) {
        (BoundarySpec::Upwind { data }, Coefficients::Scalar(v)) => {
            scalar_sat_2d(mesh, dofmap, v, data.clone(), edge, scale)
        }
        (BoundarySpec::Penalty1d { tau, data }, Coefficients::Scalar(v)) => {
            let a = v.at([0.0, 0.0])[0];
            scalar_sat_1d(
                mesh,
                dofmap,
                a,
                (tau.0 * scale, tau.1 * scale),
                data.clone(),
            )
        }
        (BoundarySpec::Characteristic { reflection, data }, Coefficients::System { a, b, p }) => {
            system_sat(mesh, dofmap, a, b, p, reflection, scale, edge, data.clone())
        }
        (
            BoundarySpec::R13 {
                beta,
                variant,
                data,
            },
            Coefficients::System { .. },
        ) => {
            let d = *data;
            let g: BoundaryData = std::sync::Arc::new(move |bp, _| d.g(bp));
            r13_sat(mesh, dofmap, data.alpha, *beta, *variant, edge, Some(g))
        }
        (b, _) => Err(Error::InvalidParameter(format!(
            "boundary treatment {b:?} does not fit the coefficients of '{}'",
            problem.name
        ))),
    }
}

impl Evolution for Discretization {
    fn len(&self) -> usize {
        self.ops.ndofs()
    }

    fn rhs(&mut self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.operator.matvec_into(u, &mut self.buf);
        self.sat.add_data(t, &mut self.buf);
        match (&self.factor, self.solver) {
            (Some(f), MassSolver::Direct) => {
                // M ⊗ I: one scalar solve per component
                let m = self.ops.components;
                let n = f.len();
                let mut col = vec![0.0; n];
                for c in 0..m {
                    for (i, v) in col.iter_mut().enumerate() {
                        *v = self.buf[i * m + c];
                    }
                    let x = f.solve(&col);
                    for (i, v) in x.into_iter().enumerate() {
                        out[i * m + c] = v;
                    }
                }
            }
            _ => {
                let x = mass_solve(
                    &self.mass,
                    &self.buf,
                    self.mass_tol,
                    self.max_iter,
                    Some(&self.warm),
                )?;
                out.copy_from_slice(&x);
                self.warm = x;
            }
        }
        Ok(())
    }

    fn energy(&self, u: &[f64]) -> f64 {
        dot(u, &self.energy_weight.matvec(u))
    }

    fn extrema(&self, u: &[f64]) -> (f64, f64) {
        let v = self.nodal(u);
        v.iter()
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &x| {
                (hi.max(x), lo.min(x))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{linear_advection, wave_1d};

    #[test]
    fn linear_profile_is_reproduced() {
        let mut p = linear_advection();
        p.mesh = crate::mesh::MeshSpec::UnitSquare(3);
        for order in 1..=3 {
            p.order = order;
            p.integrator.scheme = crate::problems::order_matched_scheme(order);
            let mut d = Discretization::new(&p).unwrap();
            let tr = d.run(None).unwrap();
            let err = d.error_norms(&tr.state, tr.t).unwrap();
            assert!(err.l2_m < 1e-10 && err.linf < 1e-10, "p={order}: {err:?}");
        }
    }

    #[test]
    fn constant_error_norm() {
        let mut p = linear_advection();
        p.mesh = crate::mesh::MeshSpec::UnitSquare(2);
        let d = Discretization::new(&p).unwrap();
        let e = d.exact_state(0.0).unwrap();
        let shifted: Vec<f64> = e.iter().map(|x| x + 0.25).collect();
        let n = d.error_norms(&shifted, 0.0).unwrap();
        assert!((n.l2_m - 0.25).abs() < 1e-13);
        assert!((n.l1 - 0.25).abs() < 1e-13);
        assert!((n.linf - 0.25).abs() < 1e-13);
    }

    #[test]
    fn wave_short_run_energy_is_small() {
        let mut p = wave_1d();
        p.mesh = crate::mesh::MeshSpec::Interval {
            n: 10,
            random: false,
            seed: 0,
        };
        p.integrator.t_end = 1.0;
        let mut d = Discretization::new(&p).unwrap();
        let tr = d.run(None).unwrap();
        assert!(tr.final_record().energy.is_finite());
        assert!(d.spectrum(3).unwrap().verdict == crate::spectra::Verdict::Stable);
    }
}
