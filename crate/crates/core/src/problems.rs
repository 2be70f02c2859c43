//! Ready-made experiment setups.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};

use crate::assembly::VelocityField;
use crate::basis::BasisKind;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mesh::MeshSpec;
use crate::sat::{r13_symmetrizer, BoundaryData, R13Data, R13Variant};
use crate::timeint::{IntegratorConfig, Scheme};

pub type InitialData = Arc<dyn Fn([f64; 2]) -> Vec<f64> + Send + Sync>;
pub type ExactSolution = Arc<dyn Fn([f64; 2], f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// Scalar advection `u_t + a(x)·∇u = 0`.
    Scalar(VelocityField),
    /// Constant-coefficient system `U_t + A U_x + B U_y = −D U` with
    /// symmetrizer `P`.
    System {
        a: DenseMatrix,
        b: DenseMatrix,
        p: DenseMatrix,
    },
}

#[derive(Clone)]
pub enum BoundarySpec {
    /// Upwind SAT on the inflow part of ∂Ω with data `g`.
    Upwind { data: Option<BoundaryData> },
    /// 1D scalar SAT with one penalty per end.
    Penalty1d {
        tau: (f64, f64),
        data: Option<BoundaryData>,
    },
    /// Characteristic SAT `W⁻ − R W⁺ = g`, one reflection matrix per tag.
    Characteristic {
        reflection: Vec<(String, DenseMatrix)>,
        data: Option<BoundaryData>,
    },
    /// Maxwell-type R13 boundary `L_n U = G_n`.
    R13 {
        beta: f64,
        variant: R13Variant,
        data: R13Data,
    },
}

impl std::fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundarySpec::Upwind { data } => f
                .debug_struct("Upwind")
                .field("has_data", &data.is_some())
                .finish(),
            BoundarySpec::Penalty1d { tau, data } => f
                .debug_struct("Penalty1d")
                .field("tau", tau)
                .field("has_data", &data.is_some())
                .finish(),
            BoundarySpec::Characteristic { reflection, data } => f
                .debug_struct("Characteristic")
                .field("reflection", reflection)
                .field("has_data", &data.is_some())
                .finish(),
            BoundarySpec::R13 {
                beta,
                variant,
                data,
            } => f
                .debug_struct("R13")
                .field("beta", beta)
                .field("variant", variant)
                .field("data", data)
                .finish(),
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    pub components: usize,
    pub coefficients: Coefficients,
    pub boundary: BoundarySpec,
    /// Per-component relaxation rates `D` (linear damping source `−D U`).
    pub damping: Option<Vec<f64>>,
    pub initial: InitialData,
    pub exact: Option<ExactSolution>,
    pub mesh: MeshSpec,
    pub basis: BasisKind,
    pub order: usize,
    /// `None` selects the default matched degree for the order.
    pub volume_degree: Option<usize>,
    pub edge_degree: Option<usize>,
    pub split_alpha: f64,
    pub sat_scale: f64,
    pub integrator: IntegratorConfig,
    /// Skip the summation-by-parts guard before time marching.
    pub allow_non_sbp: bool,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("components", &self.components)
            .field("coefficients", &self.coefficients)
            .field("boundary", &self.boundary)
            .field("damping", &self.damping)
            .field("has_exact", &self.exact.is_some())
            .field("mesh", &self.mesh)
            .field("basis", &self.basis)
            .field("order", &self.order)
            .field("volume_degree", &self.volume_degree)
            .field("edge_degree", &self.edge_degree)
            .field("split_alpha", &self.split_alpha)
            .field("sat_scale", &self.sat_scale)
            .field("integrator", &self.integrator)
            .finish()
    }
}

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 6] = [
    "advection2d",
    "rotation2d",
    "wave1d",
    "r13",
    "sine2d",
    "linear2d",
];

pub fn by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "advection2d" => Ok(advection_2d()),
        "rotation2d" => Ok(rotation_2d()),
        "wave1d" => Ok(wave_1d()),
        "r13" => Ok(r13_heat()),
        "sine2d" => Ok(sine_advection()),
        "linear2d" => Ok(linear_advection()),
        _ => Err(Error::InvalidParameter(format!(
            "unknown problem '{name}' (expected one of {})",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

/// `e^{−40 r²}` inside `r < 0.25`, zero outside (discontinuous at the rim).
pub fn bump(x: [f64; 2], center: [f64; 2]) -> f64 {
    let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
    if r2 < 0.0625 {
        (-40.0 * r2).exp()
    } else {
        0.0
    }
}

pub const ADVECTION_CENTER: [f64; 2] = [0.3, 0.5];
pub const ROTATION_CENTER: [f64; 2] = [0.0, 0.5];

pub fn order_matched_scheme(order: usize) -> Scheme {
    match order {
        1 => Scheme::Ssprk22,
        2 => Scheme::Ssprk33,
        _ => Scheme::Ssprk54,
    }
}

fn scalar_base(
    name: &str,
    velocity: VelocityField,
    mesh: MeshSpec,
    initial: InitialData,
) -> ProblemSpec {
    ProblemSpec {
        name: name.into(),
        dimension: 2,
        components: 1,
        coefficients: Coefficients::Scalar(velocity),
        boundary: BoundarySpec::Upwind { data: None },
        damping: None,
        initial,
        exact: None,
        mesh,
        basis: BasisKind::Bernstein,
        order: 3,
        volume_degree: None,
        edge_degree: None,
        split_alpha: 1.0,
        sat_scale: 1.0,
        integrator: IntegratorConfig {
            scheme: Scheme::Ssprk54,
            cfl: 0.3,
            t_end: 1.0,
            ..Default::default()
        },
        allow_non_sbp: false,
    }
}

/// Bump translated by `a = (1, 0)` on the unit square; zero inflow on the
/// left, the horizontal walls are characteristic (`a·n = 0`).
pub fn advection_2d() -> ProblemSpec {
    let mut p = scalar_base(
        "advection2d",
        VelocityField::Constant([1.0, 0.0]),
        MeshSpec::UnitSquare(23),
        Arc::new(|x| vec![bump(x, ADVECTION_CENTER)]),
    );
    p.exact = Some(Arc::new(|x, t| {
        vec![bump([x[0] - t, x[1]], ADVECTION_CENTER)]
    }));
    p.integrator.max_steps = Some(173);
    p
}

/// Solid-body rotation `a = (2πy, −2πx)` on the unit disk, one revolution per
/// unit time, split form with α = ½.
pub fn rotation_2d() -> ProblemSpec {
    let mut p = scalar_base(
        "rotation2d",
        VelocityField::Rotation { omega: 2.0 * PI },
        MeshSpec::UnitDisk(13),
        Arc::new(|x| vec![bump(x, ROTATION_CENTER)]),
    );
    p.exact = Some(Arc::new(|x, t| {
        // foot of the characteristic: rotate counter-clockwise by 2πt
        let (s, c) = (2.0 * PI * t).sin_cos();
        vec![bump(
            [c * x[0] - s * x[1], s * x[0] + c * x[1]],
            ROTATION_CENTER,
        )]
    }));
    p.split_alpha = 0.5;
    p.integrator.cfl = 0.2;
    p.integrator.t_end = 2.0;
    p
}

const SINE_VELOCITY: [f64; 2] = [1.0, 0.5];

fn sine_exact(x: [f64; 2], t: f64) -> f64 {
    (2.0 * PI * (x[0] + x[1] - (SINE_VELOCITY[0] + SINE_VELOCITY[1]) * t)).sin()
}

fn linear_exact(x: [f64; 2], t: f64) -> f64 {
    x[0] + 2.0 * x[1] - (SINE_VELOCITY[0] + 2.0 * SINE_VELOCITY[1]) * t
}

fn inflow_driven(name: &str, exact: fn([f64; 2], f64) -> f64) -> ProblemSpec {
    let mut p = scalar_base(
        name,
        VelocityField::Constant(SINE_VELOCITY),
        MeshSpec::UnitSquare(8),
        Arc::new(move |x| vec![exact(x, 0.0)]),
    );
    p.exact = Some(Arc::new(move |x, t| vec![exact(x, t)]));
    p.boundary = BoundarySpec::Upwind {
        data: Some(Arc::new(move |bp, t| vec![exact(bp.x, t)])),
    };
    p.basis = BasisKind::Lagrange;
    p.integrator.t_end = 0.25;
    p
}

/// Smooth plane wave `sin 2π(x + y − 1.5 t)` advected by `(1, ½)` with exact
/// inflow data on the left and bottom edges.
pub fn sine_advection() -> ProblemSpec {
    inflow_driven("sine2d", sine_exact)
}

/// Linear profile, exactly representable for every order.
pub fn linear_advection() -> ProblemSpec {
    inflow_driven("linear2d", linear_exact)
}

/// 1D acoustics `U_t + A U_x = 0`, `A = [[0, 1], [1, 0]]`, driven by
/// `sin t` in the incoming characteristic at both ends.
pub fn wave_1d() -> ProblemSpec {
    wave_1d_with(0.0, 0.0, false, 0).expect("zero reflection is admissible")
}

/// Wave problem with reflection coefficients at `x = 0`, `x = 1` and an
/// optionally jittered 100-cell grid.
pub fn wave_1d_with(r0: f64, r1: f64, random: bool, seed: u64) -> Result<ProblemSpec> {
    for r in [r0, r1] {
        if !(r.abs() < 1.0) {
            return Err(Error::StabilityViolation(format!(
                "reflection coefficient {r} must satisfy |R| < 1"
            )));
        }
    }
    let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
    Ok(ProblemSpec {
        name: "wave1d".into(),
        dimension: 1,
        components: 2,
        coefficients: Coefficients::System {
            b: DenseMatrix::zeros(2, 2),
            p: DenseMatrix::identity(2),
            a,
        },
        boundary: BoundarySpec::Characteristic {
            reflection: vec![
                ("left".into(), DenseMatrix::from_rows(&[[r0]])),
                ("right".into(), DenseMatrix::from_rows(&[[r1]])),
            ],
            data: Some(Arc::new(|_, t| vec![t.sin()])),
        },
        damping: None,
        initial: Arc::new(|_| vec![0.0, 0.0]),
        exact: None,
        mesh: MeshSpec::Interval {
            n: 100,
            random,
            seed,
        },
        basis: BasisKind::Lagrange,
        order: 2,
        volume_degree: None,
        edge_degree: None,
        split_alpha: 1.0,
        sat_scale: 1.0,
        integrator: IntegratorConfig {
            scheme: Scheme::Ssprk33,
            cfl: 0.1,
            t_end: 50.0,
            ..Default::default()
        },
        allow_non_sbp: false,
    })
}

/// Physical boundary data of the wave problem in primitive variables:
/// `(1/√2)[[1, 1], [1, −1]] U = (sin t, 0)` at `x = 0`, `(0, sin t)` at `x = 1`.
pub fn wave_characteristics() -> DenseMatrix {
    DenseMatrix::from_rows(&[
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ])
}

/// R13 coefficient matrix `A_α = A cos α + B sin α`.
pub fn r13_a_alpha(alpha: f64) -> DenseMatrix {
    crate::sat::r13_a_n(alpha)
}

pub const R13_ALPHA: f64 = 3.0;
pub const R13_BETA: f64 = -0.5;
pub const R13_TAU: f64 = 0.15;

/// Linear heat-conduction sub-system of the R13 equations on the annulus
/// `0.5 < r < 1`, marched to steady state.
pub fn r13_heat() -> ProblemSpec {
    let data = R13Data {
        alpha: R13_ALPHA,
        theta0: 0.0,
        theta1: 1.0,
        ux: 1.0,
        uy: 0.0,
    };
    let rate = 1.0 / R13_TAU;
    ProblemSpec {
        name: "r13".into(),
        dimension: 2,
        components: 6,
        coefficients: Coefficients::System {
            a: r13_a_alpha(0.0),
            b: r13_a_alpha(PI / 2.0),
            p: r13_symmetrizer(),
        },
        boundary: BoundarySpec::R13 {
            beta: R13_BETA,
            variant: R13Variant::Identity { delta: -2.0 },
            data,
        },
        damping: Some(vec![0.0, rate, rate, rate, rate, rate]),
        initial: Arc::new(|_| vec![0.0; 6]),
        exact: None,
        mesh: MeshSpec::Annulus {
            r0: 0.5,
            r1: 1.0,
            n: 5,
        },
        basis: BasisKind::Bernstein,
        order: 2,
        volume_degree: None,
        edge_degree: None,
        split_alpha: 1.0,
        sat_scale: 1.0,
        integrator: IntegratorConfig {
            scheme: Scheme::Ssprk33,
            cfl: 0.1,
            t_end: 200.0,
            steady_tol: Some(1e-8),
            ..Default::default()
        },
        allow_non_sbp: false,
    }
}

impl ProblemSpec {
    pub fn velocity(&self) -> Option<&VelocityField> {
        match &self.coefficients {
            Coefficients::Scalar(v) => Some(v),
            Coefficients::System { .. } => None,
        }
    }

    /// Checks `A_n P` symmetric for 100 random normals and, if an exact
    /// solution is present, that it satisfies the PDE at 100 random
    /// space-time samples (central differences, residual < 1e-4).
    pub fn self_check(&self, seed: u64) -> Result<()> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        if let Coefficients::System { a, b, p } = &self.coefficients {
            for _ in 0..100 {
                let g: f64 = rng.gen_range(0.0..2.0 * PI);
                let c = a.scale(g.cos()).add(&b.scale(g.sin())).matmul(p);
                let asym = c.asymmetry();
                if asym > 1e-12 {
                    return Err(Error::NotSymmetrizable(asym));
                }
            }
        }
        let Some(exact) = &self.exact else {
            return Ok(());
        };
        let h = 1e-5;
        for _ in 0..100 {
            let x: [f64; 2] = [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)];
            let x = if matches!(self.mesh, MeshSpec::UnitDisk(_)) {
                // sample inside the disk
                [
                    2.0 * x[0] - 1.0,
                    (2.0 * x[1] - 1.0) * (1.0 - (2.0 * x[0] - 1.0).powi(2)).sqrt(),
                ]
            } else {
                x
            };
            let t: f64 = rng.gen_range(0.0..1.0);
            let e = |dx: f64, dy: f64, dt: f64| exact([x[0] + dx, x[1] + dy], t + dt);
            let ut: Vec<f64> = diff(&e(0.0, 0.0, h), &e(0.0, 0.0, -h), h);
            let ux = diff(&e(h, 0.0, 0.0), &e(-h, 0.0, 0.0), h);
            let uy = diff(&e(0.0, h, 0.0), &e(0.0, -h, 0.0), h);
            let res: Vec<f64> = match &self.coefficients {
                Coefficients::Scalar(v) => {
                    let a = v.at(x);
                    vec![ut[0] + a[0] * ux[0] + a[1] * uy[0]]
                }
                Coefficients::System { a, b, .. } => {
                    let u = e(0.0, 0.0, 0.0);
                    let (ax, by) = (a.matvec(&ux), b.matvec(&uy));
                    (0..ut.len())
                        .map(|k| {
                            let d = self.damping.as_ref().map_or(0.0, |d| d[k] * u[k]);
                            ut[k] + ax[k] + by[k] + d
                        })
                        .collect()
                }
            };
            let worst = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
            if worst > 1e-4 {
                return Err(Error::InvalidParameter(format!(
                    "exact solution of '{}' violates the PDE at {x:?}, t = {t}: residual {worst:e}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn diff(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let c = ADVECTION_CENTER;
        assert_eq!(bump(c, c), 1.0);
        assert_eq!(bump([c[0] + 0.3, c[1]], c), 0.0);
        assert!((bump([c[0] + 0.1, c[1]], c) - (-0.4_f64).exp()).abs() < 1e-15);
        assert!((bump([c[0], c[1] + 0.1], c) - 0.6703200460356393).abs() < 1e-12);
    }

    #[test]
    fn rotation_exact_solution() {
        let p = rotation_2d();
        let exact = p.exact.as_ref().unwrap();
        for x in [[0.1, 0.4], [0.0, 0.5], [-0.3, 0.2]] {
            assert!((exact(x, 1.0)[0] - (p.initial)(x)[0]).abs() < 1e-12);
        }
        assert!((exact([0.0, -0.5], 0.5)[0] - 1.0).abs() < 1e-12);
        assert_eq!(p.split_alpha, 0.5);
        let v = p.velocity().unwrap();
        assert_eq!(v.divergence([0.3, -0.7]), 0.0);
        assert!((v.at([0.0, 0.5])[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn wave_setup() {
        let p = wave_1d();
        assert_eq!(p.components, 2);
        if let BoundarySpec::Characteristic { data: Some(g), .. } = &p.boundary {
            let bp = crate::sat::BoundaryPoint {
                x: [0.0, 0.0],
                normal: [-1.0, 0.0],
                tag: "left",
            };
            assert_eq!(g(&bp, 0.0), vec![0.0]);
        } else {
            panic!("wave boundary must be characteristic with data");
        }
        assert!(matches!(
            wave_1d_with(1.0, 0.0, false, 0),
            Err(Error::StabilityViolation(_))
        ));
        assert!(wave_1d_with(0.5, -0.9, true, 3).is_ok());
    }

    #[test]
    fn r13_matrix_entries() {
        // the printed A_α at α = 0
        let a = r13_a_alpha(0.0);
        let expected = [
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 3, 1.0),
            (3, 1, 1.0),
            (2, 4, 1.0),
            (4, 2, 0.5),
        ];
        let mut count = 0;
        for i in 0..6 {
            for j in 0..6 {
                let e = expected
                    .iter()
                    .find(|&&(r, c, _)| (r, c) == (i, j))
                    .map_or(0.0, |t| t.2);
                assert_eq!(a[(i, j)], e, "({i},{j})");
                count += usize::from(e != 0.0);
            }
        }
        assert_eq!(count, 6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let al: f64 = rng.gen_range(-PI..PI);
            assert!(r13_a_alpha(al).matmul(&r13_symmetrizer()).asymmetry() < 1e-14);
        }
    }

    #[test]
    fn exact_solutions_satisfy_pde() {
        for p in [
            advection_2d(),
            rotation_2d(),
            sine_advection(),
            linear_advection(),
            wave_1d(),
            r13_heat(),
        ] {
            p.self_check(17).unwrap();
        }
    }

    #[test]
    fn names_resolve() {
        for n in PROBLEM_NAMES {
            assert_eq!(by_name(n).unwrap().name, n);
        }
        assert!(by_name("nope").is_err());
    }
}
