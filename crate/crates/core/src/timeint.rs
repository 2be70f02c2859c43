//! Explicit SSP Runge–Kutta integration of `M du/dt = K u + G(t)`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dot, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ssprk22,
    Ssprk33,
    Ssprk54,
}

/// `(α, β)` entries of one stage as `(source stage, weight)` pairs.
type Stage = (&'static [(usize, f64)], &'static [(usize, f64)]);

impl Scheme {
    pub fn order(self) -> usize {
        match self {
            Scheme::Ssprk22 => 2,
            Scheme::Ssprk33 => 3,
            Scheme::Ssprk54 => 4,
        }
    }

    pub fn stages(self) -> usize {
        match self {
            Scheme::Ssprk22 => 2,
            Scheme::Ssprk33 => 3,
            Scheme::Ssprk54 => 5,
        }
    }

    /// Shu–Osher tableau: stage `i` (1-based, stage 0 is `u_n`) is
    /// `Σ_j α_ij u_j + Σ_j β_ij dt L(u_j)`; the last stage is `u_{n+1}`.
    fn tableau(self) -> &'static [Stage] {
        match self {
            Scheme::Ssprk22 => &[
                (&[(0, 1.0)], &[(0, 1.0)]),
                (&[(0, 0.5), (1, 0.5)], &[(1, 0.5)]),
            ],
            Scheme::Ssprk33 => &[
                (&[(0, 1.0)], &[(0, 1.0)]),
                (&[(0, 0.75), (1, 0.25)], &[(1, 0.25)]),
                (&[(0, 1.0 / 3.0), (2, 2.0 / 3.0)], &[(2, 2.0 / 3.0)]),
            ],
            // Spiteri & Ruuth SSP(5,4)
            Scheme::Ssprk54 => &[
                (&[(0, 1.0)], &[(0, 0.391752226571890)]),
                (
                    &[(0, 0.444370493651235), (1, 0.555629506348765)],
                    &[(1, 0.368410593050371)],
                ),
                (
                    &[(0, 0.620101851488403), (2, 0.379898148511597)],
                    &[(2, 0.251891774271694)],
                ),
                (
                    &[(0, 0.178079954393132), (3, 0.821920045606868)],
                    &[(3, 0.544974750228521)],
                ),
                (
                    &[
                        (2, 0.517231671970585),
                        (3, 0.096059710526147),
                        (4, 0.386708617503269),
                    ],
                    &[(3, 0.063692468666290), (4, 0.226007483236906)],
                ),
            ],
        }
    }

    /// Abscissa `c_i` of each stage input (stage 0 at `c = 0`).
    fn abscissae(self) -> Vec<f64> {
        let tab = self.tableau();
        let mut c = vec![0.0; tab.len() + 1];
        for (i, (alpha, beta)) in tab.iter().enumerate() {
            c[i + 1] = alpha.iter().map(|&(j, a)| a * c[j]).sum::<f64>()
                + beta.iter().map(|&(_, b)| b).sum::<f64>();
        }
        c
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssprk22" => Ok(Scheme::Ssprk22),
            "ssprk33" => Ok(Scheme::Ssprk33),
            "ssprk54" => Ok(Scheme::Ssprk54),
            _ => Err(Error::InvalidParameter(format!("unknown scheme '{s}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Ssprk22 => "ssprk22",
            Scheme::Ssprk33 => "ssprk33",
            Scheme::Ssprk54 => "ssprk54",
        })
    }
}

/// How stage derivatives invert the mass matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MassSolver {
    /// Envelope Cholesky factorisation computed once per run.
    Direct,
    /// Jacobi-preconditioned CG to `mass_tol`, warm-started.
    Cg,
}

impl FromStr for MassSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(MassSolver::Direct),
            "cg" => Ok(MassSolver::Cg),
            _ => Err(Error::InvalidParameter(format!(
                "unknown mass solver '{s}'"
            ))),
        }
    }
}

impl std::fmt::Display for MassSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MassSolver::Direct => "direct",
            MassSolver::Cg => "cg",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub t_end: f64,
    /// Relative residual for the mass solve.
    pub mass_tol: f64,
    pub max_iter: usize,
    pub mass_solver: MassSolver,
    /// Stop after this many steps even before `t_end`.
    pub max_steps: Option<usize>,
    /// Stop once `‖du/dt‖_M` drops below this.
    pub steady_tol: Option<f64>,
    /// Abort when `max |u|` exceeds this (NaN/Inf always abort).
    pub blowup_threshold: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Ssprk54,
            cfl: 0.3,
            t_end: 1.0,
            mass_tol: 1e-12,
            max_iter: 1000,
            mass_solver: MassSolver::Direct,
            max_steps: None,
            steady_tol: None,
            blowup_threshold: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl must be positive, got {}",
                self.cfl
            )));
        }
        if !(self.mass_tol > 0.0 && self.mass_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "mass tolerance must lie in (0, 1e-6], got {}",
                self.mass_tol
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter("t_end must be non-negative".into()));
        }
        Ok(())
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD `m`. `x0` warm-starts.
pub fn mass_solve(
    m: &CsrMatrix,
    r: &[f64],
    tol: f64,
    max_iter: usize,
    x0: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = m.nrows();
    if r.len() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix {n}x{}, rhs {}",
            m.ncols(),
            r.len()
        )));
    }
    let rnorm = dot(r, r).sqrt();
    if rnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let dinv: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut res = r.to_vec();
    let mut ax = vec![0.0; n];
    if x0.is_some() {
        m.matvec_into(&x, &mut ax);
        res.iter_mut().zip(&ax).for_each(|(ri, a)| *ri -= a);
    }
    let mut z: Vec<f64> = res.iter().zip(&dinv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&res, &z);
    for _ in 0..=max_iter {
        if dot(&res, &res).sqrt() <= tol * rnorm {
            return Ok(x);
        }
        m.matvec_into(&p, &mut ax);
        let pap = dot(&p, &ax);
        if !(pap > 0.0) {
            return Err(Error::NoConvergence(
                "mass matrix is not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            res[i] -= alpha * ax[i];
            z[i] = res[i] * dinv[i];
        }
        let rz_new = dot(&res, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence(format!(
        "mass solve did not reach relative residual {tol:e} in {max_iter} iterations"
    )))
}

/// One step of `scheme`; `rhs(t, u, out)` writes `du/dt`.
pub fn step<F>(u: &[f64], t: f64, dt: f64, mut rhs: F, scheme: Scheme) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let n = u.len();
    let tab = scheme.tableau();
    let c = scheme.abscissae();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(tab.len() + 1);
    let mut derivs: Vec<Option<Vec<f64>>> = vec![None; tab.len() + 1];
    stages.push(u.to_vec());
    for (alpha, beta) in tab.iter() {
        for &(j, _) in beta.iter() {
            if derivs[j].is_none() {
                let mut d = vec![0.0; n];
                rhs(t + c[j] * dt, &stages[j], &mut d)?;
                derivs[j] = Some(d);
            }
        }
        let mut next = vec![0.0; n];
        for &(j, a) in alpha.iter() {
            next.iter_mut()
                .zip(&stages[j])
                .for_each(|(x, s)| *x += a * s);
        }
        for &(j, b) in beta.iter() {
            let d = derivs[j].as_ref().expect("stage derivative computed above");
            next.iter_mut().zip(d).for_each(|(x, s)| *x += b * dt * s);
        }
        stages.push(next);
    }
    Ok(stages.pop().expect("at least one stage"))
}

/// Linear semidiscrete system `M du/dt = K u + G(t)` with energy
/// `uᵀ (M ⊗ W) u` (`W` = inverse symmetrizer, identity for scalars).
pub trait Evolution {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes `du/dt`.
    fn rhs(&mut self, t: f64, u: &[f64], out: &mut [f64]) -> Result<()>;

    fn energy(&self, u: &[f64]) -> f64;

    /// Global (max, min) of the solution's nodal values.
    fn extrema(&self, u: &[f64]) -> (f64, f64);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    pub umax: f64,
    pub umin: f64,
    /// `‖du/dt‖` in the energy norm at the start of the step (NaN if not
    /// tracked).
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: Vec<f64>,
    pub t: f64,
    pub steps: usize,
    pub dt: f64,
    pub history: Vec<HistoryRecord>,
}

impl Trajectory {
    pub fn max_value(&self) -> f64 {
        self.history
            .iter()
            .map(|h| h.umax)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.history
            .iter()
            .map(|h| h.umin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn final_record(&self) -> &HistoryRecord {
        self.history
            .last()
            .expect("history always holds the initial record")
    }

    pub fn history_csv(&self) -> String {
        let mut s = String::from("step,t,energy,umax,umin\n");
        for h in &self.history {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e}",
                h.step, h.t, h.energy, h.umax, h.umin
            );
        }
        s
    }

    pub fn write_history(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.history_csv())?;
        Ok(())
    }
}

/// Marches `u0` from `t0` with step `dt` until `t_end`, `max_steps` or the
/// steady-state tolerance, whichever comes first. The last step is
/// shortened to land on `t_end`.
pub fn run<E: Evolution>(
    evo: &mut E,
    u0: &[f64],
    t0: f64,
    dt: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if u0.len() != evo.len() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} entries, system {}",
            u0.len(),
            evo.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let track_residual = config.steady_tol.is_some();
    let mut u = u0.to_vec();
    let mut t = t0;
    let mut steps = 0;
    let mut history = Vec::new();
    let mut dudt = vec![0.0; u.len()];
    let record =
        |evo: &mut E, u: &[f64], t: f64, step: usize, dudt: &mut [f64]| -> Result<HistoryRecord> {
            let residual = if track_residual {
                evo.rhs(t, u, dudt)?;
                evo.energy(dudt).sqrt()
            } else {
                f64::NAN
            };
            let (umax, umin) = evo.extrema(u);
            Ok(HistoryRecord {
                step,
                t,
                energy: evo.energy(u),
                umax,
                umin,
                residual,
            })
        };
    history.push(record(evo, &u, t, 0, &mut dudt)?);
    let t_end = t0 + config.t_end;
    loop {
        if let Some(tol) = config.steady_tol {
            if history.last().is_some_and(|h| h.residual < tol) {
                break;
            }
        }
        if let Some(max) = config.max_steps {
            if steps >= max {
                break;
            }
        } else if t >= t_end - 1e-12 * dt {
            break;
        }
        let h = if config.max_steps.is_none() {
            dt.min(t_end - t)
        } else {
            dt
        };
        let next = step(&u, t, h, |tt, x, out| evo.rhs(tt, x, out), config.scheme)?;
        steps += 1;
        let peak = next.iter().fold(0.0_f64, |m, v| {
            if v.is_finite() {
                m.max(v.abs())
            } else {
                f64::INFINITY
            }
        });
        if !peak.is_finite() || config.blowup_threshold.is_some_and(|b| peak > b) {
            return Err(Error::BlowUp {
                step: steps,
                last_good: steps - 1,
                time: t + h,
                value: peak,
            });
        }
        u = next;
        t += h;
        history.push(record(evo, &u, t, steps, &mut dudt)?);
    }
    Ok(Trajectory {
        state: u,
        t,
        steps,
        dt,
        history,
    })
}
