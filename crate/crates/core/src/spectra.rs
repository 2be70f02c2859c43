//! Stability certificates: the symmetric test matrix and its extreme
//! eigenvalues.
//!
//! With a boundary operator the test matrix is
//! `S = W(Π − Q) + (W(Π − Q))ᵀ`, `W = I ⊗ P⁻¹`, and the scheme is energy
//! stable iff `S ⪯ 0`. Without one it is `WQ + (WQ)ᵀ`, whose spectrum pairs
//! as `±λ`.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::GlobalOperators;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, CsrMatrix, DenseMatrix};
use crate::sat::BoundaryOperator;

/// Relative tolerance for the verdict: `λ_max ≤ STABLE_TOL · ‖Q‖_max`.
pub const STABLE_TOL: f64 = 1e-12;

pub fn stability_matrix(
    ops: &GlobalOperators,
    pi: Option<&BoundaryOperator>,
) -> Result<DenseMatrix> {
    let n = ops.ndofs();
    let q = &ops.stiffness;
    let a: CsrMatrix = match pi {
        None => q.clone(),
        Some(pi) => {
            if pi.pi.nrows() != n || pi.components() != ops.components {
                return Err(Error::DimensionMismatch(format!(
                    "Π is {}x{} with {} components, operators have {n} unknowns with {}",
                    pi.pi.nrows(),
                    pi.pi.ncols(),
                    pi.components(),
                    ops.components
                )));
            }
            pi.pi.linear_combination(1.0, q, -1.0)
        }
    };
    let a = match &ops.symmetrizer_inv {
        Some(w) => a.left_block_diagonal(w),
        None => a,
    };
    let d = a.to_dense();
    Ok(d.add(&d.transpose()).symmetric_part())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremeEigs {
    /// The k most negative eigenvalues, ascending.
    pub negative: Vec<f64>,
    /// The k most positive eigenvalues, descending.
    pub positive: Vec<f64>,
    /// Largest `‖Sv − λv‖` over the returned pairs.
    pub residual: f64,
}

pub fn extreme_eigs(s: &DenseMatrix, k: usize) -> Result<ExtremeEigs> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(
            "test matrix must be square".into(),
        ));
    }
    let n = s.nrows();
    let scale = s.max_abs();
    if s.asymmetry() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidParameter(
            "test matrix is not symmetric".into(),
        ));
    }
    let eig = symmetric_eigen(s)?;
    let k = k.min(n);
    let mut picked: Vec<usize> = (0..k).collect();
    picked.extend((n - k..n).rev());
    let mut residual = 0.0_f64;
    for &j in &picked {
        let v = eig.vectors.column(j);
        let sv = s.matvec(&v);
        let r = sv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - eig.values[j] * b).powi(2))
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    // ‖S‖₂ ≤ n · max|s_ij|
    if residual > 1e-10 * (scale * n as f64).max(1e-300) {
        return Err(Error::NoConvergence(format!(
            "eigenpair residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(ExtremeEigs {
        negative: eig.values[..k].to_vec(),
        positive: eig.values[n - k..].iter().rev().copied().collect(),
        residual,
    })
}

/// Largest `|λ⁺_i + λ⁻_i|` after pairing the sorted lists.
pub fn pairing_defect(e: &ExtremeEigs) -> f64 {
    e.negative
        .iter()
        .zip(&e.positive)
        .fold(0.0, |m, (a, b)| f64::max(m, (a + b).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
        })
    }
}

/// Four-column spectrum table: without / with SAT.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub ndofs: usize,
    pub without_sat: ExtremeEigs,
    pub with_sat: ExtremeEigs,
    /// Largest entry of `Q + Qᵀ` outside the boundary-boundary block.
    pub interior_residual: f64,
    pub q_max: f64,
    pub lambda_max: f64,
    pub verdict: Verdict,
}

pub fn spectrum_report(
    ops: &GlobalOperators,
    pi: &BoundaryOperator,
    k: usize,
) -> Result<SpectrumReport> {
    let s0 = stability_matrix(ops, None)?;
    let s1 = stability_matrix(ops, Some(pi))?;
    let without_sat = extreme_eigs(&s0, k)?;
    let with_sat = extreme_eigs(&s1, k)?;
    let mask = ops.boundary_mask();
    let mut interior_residual = 0.0_f64;
    for i in 0..s0.nrows() {
        for j in 0..s0.ncols() {
            if !(mask[i] && mask[j]) {
                interior_residual = interior_residual.max(s0[(i, j)].abs());
            }
        }
    }
    let q_max = ops.stiffness.max_abs();
    let lambda_max = with_sat.positive.first().copied().unwrap_or(0.0);
    let verdict = if lambda_max <= STABLE_TOL * q_max {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    Ok(SpectrumReport {
        ndofs: ops.ndofs(),
        without_sat,
        with_sat,
        interior_residual,
        q_max,
        lambda_max,
        verdict,
    })
}

impl SpectrumReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# dofs={} verdict={} lambda_max={:e}",
            self.ndofs, self.verdict, self.lambda_max
        );
        s.push_str("neg_noSAT,pos_noSAT,neg_SAT,pos_SAT\n");
        let rows = self
            .without_sat
            .negative
            .len()
            .max(self.with_sat.negative.len());
        let cell = |v: &[f64], i: usize| v.get(i).map(|x| format!("{x:e}")).unwrap_or_default();
        for i in 0..rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                cell(&self.without_sat.negative, i),
                cell(&self.without_sat.positive, i),
                cell(&self.with_sat.negative, i),
                cell(&self.with_sat.positive, i)
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
