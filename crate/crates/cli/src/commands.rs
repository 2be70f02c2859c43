use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cgsat::assembly::write_matrix_market;
use cgsat::discretization::Discretization;
use cgsat::mesh::generate_mesh;
use cgsat::Error;

use crate::config::{parse_generator, with_resolution, RunConfig};
use crate::output::{csv_1d, vtk_string};

/// Dense eigensolves above this many unknowns take minutes.
pub const MAX_SPECTRUM_DOFS: usize = 4000;

fn discretize(cfg: &RunConfig) -> Result<Discretization> {
    let spec = cfg.problem_spec()?;
    let mesh = cfg.build_mesh(&spec)?;
    Ok(Discretization::with_mesh(&spec, mesh)?)
}

fn prepare_output(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output)
        .with_context(|| format!("creating {}", cfg.output.display()))?;
    fs::write(cfg.output.join("config.txt"), cfg.serialize())?;
    Ok(&cfg.output)
}

pub fn solve(cfg: &RunConfig) -> Result<()> {
    let out = prepare_output(cfg)?;
    let mut disc = discretize(cfg)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "problem = {}", disc.problem.name);
    let _ = writeln!(summary, "elements = {}", disc.mesh.num_elements());
    let _ = writeln!(summary, "unknowns = {}", disc.ndofs());
    let sbp = disc.check_sbp();
    let _ = writeln!(
        summary,
        "sbp_residual = {:e}",
        sbp.boundary_residual.max(sbp.interior_residual)
    );
    if !sbp.pass {
        eprintln!("warning: operators violate summation by parts; running anyway");
    }
    match disc.run(None) {
        Ok(traj) => {
            let nodal = disc.nodal(&traj.state);
            if disc.problem.dimension == 1 {
                fs::write(out.join("solution_final.csv"), csv_1d(&disc, &nodal))?;
            } else {
                let title = format!("{} t={:e}", disc.problem.name, traj.t);
                fs::write(
                    out.join("solution_final.vtk"),
                    vtk_string(&disc, &nodal, &title),
                )?;
            }
            traj.write_history(out.join("energy.csv"))?;
            let last = traj.final_record();
            let _ = writeln!(summary, "dt = {:e}", traj.dt);
            let _ = writeln!(summary, "steps = {}", traj.steps);
            let _ = writeln!(summary, "t = {:e}", traj.t);
            let _ = writeln!(summary, "max = {:e}", traj.max_value());
            let _ = writeln!(summary, "min = {:e}", traj.min_value());
            let _ = writeln!(summary, "final_max = {:e}", last.umax);
            let _ = writeln!(summary, "final_min = {:e}", last.umin);
            let _ = writeln!(summary, "final_energy = {:e}", last.energy);
            if last.residual.is_finite() {
                let _ = writeln!(summary, "residual = {:e}", last.residual);
            }
            let _ = writeln!(summary, "status = stable");
            fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
            Ok(())
        }
        Err(e @ Error::BlowUp { .. }) => {
            let _ = writeln!(summary, "status = aborted");
            let _ = writeln!(summary, "diagnostic = {e}");
            fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn spectrum(cfg: &RunConfig, k: usize) -> Result<()> {
    let out = prepare_output(cfg)?;
    let disc = discretize(cfg)?;
    if disc.ndofs() > MAX_SPECTRUM_DOFS {
        bail!(
            "{} unknowns exceed the dense eigensolver cap of {MAX_SPECTRUM_DOFS}; use a coarser mesh (--cells)",
            disc.ndofs()
        );
    }
    let report = disc.spectrum(k)?;
    report.write_csv(out.join("spectrum.csv"))?;
    println!("unknowns = {}", report.ndofs);
    println!("q_max = {:e}", report.q_max);
    println!("lambda_max = {:e}", report.lambda_max);
    println!("verdict = {}", report.verdict);
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub n: usize,
    pub h: f64,
    pub l1: f64,
    pub l2_m: f64,
    pub linf: f64,
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn convergence_levels(cfg: &RunConfig, levels: usize, base: usize) -> Result<Vec<Level>> {
    if levels < 3 {
        bail!("a convergence study needs at least 3 levels, got {levels}");
    }
    let spec = cfg.problem_spec()?;
    (0..levels)
        .map(|l| {
            let n = base << l;
            let mut p = spec.clone();
            p.mesh = with_resolution(&spec.mesh, n, cfg.seed);
            let mut disc = Discretization::new(&p)?;
            let traj = disc.run(None)?;
            let e = disc.error_norms(&traj.state, traj.t)?;
            Ok(Level {
                n,
                h: disc.mesh.max_element_diameter(),
                l1: e.l1,
                l2_m: e.l2_m,
                linf: e.linf,
            })
        })
        .collect()
}

pub fn convergence_csv(levels: &[Level]) -> String {
    let mut s = String::from("n,h,l1,l2_m,linf,rate_l1,rate_l2\n");
    for (i, l) in levels.iter().enumerate() {
        let _ = write!(s, "{},{:e},{:e},{:e},{:e}", l.n, l.h, l.l1, l.l2_m, l.linf);
        if i > 0 {
            let prev = &levels[i - 1];
            let r = |a: f64, b: f64| (a / b).ln() / (prev.h / l.h).ln();
            let _ = write!(s, ",{:.4},{:.4}", r(prev.l1, l.l1), r(prev.l2_m, l.l2_m));
        } else {
            s.push_str(",,");
        }
        s.push('\n');
    }
    s
}

pub fn convergence(cfg: &RunConfig, levels: usize, base: usize) -> Result<()> {
    let out = prepare_output(cfg)?;
    let table = convergence_levels(cfg, levels, base)?;
    let csv = convergence_csv(&table);
    fs::write(out.join("convergence.csv"), &csv)?;
    print!("{csv}");
    let h: Vec<f64> = table.iter().map(|l| l.h).collect();
    let l1: Vec<f64> = table.iter().map(|l| l.l1).collect();
    let l2: Vec<f64> = table.iter().map(|l| l.l2_m).collect();
    println!("fitted order L1 = {:.4}", fitted_order(&h, &l1));
    println!("fitted order L2_M = {:.4}", fitted_order(&h, &l2));
    Ok(())
}

pub fn mesh_gen(spec: &str, seed: u64, path: &Path) -> Result<()> {
    let Some(spec) = parse_generator(spec, seed)? else {
        bail!("'{spec}' is not a generator spec (square:N, disk:N, annulus:R0:R1:N, interval:N, random-interval:N)");
    };
    let mesh = generate_mesh(&spec)?;
    mesh.save(path)?;
    println!(
        "{}: {} vertices, {} elements, {} boundary faces",
        path.display(),
        mesh.num_vertices(),
        mesh.num_elements(),
        mesh.boundary_faces().len()
    );
    Ok(())
}

pub fn dump_operators(cfg: &RunConfig) -> Result<()> {
    let out = prepare_output(cfg)?;
    let disc = discretize(cfg)?;
    write_matrix_market(out.join("M.mtx"), &disc.ops.mass)?;
    write_matrix_market(out.join("Q.mtx"), &disc.ops.stiffness)?;
    write_matrix_market(out.join("B.mtx"), &disc.ops.boundary)?;
    write_matrix_market(out.join("Pi.mtx"), &disc.sat.pi)?;
    println!(
        "wrote M, Q, B, Pi ({} unknowns) to {}",
        disc.ndofs(),
        out.display()
    );
    Ok(())
}
