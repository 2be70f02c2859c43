use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use cgsat::basis::BasisKind;
use cgsat::timeint::{MassSolver, Scheme};
use cgsat_cli::commands;
use cgsat_cli::config::RunConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cgsat",
    version,
    about = "CG solver with weak SBP-SAT boundary conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March a problem in time and write the final field, energy history and summary.
    Solve(RunArgs),
    /// Extreme eigenvalues of the stability matrix with and without SAT.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
        /// Eigenvalues reported at each end of the spectrum.
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Error norms and fitted orders under uniform refinement.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Resolution N of the coarsest level; doubled per level.
        #[arg(long, default_value_t = 4)]
        base_cells: usize,
    },
    /// Write a generated mesh in the plain-text mesh format.
    MeshGen {
        /// square:N, disk:N, annulus:R0:R1:N, interval:N or random-interval:N
        #[arg(long)]
        mesh: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write M, Q, B and Π in Matrix Market format.
    DumpOperators(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Mesh file or generator spec.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    basis: Option<BasisKind>,
    #[arg(long)]
    volume_quad: Option<usize>,
    #[arg(long)]
    edge_quad: Option<usize>,
    #[arg(long)]
    split_alpha: Option<f64>,
    #[arg(long)]
    sat_scale: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Abort once max |u| exceeds this.
    #[arg(long)]
    blowup: Option<f64>,
    #[arg(long)]
    mass_solver: Option<MassSolver>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => {$(
                if let Some(v) = self.$f {
                    c.$f = Some(v);
                }
            )*};
        }
        over!(
            mesh,
            cells,
            order,
            basis,
            volume_quad,
            edge_quad,
            split_alpha,
            sat_scale,
            scheme,
            cfl,
            t_end,
            max_steps,
            blowup,
            mass_solver
        );
        if let Some(p) = self.problem {
            c.problem = p;
        }
        if let Some(o) = self.output {
            c.output = o;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => commands::solve(&a.resolve()?),
        Command::Spectrum { run, k } => commands::spectrum(&run.resolve()?, k),
        Command::Convergence {
            run,
            levels,
            base_cells,
        } => commands::convergence(&run.resolve()?, levels, base_cells),
        Command::MeshGen { mesh, seed, output } => commands::mesh_gen(&mesh, seed, &output),
        Command::DumpOperators(a) => commands::dump_operators(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
