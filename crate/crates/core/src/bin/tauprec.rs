use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tauprec::experiments::{
    emit_csv, format_table, run_example, run_spectrum, write_spectrum_csv, PartialConfig, SizeList,
};

#[derive(Parser)]
#[command(
    name = "tauprec",
    version,
    about = "τ-preconditioned Krylov solvers for multilevel Toeplitz systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the benchmark systems and report iteration counts.
    Solve(RunArgs),
    /// Dense eigenvalues of the preconditioned matrix and cluster counts.
    Spectrum(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1, 2, 3, 4 or custom.
    #[arg(long)]
    example: Option<String>,
    /// Size per level; a comma-separated list runs several sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    /// symbol_tau, natural_tau, abs_circulant, strang or none.
    #[arg(long)]
    precond: Option<String>,
    /// minres or pcg.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cluster radius for `spectrum`.
    #[arg(long)]
    eps: Option<f64>,
}

impl RunArgs {
    fn to_config(&self) -> tauprec::Result<tauprec::experiments::RunConfig> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            example: self.example.clone(),
            n: self.n.clone().map(SizeList::Many),
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            precond: self.precond.clone(),
            solver: self.solver.clone(),
            tol: self.tol,
            maxit: self.maxit,
            seed: self.seed,
            out: self.out.clone(),
            eps: self.eps,
        };
        file.merge(flags).resolve()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (args, spectrum) = match &cli.command {
        Command::Solve(a) => (a, false),
        Command::Spectrum(a) => (a, true),
    };
    let config = match args.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outcome = if spectrum {
        run_spectrum(&config).and_then(|reports| {
            for (n, r) in &reports {
                println!(
                    "n = {n}: {} eigenvalues in [{:.6e}, {:.6e}]",
                    r.values.len(),
                    r.min,
                    r.max
                );
                for q in &r.outliers {
                    println!("  outside B({:?}, {}): {}", q.centers, q.eps, q.count);
                }
            }
            if let Some(path) = &config.out {
                write_spectrum_csv(&reports, std::fs::File::create(path)?)?;
            }
            Ok(true)
        })
    } else {
        run_example(&config).and_then(|rows| {
            print!("{}", format_table(&rows));
            if let Some(path) = &config.out {
                emit_csv(&rows, path)?;
            }
            Ok(rows.iter().all(|r| r.converged))
        })
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "error: solver did not converge within {} iterations",
                config.maxit
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
