//! `focal`: command-line front end for focal-core.
//!
//! Exit codes: 0 success, 1 input error, 2 computation failure.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "focal", version, about = "Focal values, Bautin ideals and limit-cycle certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub(crate) format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub(crate) output: Option<PathBuf>,
    /// Record wall-clock timings in the report.
    #[arg(long, global = true)]
    pub(crate) timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Return-map coefficients L_k of a homogeneous perturbation.
    Lyapunov {
        #[arg(long)]
        field: PathBuf,
        /// Truncation order K (default 9 for d=2, 13 for d=3).
        #[arg(long)]
        order: Option<usize>,
        /// Treat unlisted coefficients as free parameters.
        #[arg(long)]
        symbolic: bool,
    },
    /// Displacement certificate at a parameter point, checked numerically.
    Certify {
        #[arg(long)]
        field: PathBuf,
        /// File with `name value` lines for the free parameters.
        #[arg(long)]
        lambda: PathBuf,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Successive ε-derivatives of the return map of x∂y − y∂x + εX₁.
    Melnikov {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 5)]
        kmax: usize,
        /// Compare against numerical ε-scaling runs.
        #[arg(long)]
        validate: bool,
    },
    /// Gröbner basis of the ideal generated by the coefficients up to K.
    Ideal {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        /// Use the rotation-invariant generators z_k instead of L_k.
        #[arg(long)]
        use_invariants: bool,
    },
    /// Bautin index of the coefficient sequence up to K.
    Index {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        use_invariants: bool,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FOCAL_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("FOCAL_THREADS: invalid thread count '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("FOCAL_THREADS: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let common = cli.common.clone();
    let result = match cli.command {
        Command::Lyapunov { field, order, symbolic } => commands::lyapunov(&field, order, symbolic, &common),
        Command::Certify { field, lambda, order } => commands::certify(&field, &lambda, order, &common),
        Command::Melnikov { field, kmax, validate } => commands::melnikov(&field, kmax, validate, &common),
        Command::Ideal { field, order, use_invariants } => commands::ideal(&field, order, use_invariants, false, &common),
        Command::Index { field, order, use_invariants } => commands::ideal(&field, order, use_invariants, true, &common),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let text = report.render(common.format);
    match &common.output {
        Some(path) => {
            if let Err(e) = report::write_atomic(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
