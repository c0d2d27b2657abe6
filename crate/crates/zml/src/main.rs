use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zml::commands::{self, FormArgs, Lemma3Args, Output, ZeroModeArgs, DEFAULT_MAX_ELEMENTS};
use zml::output::emit;
use zml::CliError;

/// Zero modes of Pauli operators on the hyperbolic disc.
///
/// ZML_THREADS caps the worker pool.
#[derive(Parser)]
#[command(name = "zml", version)]
struct Cli {
    /// Write into this directory instead of stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Landau levels of a uniform field.
    Spectrum {
        /// Field strength, or start:stop:step.
        #[arg(long = "B")]
        strength: String,
        #[arg(long, default_value = "plus")]
        sector: String,
    },
    /// Shell and partial orbit sums against the uniform bound.
    Lemma3 {
        #[arg(long, default_value_t = 2)]
        genus: u32,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        max_len: u32,
        /// Defaults to 1/(2d).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value = "0,0")]
        z0: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
    },
    /// Certify whether a candidate zero mode is square integrable.
    Zeromode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "plus")]
        sector: String,
        /// Power n of the monomial z^n.
        #[arg(long, default_value_t = 0)]
        f_power: u32,
        /// Use the reciprocal of the lattice form instead of a monomial.
        #[arg(long)]
        inverse_form: bool,
        /// Comma-separated radii, or word lengths for lattice fields.
        #[arg(long)]
        cutoffs: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// Orbit of a point under the surface group.
    Tessellate {
        #[arg(long, default_value_t = 2)]
        genus: u32,
        #[arg(long)]
        max_len: u32,
        #[arg(long, default_value = "0,0")]
        z0: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
    },
    /// Invariant modulus of an automorphic form on a grid.
    Form {
        #[arg(long, default_value_t = 2)]
        genus: u32,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long = "truncation", alias = "L", default_value_t = 4)]
        truncation: u32,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 0.95)]
        extent: f64,
        #[arg(long, default_value = "0.2,0.45")]
        seed_center: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(text) = std::env::var("ZML_THREADS") {
        let n: usize = text
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("ZML_THREADS must be a positive integer, got {text:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let out: Output = match cli.command {
        Command::Spectrum { strength, sector } => commands::spectrum(&strength, &sector)?,
        Command::Lemma3 {
            genus,
            d,
            max_len,
            epsilon,
            z0,
            max_elements,
        } => commands::lemma3(&Lemma3Args {
            genus,
            d,
            max_len,
            epsilon,
            z0,
            max_elements,
        })?,
        Command::Zeromode {
            config,
            sector,
            f_power,
            inverse_form,
            cutoffs,
            rel_tol,
        } => commands::zeromode(&ZeroModeArgs {
            config,
            sector,
            f_power,
            inverse_form,
            cutoffs,
            rel_tol,
        })?,
        Command::Tessellate {
            genus,
            max_len,
            z0,
            max_elements,
        } => commands::tessellate(genus, max_len, &z0, max_elements)?,
        Command::Form {
            genus,
            k,
            m,
            truncation,
            grid,
            extent,
            seed_center,
            max_elements,
        } => commands::form(&FormArgs {
            genus,
            k,
            m,
            truncation,
            grid,
            extent,
            seed_center,
            max_elements,
        })?,
    };
    emit(&out.bytes, cli.out_dir.as_deref(), out.file_name)?;
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("zml: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
