mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

/// Certify coefficient classes and probe sine series for uniform convergence.
#[derive(Debug, Parser)]
#[command(name = "mvbvlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Issue a class membership certificate on a finite window.
    Certify(commands::CertifyArgs),
    /// Materialize a prefix of a sequence as `k,a_k` CSV with a JSON sidecar.
    Generate(commands::GenerateArgs),
    /// Sup-gaps over dyadic pairs and a convergence verdict.
    Converge(commands::ConvergeArgs),
    /// Partial-sum gaps of a block construction at its adversarial points.
    DivergeDemo(commands::DivergeArgs),
    /// Check the witness corpus against the expected class-membership matrix.
    Relations(commands::RelationsArgs),
    /// Sector, variation and tail diagnostics for a two-sided complex sequence.
    ComplexCheck(commands::ComplexArgs),
}

/// Where the sequence comes from: a spec file or a named generator.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// JSON spec or `k,a_k` CSV file.
    #[arg(long, conflicts_with = "builtin")]
    pub spec: Option<PathBuf>,
    /// Builtin generator: thm1, thm6, prop3, power_p, log_damped, constant,
    /// dyadic_ramp or sparse_zeros.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Exponent for power_p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Value for constant.
    #[arg(long)]
    pub c: Option<f64>,
    /// Exponent for dyadic_ramp.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Deepest generation for thm1 / thm6.
    #[arg(long)]
    pub jmax: Option<u64>,
    /// Highest dyadic level for prop3.
    #[arg(long)]
    pub kmax: Option<u64>,
    /// Scale of M_n = scale * ceil(log2(n + 2)) for thm6.
    #[arg(long)]
    pub growth_scale: Option<f64>,
}

/// Output file prefix; `PREFIX.csv` and `PREFIX.json` are written.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
}

/// Worker cap read from `MVBVLAB_THREADS`.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("MVBVLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("MVBVLAB_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        bail!("MVBVLAB_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Certify(a) => commands::certify(a),
        Command::Generate(a) => commands::generate(a),
        Command::Converge(a) => commands::converge(a),
        Command::DivergeDemo(a) => commands::diverge_demo(a),
        Command::Relations(a) => commands::relations(a),
        Command::ComplexCheck(a) => commands::complex_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(commands::Outcome::Ok) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerdictFailure(msg)) => {
            eprintln!("verdict check failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
