use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kerrcdo::config::{ModeSpec, OneOrMany, SignSpec};
use kerrcdo::state::StateSpec;
use kerrcdo::value::Cplx;
use kerrcdo::{exit_code, run::run, Job, RunConfig, Scenario, EXIT_TOLERANCE};

/// Conditional-displacement simulator: CDO convergence, heralded
/// superpositions and characteristic-function tomography.
#[derive(Parser, Debug)]
#[command(name = "kerrcdo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infidelity of the Kerr-based gate against the ideal CDO over a theta list.
    CdoFidelity(Flags),
    /// Herald |psi> +- D(beta)|psi> from an input state.
    Prepare(Flags),
    /// Herald an even or odd cat from coherent(alpha0) with beta = -2 alpha0.
    Cat(Flags),
    /// Sample the characteristic function on a square beta grid.
    Chi(Flags),
    /// Sample chi and reconstruct the Wigner function.
    Wigner(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// Kerr phase; comma-separated list for cdo-fidelity.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta: Vec<f64>,
    /// Displacement-stage amplitude, e.g. `50`, `-3i`, `1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<Cplx>,
    /// Conditional displacement beta = -i theta alpha.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<Cplx>,
    /// Cat amplitude for `cat`.
    #[arg(long, allow_hyphen_values = true)]
    alpha0: Option<Cplx>,
    /// Heralded branch: + or -.
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<SignSpec>,
    /// vacuum | "fock N" | "coherent A" | "cat A0 +|-" | "file PATH".
    #[arg(long)]
    state: Option<StateSpec>,
    #[arg(long)]
    dim_a: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeSpec>,
    /// Half extent of the beta grid.
    #[arg(long)]
    grid_b: Option<f64>,
    /// Spacing of the beta grid.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Half extent of the Wigner grid.
    #[arg(long)]
    grid_z: Option<f64>,
    /// Spacing of the Wigner grid.
    #[arg(long)]
    grid_g: Option<f64>,
    /// Detection attempts per setting; omit for exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Probability that a detection is registered.
    #[arg(long)]
    efficiency: Option<f64>,
    /// Largest accepted Wigner deviation from the parity oracle.
    #[arg(long)]
    max_error: Option<f64>,
    /// Smallest accepted fidelity of a prepared state.
    #[arg(long)]
    min_fidelity: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML (or .json) file with the same settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn layer(self) -> RunConfig {
        RunConfig {
            scenario: None,
            theta: (!self.theta.is_empty()).then_some(OneOrMany::Many(self.theta)),
            alpha: self.alpha,
            beta: self.beta,
            alpha0: self.alpha0,
            sign: self.sign,
            state: self.state,
            dim_a: self.dim_a,
            mode: self.mode,
            grid_b: self.grid_b,
            grid_h: self.grid_h,
            grid_z: self.grid_z,
            grid_g: self.grid_g,
            shots: self.shots,
            seed: self.seed,
            efficiency: self.efficiency,
            out: self.out,
            max_error: self.max_error,
            min_fidelity: self.min_fidelity,
        }
    }
}

fn execute(scenario: Scenario, mut flags: Flags) -> Result<bool, kerrcdo::CliError> {
    let file = match flags.config.take() {
        Some(path) => RunConfig::load(&path)?,
        None => RunConfig::default(),
    };
    let job = Job::resolve(scenario, flags.layer().over(file))?;
    let report = run(&job)?;
    // A closed stdout (e.g. piped into `head`) must not fail the run.
    let mut stdout = std::io::stdout().lock();
    let summary = serde_json::to_string_pretty(&report.summary).unwrap_or_default();
    let _ = writeln!(stdout, "{summary}");
    let _ = writeln!(stdout, "wrote {} files and report.json to {}", report.files.len(), job.out.display());
    if !report.tolerances_met {
        eprintln!("kerrcdo: a configured tolerance was not met");
    }
    Ok(report.tolerances_met)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, flags) = match cli.command {
        Command::CdoFidelity(f) => (Scenario::CdoFidelity, f),
        Command::Prepare(f) => (Scenario::Prepare, f),
        Command::Cat(f) => (Scenario::Cat, f),
        Command::Chi(f) => (Scenario::Chi, f),
        Command::Wigner(f) => (Scenario::Wigner, f),
    };
    match execute(scenario, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_TOLERANCE),
        Err(e) => {
            eprintln!("kerrcdo {scenario}: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
