use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oqw::cli::{self, Command, ExperimentConfig, ModelKind, Overrides};

#[derive(Parser)]
#[command(
    name = "oqw",
    version,
    about = "Relaxation spectra and dynamical transitions of dephased quantum walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Eigenvalues, Floquet exponents and eigenvectors at one parameter point
    Spectrum(Common),
    /// Tracked slow modes over a window of the control angle
    Sweep(Common),
    /// Step-by-step relaxation from an initial state
    Relax(Common),
    /// Locate a transition (scan type set by `scan` in the config)
    Locate(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Ring,
    Coined,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, allow_negative_numbers = true)]
    j1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long = "L")]
    length: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Relax(a) => (Command::Relax, a),
        Sub::Locate(a) => (Command::Locate, a),
    };
    match execute(command, args) {
        Ok(manifest) => {
            for o in &manifest.outputs {
                println!("{}", o.file);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}

fn execute(command: Command, args: Common) -> oqw::Result<cli::RunManifest> {
    let base = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = Overrides {
        model: args.model.map(|m| match m {
            Model::Ring => ModelKind::Ring,
            Model::Coined => ModelKind::Coined,
        }),
        j1: args.j1,
        j2: args.j2,
        j3: args.j3,
        phi: args.phi,
        length: args.length,
        beta: args.beta,
        q: args.q,
        grid: args.grid,
        out: args.out,
    };
    cli::run(command, base.apply(&overrides), args.threads)
}
