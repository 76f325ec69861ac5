use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use parabolic_claws::cli::{
    cmd_classify, cmd_claws, cmd_dims, cmd_verify, read_problem, report_exit_code, ClawsOptions, CliError, Report,
};

/// Parabolicity, Monge-Ampere classification and conservation laws of
/// scalar evolution equations u_t = G.
#[derive(Parser)]
#[command(name = "parabolic-claws", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// JSON report (default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable report.
    #[arg(long, global = true)]
    text: bool,
    /// Include wall-clock time in the text report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parabolicity at the reference jet and Monge-Ampere tests.
    Classify {
        /// Problem file, or - for stdin.
        file: String,
        /// Solve the residue's trace equations symbolically.
        #[arg(long)]
        symbolic: bool,
    },
    /// Search for conservation laws.
    Claws {
        file: String,
        #[arg(long)]
        jet_degree: Option<u32>,
        #[arg(long)]
        base_degree: Option<u32>,
        /// Highest jet order in the density; above 2 needs --unsafe-order.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        unsafe_order: bool,
        /// Search even when the symbol is not parabolic.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        symbolic: bool,
    },
    /// Check D_t T + Div X = 0 for a given density and flux.
    Verify {
        file: String,
        #[arg(long)]
        density: String,
        /// One per spatial direction, in order.
        #[arg(long = "flux", required = true, allow_hyphen_values = true)]
        fluxes: Vec<String>,
    },
    /// Tableau and exterior-system dimensions.
    Dims {
        #[arg(short)]
        n: usize,
        #[arg(short, default_value_t = 0)]
        r: usize,
    },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Classify { file, symbolic } => cmd_classify(&read_problem(file)?, *symbolic),
        Command::Claws {
            file,
            jet_degree,
            base_degree,
            order,
            unsafe_order,
            force,
            symbolic,
        } => {
            let opts = ClawsOptions {
                jet_degree: *jet_degree,
                base_degree: *base_degree,
                order: *order,
                unsafe_order: *unsafe_order,
                force: *force,
                symbolic: *symbolic,
            };
            cmd_claws(&read_problem(file)?, &opts)
        }
        Command::Verify { file, density, fluxes } => cmd_verify(&read_problem(file)?, density, fluxes),
        Command::Dims { n, r } => cmd_dims(*n, *r),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.output.text {
                print!("{}", report.to_text(cli.output.timing));
            } else {
                print!("{}", report.to_json());
            }
            ExitCode::from(report_exit_code(&report) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
