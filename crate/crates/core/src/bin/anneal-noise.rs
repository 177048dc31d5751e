use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anneal_noise_core::config::{ConfigLayer, RunConfig, SEED_ENV_VAR};
use anneal_noise_core::output::{cmd_fit, cmd_plotdata, cmd_table};
use anneal_noise_core::Result;

#[derive(Parser)]
#[command(
    name = "anneal-noise",
    version,
    about = "Anneal a small tanh network, then refine it with hidden-weight noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and refine one network; writes trace.csv and network.txt.
    Fit(RunArgs),
    /// Error table over both functions and all noise levels; writes table.csv.
    Table(RunArgs),
    /// Turn a trace.csv into outputs.dat and errors.dat.
    Plotdata {
        trace: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// square or sqrt.
    #[arg(long)]
    function: Option<String>,
    /// Noise amplitude, percent of the weight bounds' half-width.
    #[arg(long, allow_hyphen_values = true)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seeds for `table`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated noise levels for `table`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    noise_levels: Option<Vec<f64>>,
    #[arg(long)]
    grid_size: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    bounds_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bounds_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_initial: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    cooling: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    t_final: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    move_step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        let flags = ConfigLayer {
            function: self.function,
            noise_percent: self.noise,
            seed: self.seed,
            seeds: self.seeds,
            noise_levels: self.noise_levels,
            grid_size: self.grid_size,
            t_initial: self.t_initial,
            cooling_factor: self.cooling,
            steps_per_temperature: self.steps,
            t_final: self.t_final,
            move_step: self.move_step,
            bounds_min: self.bounds_min,
            bounds_max: self.bounds_max,
            output_dir: self.out,
        };
        let env_seed = std::env::var(SEED_ENV_VAR).ok();
        RunConfig::resolve(flags, file, env_seed.as_deref())
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args.resolve()?),
        Command::Table(args) => cmd_table(&args.resolve()?),
        Command::Plotdata { trace, out } => cmd_plotdata(&trace, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
