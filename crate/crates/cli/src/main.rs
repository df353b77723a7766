use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kerr_cli::{config, to_json, CliError, RunConfig, EXIT_OK, EXIT_VALIDATION};
use kerr_core::{ExecPolicy, KerrParams};

#[derive(Parser, Debug)]
#[command(name = "kerrlab", version, about = "Scalar waves on slowly rotating Kerr black holes")]
struct Cli {
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    spin: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<KerrParams, CliError> {
        Ok(KerrParams::new(self.mass, self.spin)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one azimuthal mode from a JSON run configuration.
    Evolve {
        #[arg(long, required_unless_present = "schema")]
        config: Option<PathBuf>,
        /// Override the azimuthal mode of the configuration.
        #[arg(long, allow_negative_numbers = true)]
        mode: Option<i32>,
        /// Override the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the configuration schema and exit.
        #[arg(long)]
        schema: bool,
    },
    /// Trapped null geodesics: the photon band and sample orbits.
    PhotonOrbits {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Positive solution and the weighted Hardy inequality.
    HardyVerify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 200)]
        tests: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Residual of the Carter commutator under refinement.
    CommutatorCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// Test function name; all of them when omitted.
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        h0: f64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Tortoise coordinate at one radius or on a table.
    TortoiseTable {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, conflicts_with_all = ["r_min", "r_max"])]
        r: Option<f64>,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
    /// Decay exponents from an observers.csv file.
    FitDecay {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 50.0)]
        t_min: f64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    let policy = if cli.sequential { ExecPolicy::Sequential } else { ExecPolicy::Parallel };
    match cli.command {
        Command::Evolve { config, mode, output, schema } => {
            if schema {
                println!("{}", config::schema_json());
                return Ok(());
            }
            let path = config.expect("clap enforces --config");
            let mut cfg = RunConfig::load(&path)?;
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            let res = kerr_cli::cmd_evolve(&cfg, policy)?;
            eprintln!(
                "{} steps of dt = {:.4e}; results in {}",
                res.output.steps,
                res.output.dt,
                cfg.output_dir.display()
            );
        }
        Command::PhotonOrbits { params, samples } => {
            print!("{}", kerr_cli::cmd_photon_orbits(&params.params()?, samples)?);
        }
        Command::HardyVerify { params, epsilon, tests, seed } => {
            let rep = kerr_cli::cmd_hardy(&params.params()?, epsilon, tests, seed, policy)?;
            print!("{}", to_json(&rep));
        }
        Command::CommutatorCheck { params, function, h0, levels } => {
            print!("{}", kerr_cli::cmd_commutator(&params.params()?, function.as_deref(), h0, levels)?);
        }
        Command::TortoiseTable { params, r, r_min, r_max, n } => {
            let p = params.params()?;
            let out = match r {
                Some(r) => kerr_cli::cmd_tortoise_single(&p, r)?,
                None => {
                    let lo = r_min.unwrap_or(p.r_plus() + 0.01 * p.mass());
                    let hi = r_max.unwrap_or(100.0 * p.mass());
                    kerr_cli::cmd_tortoise_table(&p, lo, hi, n)?
                }
            };
            print!("{out}");
        }
        Command::FitDecay { params, input, t_min } => {
            let fits = kerr_cli::cmd_fit_decay(&params.params()?, &input, t_min)?;
            print!("{}", to_json(&fits));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
