use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ac2cd_cli::checks::{report, verify_suite, Level, VerifyOptions};
use ac2cd_cli::config::{ExperimentConfig, MethodKind, MethodSpec, StepsizeName};
use ac2cd_cli::output::write_outputs;
use ac2cd_cli::summary::summary_text;
use ac2cd_cli::{run_experiment, CliError};
use ac2cd_core::suite::{write_instance, Family};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ac2cd", version, about = "Two-coordinate descent solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method from one starting point.
    Solve(RunArgs),
    /// Run the configured comparison over all repetitions.
    Bench(RunArgs),
    /// Write the configured instance to a file.
    Gen(RunArgs),
    /// Run the oracle checks.
    Verify {
        #[arg(value_enum, default_value = "fast")]
        level: LevelArg,
        /// Desynchronize the cache in the coherence check (test hook).
        #[arg(long, hide = true)]
        corrupt_cache: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family defaults to use when no config is given.
    #[arg(long, default_value = "chebyshev")]
    family: String,
    /// Instance seed and first starting-point seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Method name, or a comma-separated list for `bench`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Threshold of the AC2CD index rule.
    #[arg(long)]
    tau: Option<f64>,
    /// AC2CD stepsize rule.
    #[arg(long)]
    stepsize: Option<String>,
    #[arg(long)]
    max_outer: Option<usize>,
}

impl RunArgs {
    fn config(&self, single: bool) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let family: Family = self.family.parse().map_err(|e: ac2cd_core::suite::SuiteError| CliError::Config(e.to_string()))?;
                ExperimentConfig::for_family(family)
            }
        };
        if let Some(seed) = self.seed {
            cfg.instance.seed = seed;
            cfg.repetitions.start_seed = seed;
            cfg.repetitions.seeds = None;
        }
        if let Some(list) = &self.method {
            let mut methods = Vec::new();
            for name in list.split(',') {
                let kind: MethodKind = name.trim().parse()?;
                let spec = cfg.methods.iter().find(|m| m.name == kind).cloned().unwrap_or_else(|| MethodSpec::new(kind));
                methods.push(spec);
            }
            cfg.methods = methods;
        }
        if single {
            cfg.methods.truncate(1);
            let first = cfg.repetitions.seed_list()[0];
            cfg.repetitions.seeds = Some(vec![first]);
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(eps) = self.eps {
            cfg.stop.epsilon = eps;
        }
        if let Some(k) = self.max_outer {
            cfg.stop.max_outer = k;
        }
        let stepsize = self.stepsize.as_deref().map(str::parse::<StepsizeName>).transpose()?;
        if let Some(m) = cfg.methods.iter_mut().find(|m| m.name == MethodKind::Ac2cd) {
            m.tau = self.tau.or(m.tau);
            m.stepsize = stepsize.or(m.stepsize);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve(args) => experiment(&args.config(true)?),
        Command::Bench(args) => experiment(&args.config(false)?),
        Command::Gen(args) => {
            let cfg = args.config(false)?;
            let text = write_instance(&cfg.build_instance()?);
            match &args.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
                    let path = dir.join("instance.txt");
                    std::fs::write(&path, text).map_err(|e| CliError::Io(e.to_string()))?;
                    println!("{}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Verify { level, corrupt_cache } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let started = Instant::now();
            Ok(report(&verify_suite(level, VerifyOptions { corrupt_cache }), started))
        }
    }
}

fn experiment(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let out = run_experiment(cfg)?;
    write_outputs(&out, &cfg.output)?;
    print!("{}", summary_text(&out.summary(), cfg.output.with_time));
    println!("wrote {}", cfg.output.dir.display());
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
