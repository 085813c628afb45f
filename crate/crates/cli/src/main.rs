use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xbar_core::experiment::{validate_config, ExperimentConfig, Overrides};
use xbar_core::{run_experiment, Error, ErrorCategory};

/// Power side-channel experiments on simulated NVM crossbars.
#[derive(Parser, Debug)]
#[command(name = "xbar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run(CommonArgs),
    /// Parse and check a config without running it.
    Validate(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Path to the TOML config.
    config: PathBuf,
    /// Master seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset root (overrides `data_dir`).
    #[arg(long, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (overrides `jobs`).
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the fully populated config as TOML.
    #[arg(long)]
    print_config: bool,
}

impl CommonArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = validate_config(&self.config)?;
        cfg.apply_overrides(&Overrides {
            seed: self.seed,
            data_dir: self.data_dir.clone(),
            output_dir: self.out.clone(),
            jobs: self.jobs,
        });
        cfg.validate()?;
        if self.print_config {
            print!("{}", cfg.to_toml()?);
        }
        Ok(cfg)
    }
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Io => 4,
        ErrorCategory::Numeric => 5,
        ErrorCategory::Usage => 1,
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Validate(args) => {
            let cfg = args.load()?;
            eprintln!("{}: ok ({})", args.config.display(), cfg.experiment);
        }
        Command::Run(args) => {
            let cfg = args.load()?;
            let manifest = run_experiment(&cfg)?;
            for f in &manifest.files {
                println!("{}", cfg.output_dir.join(&f.file).display());
            }
            println!(
                "{}",
                cfg.output_dir.join(xbar_core::experiment::MANIFEST_FILE).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
