use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qas_cli::output::write_outputs;
use qas_cli::presets::{preset, presets};
use qas_cli::{run_experiment, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "qas",
    version,
    about = "Moment-subspace quantum dynamics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config key, e.g. --set integrator.dt=0.01
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Print the preset's configuration as TOML instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// List the available presets.
    ListPresets,
}

fn execute(cfg: ExperimentConfig, out: Option<PathBuf>, set: &[String]) -> Result<(), CliError> {
    let mut cfg = cfg.with_overrides(set)?;
    if out.is_some() {
        cfg.output.dir = out;
    }
    let dir = cfg.output.resolve_dir();
    let report = run_experiment(&cfg, |line| println!("{line}"))?;
    for path in write_outputs(&report, &dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, set } => {
            ExperimentConfig::from_path(&config).and_then(|cfg| execute(cfg, out, &set))
        }
        Command::Preset {
            name,
            out,
            set,
            print,
        } => match preset(&name) {
            None => Err(CliError::Config(format!(
                "unknown preset '{name}' (see `qas list-presets`)"
            ))),
            Some(cfg) if print => cfg.with_overrides(&set).map(|cfg| {
                print!("{}", toml::to_string(&cfg).expect("config serializes"));
            }),
            Some(cfg) => execute(cfg, out, &set),
        },
        Command::ListPresets => {
            for p in presets() {
                println!("{:<22} {}", p.name, p.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
