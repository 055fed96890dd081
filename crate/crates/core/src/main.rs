use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use okun::report::{
    cmd_figures, cmd_fit, cmd_project, write_outputs, FitOverrides, OutputFile, RunManifest,
    RunResult,
};
use okun::Target;

#[derive(Parser)]
#[command(
    name = "okun",
    version,
    about = "Piecewise integral Okun's law fits and projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Country identifier as listed in the manifest.
    #[arg(long)]
    country: String,
    /// Output directory; defaults to the manifest's output_dir, then ".".
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the two-segment model and write a JSON report and predicted series.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Target,
        #[arg(long)]
        break_from: Option<i32>,
        #[arg(long)]
        break_to: Option<i32>,
        /// Comma-separated lag candidates, e.g. 0,1.
        #[arg(long, value_delimiter = ',')]
        lags: Option<Vec<usize>>,
    },
    /// Project the rate under a named GDP scenario.
    Project {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenario: String,
        /// Overrides the scenario's horizon year.
        #[arg(long)]
        horizon: Option<i32>,
        #[arg(long)]
        target: Option<Target>,
    },
    /// Write plot-data files for the fitted country.
    Figures {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: Option<Target>,
    },
}

fn run(cli: Cli) -> RunResult<()> {
    let (common, files): (&Common, Vec<OutputFile>) = match &cli.command {
        Command::Fit {
            common,
            target,
            break_from,
            break_to,
            lags,
        } => {
            let m = RunManifest::load(&common.manifest)?;
            let overrides = FitOverrides {
                break_from: *break_from,
                break_to: *break_to,
                lags: lags.clone(),
            };
            (common, cmd_fit(&m, &common.country, *target, &overrides)?)
        }
        Command::Project {
            common,
            scenario,
            horizon,
            target,
        } => {
            let m = RunManifest::load(&common.manifest)?;
            (
                common,
                cmd_project(&m, &common.country, scenario, *target, *horizon)?,
            )
        }
        Command::Figures { common, target } => {
            let m = RunManifest::load(&common.manifest)?;
            (common, cmd_figures(&m, &common.country, *target)?)
        }
    };
    let out = match &common.out {
        Some(dir) => dir.clone(),
        None => {
            let m = RunManifest::load(&common.manifest)?;
            m.output_dir
                .map(|d| m.base_dir.join(d))
                .unwrap_or_else(|| PathBuf::from("."))
        }
    };
    write_outputs(&out, &files)?;
    for f in &files {
        println!("{}", out.join(&f.path).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
