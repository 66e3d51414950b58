use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oamcap::config::{ExperimentConfig, Overrides};
use oamcap::verify::{verify_suite, VerifyOptions};
use oamcap::{run_experiment, CliError, CliResult, Experiment, GainScale};

#[derive(Parser)]
#[command(name = "oamcap", version, about = "OAM ring-aperture link experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment sweep and write its CSV table (and SVG plot).
    Run(RunArgs),
    /// Run the invariant checks and emit a JSON report.
    Verify(VerifyArgs),
    /// Print the default config of an experiment as TOML.
    Defaults {
        #[arg(long, value_enum, default_value = "se_vs_snr")]
        experiment: Experiment,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// TOML config file; omitted keys take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed quadrature size for every geometry.
    #[arg(long)]
    quadrature: Option<usize>,
    /// Physical mode gains.
    #[arg(long, conflicts_with = "normalized")]
    raw: bool,
    /// Mode gains scaled to sum to the mode count.
    #[arg(long)]
    normalized: bool,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    quadrature: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn run(args: RunArgs) -> CliResult<()> {
    let scale = match (args.raw, args.normalized) {
        (true, _) => Some(GainScale::Raw),
        (_, true) => Some(GainScale::Normalized),
        _ => None,
    };
    let overrides = Overrides {
        experiment: args.experiment,
        seed: args.seed,
        quadrature: args.quadrature,
        out: args.out,
        scale,
        no_plot: args.no_plot,
    };
    let cfg = ExperimentConfig::load(args.config.as_deref(), &overrides)?;
    let table = run_experiment(&cfg)?;
    for path in table.write(&cfg.output.dir, cfg.output.plot)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> CliResult<()> {
    let opts = VerifyOptions {
        quadrature: args.quadrature,
        seed: args.seed,
        ..VerifyOptions::default()
    };
    if let Some(q) = opts.quadrature {
        if q < oamcap_core::aperture::MIN_QUADRATURE_POINTS {
            return Err(CliError::config("--quadrature", format!("need at least 8 points, got {q}")));
        }
    }
    let report = verify_suite(&opts)?;
    let json = report.to_json();
    match &args.report {
        Some(path) => std::fs::write(path, &json).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?,
        None => println!("{json}"),
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verify(report.failures().join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Defaults { experiment } => {
            print!("{}", ExperimentConfig::defaults(experiment).to_toml());
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
