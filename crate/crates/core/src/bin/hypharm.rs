use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypharm::scenario::{bundle_summary, emit_report, run_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "hypharm",
    about = "Spectral-support estimation on rank-one hyperbolic spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run(RunArgs),
    /// Run verification suites.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Plain key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario tag: annulus-band | ball-band | eigen | collapse-weak |
    /// collapse-weighted | sequence-mode | counterexample-lpq.
    #[arg(long)]
    scenario: Option<String>,
    /// Model space: h2 | h3 | h4c.
    #[arg(long)]
    space: Option<String>,
    /// Band edges as `beta,alpha` (the eigen scenario reads alpha).
    #[arg(long)]
    band: Option<String>,
    /// Number of Laplacian powers N.
    #[arg(long)]
    powers: Option<u32>,
    /// Norm tag: weak-l2 | weighted:<M> | mp:<p> | lorentz:<p>,<q|inf>.
    #[arg(long)]
    norm: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json | csv.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Run the full acceptance battery and print a pass/fail table.
    #[arg(long)]
    acceptance: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Suite(args) => {
            if !args.acceptance {
                eprintln!("nothing to do: pass --acceptance");
                return ExitCode::FAILURE;
            }
            let results = hypharm::acceptance::run_all();
            let mut all_pass = true;
            for r in &results {
                println!("{}", r.line());
                all_pass &= r.passed;
            }
            println!(
                "{} of {} criteria passed",
                results.iter().filter(|r| r.passed).count(),
                results.len()
            );
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(args: RunArgs) -> hypharm::Result<()> {
    let mut config = match &args.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(v) = &args.scenario {
        config.set("scenario", v)?;
    }
    if let Some(v) = &args.space {
        config.set("space", v)?;
    }
    if let Some(v) = &args.band {
        config.set("band", v)?;
    }
    if let Some(v) = args.powers {
        config.set("powers", &v.to_string())?;
    }
    if let Some(v) = &args.norm {
        config.set("norm", v)?;
    }
    if let Some(v) = &args.out {
        config.out_dir = v.clone();
    }
    if let Some(v) = &args.format {
        config.set("format", v)?;
    }

    let bundle = run_scenario(&config)?;
    let out_dir = config.out_dir.clone();
    let files = emit_report(&bundle, &out_dir)?;
    for (k, v) in bundle_summary(&bundle) {
        println!("{k:16} {v}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
