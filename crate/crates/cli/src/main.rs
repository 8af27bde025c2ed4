use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use starnoma_cli::{run, validate, RunManifest};
use starnoma_core::figure_recipes;

/// Monte Carlo and closed-form sweeps for STAR-RIS aided NOMA uplinks.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Flat `key = value` scene/sweep file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset figure sweep to run.
    #[arg(long)]
    recipe: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Print derived geometry without simulating.
    #[arg(long)]
    validate: bool,
    /// List preset recipes and exit.
    #[arg(long)]
    list_recipes: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_recipes {
        for r in figure_recipes() {
            println!("{:<6} {} ({} series)", r.name, r.description, r.series.len());
        }
        return ExitCode::SUCCESS;
    }
    let manifest = RunManifest {
        config: args.config,
        recipe: args.recipe,
        out: args.out,
        seed: args.seed,
        trials: args.trials,
    };
    let mut stdout = io::stdout().lock();
    let result = if args.validate {
        validate(&manifest, &mut stdout)
    } else {
        run(&manifest, &mut stdout).map(|_| ())
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
