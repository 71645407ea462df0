mod input;
mod report;
mod run;

use std::path::PathBuf;
use std::process;

use anyhow::{Context, Result};
use clap::Parser;
use ksoliton::verify::GridSpec;

use run::{Command, Exit, Options};

/// Extremal toric soliton solver for labelled polygons.
#[derive(Parser)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML spec file
    spec: PathBuf,
    /// Grid points per side for the residual check
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Finite-difference step in the canonical chart
    #[arg(long, value_name = "STEP")]
    h: Option<f64>,
    /// Residual tolerance
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
    /// Directory for profile_A.csv, profile_B.csv and residual.csv
    #[arg(long, value_name = "DIR")]
    csv: Option<PathBuf>,
    /// Directory for the report file
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Halve every tolerance
    #[arg(long)]
    strict: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(exit) => exit,
        Err(e) => {
            eprintln!("error: {e:#}");
            Exit::Failure
        }
    };
    process::exit(code as i32);
}

fn execute(cli: &Cli) -> Result<Exit> {
    let text = std::fs::read_to_string(&cli.spec)
        .with_context(|| format!("reading {}", cli.spec.display()))?;
    let spec = input::parse(&text)?;
    let mut grid = GridSpec::default();
    if let Some(n) = cli.grid {
        anyhow::ensure!(n >= 2, "--grid must be at least 2");
        grid.n = n;
    }
    if let Some(h) = cli.h {
        anyhow::ensure!(h > 0.0 && h.is_finite(), "--h must be positive");
        grid.step = Some(h);
    }
    if let Some(tol) = cli.tol {
        anyhow::ensure!(tol > 0.0, "--tol must be positive");
        grid.tol = tol;
    }
    if cli.strict {
        grid = grid.strict();
    }
    let opts = Options {
        grid,
        strict: cli.strict,
        rows: cli.csv.is_some(),
    };
    let out = run::run(cli.command, &spec, &opts)?;
    let text = out.report.to_toml()?;
    print!("{text}");
    std::fs::create_dir_all(&cli.out)?;
    let path = cli.out.join("report.toml");
    std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    if let Some(dir) = &cli.csv {
        std::fs::create_dir_all(dir)?;
        if let Some(s) = &out.solution {
            report::write_profile_csvs(dir, s)?;
        }
        if !out.rows.is_empty() {
            report::write_residual_csv(dir, &out.rows)?;
        }
    }
    Ok(out.exit)
}
