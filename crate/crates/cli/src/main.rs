use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlpml_cli::experiment;
use nlpml_cli::{CliError, RunConfig, EXIT_OK, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "nlpml", version, about = "Nonlocal wave simulations with perfectly matched layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// key=value configuration file
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the file
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single simulation with snapshot CSVs
    Run(Common),
    /// e_h table against the nonlocal reference
    TableEh(Common),
    /// e_delta table against the local PML reference
    TableEdelta(Common),
    /// Contour and assumption checks
    Validate(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::Io { path: common.config.clone(), source })?;
    let mut cfg: RunConfig = text.parse()?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    let out = cfg.output_dir.clone();
    Ok((cfg, out))
}

fn table(cfg: &RunConfig, out: &Path, name: &str) -> Result<i32, CliError> {
    let report = if name == "table_eh" { experiment::table_eh(cfg)? } else { experiment::table_edelta(cfg)? };
    let path = experiment::write_table_command(cfg, out, name, &report)?;
    for r in &report.rows {
        let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_default();
        println!("h={:<10} delta={:<10} {}={:.3e} {order}", r.h, r.delta, report.metric, r.error);
    }
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(c) => {
            let (cfg, out) = load(&c)?;
            let s = experiment::run(&cfg, &out)?;
            println!("steps = {}\nhealth = {:e}", s.steps, s.health);
            for p in &s.snapshots {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", s.manifest.display());
            Ok(EXIT_OK)
        }
        Command::TableEh(c) => {
            let (cfg, out) = load(&c)?;
            table(&cfg, &out, "table_eh")
        }
        Command::TableEdelta(c) => {
            let (cfg, out) = load(&c)?;
            table(&cfg, &out, "table_edelta")
        }
        Command::Validate(c) => {
            let (cfg, _) = load(&c)?;
            let report = experiment::validate(&cfg)?;
            println!("{report}");
            Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
