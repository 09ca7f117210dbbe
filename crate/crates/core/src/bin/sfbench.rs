use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semifactual::bench::{emit_report, load_artifact, render_charts, run_benchmark, ExperimentConfig};
use semifactual::data::synthetic::{scm_chain_table, two_gaussians_table, write_table};
use semifactual::Error;

#[derive(Parser)]
#[command(name = "sfbench", about = "Semi-factual explanation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method over k-fold splits of every dataset.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Rewrite score tables from a saved run artifact.
    Report {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Redraw rank charts from a saved run artifact.
    Charts {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic fixture datasets.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Load { .. } | Error::Schema(_) => 3,
        _ => 1,
    }
}

fn sibling_dir(artifact: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| artifact.parent().map(Path::to_path_buf).unwrap_or_default())
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run { config, out, seed, jobs } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            cfg.validate()?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let artifact = run_benchmark(&cfg)?;
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("artifact.json"), serde_json::to_string(&artifact)?)?;
            let mut written = emit_report(&artifact, &dir)?;
            written.extend(render_charts(&artifact, &dir)?);
            for p in written {
                println!("{}", p.display());
            }
            for f in &artifact.dataset_errors {
                eprintln!("dataset `{}` skipped: {}", f.dataset, f.reason);
            }
            Ok(if artifact.dataset_errors.is_empty() { 0 } else { 3 })
        }
        Command::Report { artifact, out } => {
            let a = load_artifact(&artifact)?;
            for p in emit_report(&a, &sibling_dir(&artifact, out))? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Charts { artifact, out } => {
            let a = load_artifact(&artifact)?;
            for p in render_charts(&a, &sibling_dir(&artifact, out))? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Fixtures { out, seed } => {
            std::fs::create_dir_all(&out)?;
            let gauss = two_gaussians_table(500, seed);
            write_table(&gauss, &out.join("two_gaussians.csv"), &out.join("two_gaussians.schema.json"))?;
            let (chain, scm) = scm_chain_table(500, seed);
            write_table(&chain, &out.join("scm_chain.csv"), &out.join("scm_chain.schema.json"))?;
            std::fs::write(out.join("scm_chain.scm.json"), serde_json::to_string_pretty(&scm)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
