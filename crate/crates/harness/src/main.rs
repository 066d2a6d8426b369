use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lapcert_harness::{
    compare_runs, exit_code, init_threads, output_dir, run_to_dir, Command, ExperimentConfig, HarnessError, Result,
    EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, THREADS_ENV,
};

#[derive(Parser)]
#[command(name = "lapcert", version, about = "Certificates for penalized MLE and Laplace approximations")]
#[command(after_help = "Thread count: set LAPCERT_THREADS.")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    PmleCert(RunArgs),
    LaplaceCert(RunArgs),
    MarginalCert(RunArgs),
    EioDemo(RunArgs),
    GaussSuite(RunArgs),
    SobolevRate(RunArgs),
    /// Diff the reports of two run directories.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
}

fn run_command(command: Command, args: &RunArgs) -> Result<lapcert_harness::Report> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.command != command {
        return Err(HarnessError::Config {
            path: "command".into(),
            message: format!("config is for {}, not {command}", cfg.command),
        });
    }
    if let Some(s) = args.seed_override {
        cfg.seeds = vec![s];
    }
    let dir = output_dir(&cfg, args.out.as_deref());
    let report = run_to_dir(&cfg, &dir)?;
    eprintln!("wrote {}", dir.display());
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e} ({THREADS_ENV})");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    let (command, args) = match &cli.command {
        Cmd::PmleCert(a) => (Command::PmleCert, a),
        Cmd::LaplaceCert(a) => (Command::LaplaceCert, a),
        Cmd::MarginalCert(a) => (Command::MarginalCert, a),
        Cmd::EioDemo(a) => (Command::EioDemo, a),
        Cmd::GaussSuite(a) => (Command::GaussSuite, a),
        Cmd::SobolevRate(a) => (Command::SobolevRate, a),
        Cmd::Compare { dir_a, dir_b } => {
            return match compare_runs(dir_a, dir_b) {
                Ok(r) => {
                    if r.version_mismatch {
                        eprintln!("version mismatch: {} vs {}", r.version_a, r.version_b);
                    }
                    println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
                    ExitCode::from(if r.identical() { EXIT_OK } else { EXIT_VIOLATION } as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_ERROR as u8)
                }
            };
        }
    };
    let result = run_command(command, args);
    match &result {
        Ok(r) => {
            for (seed, c) in r.violations() {
                let at = seed.map_or_else(|| "summary".to_string(), |s| format!("seed {s}"));
                eprintln!(
                    "violation: {} at {at}: observed {:e} vs bound {:e}",
                    c.id, c.observed.value, c.bound.value
                );
            }
            eprintln!("{}: {}", command, if r.holds { "all certificates hold" } else { "certificate violations" });
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
