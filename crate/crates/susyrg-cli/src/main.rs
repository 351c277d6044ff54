use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use susyrg_cli::{
    cmd_critical, cmd_decompose, cmd_flow, cmd_verify, CliError, MethodChoice, RunConfig, Suite,
};

#[derive(Debug, Parser)]
#[command(
    name = "susyrg",
    version,
    about = "Multiscale decomposition, coupling flow and critical mass runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Critical-mass method: backward, contraction, bisection or all.
    #[arg(long, global = true, default_value = "all")]
    method: MethodChoice,
    /// Identity suite: susy, localization, matching, polymer or all.
    #[arg(long, global = true, default_value = "all")]
    suite: Suite,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Builds or loads the decomposition tables and writes the residual report.
    Decompose,
    /// Writes the coupling trajectory as CSV.
    Flow,
    /// Solves for the critical mass.
    Critical,
    /// Runs identity suites.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = cli.cache_dir {
        cfg.cache_dir = d;
    }
    if let Some(d) = cli.out_dir {
        cfg.output_dir = d;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Decompose => {
            let out = cmd_decompose(&cfg)?;
            println!(
                "{} (residual {:.3e}, {} cache hits, {} tables computed)",
                out.report.display(),
                out.reconstruction_residual,
                out.cache.hits,
                out.cache.computed
            );
        }
        Command::Flow => println!("{}", cmd_flow(&cfg)?.display()),
        Command::Critical => {
            let out = cmd_critical(&cfg, cli.method)?;
            for r in &out.results {
                println!("{}: mu_c = {:.17e}", r.record.method, r.record.mu_critical);
            }
            if let Some(d) = out.max_relative_difference {
                println!("max pairwise relative difference {d:.3e}");
            }
            println!("{}", out.report.display());
        }
        Command::Verify => {
            cmd_verify(&cfg, cli.suite)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
