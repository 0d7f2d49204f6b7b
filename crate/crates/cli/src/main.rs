use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rbmvr_cli::commands::{self, Context, Method};
use rbmvr_cli::config::ExperimentConfig;
use rbmvr_cli::CliError;

#[derive(Parser)]
#[command(name = "rbmvr", version, about = "Reduced basis and multilevel variance reduction experiments")]
struct Cli {
    /// Experiment configuration (TOML); defaults describe the heat benchmark.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed of the replication streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write no wall-clock values, making outputs a function of config and seeds.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    McHdg,
    McRb,
    Mvr,
}

#[derive(Subcommand)]
enum Cmd {
    /// Greedy RB construction; writes the model file and greedy.csv.
    BuildRb,
    /// Replicated estimator runs; writes run-<method>.csv.
    Run {
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Compares the cost-optimal plans for each level count; writes select.csv.
    Select,
    /// Closed-form benchmark moments and probe outputs; writes oracle.csv.
    Oracle,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rbmvr_core::par::set_num_threads(n).map_err(CliError::Config)?;
    }
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::from_toml("")?,
    };
    let ctx = Context::new(cfg, cli.out, cli.seed, cli.deterministic);
    match cli.cmd {
        Cmd::BuildRb => {
            let r = commands::build_rb(&ctx)?;
            let last = r.table.last().map(|t| t.max_error).unwrap_or(0.0);
            Ok(format!(
                "built N = {} ({}), max test error at N_max {last:.3e}; wrote {}",
                r.n_max,
                if r.certified { "certified" } else { "uncertified" },
                commands::describe(&ctx.out, &[&ctx.cfg.rb.model_file, "greedy.csv"])
            ))
        }
        Cmd::Run { method } => {
            let m = match method {
                MethodArg::McHdg => Method::McHdg,
                MethodArg::McRb => Method::McRb,
                MethodArg::Mvr => Method::Mvr,
            };
            let rows = commands::run(&ctx, m)?;
            let mut msg = String::new();
            for r in rows.iter().filter(|r| r.is_summary()) {
                msg.push_str(&format!(
                    "{} M={} E={:.6} bound={:.3e}{}\n",
                    r.method,
                    r.m,
                    r.estimate_e,
                    r.bound_e,
                    r.error_e.map(|e| format!(" error={e:.3e}")).unwrap_or_default()
                ));
            }
            Ok(msg.trim_end().to_string())
        }
        Cmd::Select => {
            let rows = commands::select(&ctx)?;
            let mut msg = String::new();
            for r in &rows {
                msg.push_str(&format!(
                    "L={} N={:?} cost/best={:.3} predicted speedup {:.1}\n",
                    r.plan.spec.num_levels(),
                    r.plan.spec.dims(),
                    r.normalized,
                    r.plan.predicted_speedup
                ));
            }
            Ok(msg.trim_end().to_string())
        }
        Cmd::Oracle => {
            let r = commands::oracle(&ctx)?;
            Ok(format!("E[s] = {:.12}, V[s] = {:.12}", r.moments.mean, r.moments.variance))
        }
    }
}
