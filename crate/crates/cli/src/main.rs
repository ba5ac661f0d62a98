//! `youngwave`: runs the numerical checks of the library from a TOML config.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the run
//! errors, 2 when the configuration is invalid.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;
use config::RunConfig;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "youngwave", version, about = "Stochastic wave equation toolkit")]
#[command(after_help = "Any config key can be overridden as --section.key=value, e.g. --noise.a0=0.4.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for tables, snapshots and summary.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to rayon's choice).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Kernel L1 differences, the K-quantity lattice and Strichartz slopes.
    KernelCheck,
    /// Sample a noise path; covariance and level-decay checks.
    Noise,
    /// Cauchy table of Young-integral approximations.
    Young,
    /// Picard iteration for the mild solution.
    Solve,
    /// Admissible exponent tuple, or a feasibility sweep.
    Params,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::Noise => "noise",
            Command::Young => "young",
            Command::Solve => "solve",
            Command::Params => "params",
        }
    }
}

const OWN_FLAGS: [&str; 5] = ["config", "out", "seed", "threads", "format"];

/// Splits `--key=value` arguments whose key is not a CLI flag off as config
/// overrides.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        match a.strip_prefix("--").and_then(|s| s.split_once('=')) {
            Some((k, v)) if !OWN_FLAGS.contains(&k) => overrides.push((k.to_string(), v.to_string())),
            _ => rest.push(a),
        }
    }
    (rest, overrides)
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let mut cfg = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let outcome = match cli.command {
        Command::KernelCheck => commands::kernel_check(&cfg),
        Command::Noise => commands::noise(&cfg, &cli.out),
        Command::Young => commands::young(&cfg),
        Command::Solve => commands::solve(&cfg, &cli.out),
        Command::Params => commands::params(&cfg, &cli.out),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(Failure::Config(e)) => {
            eprintln!("invalid configuration: {e:#}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let config = serde_json::to_value(&cfg).expect("config serializes");
    if let Err(e) = report.write(&cli.out, cli.format, cli.command.name(), config) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    for c in &report.checks {
        println!("{:<32} {:>14.6e}  {:<10} {}", c.name, c.value, c.threshold, if c.pass { "PASS" } else { "FAIL" });
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_are_split_from_own_flags() {
        let args = ["youngwave", "noise", "--seed=3", "--noise.a0=0.4", "--out", "x"].map(String::from).to_vec();
        let (rest, ov) = split_overrides(args);
        assert_eq!(rest, ["youngwave", "noise", "--seed=3", "--out", "x"]);
        assert_eq!(ov, [("noise.a0".to_string(), "0.4".to_string())]);
    }
}
