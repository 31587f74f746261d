//! `optomech`: analytic spectra, eigenvectors, verification and evolution
//! for the dissipative optomechanical Liouvillian.
//!
//! Settings come from built-in desk defaults, then `--config`, then flags;
//! later sources win. Exit codes: 0 success, 1 check or numerical failure,
//! 2 usage or configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optomech::{Execution, Side, Variant};

use config::{Format, LabelSpec, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
    Compute(optomech::Error),
    Io(String),
}

impl From<optomech::Error> for CliError {
    fn from(e: optomech::Error) -> Self {
        match e {
            optomech::Error::InvalidParameter(m) | optomech::Error::Truncation(m) => CliError::Usage(m),
            other => CliError::Compute(other),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) | CliError::Io(m) => f.write_str(m),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) | CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "optomech", version, about = "Damping basis of the dissipative optomechanical Liouvillian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for label sweeps; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic eigenvalues over the label ranges.
    Spectrum,
    /// Blocks of one right or left damping-basis element.
    Eigvec {
        /// Label as `l,n,k,m`.
        #[arg(long, value_parser = parse_label, allow_hyphen_values = true)]
        label: Option<LabelSpec>,
        #[arg(long, value_parser = parse_side)]
        side: Option<Side>,
    },
    /// Spectrum match, residuals, Gram audit, cross-trace sums and path sums.
    Verify,
    /// Time evolution by spectral expansion and/or direct integration.
    Evolve,
    /// Timing of spectral, matrix-exponential and adaptive evolution.
    Bench,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s {
        "right" => Ok(Side::Right),
        "left" => Ok(Side::Left),
        _ => Err(format!("unknown side '{s}' (right|left)")),
    }
}

fn parse_label(s: &str) -> Result<LabelSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || format!("label must be l,n,k,m with integer l, k and non-negative n, m; got '{s}'");
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(LabelSpec {
        l: parts[0].parse().map_err(|_| bad())?,
        n: parts[1].parse().map_err(|_| bad())?,
        k: parts[2].parse().map_err(|_| bad())?,
        m: parts[3].parse().map_err(|_| bad())?,
    })
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.variant {
        cfg.params.variant = v;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Command::Eigvec { label, side } = &cli.command {
        if let Some(l) = label {
            cfg.eigvec.label = *l;
        }
        if let Some(s) = side {
            cfg.eigvec.side = *s;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<bool, CliError> {
    let exec = if cli.jobs == Some(1) { Execution::Sequential } else { Execution::Parallel };
    let out = cli.out.as_deref();
    let fmt = cfg.format;
    match cli.command {
        Command::Spectrum => output::emit(&commands::spectrum::run(cfg)?.render(fmt)?, out).map(|_| true),
        Command::Eigvec { .. } => output::emit(&commands::eigvec::run(cfg, exec)?.render(fmt)?, out).map(|_| true),
        Command::Verify => {
            cfg.validate_edge()?;
            let doc = commands::verify::run(cfg, exec)?;
            output::emit(&doc.render(fmt)?, out)?;
            for r in doc.rows.iter().filter(|r| !r.passed) {
                log::error!("check {} failed: {:.3e} > {:.0e} at {}", r.check, r.max_error, r.tolerance, r.worst);
            }
            Ok(doc.rows.iter().all(|r| r.passed))
        }
        Command::Evolve => output::emit(&commands::evolve::run(cfg, exec)?.render(fmt)?, out).map(|_| true),
        Command::Bench => output::emit(&commands::bench::run(cfg, exec)?.render(fmt)?, out).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).format_timestamp(None).format_target(false).init();
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|cfg| {
        let jobs = cli.jobs.map(|j| j as usize);
        optomech::par::with_jobs(jobs, || execute(&cli, &cfg))
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
