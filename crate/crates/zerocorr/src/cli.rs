//! Argument parsing and dispatch for the `zerocorr` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use zerocorr_core::primes::PrimeTable;

use crate::commands::{self, Outcome, VerifyOptions};
use crate::config::{Format, RunConfig};
use crate::error::{exit, CliError, CliResult};
use crate::report::Sink;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "ZEROCORR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "zerocorr", version, about = "Correlations of Riemann zeros from the primes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file, or `-` for stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Monte Carlo sample budget.
    #[arg(long, global = true, value_name = "N")]
    pub budget: Option<u64>,
    /// Worker threads; falls back to the config file, `ZEROCORR_THREADS`,
    /// then the core count.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-point function on an offset grid.
    PredictR2,
    /// Three-point function on an (e12, e23) grid.
    PredictR3,
    /// Compare the analytic formulas with the phase-average oracle.
    Verify {
        /// Score three-point checks with the known-wrong bracket.
        #[arg(long, hide = true)]
        typo_bracket: bool,
    },
    /// Histogram a zeros file and compare it with the prediction.
    Empirical {
        #[arg(long, value_name = "PATH")]
        zeros: Option<PathBuf>,
    },
    /// Write the binary prime cache for all primes below a cutoff.
    Primes {
        #[arg(long, value_name = "N")]
        p_star: u64,
    },
}

fn resolve(global: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &global.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = global.format {
        cfg.format = f;
    }
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(b) = global.budget {
        cfg.budget = b;
    }
    if let Some(t) = global.threads {
        cfg.threads = Some(t);
    } else if let (None, Some(v)) = (cfg.threads, std::env::var_os(THREADS_ENV)) {
        let t = v
            .to_str()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a thread count")))?;
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn emit(outcome: &Outcome, sink: &Sink) -> CliResult<()> {
    for a in &outcome.artifacts {
        match a.suffix {
            None => sink.write(&a.content)?,
            Some(suffix) => match sink.sibling(suffix) {
                Some(s) => s.write(&a.content)?,
                None => eprintln!("warning: output is stdout, not writing the {suffix} file"),
            },
        }
    }
    Ok(())
}

fn dispatch(command: &Command, cfg: &RunConfig) -> CliResult<Outcome> {
    match command {
        Command::PredictR2 => commands::predict_r2(cfg),
        Command::PredictR3 => commands::predict_r3(cfg),
        Command::Verify { typo_bracket } => commands::verify(cfg, VerifyOptions { typo_bracket: *typo_bracket }),
        Command::Empirical { zeros } => commands::empirical(cfg, zeros.as_deref()),
        Command::Primes { p_star } => unreachable!("primes {p_star} is handled before dispatch"),
    }
}

fn execute(cli: &Cli) -> CliResult<u8> {
    let cfg = resolve(&cli.global)?;
    let sink = Sink::parse(cfg.out.as_deref().unwrap_or("-"));
    if let Command::Primes { p_star } = cli.command {
        let table = PrimeTable::build(p_star)?;
        let mut bytes = Vec::with_capacity(24 + 8 * table.len());
        crate::cache::write_table(&table, &mut bytes)?;
        match &sink {
            Sink::Stdout => {
                use std::io::Write;
                std::io::stdout().lock().write_all(&bytes)?;
            }
            Sink::File(p) => {
                std::fs::write(p, &bytes).map_err(|source| CliError::File { path: p.display().to_string(), source })?
            }
        }
        return Ok(exit::OK);
    }
    let outcome = crate::parallel::pool(cfg.threads.unwrap_or(0)).install(|| dispatch(&cli.command, &cfg))?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    emit(&outcome, &sink)?;
    Ok(if outcome.passed { exit::OK } else { exit::CHECK_FAILED })
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
