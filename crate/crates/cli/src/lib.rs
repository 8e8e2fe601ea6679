//! Configuration, verification suites and reports for the `fermigap` command.

pub mod config;
pub mod report;
pub mod suite;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;
use report::{emit, Status};
use suite::run_suite;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fermigap", version, about = "Desk-scale verification of gap stability for lattice fermions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; the built-in six-site dimerized demo when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Suites to run with `suite`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub suite: Vec<String>,
    /// Directory for report.json and the CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplier on precision tolerances.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    /// Largest lattice handled by the many-body stages.
    #[arg(long, global = true)]
    pub max_sites: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Parse and validate the configuration, then print its canonical TOML form.
    Check,
    /// Single-particle, Majorana and doubled spectra.
    Spectrum,
    /// Interaction rewritten in the η fermions.
    Transform,
    /// Spectral flow and filter.
    Flow,
    /// Effective interactions, relative bound and gap curve.
    Assemble,
    /// Conditional expectations and shell splits.
    Localize,
    /// Commutator growth profiles.
    Lr,
    /// Selected suites (all by default).
    Suite,
}

impl Command {
    fn suites(self) -> Option<&'static [&'static str]> {
        match self {
            Command::Check | Command::Suite => None,
            Command::Spectrum => Some(&["single-particle", "majorana", "doubling"]),
            Command::Transform => Some(&["transform"]),
            Command::Flow => Some(&["flow"]),
            Command::Assemble => Some(&["assembly", "gap"]),
            Command::Localize => Some(&["localization"]),
            Command::Lr => Some(&["lr"]),
        }
    }
}

/// Effective config after applying command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, config::ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(&path.to_string_lossy())?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(m) = cli.max_sites {
        cfg.max_sites = m;
    }
    match cli.command.suites() {
        Some(list) => cfg.suites = list.iter().map(|s| s.to_string()).collect(),
        None if !cli.suite.is_empty() => cfg.suites = cli.suite.clone(),
        None => {}
    }
    if !(cli.tol_scale.is_finite() && cli.tol_scale > 0.0) {
        return Err(config::ConfigError::Invalid("--tol-scale must be finite and positive".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Command::Check = cli.command {
        let lattice = cfg.lattice().expect("validated");
        println!(
            "config ok: {} sites, {} interaction terms, hash {}",
            lattice.len(),
            cfg.interaction.len(),
            report::config_hash(&cfg.to_toml())
        );
        print!("{}", cfg.to_toml());
        return EXIT_PASS;
    }
    let out = run_suite(&cfg, cli.tol_scale);
    for c in &out.report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let tail = if c.message.is_empty() { String::new() } else { format!(" | {}", c.message) };
        println!(
            "{status} {:<48} measured {:>10} tol {:>10} {:>8.1} ms{tail}",
            c.id,
            show(c.measured),
            show(c.tolerance),
            c.runtime.as_secs_f64() * 1e3
        );
    }
    let s = &out.report.summary;
    println!("{} checks: {} passed, {} failed, {} skipped", s.total, s.passed, s.failed, s.skipped);
    let dir = cli.out.clone().or_else(|| cfg.output_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        if let Err(e) = emit(&out.report, &out.tables, &dir) {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return EXIT_USAGE;
        }
        println!("report written to {}", dir.join("report.json").display());
    }
    if out.report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
