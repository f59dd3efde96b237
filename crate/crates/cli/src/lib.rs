//! Command-line front end: argument parsing, configuration and report emission.

pub mod config;
pub mod scenarios;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use epaut_core::io::Report;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::RunConfig;
use scenarios::Scenario;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "epaut", version, about = "Peakon simulations and dual-pair verification suites")]
pub struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, global = true, env = "EPAUT_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for the JSON report and CSV files.
    #[arg(long, global = true, env = "EPAUT_OUT", value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// RNG seed; overrides the config file.
    #[arg(long, global = true, env = "EPAUT_SEED", value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (1 gives the reference, bit-reproducible mode).
    #[arg(long, global = true, env = "EPAUT_THREADS", value_name = "N")]
    pub threads: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long, global = true, env = "EPAUT_STRICT")]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a peakon ensemble and write trajectory and diagnostics CSV.
    Simulate,
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Check the 2-cocycle identity and base-point change of `B`.
    Cocycle,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Suite {
    /// Mutual orthogonality, kernel inclusion, isotropy witness, reconstruction.
    DualPair,
    /// The volume-preserving pair: generator orthogonality, invariance, reconstruction.
    VolDualPair,
    /// Peakon conservation laws and the order of weak consistency.
    Conservation,
    /// Analytic derivatives against central differences.
    Derivatives,
    /// Conservation of the right momentum along chromomorphism flows.
    Noether,
}

impl Command {
    pub fn scenario(&self) -> Scenario {
        match self {
            Command::Simulate => Scenario::Simulate,
            Command::Cocycle => Scenario::Cocycle,
            Command::Verify { suite } => match suite {
                Suite::DualPair => Scenario::DualPair,
                Suite::VolDualPair => Scenario::VolDualPair,
                Suite::Conservation => Scenario::Conservation,
                Suite::Derivatives => Scenario::Derivatives,
                Suite::Noether => Scenario::Noether,
            },
        }
    }
}

/// Run one scenario and write its report; returns the process exit code.
pub fn run(cli: &Cli, env: &HashMap<String, String>) -> i32 {
    let mut cfg = match RunConfig::load(cli.config.as_deref(), env) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads == Some(0) {
        eprintln!("error: invalid configuration: --threads must be >= 1");
        return EXIT_CONFIG;
    }
    let scenario = cli.command.scenario();
    let report = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(scenario, &cfg, &cli.out, cli.strict)),
            Err(e) => {
                eprintln!("error: cannot start thread pool: {e}");
                return EXIT_FAILED;
            }
        },
        None => execute(scenario, &cfg, &cli.out, cli.strict),
    };
    match report.write(&cli.out) {
        Ok(path) => println!("{} {}", if report.passed { "PASS" } else { "FAIL" }, path.display()),
        Err(e) => {
            eprintln!("error: cannot write report: {e}");
            return EXIT_FAILED;
        }
    }
    for m in report.failures() {
        eprintln!("failed: {} = {:e} {} (tolerance {:?})", m.name, m.value, m.unit, m.tolerance);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAILED
    }
}

/// Build the report for `scenario`; runtime errors are recorded in it.
pub fn execute(scenario: Scenario, cfg: &RunConfig, out: &Path, strict: bool) -> Report {
    let params = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    let mut report = Report::new(scenario.report_name(), cfg.seed, params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let res = std::fs::create_dir_all(out).map_err(anyhow::Error::from).and_then(|_| scenario.run(cfg, &mut rng, out, &mut report));
    if let Err(e) = res {
        report.fail(format!("{e:#}"));
    }
    report.finish(strict);
    report
}
