//! horolab: named experiments over the horocycle-flow library, with
//! deterministic JSON/CSV reports.
//!
//! Every run writes manifest.json (config echo, library version, constants
//! in force, wall time) next to report.json or report.csv. Exit code 0 means
//! the experiment's assertion held (or it has none), 2 that an assertion
//! failed, 1 that the configuration or environment was invalid.

mod basepoint;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use experiments::{CliError, Outcome, RunResult};

#[derive(Parser, Debug)]
#[command(
    name = "horolab",
    version,
    about = "Horocycle-flow experiments on the modular surface"
)]
struct Cli {
    /// Output directory for manifest.json and the report file
    #[arg(long, global = true, default_value = "horolab-out")]
    out: PathBuf,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker cap; HOROLAB_THREADS is used when the flag is absent
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Reduced orbit points of a base under the discrete flow
    Orbit(experiments::OrbitArgs),
    /// Prime-index orbit measure against the volume, with a density bound
    PrimeOrbit(experiments::PrimeOrbitArgs),
    /// Fundamental period: closed formula against the exhaustive search
    Period(experiments::PeriodArgs),
    /// Dani condition checkers (continuous or discrete form)
    DaniCheck(experiments::DaniArgs),
    /// Delta-equidistribution of an orbit against an algebraic measure
    Discrepancy(experiments::DiscrepancyArgs),
    /// Selberg upper-bound sieve on a constant or orbit sequence
    Selberg(experiments::SelbergArgs),
    /// Linear progression average over the degree-N orbit
    Type1(experiments::Type1Args),
    /// Bilinear progression average over the degree-N orbit
    Type2(experiments::Type2Args),
    /// Prime-index degree-N orbit ball ratios inside a window
    HeckePrime(experiments::HeckePrimeArgs),
    /// Projection counts of degree-N representatives with prime b1
    Linnik(experiments::LinnikArgs),
    /// Almost-prime index orbit: positive mass on every ball
    AlmostPrime(experiments::AlmostPrimeArgs),
}

impl Experiment {
    fn name(&self) -> &'static str {
        match self {
            Experiment::Orbit(_) => "orbit",
            Experiment::PrimeOrbit(_) => "prime-orbit",
            Experiment::Period(_) => "period",
            Experiment::DaniCheck(_) => "dani-check",
            Experiment::Discrepancy(_) => "discrepancy",
            Experiment::Selberg(_) => "selberg",
            Experiment::Type1(_) => "type1",
            Experiment::Type2(_) => "type2",
            Experiment::HeckePrime(_) => "hecke-prime",
            Experiment::Linnik(_) => "linnik",
            Experiment::AlmostPrime(_) => "almost-prime",
        }
    }

    fn config_echo(&self) -> serde_json::Value {
        match self {
            Experiment::Orbit(a) => serde_json::to_value(a),
            Experiment::PrimeOrbit(a) => serde_json::to_value(a),
            Experiment::Period(a) => serde_json::to_value(a),
            Experiment::DaniCheck(a) => serde_json::to_value(a),
            Experiment::Discrepancy(a) => serde_json::to_value(a),
            Experiment::Selberg(a) => serde_json::to_value(a),
            Experiment::Type1(a) => serde_json::to_value(a),
            Experiment::Type2(a) => serde_json::to_value(a),
            Experiment::HeckePrime(a) => serde_json::to_value(a),
            Experiment::Linnik(a) => serde_json::to_value(a),
            Experiment::AlmostPrime(a) => serde_json::to_value(a),
        }
        .expect("config serializes")
    }

    fn run(&self) -> Result<RunResult, CliError> {
        match self {
            Experiment::Orbit(a) => experiments::run_orbit(a),
            Experiment::PrimeOrbit(a) => experiments::run_prime_orbit(a),
            Experiment::Period(a) => experiments::run_period(a),
            Experiment::DaniCheck(a) => experiments::run_dani(a),
            Experiment::Discrepancy(a) => experiments::run_discrepancy(a),
            Experiment::Selberg(a) => experiments::run_selberg(a),
            Experiment::Type1(a) => experiments::run_type1(a),
            Experiment::Type2(a) => experiments::run_type2(a),
            Experiment::HeckePrime(a) => experiments::run_hecke_prime(a),
            Experiment::Linnik(a) => experiments::run_linnik(a),
            Experiment::AlmostPrime(a) => experiments::run_almost_prime(a),
        }
    }
}

fn init_threads(flag: Option<usize>) -> usize {
    let requested = flag.or_else(|| {
        std::env::var("HOROLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = requested {
        if n > 0 {
            // ignore failure: the pool can only be configured once per process
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    rayon::current_num_threads()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let threads = init_threads(cli.threads);
    let start = Instant::now();
    let result = match cli.experiment.run() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(1);
    }
    let io_result = match cli.format {
        Format::Json => output::write_json(&cli.out.join("report.json"), &result.report),
        Format::Csv => output::write_csv(
            &cli.out.join("report.csv"),
            &result.csv_headers,
            &result.csv_rows,
        ),
    }
    .and_then(|_| {
        output::write_manifest(
            &cli.out,
            cli.experiment.name(),
            cli.experiment.config_echo(),
            result.tolerances.clone(),
            threads,
            start.elapsed().as_millis(),
        )
    });
    if let Err(e) = io_result {
        eprintln!("error: writing reports: {e}");
        return ExitCode::from(1);
    }
    match result.outcome {
        Outcome::Passed => ExitCode::SUCCESS,
        Outcome::Failed(msg) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(2)
        }
    }
}
