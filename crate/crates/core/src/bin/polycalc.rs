use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polycalc::harness::{run_calc, run_gaussian_demo, run_suite, write_calc, write_report, SuiteConfig};
use polycalc::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_COLLISION: u8 = 3;

#[derive(Parser)]
#[command(name = "polycalc", version, about = "Polynomial functional calculus on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON configuration; defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant check and write report.csv, summary.json, timings.csv.
    Suite(RunArgs),
    /// Worked examples.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Evaluate the configured (F, p, A, y) quadruple.
    Calc(RunArgs),
}

#[derive(Subcommand)]
enum Demo {
    /// The Gaussian semigroup: time slices, norm trace and calculus output.
    Gaussian(RunArgs),
}

struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Configuration(_)) { EXIT_USAGE } else { EXIT_FAIL };
        Failure(code, e.to_string())
    }
}

fn load(args: &RunArgs) -> Result<SuiteConfig, Failure> {
    match &args.config {
        Some(path) if !path.is_file() => {
            Err(Failure(EXIT_USAGE, format!("config file {} not found", path.display())))
        }
        Some(path) => Ok(SuiteConfig::from_file(path)?),
        None => Ok(SuiteConfig::default()),
    }
}

fn out_dir(args: &RunArgs, cfg: &SuiteConfig, fallback: &str) -> Result<PathBuf, Failure> {
    let dir = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(fallback));
    if !args.force && non_empty(&dir) {
        return Err(Failure(
            EXIT_COLLISION,
            format!("output directory {} is not empty; pass --force to overwrite", dir.display()),
        ));
    }
    Ok(dir)
}

fn non_empty(dir: &Path) -> bool {
    match std::fs::read_dir(dir) {
        Ok(mut entries) => entries.next().is_some(),
        Err(_) => dir.exists(),
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("POLYCALC_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Failure(EXIT_USAGE, format!("POLYCALC_THREADS must be an integer >= 1, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure(EXIT_FAIL, e.to_string()))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    init_threads()?;
    match cli.command {
        Command::Suite(args) => {
            let cfg = load(&args)?;
            let dir = out_dir(&args, &cfg, "polycalc-report")?;
            let report = run_suite(&cfg)?;
            write_report(&report, &dir)?;
            for r in &report.results {
                let observed = r.observed.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
                eprintln!("{:5} {:34} {} {} {:e}", r.status.as_str(), r.name, observed, r.comparison.as_str(), r.tolerance);
            }
            eprintln!("report written to {}", dir.display());
            Ok(if report.all_passed() { 0 } else { EXIT_FAIL })
        }
        Command::Demo { which: Demo::Gaussian(args) } => {
            let cfg = load(&args)?;
            let dir = out_dir(&args, &cfg, "polycalc-demo")?;
            let s = run_gaussian_demo(&cfg, &dir)?;
            eprintln!(
                "norm deviation {:.2e}, oracle error {:.2e}, scalar-only error {:.1e}; artifacts in {}",
                s.norm_max_rel_deviation,
                s.oracle_max_rel_error,
                s.scalar_only_error,
                dir.display()
            );
            Ok(if s.passed { 0 } else { EXIT_FAIL })
        }
        Command::Calc(args) => {
            if args.config.is_none() {
                return Err(Failure(EXIT_USAGE, "calc needs --config".into()));
            }
            let cfg = load(&args)?;
            let dir = match (&args.out, &cfg.output_dir) {
                (None, None) => None,
                _ => Some(out_dir(&args, &cfg, "")?),
            };
            let (state, summary) = run_calc(&cfg)?;
            if let Some(dir) = dir {
                write_calc(&dir, &state, &summary)?;
            }
            let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure(EXIT_FAIL, e.to_string())),
                _ => Ok(0),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("polycalc: {msg}");
            ExitCode::from(code)
        }
    }
}
