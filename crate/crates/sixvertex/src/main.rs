use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sixvertex::error::Error;
use sixvertex::harness::{
    emit_report, load_config, run_suite, OutputFormat, RunConfig, Suite,
};

/// Verification suites for the inhomogeneous six-vertex model.
///
/// Exit codes: 0 all cases pass, 1 any case fails, 2 usage or config error.
#[derive(Parser, Debug)]
#[command(name = "sixvertex", version)]
struct Cli {
    /// Suite: ybe | rtt | commute | sixteen | lemma-audit | bethe |
    /// eigencheck | partition | action-angle | all
    suite: String,

    /// JSON configuration file; omitted fields take the documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the random seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,

    /// Override the suite's principal residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn apply_tol_override(config: &mut RunConfig, tol: f64) -> Result<(), Error> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Usage(format!("--tol must be positive, got {tol}")));
    }
    let t = &mut config.tolerances;
    match config.suite {
        Suite::Ybe => t.ybe = tol,
        Suite::Rtt => t.rtt = tol,
        Suite::Commute => t.commute = tol,
        Suite::Sixteen => t.sixteen = tol,
        Suite::LemmaAudit => t.recursion = tol,
        Suite::Bethe | Suite::Eigencheck => t.eigencheck = tol,
        Suite::Partition => t.partition_rel = tol,
        Suite::ActionAngle => t.charges = tol,
        Suite::All => {
            return Err(Error::Usage(
                "--tol is ambiguous for the all suite; set per-suite tolerances in the config".into(),
            ))
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    let suite = Suite::parse(&cli.suite)?;
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut parsed = load_config(&text)?;
            parsed.suite = suite;
            parsed
        }
        None => RunConfig::for_suite(suite),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        apply_tol_override(&mut config, tol)?;
    }
    config.validate()?;
    if config.params.lambda_c < 1.0 {
        eprintln!(
            "warning: fugacity lambda_c = {} lies below the documented default regime lambda_c >= 1",
            config.params.lambda_c
        );
    }

    let report = run_suite(&config)?;

    let format = match cli.format.as_deref() {
        Some("csv") => OutputFormat::Csv,
        Some("json") | None => match &config.output {
            Some(out) if cli.format.is_none() => out.format,
            _ => OutputFormat::Json,
        },
        Some(other) => return Err(Error::Usage(format!("unknown format '{other}'"))),
    };
    let bytes = emit_report(&report, format)?;
    let target = cli.out.clone().or_else(|| config.output.as_ref().map(|o| PathBuf::from(&o.path)));
    match target {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    eprintln!(
        "suite {}: {}/{} cases pass (max residual {}, {} ms)",
        report.suite,
        report.aggregate.pass_count,
        report.aggregate.case_count,
        report
            .aggregate
            .max_residual
            .map_or("n/a".to_string(), |r| format!("{r:.3e}")),
        report.aggregate.wall_time_ms,
    );
    Ok(report.aggregate.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
