use std::path::PathBuf;
use std::process;

use bose2d_cli::config::OutputFormat;
use bose2d_cli::{emit_report, exit_code, parse_str, run_task, validate, CliError, TaskKind, EXIT_VALIDATION};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bose2d", version, about = "Scans and reports for two-dimensional attractive Bose gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gagliardo-Nirenberg constant by two methods
    Gn(Common),
    /// NLS ground states over the attraction axis
    Nls(Common),
    /// Exact diagonalization over the scan grid
    Ed(Common),
    /// e_N over N with a boundedness verdict per attraction
    StabilityScan(Common),
    /// Plane-wave, localization, moment, de Finetti and tail diagnostics
    Lemmas(Common),
    /// Many-body against mean-field evolution
    Dynamics(Common),
    /// Exponent recursion trajectories
    Bootstrap(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; recorded in the report
    #[arg(long)]
    threads: Option<usize>,
}

fn fail(e: CliError) -> ! {
    eprintln!("error: {e}");
    process::exit(e.exit_code());
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    let (kind, args) = match cli.command {
        Command::Gn(a) => (TaskKind::Gn, a),
        Command::Nls(a) => (TaskKind::Nls, a),
        Command::Ed(a) => (TaskKind::Ed, a),
        Command::StabilityScan(a) => (TaskKind::StabilityScan, a),
        Command::Lemmas(a) => (TaskKind::Lemmas, a),
        Command::Dynamics(a) => (TaskKind::Dynamics, a),
        Command::Bootstrap(a) => (TaskKind::Bootstrap, a),
    };

    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).unwrap_or_else(|e| fail(CliError::Io(format!("{}: {e}", p.display())))),
        None => String::new(),
    };
    let mut config = parse_str(&text).and_then(|c| c.with_task(kind)).unwrap_or_else(|e| fail(e));
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(o) = args.out {
        config.output.dir = o;
    }
    if let Some(f) = args.format {
        config.output.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    validate(&config).unwrap_or_else(|e| fail(e));

    let threads = args.threads.unwrap_or(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap_or_else(|e| fail(CliError::Validation(format!("thread pool: {e}"))));
    let report = pool.install(|| run_task(&config)).unwrap_or_else(|e| fail(e));

    let written = emit_report(&report, &config.output.dir, config.output.format).unwrap_or_else(|e| fail(e));
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    for v in &report.payload.verdicts {
        eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for r in report.payload.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("point {} failed: {}", r.provenance.point, r.error.as_deref().unwrap_or(""));
    }
    eprintln!("payload sha256 {}", report.payload_sha256);
    process::exit(exit_code(&report));
}
