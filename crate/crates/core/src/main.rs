use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nilcorr::io::config::EquidistMode;
use nilcorr::io::{exit_code, run, Command, ExperimentConfig, Format, TableKind};
use nilcorr::{Error, Result};

#[derive(Parser)]
#[command(name = "nilcorr", version, about = "Correlations of multiplicative functions with nilsequences")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sieve a table of μ, λ, Λ or τ.
    Sieve {
        #[arg(long, value_enum)]
        kind: TableKind,
        #[arg(long, value_parser = parse_n)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "binary")]
        format: Fmt,
    },
    /// Correlation sums from a config file.
    Correlate(ConfigArgs),
    /// Correlation sums over an `N_list`, with the decay trend.
    Scan(ConfigArgs),
    /// Equidistribution tests from a config file.
    Equidist(ConfigArgs),
    /// Check the W-tricked conditions for a builtin function.
    Conditions {
        #[arg(long, value_enum)]
        kind: TableKind,
        #[arg(long, value_parser = parse_n)]
        n: u64,
        #[arg(long = "w", alias = "W", default_value_t = 1)]
        w: u64,
        #[arg(long, default_value_t = 1)]
        b: u64,
        #[arg(long = "c", alias = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Fmt,
    },
    /// Verify Vaughan's identity pointwise up to N.
    Vaughan {
        #[arg(long, value_parser = parse_n)]
        n: u64,
    },
    /// Import an L-function coefficient file.
    Ingest {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Fmt,
    },
    /// Run any config file, dispatching on its `command` field.
    Run(ConfigArgs),
}

#[derive(clap::Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_path` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `format` from the config.
    #[arg(long, value_enum)]
    format: Option<Fmt>,
    /// Equidist only: overrides `mode`.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Fmt {
    Csv,
    Json,
    Binary,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Format {
        match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
            Fmt::Binary => Format::Binary,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mode {
    Empirical,
    Total,
    Leibman,
}

/// Accepts plain integers and forms like `1e8`.
fn parse_n(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if x.fract() != 0.0 || !(0.0..=u64::MAX as f64).contains(&x) {
        return Err(format!("not a non-negative integer: {s}"));
    }
    Ok(x as u64)
}

fn from_file(a: &ConfigArgs, name: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&a.config, name)?;
    if let Some(o) = &a.out {
        cfg.output_path = Some(o.clone());
    }
    if let Some(f) = a.format {
        cfg.format = f.into();
    }
    if let (Some(m), Command::Equidist(p)) = (a.mode, &mut cfg.command) {
        p.mode = match m {
            Mode::Empirical => EquidistMode::Empirical,
            Mode::Total => EquidistMode::Total,
            Mode::Leibman => EquidistMode::Leibman,
        };
    }
    Ok(cfg)
}

fn with_output(command: Command, out: Option<PathBuf>, format: Fmt) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(command);
    cfg.output_path = out;
    cfg.format = format.into();
    cfg
}

fn build(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.cmd {
        Sub::Sieve { kind, n, out, format } => {
            let format = if out.is_none() && matches!(format, Fmt::Binary) { Fmt::Csv } else { *format };
            with_output(Command::Sieve { kind: *kind, n: *n }, out.clone(), format)
        }
        Sub::Correlate(a) => from_file(a, Some("correlate"))?,
        Sub::Scan(a) => from_file(a, Some("scan"))?,
        Sub::Equidist(a) => from_file(a, Some("equidist"))?,
        Sub::Run(a) => from_file(a, None)?,
        Sub::Conditions { kind, n, w, b, c, out, format } => with_output(
            Command::Conditions { kind: *kind, n: *n, w: *w, b: *b, c: *c },
            out.clone(),
            *format,
        ),
        Sub::Vaughan { n } => ExperimentConfig::new(Command::Vaughan { n: *n }),
        Sub::Ingest { file, out, format } => with_output(Command::Ingest { file: file.clone() }, out.clone(), *format),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = build(&cli).and_then(|cfg| run(&cfg));
    if let Err(e) = &result {
        eprintln!("error: {e}");
        if let Error::Config { path, .. } = e {
            log::debug!("config path {path}");
        }
    }
    ExitCode::from(exit_code(&result) as u8)
}
