use std::path::PathBuf;
use std::process::ExitCode;

use twostage_cli::{dispatch, parse_config, CliError, Overrides};

const USAGE: &str = "\
twostage - two-stage adaptive optimal design simulations

USAGE:
    twostage <COMMAND> --config PATH [OPTIONS]

COMMANDS:
    table       tail-probability tables, one CSV per (scenario, n)
    figure      integrated absolute CDF differences across the n grid
    diagnose    large-n2 convergence ladder and chi-squared check
    n1star      print the optimal stage-1 sample size search trace

OPTIONS:
    --config PATH   scenario configuration file (required)
    --out DIR       output directory (required for table/figure/diagnose)
    --seed U64      override every scenario's master seed
    --reps R        override every scenario's replication count
    --threads K     worker threads (default: THREADS env var, then all cores)
    --dump-raw      also write per-replication dumps
    --help          print this message

EXIT CODES:
    0 success, 1 configuration error, 2 numerical or io failure
";

fn main() -> ExitCode {
    match run() {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run() -> Result<String, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "help" {
        return Ok(USAGE.to_string());
    }
    let verb = args[0].clone();

    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut overrides = Overrides::default();

    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut value_for = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Config(format!("flag {name} expects a value")))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value_for("--config")?)),
            "--out" => out_dir = Some(PathBuf::from(value_for("--out")?)),
            "--seed" => {
                let v = value_for("--seed")?;
                overrides.seed =
                    Some(v.parse().map_err(|_| CliError::Config(format!("--seed expects a u64, got '{v}'")))?);
            }
            "--reps" => {
                let v = value_for("--reps")?;
                overrides.reps = Some(
                    v.parse()
                        .map_err(|_| CliError::Config(format!("--reps expects a positive integer, got '{v}'")))?,
                );
            }
            "--threads" => {
                let v = value_for("--threads")?;
                overrides.threads = Some(
                    v.parse()
                        .map_err(|_| CliError::Config(format!("--threads expects a positive integer, got '{v}'")))?,
                );
            }
            "--dump-raw" => overrides.dump_raw = true,
            "--help" => return Ok(USAGE.to_string()),
            other => return Err(CliError::Config(format!("unknown flag '{other}'"))),
        }
    }

    let config_path =
        config_path.ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", config_path.display())))?;
    let specs = parse_config(&text)?;
    for spec in &specs {
        spec.apply(&overrides).validate()?;
    }

    dispatch(&verb, &specs, &overrides, out_dir.as_deref())
}
