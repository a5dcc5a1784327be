mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anticyc::quadfield::{split_prime, ImagQuadField, DEFAULT_ENUM_BOUND};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "anticyc", version, about = "Anticyclotomic p-adic L-function toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel sums.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Complex working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,
    /// q-expansion truncation D.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    trunc: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Ring class group of conductor c·p^n.
    Classgroup {
        #[arg(long, visible_alias = "disc", allow_hyphen_values = true)]
        field: i64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        c: u64,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Characters of a ring class group, or the values of one character spec.
    Chars {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "char_path")]
        field: Option<i64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        c: u64,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long = "char")]
        char_path: Option<PathBuf>,
    },
    /// Validate an eigenform file and report Satake data.
    Hecke {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Randomized Mahler-calculus property suites.
    MeasureSelftest {
        #[arg(long)]
        p: u64,
        /// p-adic precision M_p.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        prec: u32,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Period sum of a character against δ^m f over CM points.
    PeriodSum {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "char")]
        char_path: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// Depletion identity Σ χ̃ f^{(p)} = Ẽ(p) Σ χ̃ f.
    EulerCheck {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "char")]
        char_path: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// Prime sets and the constants of the interpolation formula.
    Constants {
        #[arg(long)]
        form: PathBuf,
        #[arg(long = "char")]
        char_path: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        s: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// Ratio lhs²/rhs across the primitive ring class characters of
    /// conductor N_ns·p^s.
    Interpolate {
        #[arg(long, allow_hyphen_values = true)]
        field: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long)]
        form: PathBuf,
    },
}

/// Everything that determines a report.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: Command,
    #[serde(flatten)]
    common: Common,
    enum_bound: u64,
    seed: u64,
}

pub const DEFAULT_SEED: u64 = 20240101;

/// Seed for randomized sampling, from ANTICYC_SEED when set.
fn seed_from_env() -> Result<u64, String> {
    match std::env::var("ANTICYC_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("ANTICYC_SEED must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Startup checks on the field and prime: the field must be valid and p
/// split in it whenever both are given.
fn check_field_prime(field: Option<i64>, p: Option<u64>) -> anticyc::Result<()> {
    if let (Some(d), Some(p)) = (field, p) {
        let k = ImagQuadField::new(d)?;
        split_prime(&k, p)?;
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, report: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(k) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k as usize).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let config = RunConfig { command: cli.command.clone(), common: cli.common.clone(), enum_bound: DEFAULT_ENUM_BOUND, seed };
    let result = commands::run(&cli.command, &cli.common, seed);
    let (status, body, code) = match result {
        // property suites report their own verdict
        Ok(v) if v.get("passed") == Some(&Value::Bool(false)) => ("failed", json!({ "result": v }), 1),
        Ok(v) => ("ok", json!({ "result": v }), 0),
        Err(e) => ("error", json!({ "error": { "name": e.name(), "message": e.to_string() } }), 1),
    };
    let mut report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "status": status,
    });
    if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
        r.extend(b);
    }
    if let Err(e) = emit(&cli.common.out, &report) {
        eprintln!("error: --out: {e}");
        return ExitCode::from(2);
    }
    if let Some(msg) = report["error"]["message"].as_str() {
        eprintln!("error: {msg}");
    }
    ExitCode::from(code)
}
