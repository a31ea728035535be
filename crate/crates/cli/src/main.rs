//! Command-line front end: single-pair verification, batch scans over all
//! eligible ordered pairs, and a fixed self-test suite.
//!
//! Exit codes: 0 = all checks passed, 1 = a check failed, 2 = invalid or
//! ineligible input.

mod selftest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use capitulation::arith::is_prime;
use capitulation::kernels::eligibility;
use capitulation::report::{
    csv_row, render_json, render_text, run_pair, CheckToggles, PairReport, RunOptions,
    CSV_HEADER,
};

#[derive(Parser)]
#[command(
    name = "capitulation",
    about = "Verifies 2-class-group capitulation data of the fields Q(sqrt(2*p1*p2), i)",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification pipeline for one ordered pair of primes
    Verify(VerifyArgs),
    /// Verify every eligible ordered pair with both primes below a bound
    Scan(ScanArgs),
    /// Run the built-in oracle suite (Pell brute force, square-root
    /// round-trips, Jacobi brute force, fixed identities)
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of checks to run: kernels, order2, kuroda,
    /// identities (default: all)
    #[arg(long)]
    checks: Option<String>,
    /// Bits of interval precision seeding the real-sign fast path
    /// (exactness is unaffected; clamped to [32, 4096])
    #[arg(long, default_value_t = 256)]
    prec: u32,
    /// Include per-stage timings in the report (off by default so output is
    /// byte-deterministic)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// First prime p1 (this one is split as pi1 * pi2)
    #[arg(value_name = "P1", required_unless_present = "p1_flag")]
    p1: Option<String>,
    /// Second prime p2
    #[arg(value_name = "P2", required_unless_present = "p2_flag")]
    p2: Option<String>,
    /// Flag equivalent of the first positional
    #[arg(long = "p1", value_name = "P1", conflicts_with = "p1")]
    p1_flag: Option<String>,
    /// Flag equivalent of the second positional
    #[arg(long = "p2", value_name = "P2", conflicts_with = "p2")]
    p2_flag: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ScanArgs {
    /// Upper bound for both primes
    #[arg(long, value_name = "N")]
    limit: u64,
    /// Number of worker threads (default: rayon's choice)
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SelftestArgs {
    /// List the check names without running them
    #[arg(long)]
    list: bool,
}

fn options_from(common: &CommonArgs) -> anyhow::Result<RunOptions> {
    let checks = match &common.checks {
        Some(list) => CheckToggles::from_list(list).map_err(anyhow::Error::msg)?,
        None => CheckToggles::default(),
    };
    Ok(RunOptions {
        prec_bits: common.prec,
        checks,
        timings: common.timings,
    })
}

fn emit(common: &CommonArgs, payload: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{payload}"),
    }
    Ok(())
}

fn parse_prime_arg(positional: &Option<String>, flag: &Option<String>) -> anyhow::Result<BigUint> {
    let s = positional
        .as_ref()
        .or(flag.as_ref())
        .context("missing prime argument")?;
    s.parse::<BigUint>()
        .with_context(|| format!("'{s}' is not a natural number"))
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let p1 = parse_prime_arg(&args.p1, &args.p1_flag)?;
    let p2 = parse_prime_arg(&args.p2, &args.p2_flag)?;
    let opts = options_from(&args.common)?;
    let report = match run_pair(&p1, &p2, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("invalid pair: {e}");
            return Ok(2);
        }
    };
    let payload = match args.common.format {
        Format::Text => render_text(&report),
        Format::Json => {
            let mut s = render_json(&report);
            s.push('\n');
            s
        }
        Format::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(&report)),
    };
    emit(&args.common, &payload)?;
    if !report.eligible {
        eprintln!(
            "ineligible: {}",
            report.ineligible_reason.as_deref().unwrap_or("unknown")
        );
        return Ok(2);
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn primes_1_mod_4_below(limit: u64) -> Vec<u64> {
    (5..=limit)
        .filter(|&n| n % 4 == 1 && is_prime(&BigUint::from(n)))
        .collect()
}

fn cmd_scan(args: &ScanArgs) -> anyhow::Result<u8> {
    if args.limit < 5 {
        eprintln!("--limit must be at least 5");
        return Ok(2);
    }
    let opts = options_from(&args.common)?;
    let primes = primes_1_mod_4_below(args.limit);
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    for &p1 in &primes {
        for &p2 in &primes {
            if p1 == p2 {
                continue;
            }
            let e = eligibility(&BigUint::from(p1), &BigUint::from(p2))?;
            if e.eligible {
                pairs.push((p1, p2));
            }
        }
    }
    pairs.sort_unstable();

    let run_all = |pairs: &[(u64, u64)]| -> anyhow::Result<Vec<PairReport>> {
        use rayon::prelude::*;
        pairs
            .par_iter()
            .map(|&(p1, p2)| {
                run_pair(&BigUint::from(p1), &BigUint::from(p2), &opts)
                    .with_context(|| format!("pair ({p1}, {p2})"))
            })
            .collect()
    };
    let reports = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?
            .install(|| run_all(&pairs)),
        None => run_all(&pairs),
    }?;

    let pass = reports.iter().filter(|r| r.passed()).count();
    let fail = reports.len() - pass;
    let payload = match args.common.format {
        Format::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "{:>6} {:>6} {:>4} {:>8} {:>8} {:>12} {:>14} {:>3} {:>7}\n",
                "p1", "p2", "q3", "ker_K1", "ker_K3", "ker_genus", "sfu_K1", "v2", "overall"
            ));
            for r in &reports {
                let k = |label: &str| {
                    r.kernels
                        .get(label)
                        .map(|k| k.computed.clone())
                        .unwrap_or_default()
                };
                out.push_str(&format!(
                    "{:>6} {:>6} {:>4} {:>8} {:>8} {:>12} {:>14} {:>3} {:>7}\n",
                    r.p1,
                    r.p2,
                    r.q3.map(|q| q.to_string()).unwrap_or_default(),
                    k("K1"),
                    k("K3"),
                    k("k*"),
                    r.sfu_shapes.get("K1").cloned().unwrap_or_default(),
                    r.kuroda
                        .as_ref()
                        .map(|k| k.v2_sum.to_string())
                        .unwrap_or_default(),
                    r.overall,
                ));
            }
            out.push_str(&format!(
                "{} pairs, {pass} PASS, {fail} FAIL\n",
                reports.len()
            ));
            out
        }
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in &reports {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let doc = serde_json::json!({
                "schema": 1,
                "pairs": reports.len(),
                "pass": pass,
                "fail": fail,
                "reports": reports,
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    };
    emit(&args.common, &payload)?;
    if args.common.format != Format::Text {
        eprintln!("{} pairs, {pass} PASS, {fail} FAIL", reports.len());
    }
    Ok(if fail == 0 { 0 } else { 1 })
}

fn cmd_selftest(args: &SelftestArgs) -> u8 {
    if args.list {
        for name in selftest::CHECKS {
            println!("{name}");
        }
        return 0;
    }
    let mut failed = 0;
    for name in selftest::CHECKS {
        let result = selftest::run(name);
        match result {
            Ok(()) => println!("ok    {name}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
        std::io::stdout().flush().ok();
    }
    if failed == 0 {
        println!("selftest: PASS");
        0
    } else {
        println!("selftest: FAIL ({failed} checks)");
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Command::Verify(args) => cmd_verify(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Selftest(args) => Ok(cmd_selftest(args)),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
