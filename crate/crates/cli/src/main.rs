//! `fecburst`: residual loss and burstiness of an (n + k, k) block erasure
//! code under Bernoulli network loss.
//!
//! Exit codes: 0 success, 2 validation, 3 undefined quantity,
//! 4 feasibility cap, 5 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fec_burst::multiblock::{baseline_expected_burst, expected_burst_dp, required_terms};
use fec_burst::simulator::{simulate, BurstReport, SimConfig};
use fec_burst::single_block::expected_burst_single_block;
use fec_burst::{CodeParams, Error, LossProbability, UnrecoverableDistribution};

mod output;
use output::{emit, fmt12, fmt12_opt, fmt_count_opt};

/// Runs with `--epsilon` refuse series longer than this; pass `--terms` to
/// force a bounded evaluation instead.
const TERMS_CAP: u64 = 100_000;

#[derive(Parser)]
#[command(
    name = "fecburst",
    version,
    about = "Residual loss rate and loss burstiness after (n+k, k) block erasure coding \
             under Bernoulli packet loss"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Expected consecutive-loss length within one block.
    Single,
    /// Truncated-series expectation across an unbounded block stream.
    Multi,
}

#[derive(Args)]
struct CodeArgs {
    /// Data packets per block
    #[arg(long)]
    n: u32,
    /// Redundancy packets per block
    #[arg(long, default_value_t = 0)]
    k: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Residual loss distribution Q(i) and residual per-packet loss rate
    Qdist(QdistArgs),
    /// Expected length of consecutive losses
    Burst(BurstArgs),
    /// Series terms needed to reach a target truncation error, per p
    RequiredTerms(RequiredTermsArgs),
    /// Sweep p and compare coded against uncoded burstiness
    Sweep(SweepArgs),
    /// Seeded Monte Carlo simulation of the decoded stream
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct QdistArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Bernoulli network loss probability
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct BurstArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Target truncation error for the series (multi mode; default 0.005)
    #[arg(long, conflicts_with = "terms")]
    epsilon: Option<f64>,
    /// Evaluate exactly this many series terms (multi mode; bypasses the cap)
    #[arg(long)]
    terms: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RequiredTermsArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Loss probabilities (repeat the flag or comma-separate)
    #[arg(long = "p", required = true, value_delimiter = ',')]
    p_values: Vec<f64>,
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    p_min: f64,
    #[arg(long)]
    p_max: f64,
    #[arg(long)]
    p_step: f64,
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1_000_000)]
    blocks: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// A command failure carrying its process exit code.
pub struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidLossVector(_) => 2,
            Error::NoLossesPossible | Error::DivergentSeries | Error::NoLossySamples => 3,
            Error::Infeasible(_) => 4,
        };
        fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fecburst: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Qdist(args) => cmd_qdist(args),
        Command::Burst(args) => cmd_burst(args),
        Command::RequiredTerms(args) => cmd_required_terms(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn distribution(code: &CodeArgs, p: f64) -> Result<UnrecoverableDistribution<f64>, Failure> {
    Ok(UnrecoverableDistribution::for_code(code.n, code.k, p)?)
}

fn validate_epsilon(epsilon: f64) -> Result<(), Failure> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(fail(2, format!("epsilon must be positive (got {epsilon})")));
    }
    Ok(())
}

fn cmd_qdist(args: QdistArgs) -> Result<(), Failure> {
    let dist = distribution(&args.code, args.p)?;
    let p_l = dist.residual_loss_probability();
    let content = match args.format {
        Format::Csv => {
            let mut s = String::from("i,q\n");
            for (i, &q) in dist.qs().iter().enumerate() {
                s.push_str(&format!("{i},{}\n", fmt12(q)));
            }
            s.push_str(&format!("p_L,{}\n", fmt12(p_l)));
            s
        }
        Format::Json => {
            let v = json!({
                "n": args.code.n,
                "k": args.code.k,
                "p": args.p,
                "q": dist.qs(),
                "p_l": p_l,
            });
            format!("{v}\n")
        }
    };
    emit(None, &content)
}

fn cmd_burst(args: BurstArgs) -> Result<(), Failure> {
    let dist = distribution(&args.code, args.p)?;
    match args.mode {
        Mode::Single => {
            if args.epsilon.is_some() || args.terms.is_some() {
                return Err(fail(2, "--epsilon/--terms apply to --mode multi only"));
            }
            let value = expected_burst_single_block(&dist)?;
            let content = match args.format {
                Format::Csv => format!("value\n{}\n", fmt12(value)),
                Format::Json => format!("{}\n", json!({ "value": value })),
            };
            emit(None, &content)
        }
        Mode::Multi => {
            let n_terms = match args.terms {
                Some(0) => return Err(fail(2, "--terms must be >= 1")),
                Some(t) => t,
                None => {
                    let eps = args.epsilon.unwrap_or(0.005);
                    validate_epsilon(eps)?;
                    let needed = required_terms(args.code.n, dist.q0(), eps)?;
                    if needed > TERMS_CAP {
                        return Err(fail(
                            4,
                            format!(
                                "the truncation error bound drops below {eps} only after \
                                 {needed} series terms, beyond the cap of {TERMS_CAP}; \
                                 rerun with --terms to force a bounded evaluation"
                            ),
                        ));
                    }
                    needed
                }
            };
            let result = expected_burst_dp(&dist, n_terms)?;
            let value = result.pattern_mean();
            let content = match args.format {
                Format::Csv => format!(
                    "value,terms_used,error_bound\n{},{},{}\n",
                    fmt12(value),
                    result.terms_used,
                    fmt12(result.error_bound)
                ),
                Format::Json => format!(
                    "{}\n",
                    json!({
                        "value": value,
                        "terms_used": result.terms_used,
                        "error_bound": result.error_bound,
                    })
                ),
            };
            emit(None, &content)
        }
    }
}

fn cmd_required_terms(args: RequiredTermsArgs) -> Result<(), Failure> {
    validate_epsilon(args.epsilon)?;
    // Validate every p before producing any row.
    let mut rows = Vec::new();
    for &p in &args.p_values {
        let dist = distribution(&args.code, p)?;
        let q0 = dist.q0();
        // p = 1 leaves no all-receipt blocks; mark the row rather than fail.
        let terms = required_terms(args.code.n, q0, args.epsilon).ok();
        rows.push((p, q0, terms));
    }
    let content = match args.format {
        Format::Csv => {
            let mut s = String::from("p,q0,n\n");
            for (p, q0, terms) in &rows {
                s.push_str(&format!("{},{},{}\n", fmt12(*p), fmt12(*q0), fmt_count_opt(*terms)));
            }
            s
        }
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .map(|(p, q0, terms)| json!({ "p": p, "q0": q0, "n": terms }))
                .collect();
            format!("{}\n", json!(list))
        }
    };
    emit(None, &content)
}

struct SweepRow {
    p: f64,
    ec_coded: Option<f64>,
    terms_used: Option<u64>,
    error_bound: Option<f64>,
    ec_uncoded: f64,
    p_residual: f64,
}

fn sweep_row(code: &CodeArgs, p: f64, epsilon: f64) -> Result<SweepRow, Failure> {
    let dist = distribution(code, p)?;
    let ec_uncoded = baseline_expected_burst(p)?;
    let p_residual = dist.residual_loss_probability();
    let mut row = SweepRow {
        p,
        ec_coded: None,
        terms_used: None,
        error_bound: None,
        ec_uncoded,
        p_residual,
    };
    if dist.q0() >= 1.0 {
        return Ok(row); // no losses: the coded expectation does not exist
    }
    let needed = required_terms(code.n, dist.q0(), epsilon)?;
    row.terms_used = Some(needed);
    if needed > TERMS_CAP {
        return Ok(row); // report the requirement, skip the evaluation
    }
    let result = expected_burst_dp(&dist, needed)?;
    row.ec_coded = Some(result.pattern_mean());
    row.error_bound = Some(result.error_bound);
    Ok(row)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    validate_epsilon(args.epsilon)?;
    let (p_min, p_max, p_step) = (args.p_min, args.p_max, args.p_step);
    if !(0.0..1.0).contains(&p_min) || !(0.0..1.0).contains(&p_max) || p_min > p_max {
        return Err(fail(
            2,
            format!("sweep range must satisfy 0 <= p-min <= p-max < 1 (got {p_min}..{p_max})"),
        ));
    }
    if p_step.is_nan() || p_step <= 0.0 {
        return Err(fail(2, format!("p-step must be positive (got {p_step})")));
    }
    let mut p_values = Vec::new();
    let mut i = 0u32;
    loop {
        let p = p_min + f64::from(i) * p_step;
        if p > p_max + p_step * 1e-9 {
            break;
        }
        p_values.push(p.min(p_max));
        i += 1;
    }

    let mut rows = Vec::with_capacity(p_values.len());
    for p in p_values {
        rows.push(sweep_row(&args.code, p, args.epsilon)?);
    }

    let content = match args.format {
        Format::Csv => {
            let mut s = String::from("p,ec_coded,terms_used,error_bound,ec_uncoded,p_residual\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt12(r.p),
                    fmt12_opt(r.ec_coded),
                    fmt_count_opt(r.terms_used),
                    fmt12_opt(r.error_bound),
                    fmt12(r.ec_uncoded),
                    fmt12(r.p_residual)
                ));
            }
            s
        }
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "p": r.p,
                        "ec_coded": r.ec_coded,
                        "terms_used": r.terms_used,
                        "error_bound": r.error_bound,
                        "ec_uncoded": r.ec_uncoded,
                        "p_residual": r.p_residual,
                    })
                })
                .collect();
            format!("{}\n", json!(list))
        }
    };
    emit(args.out.as_deref(), &content)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let config = SimConfig {
        params: CodeParams::new(args.code.n, args.code.k)?,
        p: LossProbability::new(args.p)?,
        num_blocks: args.blocks,
        seed: args.seed,
    };
    let report: BurstReport<f64> = simulate(&config)?;
    let content = match args.format {
        Format::Csv => {
            let mut header = String::from(
                "blocks,pattern_ratio_mean,pattern_count,standard_error_ratio,\
                 burst_length_mean,burst_count,standard_error_burst,\
                 discarded_patterns,discarded_bursts",
            );
            let mut row = format!(
                "{},{},{},{},{},{},{},{},{}",
                args.blocks,
                fmt12_opt(report.pattern_ratio_mean),
                report.pattern_count,
                fmt12_opt(report.standard_error_ratio),
                fmt12_opt(report.burst_length_mean),
                report.burst_count,
                fmt12_opt(report.standard_error_burst),
                report.discarded_patterns,
                report.discarded_bursts
            );
            for (i, count) in report.empirical_q.iter().enumerate() {
                header.push_str(&format!(",q_{i}"));
                row.push_str(&format!(",{count}"));
            }
            format!("{header}\n{row}\n")
        }
        Format::Json => format!(
            "{}\n",
            json!({
                "blocks": args.blocks,
                "seed": args.seed,
                "pattern_ratio_mean": report.pattern_ratio_mean,
                "pattern_count": report.pattern_count,
                "standard_error_ratio": report.standard_error_ratio,
                "burst_length_mean": report.burst_length_mean,
                "burst_count": report.burst_count,
                "standard_error_burst": report.standard_error_burst,
                "discarded_patterns": report.discarded_patterns,
                "discarded_bursts": report.discarded_bursts,
                "empirical_q": report.empirical_q,
            })
        ),
    };
    emit(None, &content)
}
