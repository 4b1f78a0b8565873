//! Command-line front end: channel files, subcommands and their output
//! formats.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on any
//! input or configuration error.

mod channel_file;

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vlftbc_core::bounds::{linear_grid, rate_sweep, RatePoint};
use vlftbc_core::info::DEFAULT_TOL;
use vlftbc_core::oracle::{channel_instances, random_instances_shaped, run_suite, InstanceShape};
use vlftbc_core::ordering::classify;
use vlftbc_core::sim::{simulate, SchemeConfig, SessionRecord, DEFAULT_DELTA, DEFAULT_MAX_BLOCKS};
use vlftbc_core::{summarize, BroadcastChannel};

pub use channel_file::{BranchEntry, ChannelFile, JointEntry};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VLFTBC_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "vlftbc", version, about = "Reliability bounds and feedback-coding simulation for common-message broadcast channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print B, B_j, T_j, C_j, C and Cbar as JSON.
    Analyze {
        channel: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Print the degradation and less-capable verdicts as JSON.
    Classify { channel: PathBuf },
    /// Print the exponent bounds on a rate grid as CSV.
    ///
    /// Columns: R, lower_E, upper_E, exact, valid_lower, valid_upper. Values
    /// have 9 significant digits; a bound outside its validity range is left
    /// empty and its flag is 0. The grid defaults to 11 points on [0, 0.99 C].
    Bounds {
        channel: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        rmin: f64,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Simulate the two-phase block scheme and print the aggregate as JSON.
    ///
    /// With --sessions-out, one CSV row per session is written with columns
    /// trial, W, tau_1..tau_K, correct_1..correct_K, blocks.
    Simulate(SimulateArgs),
    /// Check the converse inequalities by exhaustive posterior enumeration.
    ///
    /// Exits with status 1 when any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub channel: PathBuf,
    /// Rate in nats per channel use.
    #[arg(long = "rate", short = 'R')]
    pub rate: f64,
    /// Block length.
    #[arg(long = "block-len", short = 'L', default_value_t = 100)]
    pub block_len: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-blocks", default_value_t = DEFAULT_MAX_BLOCKS)]
    pub max_blocks: usize,
    #[arg(long = "fixed-codebook")]
    pub fixed_codebook: bool,
    /// Message-mode fraction; derived from the rate when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Message count; defaults to ceil(e^(R L)).
    #[arg(long)]
    pub messages: Option<u64>,
    #[arg(long = "sessions-out")]
    pub sessions_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Channel to verify with the built-in encoder policies.
    #[arg(conflicts_with = "random_instances", required_unless_present = "random_instances")]
    pub channel: Option<PathBuf>,
    #[arg(long = "random-instances")]
    pub random_instances: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Horizon of the enumeration.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Message count.
    #[arg(long = "M")]
    pub messages: Option<usize>,
    #[arg(long = "logsum-trials", default_value_t = 10_000)]
    pub logsum_trials: u64,
}

/// Text to print and the process exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub exit: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, exit: EXIT_OK }
    }
}

/// Caps the global worker pool at `VLFTBC_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the worker pool")
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Analyze { channel, tol } => analyze(&load(&channel)?, tol),
        Command::Classify { channel } => classify_cmd(&load(&channel)?),
        Command::Bounds {
            channel,
            rmin,
            rmax,
            points,
            tol,
        } => bounds(&load(&channel)?, rmin, rmax, points, tol),
        Command::Simulate(args) => simulate_cmd(&args),
        Command::Verify(args) => verify(&args),
    }
}

fn load(path: &std::path::Path) -> Result<BroadcastChannel> {
    ChannelFile::load(path)?.to_channel().with_context(|| format!("invalid channel in {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn analyze(bc: &BroadcastChannel, tol: f64) -> Result<Outcome> {
    Ok(Outcome::ok(to_json(&summarize(bc, tol)?)))
}

pub fn classify_cmd(bc: &BroadcastChannel) -> Result<Outcome> {
    Ok(Outcome::ok(to_json(&classify(bc)?)))
}

pub fn bounds(bc: &BroadcastChannel, rmin: f64, rmax: Option<f64>, points: usize, tol: f64) -> Result<Outcome> {
    if points == 0 {
        bail!("--points must be at least 1");
    }
    let info = summarize(bc, tol)?;
    let ordering = classify(bc)?;
    let rmax = rmax.unwrap_or(0.99 * info.c);
    let rows = rate_sweep(&info, &ordering, &linear_grid(rmin, rmax, points))?;
    Ok(Outcome::ok(bounds_csv(&rows)))
}

pub const BOUNDS_HEADER: &str = "R,lower_E,upper_E,exact,valid_lower,valid_upper";

pub fn bounds_csv(rows: &[RatePoint]) -> String {
    let cell = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    let mut out = String::new();
    out.push_str(BOUNDS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig(r.rate),
            cell(r.lower_e),
            cell(r.upper_e),
            cell(r.exact),
            u8::from(r.valid_lower),
            u8::from(r.valid_upper)
        );
    }
    out
}

/// `v` with 9 significant digits, in plain notation for moderate magnitudes.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.8e}")
    }
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Outcome> {
    let bc = load(&args.channel)?;
    let info = summarize(&bc, args.tol)?;
    let cfg = SchemeConfig {
        rate: args.rate,
        block_len: args.block_len,
        gamma: args.gamma,
        delta: args.delta,
        epsilon: args.epsilon,
        messages: args.messages,
        trials: args.trials,
        seed: args.seed,
        max_blocks: args.max_blocks,
        fixed_codebook: args.fixed_codebook,
    };
    let (result, records) = simulate(&bc, &info, &cfg)?;
    if let Some(path) = &args.sessions_out {
        std::fs::write(path, sessions_csv(&records, bc.num_branches()))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(Outcome::ok(to_json(&result)))
}

pub fn sessions_csv(records: &[SessionRecord], k: usize) -> String {
    let mut out = String::from("trial,W");
    for j in 1..=k {
        let _ = write!(out, ",tau_{j}");
    }
    for j in 1..=k {
        let _ = write!(out, ",correct_{j}");
    }
    out.push_str(",blocks\n");
    for r in records {
        let _ = write!(out, "{},{}", r.trial, r.message);
        for t in &r.tau {
            let _ = write!(out, ",{t}");
        }
        for &c in &r.correct {
            let _ = write!(out, ",{}", u8::from(c));
        }
        let _ = writeln!(out, ",{}", r.blocks);
    }
    out
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let instances = match (&args.channel, args.random_instances) {
        (Some(path), _) => {
            let bc = load(path)?;
            channel_instances(&bc, args.messages.unwrap_or(3), args.nmax.unwrap_or(3), args.seed)?
        }
        (None, Some(n)) => random_instances_shaped(
            args.seed,
            n,
            &InstanceShape {
                messages: args.messages,
                n_max: args.nmax,
            },
        )?,
        (None, None) => bail!("give a channel file or --random-instances"),
    };
    let report = run_suite(&instances, args.logsum_trials, args.seed)?;
    Ok(Outcome {
        stdout: to_json(&report),
        exit: if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(std::f64::consts::LN_2), "0.693147181");
        assert_eq!(format_sig(123.456789012), "123.456789");
        assert_eq!(format_sig(-0.25), "-0.25");
        assert_eq!(format_sig(1.5e-7), "1.50000000e-7");
    }

    #[test]
    fn session_columns() {
        let rec = SessionRecord {
            trial: 3,
            message: 7,
            tau: vec![20, 40],
            correct: vec![true, false],
            blocks: 2,
        };
        assert_eq!(
            sessions_csv(&[rec], 2),
            "trial,W,tau_1,tau_2,correct_1,correct_2,blocks\n3,7,20,40,1,0,2\n"
        );
    }
}
