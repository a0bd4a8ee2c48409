use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nbcss::channel::ChannelMode;
use nbcss::harness::{cmd_construct, cmd_limits, cmd_simulate, cmd_verify, SimConfig};
use nbcss::qcpair::find_params;
use nbcss::QcParams;

#[derive(Parser)]
#[command(name = "nbcss", version, about = "Non-binary quasi-cyclic quantum CSS codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CodeArgs {
    /// Field degree: symbols live in GF(2^p).
    #[arg(long)]
    p: u32,
    /// Primitive polynomial as a hex or decimal bitmask (default: built-in table).
    #[arg(long, value_parser = parse_int)]
    poly: Option<u32>,
    /// Row weight.
    #[arg(long = "L")]
    l: usize,
    /// Circulant size.
    #[arg(long = "P")]
    circulant: u64,
    #[arg(long)]
    sigma: u64,
    #[arg(long)]
    tau: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Gamma/Delta pair and write two NBQC files.
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Resample lifts in which every Gamma entry is equal.
        #[arg(long)]
        reject_trivial: bool,
        /// Output prefix; files are <out>.gamma.nbqc and <out>.delta.nbqc.
        #[arg(long)]
        out: String,
    },
    /// Check the invariants of a pair; exits 1 if any check fails.
    Verify {
        gamma: PathBuf,
        delta: PathBuf,
    },
    /// Monte Carlo block error rates for both constituent codes.
    Simulate {
        gamma: PathBuf,
        delta: PathBuf,
        /// Marginal flip rates, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        fm: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 32)]
        max_iter: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// independent | joint
        #[arg(long, default_value = "independent")]
        mode: ChannelMode,
        #[arg(long)]
        count_syndrome_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate limits of the depolarizing channel as CSV.
    Limits {
        /// Flip rates, comma separated (default: 0.0025 to 0.33 in steps of 0.0025).
        #[arg(long, value_delimiter = ',')]
        fm: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List valid (P, sigma, tau) for a row weight.
    Search {
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 3)]
        min_p: u64,
        #[arg(long, default_value_t = 50)]
        max_p: u64,
    },
}

fn parse_int(s: &str) -> Result<u32, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

fn run(cli: Cli) -> nbcss::Result<ExitCode> {
    match cli.command {
        Command::Construct { code, seed, reject_trivial, out } => {
            let params = QcParams::new(2, code.l, code.circulant, code.sigma, code.tau);
            let summary = cmd_construct(code.p, code.poly, params, seed, reject_trivial, &out)?;
            println!("{summary}");
        }
        Command::Verify { gamma, delta } => {
            let report = cmd_verify(gamma, delta)?;
            println!("{report}");
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
        Command::Simulate { gamma, delta, fm, trials, max_iter, seed, mode, count_syndrome_only, out } => {
            let cfg = SimConfig {
                f_m: fm,
                trials,
                max_iter,
                seed,
                mode,
                count_syndrome_only,
                workers: None,
            };
            let records = cmd_simulate(gamma, delta, &cfg, &out)?;
            for r in &records {
                println!("f_m={} role={} bler={:.6} ({} / {})", r.f_m, r.role, r.bler, r.block_errors, r.trials);
            }
        }
        Command::Limits { fm, out } => {
            let grid = if fm.is_empty() { (1..=132).map(|k| k as f64 * 0.0025).collect() } else { fm };
            let points = cmd_limits(&grid, out.as_deref())?;
            if out.is_none() {
                println!("{}", nbcss::harness::LIMITS_HEADER);
                for p in &points {
                    println!("{}", p.to_csv_row());
                }
            }
        }
        Command::Search { l, min_p, max_p } => {
            let mut out = std::io::stdout().lock();
            let rows = std::iter::once("P,sigma,tau".to_string()).chain(find_params(l, min_p..=max_p).into_iter().map(|(p, s, t)| format!("{p},{s},{t}")));
            for row in rows {
                // a closed pipe just ends the listing
                if writeln!(out, "{row}").is_err() {
                    break;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
