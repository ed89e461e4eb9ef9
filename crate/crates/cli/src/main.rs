// SPDX-License-Identifier: Apache-2.0

//! `qmb`: precision bounds for noisy phase estimation from the command line.
//!
//! Exit codes: 0 success, 2 validation failure, 3 parse failure,
//! 4 resource limit, 5 solver failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metrobound::ce::{ce_sdp_bound, CeResult};
use metrobound::channel::{Channel, Tolerances, DEFAULT_BUDGET};
use metrobound::cs::{cs_bound, CsResult};
use metrobound::json::ChannelDoc;
use metrobound::models::{self, ModelName, ModelSpec};
use metrobound::qfi::{optimize_input_with, OracleOptions};
use metrobound::sweep::{format_float, sweep, SweepOptions};
use metrobound::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "qmb", version, about = "Precision bounds for phase estimation through noisy channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel file for trace preservation, positivity and independence.
    Validate {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compute the classical-simulation and/or channel-extension bound.
    Bound {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate bound, Heisenberg and classical precision against N as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        /// Add the oracle column for N up to this value (0 disables it).
        #[arg(long, default_value_t = 0)]
        oracle_max_n: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search pure N-probe inputs for the largest quantum Fisher information.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a built-in model as a channel file.
    Model {
        #[arg(long)]
        model: String,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        unitary_limit: bool,
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
    },
}

#[derive(Args)]
struct Source {
    /// One of depolarizing, dephasing, spontaneous_emission, lossy_interferometer.
    #[arg(long, conflicts_with = "channel", requires = "eta")]
    model: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    /// Allow eta = 1, the noiseless limit.
    #[arg(long)]
    unitary_limit: bool,
    /// Channel file (JSON) instead of a built-in model.
    #[arg(long)]
    channel: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Cs,
    Ce,
    Both,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. } | Error::Input(_) | Error::DimensionMismatch { .. } | Error::NotApplicable(_) => 2,
        Error::Parse(_) => 3,
        Error::Budget { .. } => 4,
        Error::Solver(_) | Error::Consistency(_) => 5,
    }
}

fn budget() -> Result<usize, Error> {
    match std::env::var("QMB_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("QMB_BUDGET must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read_doc(path: &PathBuf) -> Result<ChannelDoc, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    ChannelDoc::parse(&text)
}

fn model_spec(name: &str, eta: f64, unitary_limit: bool) -> Result<ModelSpec, Error> {
    ModelSpec::with_limit(name.parse::<ModelName>()?, eta, unitary_limit)
}

impl Source {
    fn describe(&self) -> Value {
        match (&self.model, &self.channel) {
            (Some(m), _) => json!({ "model": m, "eta": self.eta, "phi0": self.phi0 }),
            (None, Some(p)) => json!({ "channel": p.display().to_string() }),
            _ => Value::Null,
        }
    }

    fn channel(&self) -> Result<Channel, Error> {
        match (&self.model, &self.channel) {
            (Some(name), None) => {
                let eta = self.eta.ok_or_else(|| Error::Input("--eta is required with --model".into()))?;
                models::build(&model_spec(name, eta, self.unitary_limit)?, self.phi0)
            }
            (None, Some(path)) => read_doc(path)?.to_channel(),
            _ => Err(Error::Input("give either --model or --channel".into())),
        }
    }
}

fn cs_json(r: &CsResult) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    v["applicable"] = json!(r.applicable());
    if !r.applicable() {
        v["status"] = json!("not-applicable");
    }
    v
}

fn run_validate(path: &PathBuf, as_json: bool) -> Result<u8, Error> {
    let ch = read_doc(path)?.to_channel_unchecked()?;
    let report = ch.validate(&Tolerances::default());
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("valid: {}", report.valid);
        println!("completeness defect: {:.3e}", report.completeness_defect);
        println!("derivative defect: {:.3e}", report.derivative_defect);
        println!("independence margin: {:.3e}", report.independence_margin);
        println!("Choi min eigenvalue: {:.3e}", report.choi_min_eigenvalue);
        for f in &report.failures {
            println!("failure: {f}");
        }
    }
    Ok(if report.valid { 0 } else { 2 })
}

fn run_bound(source: &Source, method: MethodArg, as_json: bool) -> Result<u8, Error> {
    let ch = source.channel()?;
    let cs = matches!(method, MethodArg::Cs | MethodArg::Both)
        .then(|| cs_bound(&ch))
        .transpose()?;
    let ce = matches!(method, MethodArg::Ce | MethodArg::Both)
        .then(|| ce_sdp_bound(&ch))
        .transpose()?;
    let enhancement = match &ce {
        Some(CeResult {
            bound_const: Some(c), ..
        }) if c.is_finite() => {
            let opts = OracleOptions {
                budget: budget()?,
                ..OracleOptions::default()
            };
            let f1 = optimize_input_with(&ch, 1, &opts)?.best_qfi;
            Some(c * f1.sqrt())
        }
        _ => None,
    };

    if as_json {
        let out = json!({
            "input": source.describe(),
            "cs": cs.as_ref().map(cs_json),
            "ce": ce,
            "enhancement_factor": enhancement,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        return Ok(0);
    }
    if let Some(r) = &cs {
        match r.bound_const {
            Some(c) => println!(
                "cs: bound_const {}  (dphi_N >= {}/sqrt(N))  eps+ {}  eps- {}",
                format_float(c),
                format_float(c),
                format_float(r.eps_plus),
                format_float(r.eps_minus)
            ),
            None => println!("cs: not-applicable ({})", serde_json::to_value(r.classification).expect("serializable").as_str().unwrap_or("")),
        }
    }
    if let Some(r) = &ce {
        match (r.feasible, r.bound_const) {
            (true, Some(c)) => {
                println!(
                    "ce: bound_const {}  (dphi_N >= {}/sqrt(N))  min|alpha| {}",
                    format_float(c),
                    format_float(c),
                    format_float(r.alpha_norm.unwrap_or(f64::NAN))
                );
                if let Some(f) = enhancement {
                    println!("ce: enhancement over shot noise {}", format_float(f));
                }
            }
            _ => println!("ce: not certified (beta = 0 has no solution; Heisenberg scaling not excluded)"),
        }
    }
    Ok(0)
}

fn run_sweep(
    source: &Source,
    opts: SweepOptions,
    out: Option<&PathBuf>,
) -> Result<u8, Error> {
    let ch = source.channel()?;
    let s = sweep(&ch, &opts)?;
    for n in &s.notices {
        eprintln!("notice: {n}");
    }
    match s.crossover {
        Some(n) => eprintln!("crossover: bound exceeds 1/N from N = {n}"),
        None => eprintln!("crossover: none up to N = {}", opts.n_max),
    }
    let csv = s.to_csv();
    match out {
        Some(path) => fs::write(path, csv).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run_oracle(source: &Source, n: usize, restarts: usize, seed: u64) -> Result<u8, Error> {
    let ch = source.channel()?;
    let opts = OracleOptions {
        restarts,
        seed,
        budget: budget()?,
        ..OracleOptions::default()
    };
    let r = optimize_input_with(&ch, n, &opts)?;
    println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
    let ce = ce_sdp_bound(&ch)?;
    match ce.qfi_bound(n) {
        Some(cap) => eprintln!(
            "sandwich: oracle F_N = {} <= CE bound 4N*min|alpha| = {}",
            format_float(r.best_qfi),
            format_float(cap)
        ),
        None => eprintln!(
            "sandwich: oracle F_N = {}; CE bound not certified",
            format_float(r.best_qfi)
        ),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Validate { path, json } => run_validate(&path, json),
        Command::Bound { source, method, json } => run_bound(&source, method, json),
        Command::Sweep {
            source,
            n_max,
            oracle_max_n,
            restarts,
            seed,
            out,
        } => run_sweep(
            &source,
            SweepOptions {
                n_max,
                oracle_max_n,
                restarts,
                seed,
                budget: budget()?,
            },
            out.as_ref(),
        ),
        Command::Oracle {
            source,
            n,
            restarts,
            seed,
        } => run_oracle(&source, n, restarts, seed),
        Command::Model {
            model,
            eta,
            unitary_limit,
            phi0,
        } => {
            let ch = models::build(&model_spec(&model, eta, unitary_limit)?, phi0)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&ChannelDoc::from_channel(&ch)).expect("serializable")
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
