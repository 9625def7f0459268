//! Command-line front end. Every subcommand writes one JSON document (or a
//! CSV table for the `table` and `renewal` sweeps) to standard output.
//!
//! Exit codes: 0 on success, 1 on a domain or resource error (and when
//! `verify` finds a failing check), 2 on a usage error.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{self, DpMode};
use crate::excursions::decompose;
use crate::montecarlo::{simulate_game, SimConfig, DEFAULT_BATCH_SIZE};
use crate::rational::{format_rational, half, parse_rational, to_f64};
use crate::renewal::{self, C};
use crate::sequence::parse_sequence;
use crate::verify::{self, Level};

#[derive(Debug, Parser)]
#[command(name = "coinrace", version, about = "HH-vs-HT coin game: exact, asymptotic and simulated probabilities")]
struct Cli {
    /// Output format; CSV is available for `table` and `renewal` only.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiffMethod {
    Renewal,
    Dp,
    Enum,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exhaustive enumeration over all 2^n sequences (n <= 30).
    Exact {
        #[arg(long)]
        n: usize,
        /// Head probability as NUM/DEN or a decimal.
        #[arg(long, default_value = "1/2")]
        p: String,
    },
    /// Dynamic programme over (last flip, score).
    Dp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/2")]
        p: String,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
    },
    /// Direct Monte Carlo simulation of the game.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "0.5")]
        p: String,
        #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
        batch_size: u64,
    },
    /// Renewal counts and probabilities for m in [m-from, m-to].
    Renewal {
        #[arg(long, default_value_t = 1)]
        m_from: u64,
        #[arg(long)]
        m_to: u64,
    },
    /// P(B wins) - P(A wins) by the chosen method.
    Diff {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = DiffMethod::Renewal)]
        method: DiffMethod,
    },
    /// Leading-order asymptotics at horizon n.
    Asym {
        #[arg(long)]
        n: u64,
    },
    /// Simulate the walk observed at successive tails.
    Walk {
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Decompose a sequence into its initial tailrun and excursion slots.
    Decompose {
        /// H/T text; read from standard input when omitted.
        sequence: Option<String>,
    },
    /// Sweep of win/tie probabilities over a range of horizons.
    Table {
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
    },
    /// Run every invariant check and report each one.
    Verify {
        /// Smaller sample sizes and horizons.
        #[arg(long)]
        quick: bool,
    },
}

enum Output {
    Json(Value),
    Csv(String),
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };

    let csv_allowed = matches!(cli.command, Command::Table { .. } | Command::Renewal { .. });
    if cli.format == Format::Csv && !csv_allowed {
        let _ = writeln!(err, "error: --format csv is only supported by `table` and `renewal`");
        return 2;
    }

    let result = run(cli.command, cli.format);
    match result {
        Ok((output, code)) => {
            let written = match output {
                Output::Json(v) => writeln!(out, "{v}"),
                Output::Csv(text) => out.write_all(text.as_bytes()),
            };
            if written.is_err() {
                return 1;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn parse_p(text: &str) -> Result<BigRational> {
    let p = parse_rational(text)?;
    crate::rational::check_probability(&p)?;
    Ok(p)
}

fn exact_json(command: &str, method: &str, d: &exact::ExactDistribution) -> Value {
    json!({
        "command": command,
        "method": method,
        "n": d.n,
        "p": format_rational(&d.p),
        "pA": format_rational(&d.p_a),
        "pB": format_rational(&d.p_b),
        "pTie": format_rational(&d.p_tie),
        "diff": format_rational(&d.diff()),
    })
}

fn float_json(command: &str, d: &exact::FloatDistribution) -> Value {
    json!({
        "command": command,
        "method": "dp-float",
        "n": d.n,
        "p": d.p,
        "pA": d.p_a,
        "pB": d.p_b,
        "pTie": d.p_tie,
        "diff": d.diff(),
        "rounding_bound": d.rounding_bound,
    })
}

fn tagged<S: Serialize>(command: &str, method: Option<&str>, body: &S) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), command.into());
    if let Some(m) = method {
        obj.insert("method".into(), m.into());
    }
    if let Value::Object(fields) = serde_json::to_value(body).expect("serializable report") {
        obj.extend(fields);
    }
    Value::Object(obj)
}

fn run(command: Command, format: Format) -> Result<(Output, i32)> {
    let json = |v| Ok((Output::Json(v), 0));
    match command {
        Command::Exact { n, p } => {
            let d = exact::enumerate_distribution(n, &parse_p(&p)?)?;
            json(exact_json("exact", "enum", &d))
        }
        Command::Dp { n, p, mode } => {
            let p = parse_p(&p)?;
            match exact::dp_distribution(n, &p, if mode == Mode::Exact { DpMode::Exact } else { DpMode::Float })? {
                exact::Distribution::Exact(d) => json(exact_json("dp", "dp-exact", &d)),
                exact::Distribution::Float(d) => json(float_json("dp", &d)),
            }
        }
        Command::Mc { n, trials, seed, p, batch_size } => {
            let p = to_f64(&parse_p(&p)?);
            let config = SimConfig { n, p, trials, seed, batch_size };
            let r = simulate_game(&config)?;
            let mut v = tagged("mc", Some("mc"), &r);
            v["diff"] = r.diff().into();
            v["stderr_diff"] = r.diff_stderr().into();
            json(v)
        }
        Command::Renewal { m_from, m_to } => {
            let table = renewal::renewal_table(m_from, m_to)?;
            match format {
                Format::Csv => {
                    let mut s = String::from("m,count_rx,pi_exact,pi_float\n");
                    for row in &table.rows {
                        s += &format!("{},{},{},{}\n", row.m, row.count_rx, format_rational(&row.pi_exact), row.pi_float);
                    }
                    Ok((Output::Csv(s), 0))
                }
                Format::Json => {
                    let rows: Vec<Value> = table
                        .rows
                        .iter()
                        .map(|row| {
                            json!({
                                "m": row.m,
                                "count_rx": row.count_rx.to_string(),
                                "pi_exact": format_rational(&row.pi_exact),
                                "pi_float": row.pi_float,
                            })
                        })
                        .collect();
                    json(json!({"command": "renewal", "method": "renewal", "m_from": m_from, "m_to": m_to, "rows": rows}))
                }
            }
        }
        Command::Diff { n, method } => {
            let (tag, d) = match method {
                DiffMethod::Renewal => ("renewal", renewal::renewal_diff(n as u64)?),
                DiffMethod::Dp => ("dp-exact", exact::dp_exact(n, &half())?.diff()),
                DiffMethod::Enum => ("enum", exact::enumerate_distribution(n, &half())?.diff()),
            };
            json(json!({
                "command": "diff",
                "method": tag,
                "n": n,
                "diff": format_rational(&d),
                "diff_float": to_f64(&d),
            }))
        }
        Command::Asym { n } => json(tagged("asym", Some("asym"), &renewal::asymptotics(n)?)),
        Command::Walk { steps, seed } => json(tagged("walk", Some("mc"), &renewal::tailwalk(steps, seed)?)),
        Command::Decompose { sequence } => {
            let text = match sequence {
                Some(s) => s,
                None => {
                    let mut line = String::new();
                    std::io::stdin()
                        .read_line(&mut line)
                        .map_err(|e| Error::Domain(format!("reading standard input: {e}")))?;
                    line
                }
            };
            let seq = parse_sequence(text.trim_end_matches(['\n', '\r']))?;
            let d = decompose(&seq);
            let mut v = tagged("decompose", None, &d);
            v["sequence"] = seq.to_text().into();
            json(v)
        }
        Command::Table { n_from, n_to, step, mode } => table(n_from, n_to, step, mode, format),
        Command::Verify { quick } => {
            let level = if quick { Level::Quick } else { Level::Full };
            let checks = verify::run_all(level);
            let passed = checks.iter().all(|c| c.passed);
            let v = json!({
                "command": "verify",
                "level": if quick { "quick" } else { "full" },
                "passed": passed,
                "checks": checks,
            });
            Ok((Output::Json(v), if passed { 0 } else { 1 }))
        }
    }
}

fn table(n_from: usize, n_to: usize, step: usize, mode: Mode, format: Format) -> Result<(Output, i32)> {
    if n_from == 0 || n_to < n_from || step == 0 {
        return crate::error::domain(format!("invalid sweep n-from {n_from} n-to {n_to} step {step}"));
    }
    // [pA, pB, pTie] for every horizon up to n_to
    let (method, all): (&str, Vec<[f64; 3]>) = match mode {
        Mode::Exact => (
            "dp-exact",
            exact::dp_exact_sweep(n_to, &half())?.iter().map(|d| d.to_float()).collect(),
        ),
        Mode::Float => (
            "dp-float",
            exact::dp_float_sweep(n_to, 0.5)?.iter().map(|d| [d.p_a, d.p_b, d.p_tie]).collect(),
        ),
    };
    let rows: Vec<(usize, [f64; 3])> = (n_from..=n_to).step_by(step).map(|n| (n, all[n - 1])).collect();
    let asym = |n: usize| {
        let d = C / (n as f64).sqrt();
        (2.0 * d, d)
    };
    match format {
        Format::Csv => {
            let mut s = String::from("n,pA,pB,pTie,diff,tie_asym,diff_asym\n");
            for (n, [a, b, t]) in rows {
                let (ta, da) = asym(n);
                s += &format!("{n},{a},{b},{t},{},{ta},{da}\n", b - a);
            }
            Ok((Output::Csv(s), 0))
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .into_iter()
                .map(|(n, [a, b, t])| {
                    let (ta, da) = asym(n);
                    json!({"n": n, "pA": a, "pB": b, "pTie": t, "diff": b - a, "tie_asym": ta, "diff_asym": da})
                })
                .collect();
            Ok((Output::Json(json!({"command": "table", "method": method, "rows": rows})), 0))
        }
    }
}
