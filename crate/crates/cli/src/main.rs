use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use scottlimit::guest::{decider_cost_bound, diagonal_transcript, make_bounded_decider};
use scottlimit::harness::{self, Config, ExperimentReport, Subject};
use scottlimit::{CaseTable, HaltingOperator, Omega, RunVerdict, Step};

#[derive(Parser)]
#[command(
    name = "scottlimit",
    version,
    about = "Halting observations, their Kleene chain, and bounded deciders"
)]
struct Cli {
    /// Config file of `key = value` lines. Defaults to $SCOTTLIMIT_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    window: Option<Step>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// A `.tm` or `.gasm` file.
    machine: PathBuf,
    /// `self`, `empty`, `tape:a,b,…` (Turing) or `num:N`, `hex:…` (guest).
    #[arg(long, default_value = "self")]
    input: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Bounded run: exit 0 if halted, 1 if still running.
    Run {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        bound: Step,
    },
    /// Kleene chain from the bottom observation.
    Chain {
        #[command(flatten)]
        target: Target,
        /// Stage count (default: chain_cap).
        #[arg(short = 'n')]
        stages: Option<Step>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value = "standard")]
        table: CaseTable,
    },
    /// Tick totals of bounded runs for every bound in `from..=to`.
    Overhead {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 0)]
        from: Step,
        /// Default: overhead_max.
        #[arg(long)]
        to: Option<Step>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the step-bounded decider against its diagonalizer.
    Diagonalize {
        #[arg(long)]
        bound: Step,
        /// Ticks the diagonalizer may run (default: diagonal_fuel).
        #[arg(long)]
        fuel: Option<Step>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Property suite; exit 1 on any failure.
    Suite {
        /// Run under a defective case table instead.
        #[arg(long)]
        mutant: Option<CaseTable>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Limit of the chain when the machine halts within the fuel.
    Omega {
        #[command(flatten)]
        target: Target,
        /// Default: omega_fuel.
        #[arg(long)]
        fuel: Option<Step>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Chain, limit, semi-decision and overhead of one machine.
    Report {
        #[command(flatten)]
        target: Target,
        #[arg(short = 'n')]
        stages: Option<Step>,
        /// Also run the property suite.
        #[arg(long)]
        with_suite: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_file(p)?,
        None => Config::from_env()?,
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .with_context(|| format!("--set {o}: expected KEY=VALUE"))?;
        cfg.set(k.trim(), v.trim()).map_err(anyhow::Error::msg)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.window {
        cfg.window = w;
    }
    Ok(cfg)
}

fn subject(t: &Target) -> Result<Subject> {
    let s = Subject::load(&t.machine)?;
    Ok(s.with_input(&t.input)?)
}

fn json(v: serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn no_csv(what: &str) -> Result<ExitCode> {
    bail!("{what} has no CSV form")
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Run { target, bound } => {
            let (verdict, ledger) = subject(target)?.run_bounded(*bound)?;
            println!("{verdict}; ticks: {}", ledger.total());
            Ok(if verdict.halted() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Chain {
            target,
            stages,
            format,
            table,
        } => {
            let s = subject(target)?;
            let n = stages.unwrap_or(cfg.chain_cap);
            let probe = s.probe(n.max(1))?;
            let chain = HaltingOperator::new(*table, cfg.window).iterate_chain(&probe, n)?;
            match format {
                Format::Text => print!("{}", harness::chain_text(&chain)),
                Format::Csv => print!("{}", harness::chain_csv(&chain)),
                Format::Json => print!("{}", json(harness::chain_json(&s, *table, &chain))?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Overhead {
            target,
            from,
            to,
            format,
        } => {
            let rows = subject(target)?.overhead(*from..=to.unwrap_or(cfg.overhead_max))?;
            match format {
                Format::Text => {
                    for r in &rows {
                        println!(
                            "T={:<5} {:<16} ticks={}",
                            r.bound,
                            r.verdict.to_string(),
                            r.ledger.total()
                        );
                    }
                }
                Format::Csv => print!("{}", harness::overhead_csv(&rows)),
                Format::Json => print!("{}", json(serde_json::to_value(&rows)?)?),
            }
            // A verdict that the machine is still running at T must have
            // followed all T transitions.
            let short: Vec<Step> = rows
                .iter()
                .filter(|r| matches!(r.verdict, RunVerdict::RunningAt(_)) && r.ledger.total() < r.bound + 1)
                .map(|r| r.bound)
                .collect();
            if !short.is_empty() {
                eprintln!("ticks below T+1 at T = {short:?}");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Diagonalize { bound, fuel, format } => {
            let cost = decider_cost_bound(*bound);
            let (x, tr) = diagonal_transcript(&make_bounded_decider(*bound), cost, fuel.unwrap_or(cfg.diagonal_fuel))?;
            match format {
                Format::Text => {
                    print!("{}", harness::diagonal_text(&tr));
                    match tr.witness_step() {
                        Some(w) => println!("witness: step {w} (decider bound {bound})"),
                        None => println!("witness: none"),
                    }
                }
                Format::Csv => return no_csv("diagonalize"),
                Format::Json => print!(
                    "{}",
                    json(serde_json::json!({
                        "bound": bound,
                        "x_encoding": hex(&x.encode()),
                        "transcript": tr,
                        "witness_step": tr.witness_step(),
                    }))?
                ),
            }
            Ok(if tr.contradiction {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Suite { mutant, format } => {
            let report = harness::run_suite(&cfg, mutant.unwrap_or(CaseTable::Standard))?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Csv => return no_csv("suite"),
                Format::Json => print!("{}", json(serde_json::to_value(&report)?)?),
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Omega { target, fuel, format } => {
            let omega = subject(target)?.p_omega(fuel.unwrap_or(cfg.omega_fuel))?;
            match format {
                Format::Text => match &omega {
                    Omega::Limit(p) => println!("LIMIT {p}"),
                    Omega::StillRunning(f) => println!("STILL RUNNING after {f} steps"),
                },
                Format::Csv => return no_csv("omega"),
                Format::Json => print!("{}", json(serde_json::to_value(&omega)?)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            target,
            stages,
            with_suite,
            format,
        } => {
            let s = subject(target)?;
            let mut report = ExperimentReport::build(&s, &cfg, CaseTable::Standard, stages.unwrap_or(cfg.chain_cap))?;
            if *with_suite {
                report.suite = Some(harness::run_suite(&cfg, CaseTable::Standard)?);
            }
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Csv => return no_csv("report"),
                Format::Json => print!("{}", json(serde_json::to_value(&report)?)?),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
