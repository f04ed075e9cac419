//! The `mnw` command line: solve, decompose, check, fuzz and brute-force
//! instances stored as JSON documents.
//!
//! Exit codes: 0 success or property holds, 1 property violated (witness on
//! standard output), 2 input error, 3 internal invariant failure.

use std::ffi::OsString;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mnw_core::fairness::{
    is_ef1, is_efx, is_envy_free, is_minimally_complete, is_mnw, is_pareto_optimal, Verdict,
};
use mnw_core::io::{
    allocation_to_json, format_rational, fractional_to_json, lottery_to_json, parse_allocation,
    parse_fractional, parse_instance, render,
};
use mnw_core::oracle::{
    brute_leximin_set, brute_mnw_set, fuzz_strategyproofness, FuzzConfig, FuzzMode, Rule,
};
use mnw_core::{
    check_rounded, decompose, fractional_mnw, mnw_tie, sample, utilities, verify_fractional_mnw, Error,
    Execution, Instance,
};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mnw", version, about = "Maximum Nash welfare allocation under binary valuations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an allocation and its utility vector.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "mnw-tie")]
        rule: SolveRule,
    },
    /// Decompose the fractional MNW allocation into a lottery over rounded
    /// MNW allocations.
    Lottery {
        instance: PathBuf,
        /// Also draw one allocation from the lottery.
        #[arg(long)]
        sample: bool,
        #[arg(long, default_value_t = 0, requires = "sample")]
        seed: u64,
    },
    /// Verify a property of an allocation.
    Check {
        instance: PathBuf,
        /// Deterministic allocation document, or a fractional one for
        /// `--property frac-mnw`.
        allocation: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
    },
    /// Search for a group manipulation of an allocation rule.
    Fuzz(FuzzArgs),
    /// Brute-force MNW and leximin sets of a small instance.
    Oracle { instance: PathBuf },
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, value_enum)]
    rule: FuzzRule,
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    goods: usize,
    /// Check every profile and every joint misreport.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    exhaustive: bool,
    /// Number of random profiles to draw.
    #[arg(long, value_name = "K")]
    random: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random deviations tried per random profile.
    #[arg(long, default_value_t = 16)]
    misreports: u64,
    #[arg(long, default_value_t = 1)]
    coalition_max: usize,
    /// Refusal threshold on the number of deviations an exhaustive run examines.
    #[arg(long)]
    bound: Option<u64>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveRule {
    MnwTie,
    FracMnw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FuzzRule {
    MnwTie,
    FracMnw,
    FullAllocationMnw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Property {
    Ef,
    Ef1,
    Efx,
    Po,
    Mnw,
    MinimallyComplete,
    Rounded,
    FracMnw,
}

/// Outcome of a command: a document to print and whether it reports a
/// violated property.
struct Outcome {
    doc: Value,
    violated: bool,
}

impl From<Value> for Outcome {
    fn from(doc: Value) -> Self {
        Outcome { doc, violated: false }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    parse_instance(&read(path)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn rationals(v: &[mnw_core::Rational]) -> Value {
    v.iter().map(format_rational).collect()
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Solve { instance, rule } => {
            let inst = load_instance(&instance)?;
            Ok(match rule {
                SolveRule::MnwTie => {
                    let a = mnw_tie(&inst);
                    let u = utilities(&inst, &a)?;
                    json!({ "rule": "mnw-tie", "allocation": allocation_to_json(&a), "utilities": u.0 })
                }
                SolveRule::FracMnw => {
                    let s = fractional_mnw(&inst);
                    json!({
                        "rule": "frac-mnw",
                        "allocation": fractional_to_json(&s.allocation),
                        "utilities": rationals(&s.utilities),
                    })
                }
            }
            .into())
        }
        Command::Lottery { instance, sample: draw, seed } => {
            let inst = load_instance(&instance)?;
            let s = fractional_mnw(&inst);
            let lottery = decompose(&inst, &s.allocation)?;
            let mut doc = json!({
                "fractional": fractional_to_json(&s.allocation),
                "expected_utilities": rationals(&s.utilities),
                "lottery": lottery_to_json(&lottery),
            });
            if draw {
                doc["sample"] = json!({ "seed": seed, "allocation": allocation_to_json(&sample(&lottery, seed)) });
            }
            Ok(doc.into())
        }
        Command::Check { instance, allocation, property } => {
            let inst = load_instance(&instance)?;
            let text = read(&allocation)?;
            let ctx = |e: Error| match e {
                Error::Input(m) => Error::Input(format!("{}: {m}", allocation.display())),
                other => other,
            };
            let verdict = if let Property::FracMnw = property {
                verify_fractional_mnw(&inst, &parse_fractional(&text).map_err(ctx)?)?
            } else {
                let a = parse_allocation(&text).map_err(ctx)?;
                match property {
                    Property::Ef => is_envy_free(&inst, &a)?,
                    Property::Ef1 => is_ef1(&inst, &a)?,
                    Property::Efx => is_efx(&inst, &a)?,
                    Property::Po => is_pareto_optimal(&inst, &a)?,
                    Property::Mnw => is_mnw(&inst, &a)?,
                    Property::MinimallyComplete => is_minimally_complete(&inst, &a)?,
                    Property::Rounded => check_rounded(&inst, &fractional_mnw(&inst).allocation, &a)?,
                    Property::FracMnw => unreachable!(),
                }
            };
            let name = property.to_possible_value().expect("no skipped variants").get_name().to_owned();
            let mut doc = serde_json::to_value(&verdict).expect("verdicts serialize");
            doc.as_object_mut().expect("verdicts are objects").insert("property".into(), name.into());
            Ok(Outcome { doc, violated: matches!(verdict, Verdict::Violated(_)) })
        }
        Command::Fuzz(args) => {
            let rule = match args.rule {
                FuzzRule::MnwTie => Rule::MnwTie,
                FuzzRule::FracMnw => Rule::FracMnw,
                FuzzRule::FullAllocationMnw => Rule::FullAllocationMnw,
            };
            let mode = match args.random {
                Some(profiles) => FuzzMode::Random { profiles, misreports: args.misreports, seed: args.seed },
                None => FuzzMode::Exhaustive,
            };
            let mut cfg = FuzzConfig::new(rule, args.agents, args.goods, mode, args.coalition_max);
            if let Some(b) = args.bound {
                cfg.bound = b;
            }
            if args.sequential {
                cfg.execution = Execution::Sequential;
            }
            let report = fuzz_strategyproofness(&cfg)?;
            let violated = report.witness.is_some();
            Ok(Outcome { doc: serde_json::to_value(&report).expect("reports serialize"), violated })
        }
        Command::Oracle { instance } => {
            let inst = load_instance(&instance)?;
            let mnw = brute_mnw_set(&inst)?;
            let leximin = brute_leximin_set(&inst)?;
            let profile = leximin.first().map(|a| utilities(&inst, a)).transpose()?.map(|u| u.profile());
            Ok(json!({
                "mnw_set": mnw.iter().map(allocation_to_json).collect::<Vec<_>>(),
                "leximin_set": leximin.iter().map(allocation_to_json).collect::<Vec<_>>(),
                "leximin_profile": profile,
            })
            .into())
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Documents go to `out`, diagnostics to `err`.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match panic::catch_unwind(AssertUnwindSafe(|| run(cli.command))) {
        Ok(Ok(outcome)) => {
            let _ = out.write_all(render(&outcome.doc).as_bytes());
            if outcome.violated {
                EXIT_VIOLATED
            } else {
                EXIT_OK
            }
        }
        Ok(Err(e @ Error::Input(_))) => {
            let _ = writeln!(err, "mnw: {e}");
            EXIT_INPUT
        }
        Ok(Err(e)) => {
            let _ = writeln!(err, "mnw: {e}");
            EXIT_INTERNAL
        }
        Err(_) => {
            let _ = writeln!(err, "mnw: internal invariant failure");
            EXIT_INTERNAL
        }
    }
}
