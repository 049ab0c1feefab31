use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scottlab_cli::config::Scenario;
use scottlab_cli::error::CliError;
use scottlab_cli::modes::LemmaKind;
use scottlab_cli::report::Report;
use scottlab_cli::{exit, run_scenario, verify_report, Overrides};

#[derive(Parser)]
#[command(name = "scottlab", version, about = "Exact finite checks on miniature models of arithmetic")]
struct Cli {
    /// Enumeration budget for every count.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recount everything through a second route and attach the comparison.
    #[arg(long, global = true)]
    verify: bool,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Counting back end (exhaustive or compressed).
    #[arg(long, global = true)]
    counter: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SweepFlags {
    #[arg(long)]
    lemma: Option<LemmaKind>,
    /// Inclusive width range, e.g. `2..5`.
    #[arg(long)]
    a_range: Option<String>,
    /// Check every library function of arity at most 2.
    #[arg(long)]
    all_functions: bool,
    /// Number of random conditions.
    #[arg(long)]
    cases: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the scenario.
    Run { scenario: PathBuf },
    /// Count the realizations of a formula set.
    Count { scenario: PathBuf },
    /// Check one refinement step, or sweep random conditions.
    LemmaCheck {
        scenario: PathBuf,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Build a type over finite trees from a target prefix.
    Ehrenfeucht { scenario: PathBuf },
    /// Build a descending sequence and extract coded-set families.
    Generic { scenario: PathBuf },
    /// Build a filter meeting a list of requirements.
    Filter { scenario: PathBuf },
    /// Recount every count in a report and compare verdicts.
    Verify { report: PathBuf },
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<u8, CliError> {
    let mut o = Overrides {
        budget: cli.budget,
        seed: cli.seed,
        counter: cli.counter,
        ..Overrides::default()
    };
    let path = match cli.command {
        Command::Verify { report } => {
            let report: Report = serde_json::from_str(&std::fs::read_to_string(&report)?)?;
            let v = verify_report(&report)?;
            write_json(&v, cli.out.as_deref())?;
            for m in &v.mismatches {
                eprintln!("mismatch: {m}");
            }
            eprintln!("verify: {}", if v.reproduced() { "reproduced" } else { "MISMATCH" });
            return Ok(if v.reproduced() { exit::PASS } else { exit::FAIL });
        }
        Command::Run { scenario } => scenario,
        Command::Count { scenario } => {
            o.mode = Some("count".into());
            scenario
        }
        Command::LemmaCheck { scenario, sweep } => {
            o.mode = Some("lemma-check".into());
            if let Some(l) = sweep.lemma {
                let name = match l {
                    LemmaKind::Extend => "extend",
                    LemmaKind::Disagree => "disagree",
                    LemmaKind::Avoid => "avoid",
                };
                o.keys.push(("lemma".into(), name.into()));
            }
            if let Some(r) = sweep.a_range {
                o.keys.push(("a_range".into(), r));
            }
            if sweep.all_functions {
                o.keys.push(("all_functions".into(), "true".into()));
            }
            if let Some(n) = sweep.cases {
                o.keys.push(("cases".into(), n.to_string()));
            }
            scenario
        }
        Command::Ehrenfeucht { scenario } => {
            o.mode = Some("ehrenfeucht".into());
            scenario
        }
        Command::Generic { scenario } => {
            o.mode = Some("generic".into());
            scenario
        }
        Command::Filter { scenario } => {
            o.mode = Some("filter".into());
            scenario
        }
    };

    let scenario = Scenario::load(&path)?;
    let mut report = run_scenario(scenario, &o)?;
    let mut code = if report.passed { exit::PASS } else { exit::FAIL };
    if cli.verify {
        let v = verify_report(&report)?;
        if !v.reproduced() {
            code = exit::FAIL;
        }
        report.verification = Some(v);
    }
    write_json(&report, cli.out.as_deref())?;
    let passed = report.checks.iter().filter(|c| c.pass).count();
    eprintln!(
        "{}: {} ({passed}/{} checks)",
        report.mode,
        if report.passed { "PASS" } else { "FAIL" },
        report.checks.len()
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("  failed: {}{}", c.name, c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default());
    }
    if let Some(v) = &report.verification {
        eprintln!("verify: {}", if v.reproduced() { "reproduced" } else { "MISMATCH" });
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
