use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spectriples_cli::config::TaskName;
use spectriples_cli::{load_config, run_suite, run_task, TaskOutcome};

#[derive(Parser)]
#[command(
    name = "spectriples",
    version,
    about = "Boundary-triple spectral checks on discretized model problems"
)]
struct Cli {
    /// Config file describing the problem, coupling, task and tolerances.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's [output] section.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for suite runs; falls back to SPECTRIPLES_WORKERS,
    /// then to one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe the discrete Green identity with compactly supported functions.
    GreenCheck,
    /// Evaluate the Dirichlet-to-Neumann operator at the configured energies.
    Calderon,
    /// Evaluate the regularized Weyl function at the configured energies.
    Weyl,
    /// Count negative eigenvalues by the index formula and directly.
    Count,
    /// Enumerate spectral gaps of a realization inside a window.
    Gaps,
    /// Count eigenvalues in a chosen gap by the shifted index formula.
    GapCount,
    /// Measure singular-value decay of a resolvent-power difference.
    Schatten,
    /// Run every config listed in a manifest and aggregate the results.
    Suite {
        /// Manifest file listing config paths, one per line.
        manifest: PathBuf,
    },
}

impl Command {
    fn task_name(&self) -> Option<TaskName> {
        Some(match self {
            Command::GreenCheck => TaskName::GreenCheck,
            Command::Calderon => TaskName::Calderon,
            Command::Weyl => TaskName::Weyl,
            Command::Count => TaskName::Count,
            Command::Gaps => TaskName::Gaps,
            Command::GapCount => TaskName::GapCount,
            Command::Schatten => TaskName::Schatten,
            Command::Suite { .. } => return None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    if let Command::Suite { manifest } = &cli.command {
        let out_root = cli.out.unwrap_or_else(|| PathBuf::from("out"));
        let outcome =
            run_suite(manifest, &out_root, cli.workers).map_err(|e| e.to_string())?;
        for (stem, task_outcome) in &outcome.statuses {
            match task_outcome {
                TaskOutcome::Completed(r) if r.all_passed() => {
                    println!("{stem}: pass ({})", r.task);
                }
                TaskOutcome::Completed(r) => {
                    let failing: Vec<&str> = r
                        .verdicts
                        .iter()
                        .filter(|v| !v.pass)
                        .map(|v| v.rule.as_str())
                        .collect();
                    println!("{stem}: FAIL ({}) [{}]", r.task, failing.join(", "));
                }
                TaskOutcome::Errored(message) => println!("{stem}: ERROR {message}"),
            }
        }
        println!(
            "suite: {} configs, {} passed; report at {}",
            outcome.statuses.len(),
            outcome
                .statuses
                .iter()
                .filter(|(_, o)| o.passed())
                .count(),
            out_root.join("report.json").display()
        );
        return Ok(outcome.all_passed);
    }

    let name = cli.command.task_name().expect("task subcommands carry a name");
    let config_path = cli
        .config
        .ok_or_else(|| format!("--config is required for `{name}`"))?;
    let mut cfg = load_config(&config_path).map_err(|e| e.to_string())?;
    match cfg.task.name {
        Some(configured) if configured != name => {
            return Err(format!(
                "config names task `{configured}` but the `{name}` subcommand was invoked"
            ));
        }
        _ => cfg.task.name = Some(name),
    }
    let out_dir = cli
        .out
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let record = run_task(&cfg, &out_dir).map_err(|e| format!("{name}: {e}"))?;
    for v in &record.verdicts {
        println!("{}: {}", v.rule, if v.pass { "PASS" } else { "FAIL" });
    }
    println!("report at {}", out_dir.join("report.json").display());
    Ok(record.all_passed())
}
