use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use mavkit_core::threat::{full_grid, run_scenario, score_matrix, AttackScenario, ThreatError};

use crate::{out_raw, runtime, CliError, CliResult};

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Scenario file of `key=value` lines.
    #[arg(long, required_unless_present = "matrix")]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed (matrix default 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Run all 6 attacks with signing off and on.
    #[arg(long)]
    matrix: bool,
    /// Write a JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Print the vehicle and attacker timeline.
    #[arg(long)]
    timeline: bool,
    /// JSON output, one object per line.
    #[arg(long)]
    machine: bool,
}

fn threat_err(e: ThreatError) -> CliError {
    match e {
        ThreatError::ScenarioInvalid(_) => CliError::Usage(e.to_string()),
        ThreatError::Link(_) => runtime(e),
    }
}

fn write_summary(path: &PathBuf, value: &serde_json::Value) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn attack(args: &AttackArgs) -> CliResult {
    if args.matrix {
        let seed = args.seed.unwrap_or(1);
        let m = score_matrix(&full_grid(seed)).map_err(threat_err)?;
        if args.machine {
            for c in &m.cells {
                out!(
                    "{}",
                    json!({"attack": c.attack.name(), "signing": c.signing, "defended": c.defended,
                           "expected_defended": c.expected_defended,
                           "mission_outcome": c.report.mission_outcome,
                           "frames_accepted_by_victim": c.report.frames_accepted_by_victim})
                );
            }
        } else {
            out_raw(&m.render_text());
        }
        if let Some(p) = &args.summary {
            write_summary(p, &serde_json::to_value(&m).map_err(runtime)?)?;
        }
        return if m.all_match() {
            Ok(())
        } else {
            Err(CliError::Mismatch(
                "attack matrix differs from the expected-defense table".into(),
            ))
        };
    }

    let path = args
        .scenario
        .as_ref()
        .expect("clap requires --scenario without --matrix");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut sc = AttackScenario::parse(&text).map_err(threat_err)?;
    if let Some(seed) = args.seed {
        sc = sc.with_seed(seed);
    }
    let report = run_scenario(&sc).map_err(threat_err)?;
    if args.machine {
        out!("{}", serde_json::to_string(&report).map_err(runtime)?);
    } else {
        out_raw(&report.render_text());
        if args.timeline {
            for line in &report.timeline {
                out!("timeline: {line}");
            }
        }
    }
    if let Some(p) = &args.summary {
        write_summary(p, &serde_json::to_value(&report).map_err(runtime)?)?;
    }
    if report.matches_expectation {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "{} with signing {}: expected defended={}, got {}",
            sc.attack,
            if sc.signing { "on" } else { "off" },
            report.expected_defended,
            report.defended
        )))
    }
}
