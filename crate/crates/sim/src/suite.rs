//! Built-in scenario matrix, run in parallel and reported as a comparison
//! table with position-error reductions relative to PID.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use usv_core::control::ControllerKind;

use crate::config::ScenarioConfig;
use crate::error::{SimError, SimResult};
use crate::log::{Outcome, RunLog};
use crate::metrics::MetricsSummary;
use crate::runner::run_scenario;

use ControllerKind::{LqrPi, Mrac, Pid};

const ALL: &[ControllerKind] = &[Pid, LqrPi, Mrac];

/// `(file text, controllers)` of every built-in scenario.
const BUILTIN: &[(&str, &[ControllerKind])] = &[
    (include_str!("../scenarios/legrun-baseline.toml"), ALL),
    (include_str!("../scenarios/legrun-fault.toml"), ALL),
    (include_str!("../scenarios/legrun-drogue.toml"), ALL),
    (include_str!("../scenarios/legrun-sail.toml"), ALL),
    (include_str!("../scenarios/trackline-fault.toml"), &[LqrPi, Mrac]),
    (include_str!("../scenarios/trackline-drogue.toml"), &[LqrPi, Mrac]),
    (include_str!("../scenarios/unrep.toml"), &[Pid, Mrac]),
    (include_str!("../scenarios/canal.toml"), &[Pid, Mrac]),
];

/// Every built-in scenario with the controllers it is run with.
pub fn builtin_scenarios() -> SimResult<Vec<(ScenarioConfig, Vec<ControllerKind>)>> {
    BUILTIN
        .iter()
        .map(|(text, ctrls)| Ok((ScenarioConfig::from_toml(text)?, ctrls.to_vec())))
        .collect()
}

/// One built-in scenario by name.
pub fn builtin(name: &str) -> SimResult<ScenarioConfig> {
    builtin_scenarios()?
        .into_iter()
        .map(|(c, _)| c)
        .find(|c| c.name == name)
        .ok_or_else(|| SimError::Config(format!("no built-in scenario named {name:?}")))
}

pub struct SuiteRun {
    pub scenario: String,
    pub controller: ControllerKind,
    pub log: RunLog,
}

impl SuiteRun {
    pub fn dir_name(&self) -> String {
        format!("{}-{}", self.scenario, self.controller.as_str())
    }
}

/// Runs the whole matrix. Results come back in matrix order regardless of
/// scheduling.
pub fn run_suite() -> SimResult<Vec<SuiteRun>> {
    let jobs: Vec<(ScenarioConfig, ControllerKind)> = builtin_scenarios()?
        .into_iter()
        .flat_map(|(cfg, ctrls)| ctrls.into_iter().map(move |c| (cfg.clone(), c)))
        .collect();
    let results: Vec<SimResult<SuiteRun>> = jobs
        .par_iter()
        .map(|(cfg, c)| {
            Ok(SuiteRun {
                scenario: cfg.name.clone(),
                controller: *c,
                log: run_scenario(cfg, *c)?,
            })
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if let Some(first) = errors.first() {
        return Err(SimError::Suite {
            count: errors.len(),
            first: first.clone(),
        });
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub scenario: String,
    pub controller: ControllerKind,
    pub outcome: Outcome,
    pub end_time: f64,
    pub metrics: MetricsSummary,
    /// Position RMSE reduction against the PID run of the same scenario, percent.
    pub position_improvement_pct: Option<f64>,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn from_runs(runs: &[SuiteRun]) -> Self {
        let rows = runs
            .iter()
            .map(|r| {
                let s = &r.log.summary;
                let m = s.primary_metrics().clone();
                let pid = runs
                    .iter()
                    .find(|p| p.scenario == r.scenario && p.controller == Pid)
                    .map(|p| p.log.summary.primary_metrics().position.rmse);
                let position_improvement_pct = match (r.controller, pid) {
                    (Pid, _) | (_, None) => None,
                    (_, Some(base)) if base > 0.0 => Some(100.0 * (base - m.position.rmse) / base),
                    _ => None,
                };
                SuiteRow {
                    scenario: r.scenario.clone(),
                    controller: r.controller,
                    outcome: s.outcome,
                    end_time: s.end_time,
                    metrics: m,
                    position_improvement_pct,
                    events: notable_events(s),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, scenario: &str, controller: ControllerKind) -> Option<&SuiteRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.controller == controller)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| scenario | controller | outcome | speed (m/s) | heading (deg) | yaw rate (rad/s) | position (m) | vs PID |\n\
             |---|---|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            let m = &r.metrics;
            let pm = |e: &crate::metrics::ErrorStats| format!("{:.3} ± {:.3}", e.rmse, e.rmsd);
            let imp = r
                .position_improvement_pct
                .map_or_else(|| "-".to_string(), |p| format!("{p:+.1}%"));
            writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                r.scenario,
                r.controller.as_str(),
                r.outcome.as_str(),
                pm(&m.speed),
                pm(&m.heading),
                pm(&m.yaw_rate),
                pm(&m.position),
                imp
            )
            .expect("writing to a string");
        }
        s
    }
}

fn notable_events(s: &crate::log::RunSummary) -> Vec<String> {
    s.events
        .iter()
        .filter(|e| e.name != "progress" && e.name != "disturbance-onset")
        .map(|e| format!("{}@{:.2}", e.name, e.t))
        .collect()
}

/// Writes one directory per run plus `suite.json` and `suite.md`.
pub fn write_suite(out: &Path, runs: &[SuiteRun]) -> SimResult<SuiteReport> {
    for r in runs {
        r.log.write_dir(&out.join(r.dir_name()))?;
    }
    let report = SuiteReport::from_runs(runs);
    let io = |p: &Path, e: std::io::Error| SimError::Io(format!("{}: {e}", p.display()));
    let json = out.join("suite.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    std::fs::write(&json, text).map_err(|e| io(&json, e))?;
    let md = out.join("suite.md");
    std::fs::write(&md, report.to_markdown()).map_err(|e| io(&md, e))?;
    Ok(report)
}
