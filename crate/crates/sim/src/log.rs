//! Run log: JSON-lines records plus a summary document.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use usv_core::control::{ClosedLoopPolicy, ControllerKind, Reference};

use crate::config::{ScenarioConfig, SCHEMA_VERSION};
use crate::error::{SimError, SimResult};
use crate::metrics::MetricsSummary;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Command {
    pub u_thr: f64,
    pub u_rud: f64,
    pub u_ad_thr: f64,
    pub u_ad_rud: f64,
}

/// Error channels sampled against the active references.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TickErrors {
    pub speed: f64,
    pub heading_deg: f64,
    pub yaw_rate: f64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Record {
    Header {
        schema: u32,
        controller: ControllerKind,
        seed: u64,
        scenario: Box<ScenarioConfig>,
    },
    Tick {
        t: f64,
        vehicle: usize,
        truth: [f64; 6],
        meas: [f64; 6],
        reference: Reference,
        command: Command,
        /// Delivered left/right thruster commands.
        thrusters: [f64; 2],
        faults: Vec<String>,
        errors: TickErrors,
        /// Reference-model error norms `(speed, yaw)`; zero unless adaptive.
        mrac_error: [f64; 2],
    },
    Event {
        t: f64,
        vehicle: Option<usize>,
        name: String,
        detail: String,
    },
    Estimate {
        t: f64,
        vehicle: usize,
        x_hat: Vec<f64>,
        /// Diagonal of the filtered state covariance.
        q_diag: Vec<f64>,
        mu_hat: Vec<f64>,
        w_hat_diag: Vec<f64>,
        delta_mu: Vec<f64>,
        delta_sigma: Vec<f64>,
        iterations: usize,
        objective: f64,
        /// Memoryless controller snapshot used for forward propagation.
        policy: ClosedLoopPolicy,
        dt: f64,
    },
    Certify {
        t: f64,
        vehicle: usize,
        horizon: usize,
        gamma: f64,
        safe: bool,
        first_violation: Option<usize>,
        /// Corners of the projected state boxes, steps `1..=horizon`.
        lo: Vec<[f64; 6]>,
        hi: Vec<[f64; 6]>,
    },
}

impl Record {
    pub fn time(&self) -> f64 {
        match self {
            Record::Header { .. } => 0.0,
            Record::Tick { t, .. }
            | Record::Event { t, .. }
            | Record::Estimate { t, .. }
            | Record::Certify { t, .. } => *t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    Halted,
    Aborted,
    Timeout,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::Halted => "halted",
            Outcome::Aborted => "aborted",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Invocations {
    pub base: u64,
    pub helm: u64,
    pub controller: u64,
    pub estimator: u64,
    pub estimator_solves: u64,
    pub certify: u64,
    pub certify_runs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub t: f64,
    pub vehicle: Option<usize>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub scenario: String,
    pub controller: ControllerKind,
    pub seed: u64,
    pub outcome: Outcome,
    pub end_time: f64,
    pub primary_vehicle: usize,
    pub metrics: Vec<MetricsSummary>,
    pub events: Vec<EventSummary>,
    pub invocations: Invocations,
    /// Control periods in which some adaptive weight left its bounds.
    pub projection_violations: u64,
    pub certify_unsafe: u64,
    /// Smallest separation between the two vehicles, if there are two.
    pub min_separation: Option<f64>,
}

impl RunSummary {
    pub fn primary_metrics(&self) -> &MetricsSummary {
        &self.metrics[self.primary_vehicle]
    }

    pub fn has_event(&self, name: &str) -> bool {
        self.events.iter().any(|e| e.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<Record>,
    pub summary: RunSummary,
}

impl RunLog {
    pub fn header(cfg: &ScenarioConfig, controller: ControllerKind) -> Record {
        Record::Header {
            schema: SCHEMA_VERSION,
            controller,
            seed: cfg.seed,
            scenario: Box::new(cfg.clone()),
        }
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_records(&mut out, &self.records).expect("writing to memory");
        out
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Writes `run.jsonl` and `summary.json` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> SimResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| SimError::Io(format!("{}: {e}", dir.display())))?;
        let io = |p: &Path, e: std::io::Error| SimError::Io(format!("{}: {e}", p.display()));
        let log = dir.join("run.jsonl");
        let file = std::fs::File::create(&log).map_err(|e| io(&log, e))?;
        let mut w = std::io::BufWriter::new(file);
        write_records(&mut w, &self.records).map_err(|e| io(&log, e))?;
        w.flush().map_err(|e| io(&log, e))?;
        let sum = dir.join("summary.json");
        std::fs::write(&sum, self.summary_json()).map_err(|e| io(&sum, e))?;
        Ok(())
    }
}

pub fn write_records<W: Write>(w: &mut W, records: &[Record]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads every record of a JSON-lines log.
pub fn read_records(path: &Path) -> SimResult<Vec<Record>> {
    let file = std::fs::File::open(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| SimError::Log(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    match out.first() {
        Some(Record::Header { schema, .. }) if *schema == SCHEMA_VERSION => Ok(out),
        Some(Record::Header { schema, .. }) => Err(SimError::Log(format!("unsupported log schema {schema}"))),
        _ => Err(SimError::Log("log does not start with a header record".into())),
    }
}
