//! Offline certification: re-runs reachability over the estimates stored in
//! a run log with a chosen horizon and confidence.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use usv_core::estimation::DisturbanceEstimate;
use usv_core::reach::{build_closed_loop_graph, certify, CertifyInput, UnsafeRegion};
use usv_core::vehicle::ClosedLoopModel;

use crate::error::{SimError, SimResult};
use crate::log::{read_records, write_records, Record};

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineReport {
    pub output: PathBuf,
    pub estimates: usize,
    pub certified: usize,
    pub unsafe_count: usize,
    /// Estimates whose policy has no graph form (PID).
    pub skipped: usize,
}

/// Output path next to the input: `run.jsonl` becomes `run.certify.jsonl`.
pub fn output_path(log: &Path) -> PathBuf {
    let stem = log.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    log.with_file_name(format!("{stem}.certify.jsonl"))
}

/// Certifies every estimate record in `log`, writing one certify record per
/// estimate to [`output_path`]. The unsafe region comes from the logged
/// scenario.
pub fn certify_log(log: &Path, horizon: usize, gamma: f64) -> SimResult<OfflineReport> {
    if horizon == 0 {
        return Err(SimError::Config("horizon must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(SimError::Config("gamma must be positive".into()));
    }
    let records = read_records(log)?;
    let region = match records.first() {
        Some(Record::Header { scenario, .. }) => scenario
            .certify
            .as_ref()
            .map_or_else(UnsafeRegion::empty, |c| c.unsafe_region.clone()),
        _ => UnsafeRegion::empty(),
    };
    let model = ClosedLoopModel::default();
    let mut out = vec![records[0].clone()];
    let mut report = OfflineReport {
        output: output_path(log),
        estimates: 0,
        certified: 0,
        unsafe_count: 0,
        skipped: 0,
    };
    for r in &records {
        let Record::Estimate {
            t,
            vehicle,
            x_hat,
            q_diag,
            mu_hat,
            w_hat_diag,
            delta_mu,
            delta_sigma,
            policy,
            dt,
            ..
        } = r
        else {
            continue;
        };
        report.estimates += 1;
        let Ok(graph) = build_closed_loop_graph(policy, &model, *dt) else {
            report.skipped += 1;
            continue;
        };
        let v = |s: &[f64]| DVector::from_column_slice(s);
        let input = CertifyInput {
            x_hat: v(x_hat),
            q: DMatrix::from_diagonal(&v(q_diag)),
            disturbance: DisturbanceEstimate {
                mu_hat: v(mu_hat),
                w_hat_diag: v(w_hat_diag),
                delta_mu: v(delta_mu),
                delta_sigma: v(delta_sigma),
            },
        };
        let cert = certify(&graph, &input, horizon, gamma, &region)?;
        report.certified += 1;
        if !cert.safe {
            report.unsafe_count += 1;
        }
        out.push(crate::runner::certify_record(*t, *vehicle, horizon, gamma, &cert));
    }
    let io = |e: std::io::Error| SimError::Io(format!("{}: {e}", report.output.display()));
    let file = std::fs::File::create(&report.output).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_records(&mut w, &out).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(report)
}
