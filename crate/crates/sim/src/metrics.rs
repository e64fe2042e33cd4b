//! Error statistics reported per vehicle: RMSE and the RMS deviation of
//! the error about its mean.

use serde::{Deserialize, Serialize};

use crate::log::{Record, RunLog};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorStats {
    pub rmse: f64,
    pub rmsd: f64,
}

impl ErrorStats {
    pub fn of(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let ms = samples.iter().map(|e| e * e).sum::<f64>() / n;
        let var = samples.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        Self {
            rmse: ms.sqrt(),
            rmsd: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub vehicle: usize,
    pub name: String,
    pub samples: usize,
    /// m/s
    pub speed: ErrorStats,
    /// degrees
    pub heading: ErrorStats,
    /// rad/s
    pub yaw_rate: ErrorStats,
    /// m
    pub position: ErrorStats,
}

/// Metrics of every vehicle from the tick records of a log.
pub fn compute_metrics(log: &RunLog) -> Vec<MetricsSummary> {
    metrics_from_records(&log.records, &vehicle_names(&log.records))
}

fn vehicle_names(records: &[Record]) -> Vec<String> {
    match records.first() {
        Some(Record::Header { scenario, .. }) => scenario.vehicles.iter().map(|v| v.name.clone()).collect(),
        _ => Vec::new(),
    }
}

pub fn metrics_from_records(records: &[Record], names: &[String]) -> Vec<MetricsSummary> {
    let mut channels: Vec<[Vec<f64>; 4]> = vec![Default::default(); names.len()];
    for r in records {
        if let Record::Tick { vehicle, errors, .. } = r {
            if let Some(c) = channels.get_mut(*vehicle) {
                c[0].push(errors.speed);
                c[1].push(errors.heading_deg);
                c[2].push(errors.yaw_rate);
                c[3].push(errors.position);
            }
        }
    }
    channels
        .iter()
        .zip(names)
        .enumerate()
        .map(|(vehicle, (c, name))| MetricsSummary {
            vehicle,
            name: name.clone(),
            samples: c[0].len(),
            speed: ErrorStats::of(&c[0]),
            heading: ErrorStats::of(&c[1]),
            yaw_rate: ErrorStats::of(&c[2]),
            position: ErrorStats::of(&c[3]),
        })
        .collect()
}
