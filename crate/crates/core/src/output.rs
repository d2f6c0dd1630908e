//! CSV writers for every result table and a stable hash of a configuration.

use std::io::Write;

use sha2::{Digest, Sha256};

use crate::game::TrajectoryRow;
use crate::model::{ConfigDocument, SimReport, SteadyStateSolution};
use crate::reservation::GridRow;
use crate::sim::{ComparisonRow, EventRecord};

/// Hex SHA-256 of the configuration's canonical JSON (keys sorted).
pub fn config_hash(doc: &ConfigDocument) -> String {
    let value = serde_json::to_value(doc).expect("config documents serialize");
    let canonical = serde_json::to_string(&value).expect("values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["round", "player", "compute", "storage", "share_compute", "share_storage", "utility"])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per state: `n_l_1..n_l_K, n_g_1..n_g_K, pi`.
pub fn write_states_csv<W: Write>(out: W, solution: &SteadyStateSolution, classes: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=classes).map(|k| format!("n_l_{k}")).collect();
    header.extend((1..=classes).map(|k| format!("n_g_{k}")));
    header.push("pi".into());
    w.write_record(&header)?;
    for (s, p) in solution.states.iter().zip(&solution.probabilities) {
        let mut rec: Vec<String> = s.local_counts.iter().map(u32::to_string).collect();
        rec.extend(s.migrated_counts.iter().map(u32::to_string));
        rec.push(format!("{p:e}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_csv<W: Write>(out: W, rows: &[GridRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "compute_reserved",
        "storage_reserved",
        "states",
        "blocking_rate",
        "dropping_rate",
        "blocking_probability",
        "dropping_probability",
        "feasible",
    ])?;
    for r in rows {
        w.write_record([
            r.compute_reserved.to_string(),
            r.storage_reserved.to_string(),
            r.states.to_string(),
            format!("{:e}", r.blocking_rate),
            format!("{:e}", r.dropping_rate),
            format!("{:e}", r.blocking_probability),
            format!("{:e}", r.dropping_probability),
            r.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: `config_hash, seed, replications, metric, mean, half_width`.
pub fn write_sim_report_csv<W: Write>(out: W, report: &SimReport, config_hash: &str) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["config_hash", "seed", "replications", "metric", "mean", "half_width"])?;
    let mut metrics = vec![
        ("blocking_rate".to_string(), report.blocking_rate),
        ("dropping_rate".to_string(), report.dropping_rate),
        ("blocking_probability".to_string(), report.blocking_probability),
        ("dropping_probability".to_string(), report.dropping_probability),
        ("compute_utilization".to_string(), report.compute_utilization),
        ("storage_utilization".to_string(), report.storage_utilization),
    ];
    for (k, e) in report.mean_occupancy.iter().enumerate() {
        metrics.push((format!("mean_occupancy_{k}"), *e));
    }
    let seed = report.seed.to_string();
    let reps = report.replications.to_string();
    for (name, e) in metrics {
        w.write_record([config_hash, &seed, &reps, &name, &format!("{:e}", e.mean), &format!("{:e}", e.half_width)])?;
    }
    let s = report.scenarios;
    for (name, n) in [
        ("inter_cloudlet", s.inter_cloudlet),
        ("intra_cloudlet_handoff", s.intra_cloudlet_handoff),
        ("to_vehicular_cloud", s.to_vehicular_cloud),
        ("to_central_cloud", s.to_central_cloud),
    ] {
        w.write_record([config_hash, &seed, &reps, &format!("scenario_{name}"), &n.to_string(), "0"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events_csv<W: Write>(out: W, events: &[EventRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "kind", "class", "outcome", "cloudlet", "vehicle_id"])?;
    for e in events {
        w.write_record([
            format!("{:.9}", e.time),
            e.kind.as_str().to_string(),
            e.class_index.to_string(),
            e.outcome.as_str().to_string(),
            e.cloudlet.to_string(),
            e.vehicle_id.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(out: W, rows: &[ComparisonRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "analytic", "sim_mean", "sim_half_width", "within_ci"])?;
    for r in rows {
        w.write_record([
            r.metric.clone(),
            format!("{:e}", r.analytic),
            format!("{:e}", r.simulated.mean),
            format!("{:e}", r.simulated.half_width),
            r.within_ci.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
