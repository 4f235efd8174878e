//! CSV interchange formats.
//!
//! - Tabular data: header row, one label column (by name), all other
//!   columns numeric features.
//! - Trajectories: columns `t, x1..xd`.
//! - Training metrics: `update_index,loss` and
//!   `epoch,train_acc,test_acc,seconds`.
//!
//! Floats are written with Rust's shortest-round-trip formatting, so reading
//! back reproduces values bit-exactly.

use std::path::Path;

use crate::dynamics::Trajectory;
use crate::encoder::RawDataset;
use crate::error::{Error, Result};
use crate::trainer::TrainReport;

pub fn read_raw_csv(path: &Path, label_column: &str) -> Result<RawDataset> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::Parse(format!(
                "label column {label_column:?} not found in header {headers:?}"
            ))
        })?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut row = Vec::with_capacity(record.len().saturating_sub(1));
        for (col, field) in record.iter().enumerate() {
            if col == label_idx {
                labels.push(field.parse::<u32>().map_err(|_| {
                    Error::Parse(format!("row {row_idx}: label {field:?} is not an integer"))
                })?);
            } else {
                row.push(field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "row {row_idx}, column {:?}: {field:?} is not numeric",
                        headers.get(col).unwrap_or("?")
                    ))
                })?);
            }
        }
        features.push(row);
    }
    RawDataset::new(features, labels)
}

pub fn write_raw_csv(path: &Path, data: &RawDataset, label_column: &str) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let mut header: Vec<String> = (0..data.dim()).map(|i| format!("f{i}")).collect();
    header.push(label_column.to_string());
    writer
        .write_record(&header)
        .map_err(|e| Error::Parse(e.to_string()))?;
    for (row, &label) in data.features().iter().zip(data.labels()) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(label.to_string());
        writer
            .write_record(&record)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut values = record.iter().map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {row_idx}: {f:?} is not numeric")))
        });
        let t = values
            .next()
            .ok_or_else(|| Error::Parse(format!("row {row_idx}: empty record")))??;
        times.push(t);
        states.push(values.collect::<Result<Vec<f64>>>()?);
    }
    Trajectory::new(times, states)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let d = traj.states.first().map(|s| s.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    writer
        .write_record(&header)
        .map_err(|e| Error::Parse(e.to_string()))?;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut record = vec![t.to_string()];
        record.extend(state.iter().map(|v| v.to_string()));
        writer
            .write_record(&record)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// `update_index,loss`, one row per coordinate update.
pub fn write_updates_csv(path: &Path, report: &TrainReport) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    writer
        .write_record(["update_index", "loss"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for (i, l) in report.loss_trace.iter().enumerate() {
        writer
            .write_record([i.to_string(), l.to_string()])
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// `epoch,train_acc,test_acc,seconds`. Timing is informational and excluded
/// from the bit-identical reproducibility contract.
pub fn write_epochs_csv(path: &Path, report: &TrainReport) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    writer
        .write_record(["epoch", "train_acc", "test_acc", "seconds"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for m in &report.epochs {
        writer
            .write_record([
                m.epoch.to_string(),
                m.train_accuracy.to_string(),
                m.test_accuracy.map(|a| a.to_string()).unwrap_or_default(),
                m.seconds.to_string(),
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
