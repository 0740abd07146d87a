//! Plot-ready aggregates of `metrics.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::runner::{METHOD_ELIRL, METHOD_ELIRL_RE, METRICS_HEADER};
use crate::error::{Error, Result};
use crate::eval::{reverse_transfer, MetricRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub checkpoint: usize,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseTransferRow {
    pub task_order_index: usize,
    pub variant: String,
    pub mean_delta: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Mean and standard error of the mean (sample standard deviation over
/// `sqrt(n)`; zero for a single value).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(METRICS_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()) });
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<MetricRecord>().enumerate() {
        let record = row.map_err(|e| Error::Parse {
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Per-trial mean over tasks first, then mean ± SE across trials, for each
/// `(checkpoint, method, metric)`.
pub fn summarize(records: &[MetricRecord]) -> Vec<SummaryRow> {
    // (checkpoint, method, metric) -> trial -> values
    let mut groups: BTreeMap<(usize, String, &str), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in records {
        for (metric, value) in [("reward_diff", r.reward_diff), ("value_diff", r.value_diff), ("train_time_s", r.train_time_s)] {
            groups.entry((r.checkpoint, r.method.clone(), metric)).or_default().entry(r.trial).or_default().push(value);
        }
    }
    groups
        .into_iter()
        .map(|((checkpoint, method, metric), by_trial)| {
            let trial_means: Vec<f64> = by_trial.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
            let (mean, std_error) = mean_and_se(&trial_means);
            SummaryRow { checkpoint, method, metric: metric.to_string(), mean, std_error, n: trial_means.len() }
        })
        .collect()
}

/// Per-trial reverse-transfer deltas for `variant`, keyed by task order
/// index. A task's first-seen error is its stale-coefficient error at the
/// first checkpoint after it was learned; the final error is the
/// variant's error at the last checkpoint.
pub fn reverse_transfer_deltas(records: &[MetricRecord], variant: &str) -> Result<BTreeMap<usize, Vec<(usize, f64)>>> {
    let mut by_trial: BTreeMap<usize, Vec<&MetricRecord>> = BTreeMap::new();
    for r in records {
        by_trial.entry(r.trial).or_default().push(r);
    }
    let mut out = BTreeMap::new();
    for (trial, rows) in by_trial {
        let Some(last) = rows.iter().map(|r| r.checkpoint).max() else { continue };
        let mut first = BTreeMap::new();
        let mut first_ckpt: BTreeMap<usize, usize> = BTreeMap::new();
        let mut fin = BTreeMap::new();
        let mut order_index = BTreeMap::new();
        for r in &rows {
            order_index.insert(r.task_id, r.task_order_index);
            if r.method == METHOD_ELIRL && r.checkpoint > r.task_order_index {
                let c = first_ckpt.entry(r.task_id).or_insert(r.checkpoint);
                if r.checkpoint <= *c {
                    *c = r.checkpoint;
                    first.insert(r.task_id, r.reward_diff);
                }
            }
            if r.method == variant && r.checkpoint == last {
                fin.insert(r.task_id, r.reward_diff);
            }
        }
        if fin.is_empty() {
            continue;
        }
        let mut order: Vec<usize> = fin.keys().copied().collect();
        order.sort_by_key(|t| order_index[t]);
        let deltas = reverse_transfer(&first, &fin, &order).map_err(|e| Error::Trial { trial, task: 0, source: Box::new(e) })?;
        out.insert(trial, deltas.into_iter().map(|(t, d)| (order_index[&t], d)).collect());
    }
    Ok(out)
}

pub fn reverse_transfer_summary(records: &[MetricRecord]) -> Result<Vec<ReverseTransferRow>> {
    let mut rows = Vec::new();
    for variant in [METHOD_ELIRL, METHOD_ELIRL_RE] {
        let mut by_index: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for deltas in reverse_transfer_deltas(records, variant)?.into_values() {
            for (idx, d) in deltas {
                by_index.entry(idx).or_default().push(d);
            }
        }
        for (task_order_index, values) in by_index {
            let (mean_delta, std_error) = mean_and_se(&values);
            rows.push(ReverseTransferRow { task_order_index, variant: variant.to_string(), mean_delta, std_error, n: values.len() });
        }
    }
    Ok(rows)
}

/// Write `summary.csv` and `reverse_transfer.csv` into `out_dir`.
pub fn emit_plot_data(metrics: &Path, out_dir: &Path) -> Result<()> {
    let records = read_metrics(metrics)?;
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    for row in summarize(&records) {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out_dir.join("reverse_transfer.csv"))?;
    for row in reverse_transfer_summary(&records)? {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
