use std::path::Path;

use super::persist::atomic_write;
use crate::error::{Error, Result};
use crate::evaluation::MetricReport;
use crate::training::TrainReport;

pub const METRIC_HEADER: [&str; 6] = ["model", "Nx", "l1_mean", "l1_std", "dis_mean", "dis_std"];
pub const TRAIN_HEADER: [&str; 3] = ["epoch", "train_loss", "val_loss"];

/// 17 significant digits, enough to recover every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a header and rows as CSV text.
pub fn csv_string<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).map_err(|e| Error::Usage(e.to_string()))?;
    for r in rows {
        w.write_record(r.iter().map(AsRef::as_ref)).map_err(|e| Error::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Usage(e.to_string()))
}

pub fn metric_rows(reports: &[MetricReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            let (l1m, l1s) = r.l1_mean_std();
            let (dm, ds) = r.dis_mean_std();
            vec![
                r.model.to_string(),
                r.nx.to_string(),
                fmt_f64(l1m),
                fmt_f64(l1s),
                fmt_f64(dm),
                fmt_f64(ds),
            ]
        })
        .collect()
}

/// One row per report: model, Nx, L1 and Dis mean and population std.
pub fn emit_metrics_csv(reports: &[MetricReport], path: &Path) -> Result<()> {
    atomic_write(path, csv_string(&METRIC_HEADER, &metric_rows(reports))?.as_bytes())
}

/// Per-epoch losses; the validation column is empty when there was none.
pub fn emit_train_csv(report: &TrainReport, path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .train_loss
        .iter()
        .enumerate()
        .map(|(e, l)| {
            vec![
                e.to_string(),
                fmt_f64(*l),
                report.val_loss.get(e).map(|v| fmt_f64(*v)).unwrap_or_default(),
            ]
        })
        .collect();
    atomic_write(path, csv_string(&TRAIN_HEADER, &rows)?.as_bytes())
}
