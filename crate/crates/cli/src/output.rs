//! CSV writers.

use std::path::Path;

use nlpml::metrics::ErrorReport;
use nlpml::Complex64;

use crate::CliError;

/// `x,re_q,im_q[,ref]`, one row per unknown.
pub fn write_snapshot(path: &Path, x: &[f64], q: &[Complex64], reference: Option<&[f64]>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    if reference.is_some() {
        w.write_record(["x", "re_q", "im_q", "ref"])?;
    } else {
        w.write_record(["x", "re_q", "im_q"])?;
    }
    for (i, (x, q)) in x.iter().zip(q).enumerate() {
        let mut row = vec![x.to_string(), q.re.to_string(), q.im.to_string()];
        if let Some(r) = reference {
            row.push(r[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}

/// `h,delta,error,order`; the order is empty on the first row of each sweep.
pub fn write_table(path: &Path, report: &ErrorReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h", "delta", "error", "order"])?;
    for r in &report.rows {
        let order = r.order.map(|o| o.to_string()).unwrap_or_default();
        w.write_record([r.h.to_string(), r.delta.to_string(), r.error.to_string(), order])?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}
