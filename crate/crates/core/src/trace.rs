//! Energy trace as CSV: `iter,f_total,f_fid_s,f_fid_r,f_curv`, one row per
//! iteration starting with the baseline at `iter = 0`.

use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    iter: usize,
    f_total: f64,
    f_fid_s: f64,
    f_fid_r: f64,
    f_curv: f64,
}

pub fn to_csv(trace: &[EnergyBreakdown]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (iter, e) in trace.iter().enumerate() {
        w.serialize(Row {
            iter,
            f_total: e.f_total,
            f_fid_s: e.f_fidelity_s,
            f_fid_r: e.f_fidelity_r,
            f_curv: e.f_curvature,
        })?;
    }
    if trace.is_empty() {
        w.write_record(["iter", "f_total", "f_fid_s", "f_fid_r", "f_curv"])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<EnergyBreakdown>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(EnergyBreakdown {
                f_total: row.f_total,
                f_fidelity_s: row.f_fid_s,
                f_fidelity_r: row.f_fid_r,
                f_curvature: row.f_curv,
            })
        })
        .collect()
}
