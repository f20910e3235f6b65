//! `{ "nodes": n+1, "control_points": [[cx, cy, cr], ...] }` documents.
//!
//! Numbers are written in scientific notation with 17 significant digits so
//! every coefficient survives a round trip bit for bit.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::SplineCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize, PartialEq)]
pub struct SplineDocument {
    pub nodes: usize,
    pub control_points: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct RawDocument {
    nodes: usize,
    control_points: Vec<[Box<RawValue>; 3]>,
}

fn raw_number(v: f64) -> Box<RawValue> {
    // {:e} never produces an invalid JSON number for finite input
    RawValue::from_string(format!("{v:.16e}")).expect("finite float formats as JSON")
}

impl SplineDocument {
    pub fn into_curve(self) -> Result<SplineCurve> {
        let expected = self.nodes + 2;
        if self.control_points.len() != expected {
            return Err(Error::ControlPointCount {
                nodes: self.nodes,
                expected,
                got: self.control_points.len(),
            });
        }
        SplineCurve::new(self.control_points)
    }
}

impl SplineCurve {
    pub fn to_json(&self) -> Result<String> {
        if let Some(bad) = self.to_flat().into_iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "cannot serialize non-finite coefficient {bad}"
            )));
        }
        let doc = RawDocument {
            nodes: self.node_count(),
            control_points: self
                .control_points()
                .iter()
                .map(|c| [raw_number(c[0]), raw_number(c[1]), raw_number(c[2])])
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SplineDocument>(text)?.into_curve()
    }
}
