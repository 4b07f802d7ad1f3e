//! Column-oriented trajectory logs, CSV persistence and run metrics.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Fixed-schema table of samples; the first column is time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryLog {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Writes a `#`-prefixed provenance line, the header row and the rows.
    /// Values use the shortest representation that parses back exactly.
    pub fn write_csv(&self, mut out: impl Write, provenance: &str) -> Result<(), SimError> {
        writeln!(out, "# {provenance}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path, provenance: &str) -> Result<(), SimError> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f, provenance)
    }

    pub fn read_csv(input: impl Read) -> Result<Self, SimError> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| SimError::InvalidConfig(format!("bad number '{v}': {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// Summary of one run; fields not meaningful for a scenario are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Metrics {
    pub scenario: String,
    pub steps: usize,
    pub simulated_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_position_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_attitude_error_deg: Option<f64>,
    /// First time after which the guard stays within 2% of the initial offset band.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settling_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturated_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude_change: Option<f64>,
    /// Fraction of the wingspan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wingtip_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aero_rms_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aero_max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observer_max_error: Option<f64>,
    pub thresholds_met: bool,
}

/// Root mean square of a sequence; zero when empty.
pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn column_lookup() {
        let mut log = TrajectoryLog::new(["time", "x"]);
        log.push(vec![0.0, 1.0]);
        log.push(vec![0.1, 2.0]);
        assert_eq!(log.column("x").unwrap(), vec![1.0, 2.0]);
        assert!(log.column("y").is_none());
    }

    #[test]
    fn rms_of_constant() {
        assert_eq!(rms([2.0, -2.0, 2.0]), 2.0);
        assert_eq!(rms(std::iter::empty()), 0.0);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..20)) {
            let mut log = TrajectoryLog::new(["time", "a,b", "c\"d"]);
            for r in rows {
                log.push(r);
            }
            let mut buf = Vec::new();
            log.write_csv(&mut buf, "flapsim test").unwrap();
            let back = TrajectoryLog::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, log);
        }
    }
}
