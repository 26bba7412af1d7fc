//! Prediction vs. measurement: relative model error and speedup ratios.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EcmPrediction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementRecord {
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<String>,
    pub source: String,
    /// Measured cycles per cache line, keyed by level name.
    pub per_level_cy: BTreeMap<String, f64>,
    /// Error column as published alongside the measurement, if any.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub published_error_pct: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSet {
    pub records: Vec<MeasurementRecord>,
}

impl MeasurementSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let set: MeasurementSet = toml::from_str(text).map_err(|e| Error::Parse {
            origin: origin.to_owned(),
            message: e.to_string(),
        })?;
        for r in &set.records {
            for (level, v) in &r.per_level_cy {
                if v.is_nan() || *v <= 0.0 {
                    return Err(Error::validation(
                        origin,
                        format!("{}.per_level_cy.{level}", r.kernel),
                        "measured cycles must be > 0",
                    ));
                }
            }
        }
        Ok(set)
    }

    pub fn find(&self, kernel: &str) -> Option<&MeasurementRecord> {
        self.records.iter().find(|r| r.kernel == kernel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelError {
    pub level: String,
    pub predicted: f64,
    pub measured: f64,
    /// `|measured - predicted| / predicted * 100`, full precision.
    pub rel_error_pct: f64,
}

impl LevelError {
    /// Whole percent, truncated.
    pub fn display_pct(&self) -> i64 {
        // tolerate representation error just below an integer (0.1/2 -> 4.999..)
        (self.rel_error_pct + 1e-9).trunc() as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kernel: String,
    pub per_level: Vec<LevelError>,
    /// Levels present on only one side.
    pub skipped: Vec<String>,
}

impl ErrorReport {
    pub fn level(&self, level: &str) -> Option<&LevelError> {
        self.per_level.iter().find(|e| e.level == level)
    }
}

/// Relative error per level. The denominator is always the prediction.
pub fn compare(pred: &EcmPrediction, meas: &MeasurementRecord) -> ErrorReport {
    let mut per_level = Vec::new();
    let mut skipped = Vec::new();
    for l in &pred.levels {
        match meas.per_level_cy.get(&l.level) {
            Some(&measured) => per_level.push(LevelError {
                level: l.level.clone(),
                predicted: l.cycles,
                measured,
                rel_error_pct: (measured - l.cycles).abs() / l.cycles * 100.0,
            }),
            None => {
                log::warn!("{}: no measurement for level {}", meas.kernel, l.level);
                skipped.push(l.level.clone());
            }
        }
    }
    for level in meas.per_level_cy.keys() {
        if !pred.levels.iter().any(|l| &l.level == level) {
            log::warn!("{}: measured level {level} is not predicted", meas.kernel);
            skipped.push(level.clone());
        }
    }
    ErrorReport {
        kernel: meas.kernel.clone(),
        per_level,
        skipped,
    }
}

/// How many times faster `b` is than `a` at `level`.
pub fn speedup(a: &EcmPrediction, b: &EcmPrediction, level: &str) -> Result<f64> {
    Ok(a.cycles(level)? / b.cycles(level)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LevelCycles;

    fn pred(c: &[f64]) -> EcmPrediction {
        let names = crate::machine::level_names(c.len() - 1);
        EcmPrediction {
            levels: names
                .into_iter()
                .zip(c)
                .map(|(level, &cycles)| LevelCycles { level, cycles })
                .collect(),
            t_core_cy: c[0],
        }
    }

    fn meas(c: &[(&str, f64)]) -> MeasurementRecord {
        MeasurementRecord {
            kernel: "k".into(),
            machine: None,
            source: "test".into(),
            per_level_cy: c.iter().map(|&(l, v)| (l.to_owned(), v)).collect(),
            published_error_pct: BTreeMap::new(),
        }
    }

    #[test]
    fn ddot_row() {
        let r = compare(
            &pred(&[2.0, 4.0, 8.0, 17.1]),
            &meas(&[("L1", 2.1), ("L2", 4.7), ("L3", 9.6), ("Mem", 19.4)]),
        );
        let pct: Vec<i64> = r.per_level.iter().map(LevelError::display_pct).collect();
        assert_eq!(pct, [5, 17, 20, 13]);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn denominator_is_prediction() {
        let r = compare(&pred(&[2.0, 6.0, 12.0, 28.8]), &meas(&[("L2", 8.0)]));
        let l2 = r.level("L2").unwrap();
        assert_eq!(l2.display_pct(), 33);
        assert!((l2.rel_error_pct - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.skipped, ["L1", "L3", "Mem"]);
    }

    #[test]
    fn identical_is_zero() {
        let p = pred(&[3.0, 8.0, 16.0, 37.7]);
        let m = meas(&[("L1", 3.0), ("L2", 8.0), ("L3", 16.0), ("Mem", 37.7)]);
        assert!(compare(&p, &m)
            .per_level
            .iter()
            .all(|e| e.rel_error_pct == 0.0));
    }

    #[test]
    fn unpredicted_level_skipped() {
        let r = compare(&pred(&[1.0, 2.0]), &meas(&[("L1", 1.0), ("L4", 9.0)]));
        assert_eq!(r.per_level.len(), 1);
        assert_eq!(r.skipped, ["Mem", "L4"]);
    }

    #[test]
    fn speedups() {
        let regular = pred(&[3.0, 8.0, 16.0, 37.7]);
        let nt = pred(&[3.0, 7.0, 11.0, 26.6]);
        assert!((speedup(&regular, &nt, "Mem").unwrap() - 1.417).abs() < 1e-3);
        assert_eq!(speedup(&regular, &regular, "L2").unwrap(), 1.0);
        assert!(speedup(&regular, &nt, "L9").is_err());
    }

    #[test]
    fn non_positive_measurement_rejected() {
        let text =
            "[[records]]\nkernel = \"x\"\nsource = \"s\"\n[records.per_level_cy]\nL1 = 0.0\n";
        assert!(MeasurementSet::from_toml_str(text, "t").is_err());
    }
}
