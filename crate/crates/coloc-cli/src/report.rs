//! The analysis report schema.
//!
//! Reports are versioned; parsers accept any report whose major schema
//! version matches their own and reject everything else. Serialization is
//! deterministic for fixed content (field order is fixed, floats use the
//! shortest round-trip representation), so identical analyses produce
//! byte-identical JSON once timestamps are disabled.

use serde::{Deserialize, Serialize};

use coloc::classical::MandersPair;
use coloc::permute::PermReport;
use coloc::scan::ScanResult;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Replicate vectors above this length are dropped from reports.
pub const MAX_STORED_REPLICATES: usize = 10_000;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: ConfigEcho,
    pub inputs: Vec<InputProvenance>,
    pub results: Vec<StatisticResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub stat: String,
    pub perms: usize,
    pub block_size: usize,
    pub seed: u64,
    pub floor_policy: String,
    pub shuffle_target: String,
    pub p_value_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProvenance {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticResult {
    pub name: String,
    pub observed: f64,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manders: Option<MandersPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanResult>,
    pub null_histogram: Vec<HistogramBin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl StatisticResult {
    pub fn from_perm_report(
        report: &PermReport,
        manders: Option<MandersPair>,
        scan: Option<ScanResult>,
    ) -> Self {
        let replicates = if report.replicates.len() <= MAX_STORED_REPLICATES {
            Some(report.replicates.clone())
        } else {
            None
        };
        Self {
            name: report.statistic_name.clone(),
            observed: report.e0,
            p_value: report.p_value,
            manders,
            scan,
            null_histogram: histogram(&report.replicates, HISTOGRAM_BINS),
            replicates,
        }
    }
}

/// Equal-width histogram over the value range; the last bin's upper edge is
/// inclusive. Degenerate ranges collapse to a single bin.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let finite: Vec<f64> = values.iter().cloned().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Vec::new();
    }
    let min = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return vec![HistogramBin {
            lo: min,
            hi: max,
            count: finite.len(),
        }];
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let b = (((v - min) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            lo: min + b as f64 * width,
            hi: min + (b + 1) as f64 * width,
            count,
        })
        .collect()
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses a report, rejecting unknown major schema versions.
    pub fn from_json(text: &str) -> CliResult<Report> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Data(format!("malformed report JSON: {e}")))?;
        let version = value
            .get("schema_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| CliError::Data("report is missing schema_version".into()))?;
        let major = version.split('.').next().unwrap_or_default();
        let ours = SCHEMA_VERSION.split('.').next().unwrap_or_default();
        if major != ours {
            return Err(CliError::Data(format!(
                "unsupported report schema version {version} (this tool reads {ours}.x)"
            )));
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::Data(format!("malformed report JSON: {e}")))
    }

    /// Flat CSV summary: one row per statistic.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,observed,p_value,perms,block_size,seed\n");
        for r in &self.results {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.name,
                r.observed,
                r.p_value,
                self.config.perms,
                self.config.block_size,
                self.config.seed
            ));
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> Report {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: "0.1.0".to_string(),
            timestamp: None,
            config: ConfigEcho {
                stat: "pearson".into(),
                perms: 4,
                block_size: 2,
                seed: 9,
                floor_policy: "default".into(),
                shuffle_target: "x".into(),
                p_value_rule: "strict".into(),
            },
            inputs: vec![InputProvenance {
                role: "x".into(),
                path: "x.csv".into(),
                sha256: "00".into(),
                width: 4,
                height: 4,
            }],
            results: vec![StatisticResult {
                name: "pearson".into(),
                observed: 0.25,
                p_value: 0.5,
                manders: None,
                scan: None,
                null_histogram: histogram(&[0.1, 0.2, 0.3, 0.4], 2),
                replicates: Some(vec![0.1, 0.2, 0.3, 0.4]),
            }],
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let report = sample_report();
        let json = report.to_json();
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn rejects_unknown_major_version() {
        let mut report = sample_report();
        report.schema_version = "2.0.0".into();
        let err = Report::from_json(&report.to_json()).unwrap_err();
        assert!(err.message().contains("unsupported report schema version"));
    }

    #[test]
    fn histogram_counts_everything_once() {
        let values: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let bins = histogram(&values, 7);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 100);
        assert_eq!(bins.len(), 7);
    }

    #[test]
    fn histogram_degenerate_range() {
        let bins = histogram(&[2.0, 2.0, 2.0], 5);
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].count, 3);
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
