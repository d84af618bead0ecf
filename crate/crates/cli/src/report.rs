//! Machine-readable run reports.
//!
//! A report echoes the complete configuration (every tolerance, seed
//! and flag that influenced the run), carries result matrices as
//! embedded matrix documents, and ends with a pass/fail summary.
//! Identical invocations produce byte-identical reports once the
//! timestamp is suppressed with `--no-timestamp`.

use std::collections::BTreeMap;
use std::path::Path;

use matperturb::{OrderFitReport, Tolerances};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::format::{MatrixFile, MatrixKind};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A result matrix embedded under a stable name.
#[derive(Serialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: Box<RawValue>,
}

impl NamedMatrix {
    pub fn new(name: &str, file: &MatrixFile) -> Self {
        let raw = RawValue::from_string(file.to_json_string())
            .expect("matrix serializer emits valid JSON");
        NamedMatrix {
            name: name.to_string(),
            matrix: raw,
        }
    }

    pub fn from_matrix(
        name: &str,
        m: &matperturb::ComplexMatrix,
        kind: Option<MatrixKind>,
    ) -> Self {
        Self::new(name, &MatrixFile::from_matrix(m, kind))
    }
}

/// Full configuration echo; everything needed to reproduce the run.
#[derive(Serialize)]
pub struct ConfigEcho {
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_from_env: Option<bool>,
    pub flags: BTreeMap<String, String>,
}

#[derive(Serialize)]
pub struct Summary {
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Serialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub results: Vec<NamedMatrix>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub order_fits: Vec<OrderFitReport>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(command: String, config: ConfigEcho, with_timestamp: bool) -> Self {
        let timestamp = with_timestamp.then(|| {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            format!("{secs}")
        });
        RunReport {
            version: ARTIFACT_VERSION.to_string(),
            command,
            timestamp,
            config,
            results: Vec::new(),
            order_fits: Vec::new(),
            summary: Summary {
                pass: true,
                notes: Vec::new(),
                metrics: BTreeMap::new(),
            },
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn write(&self, out: Option<&Path>) -> std::io::Result<()> {
        let text = self.to_json_string();
        match out {
            Some(path) => std::fs::write(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Write the `(scale, error, trial)` table used for plotting.
pub fn write_error_csv(path: &Path, reports: &[OrderFitReport]) -> std::io::Result<()> {
    let mut out = String::from("scale,error,trial\n");
    for (trial, report) in reports.iter().enumerate() {
        for (scale, error) in report.scales.iter().zip(&report.errors) {
            out.push_str(&format!(
                "{},{},{trial}\n",
                crate::format::fmt_f64(*scale),
                crate::format::fmt_f64(*error)
            ));
        }
    }
    std::fs::write(path, out)
}
