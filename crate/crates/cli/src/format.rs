//! The on-disk matrix format: a small JSON document with explicit
//! `[re, im]` pairs.
//!
//! ```json
//! {
//!   "rows": 2,
//!   "cols": 2,
//!   "kind": "hermitian",
//!   "data": [[1.0e0, 0.0e0], [0.0e0, -1.0e0], ...]
//! }
//! ```
//!
//! `data` is row-major, `kind` is optional (`hermitian`, `psd` or
//! `general`) and is validated on load. Numbers are written with 17
//! significant digits, which reproduces every IEEE double exactly, so a
//! write/read cycle is bit-lossless.

use std::fmt::Write as _;
use std::path::Path;

use matperturb::{eigh, ComplexMatrix, HermitianMatrix, Tolerances, C64};
use serde::Deserialize;
use thiserror::Error;

/// Guard against absurd allocations when parsing untrusted files.
pub const MAX_DIM: usize = 1024;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("rows and cols must be positive")]
    ZeroDimension,

    #[error("dimension {0} exceeds the supported maximum {MAX_DIM}")]
    DimensionTooLarge(usize),

    #[error("expected {expected} entries, found {got}")]
    CountMismatch { expected: usize, got: usize },

    #[error("entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("unknown kind {0:?} (expected hermitian, psd or general)")]
    UnknownKind(String),

    #[error("matrix does not satisfy its declared kind: {0}")]
    KindCheck(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Declared structure of a stored matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Hermitian,
    Psd,
    General,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Hermitian => "hermitian",
            MatrixKind::Psd => "psd",
            MatrixKind::General => "general",
        }
    }

    fn parse(s: &str) -> Result<Self, FormatError> {
        match s {
            "hermitian" => Ok(MatrixKind::Hermitian),
            "psd" => Ok(MatrixKind::Psd),
            "general" => Ok(MatrixKind::General),
            other => Err(FormatError::UnknownKind(other.to_string())),
        }
    }
}

/// In-memory form of a matrix document.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub kind: Option<MatrixKind>,
    /// Row-major `(re, im)` pairs.
    pub data: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixFile {
    rows: usize,
    cols: usize,
    #[serde(default)]
    kind: Option<String>,
    data: Vec<(f64, f64)>,
}

/// Format one double with 17 significant digits. This is enough to
/// reproduce the value exactly on read-back.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl MatrixFile {
    /// Parse and validate a matrix document.
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let raw: RawMatrixFile = serde_json::from_str(text)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(FormatError::ZeroDimension);
        }
        if raw.rows > MAX_DIM || raw.cols > MAX_DIM {
            return Err(FormatError::DimensionTooLarge(raw.rows.max(raw.cols)));
        }
        let expected = raw.rows * raw.cols;
        if raw.data.len() != expected {
            return Err(FormatError::CountMismatch {
                expected,
                got: raw.data.len(),
            });
        }
        for (index, &(re, im)) in raw.data.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(FormatError::NonFinite { index });
            }
        }
        let kind = raw.kind.as_deref().map(MatrixKind::parse).transpose()?;
        Ok(MatrixFile {
            rows: raw.rows,
            cols: raw.cols,
            kind,
            data: raw.data,
        })
    }

    /// Serialize with 17-significant-digit numbers.
    pub fn to_json_string(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"rows\": {},", self.rows);
        let _ = writeln!(out, "  \"cols\": {},", self.cols);
        if let Some(kind) = self.kind {
            let _ = writeln!(out, "  \"kind\": \"{}\",", kind.as_str());
        }
        out.push_str("  \"data\": [\n");
        for (i, (re, im)) in self.data.iter().enumerate() {
            let sep = if i + 1 == self.data.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}, {}]{}", fmt_f64(*re), fmt_f64(*im), sep);
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_matrix(m: &ComplexMatrix, kind: Option<MatrixKind>) -> Self {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m.get(i, j);
                data.push((z.re, z.im));
            }
        }
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            kind,
            data,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, FormatError> {
        let entries: Vec<C64> = self.data.iter().map(|&(re, im)| C64::new(re, im)).collect();
        ComplexMatrix::new(self.rows, self.cols, entries)
            .map_err(|e| FormatError::KindCheck(e.to_string()))
    }

    /// Check the declared kind against the entries: `hermitian` must be
    /// Hermitian within tolerance, `psd` additionally needs a
    /// nonnegative spectrum.
    pub fn validate_kind(&self, tol: &Tolerances) -> Result<(), FormatError> {
        let Some(kind) = self.kind else {
            return Ok(());
        };
        if kind == MatrixKind::General {
            return Ok(());
        }
        let m = self.to_matrix()?;
        let herm = HermitianMatrix::new(m, tol.hermitian_tol)
            .map_err(|e| FormatError::KindCheck(e.to_string()))?;
        if kind == MatrixKind::Psd {
            let dec = eigh(&herm, tol).map_err(|e| FormatError::KindCheck(e.to_string()))?;
            let min = dec.eigenvalues().last().copied().unwrap_or(0.0);
            let scale = dec
                .eigenvalues()
                .iter()
                .fold(0.0f64, |m, a| m.max(a.abs()));
            if min < -tol.psd_tol * (1.0 + scale) {
                return Err(FormatError::KindCheck(format!(
                    "declared psd but has eigenvalue {min:.6e}"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Parse a comma-separated list of scales (e.g. `0.1,0.05,0.025`).
/// Values must be finite; ordering and count rules are enforced by the
/// verification layer.
pub fn parse_scales(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (i, piece) in text.split(',').enumerate() {
        let trimmed = piece.trim();
        if trimmed.is_empty() {
            return Err(format!("empty scale at position {i}"));
        }
        let value: f64 = trimmed
            .parse()
            .map_err(|e| format!("bad scale {trimmed:?} at position {i}: {e}"))?;
        if !value.is_finite() {
            return Err(format!("scale at position {i} is not finite"));
        }
        out.push(value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip_is_bit_exact() {
        let mf = MatrixFile {
            rows: 2,
            cols: 2,
            kind: Some(MatrixKind::General),
            data: vec![(0.1, -0.3), (1.0 / 3.0, 0.0), (1e-300, 2.5e17), (-0.0, 5.0)],
        };
        let text = mf.to_json_string();
        let back = MatrixFile::parse(&text).unwrap();
        assert_eq!(mf.rows, back.rows);
        assert_eq!(mf.kind, back.kind);
        for (a, b) in mf.data.iter().zip(&back.data) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let text = r#"{"rows": 2, "cols": 2, "data": [[1.0, 0.0]]}"#;
        assert!(matches!(
            MatrixFile::parse(text),
            Err(FormatError::CountMismatch { expected: 4, got: 1 })
        ));
    }

    #[test]
    fn oversized_header_is_rejected_before_allocation() {
        let text = r#"{"rows": 99999999, "cols": 99999999, "data": []}"#;
        assert!(matches!(
            MatrixFile::parse(text),
            Err(FormatError::DimensionTooLarge(_))
        ));
    }

    #[test]
    fn non_finite_literals_are_rejected() {
        // an overflowing float literal must not come through as infinity,
        // whether the JSON layer or the finiteness scan catches it
        let text = r#"{"rows": 1, "cols": 1, "data": [[1e999, 0.0]]}"#;
        assert!(matches!(
            MatrixFile::parse(text),
            Err(FormatError::NonFinite { index: 0 } | FormatError::Json(_))
        ));
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = r#"{"rows": 1, "cols": 1, "kind": "sparse", "data": [[1.0, 0.0]]}"#;
        assert!(matches!(
            MatrixFile::parse(text),
            Err(FormatError::UnknownKind(_))
        ));
    }

    #[test]
    fn kind_validation() {
        let tol = Tolerances::default();
        let hermitian = r#"{"rows": 2, "cols": 2, "kind": "hermitian",
            "data": [[1.0, 0.0], [0.0, 0.5], [0.0, -0.5], [2.0, 0.0]]}"#;
        MatrixFile::parse(hermitian)
            .unwrap()
            .validate_kind(&tol)
            .unwrap();

        let not_hermitian = r#"{"rows": 2, "cols": 2, "kind": "hermitian",
            "data": [[1.0, 0.0], [0.5, 0.0], [0.0, 0.0], [2.0, 0.0]]}"#;
        assert!(MatrixFile::parse(not_hermitian)
            .unwrap()
            .validate_kind(&tol)
            .is_err());

        let indefinite = r#"{"rows": 1, "cols": 1, "kind": "psd", "data": [[-1.0, 0.0]]}"#;
        assert!(MatrixFile::parse(indefinite)
            .unwrap()
            .validate_kind(&tol)
            .is_err());
    }

    #[test]
    fn scales_parsing() {
        assert_eq!(parse_scales("0.1,0.05").unwrap(), vec![0.1, 0.05]);
        assert!(parse_scales("0.1,,0.05").is_err());
        assert!(parse_scales("abc").is_err());
        assert!(parse_scales("inf").is_err());
    }
}
