//! Curve-table ingestion: the built-in curves, optionally extended or
//! shadowed by a user table named on the command line or through the
//! `HEEGNER_CURVE_TABLE` environment variable.
//!
//! Table format, one record per line: `label a1 a2 a3 a4 a6 conductor
//! [degphi]`, integers in decimal, `-` for an unknown modular degree;
//! blank lines and `#` comments are skipped. Parse and validation errors
//! carry the offending line number; duplicate labels within a file are
//! rejected. A file entry whose label matches a built-in curve replaces
//! the built-in one.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use heegner_core::elliptic_curve::{builtin_curves, parse_curve_line, CurveModel};
use heegner_core::{Error, Result};

/// Environment variable naming the default curve-table file.
pub const ENV_CURVE_TABLE: &str = "HEEGNER_CURVE_TABLE";

/// The resolved curve table: file entries first, then unshadowed
/// built-ins.
pub struct CurveSource {
    curves: Vec<CurveModel>,
}

impl CurveSource {
    pub fn find(&self, label: &str) -> Result<&CurveModel> {
        self.curves.iter().find(|c| c.label == label).ok_or_else(|| {
            Error::Parse(format!(
                "no curve labeled {label}; built-ins are {}, and --curve-table \
                 or {ENV_CURVE_TABLE} can add more",
                builtin_curves()
                    .iter()
                    .map(|c| c.label.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
    }
}

/// Parse and validate a curve table, reporting the line number of any
/// malformed or invalid record and rejecting duplicate labels.
pub fn ingest_curves(text: &str) -> Result<Vec<CurveModel>> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let curve =
            parse_curve_line(line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        if !seen.insert(curve.label.clone()) {
            return Err(Error::Parse(format!(
                "line {}: duplicate label {}",
                i + 1,
                curve.label
            )));
        }
        out.push(curve);
    }
    Ok(out)
}

/// Load the curve table: the file named by `flag` if given, else by the
/// environment variable if set, else none; built-ins fill in behind.
pub fn load_curves(flag: Option<&Path>) -> Result<CurveSource> {
    let path: Option<PathBuf> = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(ENV_CURVE_TABLE).map(PathBuf::from));
    let mut curves = Vec::new();
    if let Some(p) = path {
        let text = std::fs::read_to_string(&p).map_err(|e| {
            Error::Parse(format!("cannot read curve table {}: {e}", p.display()))
        })?;
        curves = ingest_curves(&text)
            .map_err(|e| Error::Parse(format!("curve table {}: {e}", p.display())))?;
    }
    for b in builtin_curves() {
        if !curves.iter().any(|c| c.label == b.label) {
            curves.push(b);
        }
    }
    Ok(CurveSource { curves })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_numbers_in_parse_errors() {
        let err = ingest_curves("37a1 0 0 1 -1 0 37 2\nbroken record\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err =
            ingest_curves("37a1 0 0 1 -1 0 37 2\n\n37a1 0 0 1 -1 0 37 -\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn singular_record_rejected_with_line() {
        let err = ingest_curves("X 0 0 0 0 0 1 -\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(err.to_string().contains("singular"), "{err}");
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let table = "# fixtures\n\n11a1 0 -1 1 -10 -20 11 1\n";
        let curves = ingest_curves(table).unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].label, "11a1");
        assert_eq!(curves[0].deg_phi, Some(1));
    }
}
