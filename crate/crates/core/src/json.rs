//! JSON forms of systems and realizations.
//!
//! Systems: `{"n": 2, "entries": [[{"num": [b0, b1], "den": [a0, a1]}, ...], ...]}`
//! with ascending coefficients.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::RationalFunction;
use crate::realization::StateSpaceRealization;
use crate::tfm::{RMatrix, TransferMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub n: usize,
    pub entries: Vec<Vec<EntryJson>>,
}

impl From<TransferMatrix> for SystemJson {
    fn from(g: TransferMatrix) -> Self {
        let n = g.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = g.entry(i, j);
                        EntryJson {
                            num: coeffs(e.num()),
                            den: coeffs(e.den()),
                        }
                    })
                    .collect()
            })
            .collect();
        SystemJson { n, entries }
    }
}

fn coeffs(p: &Polynomial) -> Vec<f64> {
    if p.is_zero() {
        vec![0.0]
    } else {
        p.coeffs().to_vec()
    }
}

impl TryFrom<SystemJson> for TransferMatrix {
    type Error = Error;

    fn try_from(s: SystemJson) -> Result<Self> {
        if s.entries.len() != s.n || s.entries.iter().any(|row| row.len() != s.n) {
            return Err(Error::DimensionMismatch(format!("entries are not {0}x{0}", s.n)));
        }
        let mut out = Vec::with_capacity(s.n * s.n);
        for row in s.entries {
            for e in row {
                out.push(RationalFunction::from_coeffs(&e.num, &e.den)?);
            }
        }
        TransferMatrix::new(s.n, out)
    }
}

pub fn system_from_str(text: &str) -> Result<TransferMatrix> {
    let raw: SystemJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    TransferMatrix::try_from(raw)
}

pub fn system_to_string(g: &TransferMatrix) -> String {
    serde_json::to_string_pretty(&SystemJson::from(g.clone())).expect("system JSON is serializable")
}

pub fn read_system(path: &Path) -> Result<TransferMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    system_from_str(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
}

fn rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl From<&StateSpaceRealization> for RealizationJson {
    fn from(r: &StateSpaceRealization) -> Self {
        RealizationJson {
            a: rows(&r.a),
            b: rows(&r.b),
            c: rows(&r.c),
            d: rows(&r.d),
        }
    }
}

/// Parses a real matrix given as a list of rows.
pub fn matrix_from_str(text: &str) -> Result<RMatrix> {
    let raw: Vec<Vec<f64>> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = raw.len();
    let m = raw.first().map_or(0, Vec::len);
    if raw.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    Ok(RMatrix::from_fn(n, m, |i, j| raw[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n": 1, "entries": [[{"num": [1.0], "den": [1.0, 1.0]}]]}"#;
        let g = system_from_str(text).unwrap();
        let back = system_from_str(&system_to_string(&g)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn improper_rejected() {
        let text = r#"{"n": 1, "entries": [[{"num": [0.0, 0.0, 1.0], "den": [1.0, 1.0]}]]}"#;
        assert!(matches!(system_from_str(text), Err(Error::Improper { .. })));
    }

    #[test]
    fn ragged_rejected() {
        let text = r#"{"n": 2, "entries": [[{"num": [1.0], "den": [1.0]}]]}"#;
        assert!(matches!(system_from_str(text), Err(Error::DimensionMismatch(_))));
    }
}
