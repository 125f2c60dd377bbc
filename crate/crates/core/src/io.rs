//! JSON file formats.
//!
//! Matrices: `{"n": 2, "rows": [[[re, im], ...], ...], "meta": {...}}` with
//! `meta` optional and ignored on input. Specs:
//! `{"roots": [{"a": [re, im], "alpha": 0}, ...]}`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annihilator::AnnihilatorSpec;
use crate::error::Error;
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: Error },
}

#[derive(Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl MatrixFile {
    pub fn from_matrix(m: &Matrix, meta: Option<serde_json::Value>) -> Self {
        MatrixFile {
            n: m.dim(),
            rows: m.rows().map(<[Complex64]>::to_vec).collect(),
            meta,
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix, Error> {
        if self.rows.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: self.rows.len(),
            });
        }
        Matrix::from_rows(self.rows.clone())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn read_matrix(path: &Path) -> Result<Matrix, FileError> {
    let file: MatrixFile = read_json(path)?;
    file.to_matrix().map_err(|source| FileError::Invalid {
        path: path.to_owned(),
        source,
    })
}

/// Spec validation errors (duplicate roots, empty list) surface as
/// [`FileError::Json`] because they are raised during deserialization.
pub fn read_spec(path: &Path) -> Result<AnnihilatorSpec, FileError> {
    read_json(path)
}

pub fn matrix_to_json(m: &Matrix, meta: Option<serde_json::Value>) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(m, meta)).expect("matrices serialize")
}

pub fn write_matrix(path: &Path, m: &Matrix, meta: Option<serde_json::Value>) -> Result<(), FileError> {
    fs::write(path, matrix_to_json(m, meta) + "\n").map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn write_spec(path: &Path, spec: &AnnihilatorSpec) -> Result<(), FileError> {
    let text = serde_json::to_string_pretty(spec).expect("specs serialize");
    fs::write(path, text + "\n").map_err(|source| FileError::Io {
        path: path.to_owned(),
        source,
    })
}
