//! JSON encoding of complex matrices and vectors: row-major nested arrays of
//! `[re, im]` pairs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

pub type Pair = [f64; 2];

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<Pair>]) -> Result<CMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput("matrix rows are empty or ragged".into()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(pairs: &[Pair]) -> Result<CVector> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("vector is empty".into()));
    }
    if pairs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("vector has non-finite entries".into()));
    }
    Ok(CVector::from_iterator(pairs.len(), pairs.iter().map(|p| C64::new(p[0], p[1]))))
}

/// Parse a JSON document holding a single matrix.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<Pair>> = serde_json::from_str(text).map_err(json_error)?;
    rows_to_matrix(&rows)
}

/// Keeps the position serde_json reports.
pub fn json_error(e: serde_json::Error) -> Error {
    let message = e.to_string();
    let message = match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message,
    };
    Error::Parse { line: e.line(), column: e.column(), message }
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(&matrix_to_rows(m)).expect("finite matrix serializes")
}

/// `#[serde(with = "matrix_json::serde_matrix")]`
pub mod serde_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        rows_to_matrix(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "matrix_json::serde_vector")]`
pub mod serde_vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let pairs = Vec::<Pair>::deserialize(d)?;
        pairs_to_vector(&pairs).map_err(D::Error::custom)
    }
}
