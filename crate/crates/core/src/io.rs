//! JSON encodings.
//!
//! * matrix: row-major array of rows, each entry `[re, im]`;
//! * sequence: `{"dim": d, "positive": bool, "items": [matrix, ...]}`;
//! * grid: `{"dim": d, "grid_size": L, "points": [matrix, ...]}`.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! write/read cycle reproduces every bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::avgops::GridFunction;
use crate::error::{Error, Result};
use crate::opcore::{CMatrix, GeneralOperator, HermitianOperator, Operator, C64};
use crate::vvnorms::OperatorSequence;

/// Largest accepted deviation from Hermitian symmetry, relative to `1 + ||m||_F`.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-9;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub dim: usize,
    pub positive: bool,
    pub items: Vec<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub dim: usize,
    pub grid_size: usize,
    pub points: Vec<MatrixJson>,
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Parses a square matrix with finite entries; `dim` is checked when given.
pub fn matrix_from_json(rows: &MatrixJson, dim: Option<usize>) -> Result<CMatrix> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::InvalidArgument("matrix has no rows".into()));
    }
    if let Some(want) = dim {
        if d != want {
            return Err(Error::DimensionMismatch { left: want, right: d });
        }
    }
    let mut m = CMatrix::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::NotSquare { rows: d, cols: row.len() });
        }
        for (j, [re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            m[(i, j)] = C64::new(*re, *im);
        }
    }
    Ok(m)
}

fn hermitian_from_json(rows: &MatrixJson, dim: usize, index: usize) -> Result<HermitianOperator> {
    let m = matrix_from_json(rows, Some(dim))?;
    let asym = (&m - m.adjoint()).norm();
    if asym > HERMITIAN_INPUT_TOL * (1.0 + m.norm()) {
        return Err(Error::InvalidArgument(format!("item {index} is not Hermitian (|m - m*|_F = {asym:e})")));
    }
    HermitianOperator::new(m)
}

impl SequenceFile {
    pub fn from_sequence(seq: &OperatorSequence) -> Self {
        SequenceFile {
            dim: seq.dim(),
            positive: seq.is_positive(),
            items: seq.items().iter().map(|x| matrix_to_json(x.matrix())).collect(),
        }
    }

    pub fn into_sequence(self) -> Result<OperatorSequence> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(n, m)| hermitian_from_json(m, self.dim, n))
            .collect::<Result<Vec<_>>>()?;
        if self.positive {
            OperatorSequence::positive(items)
        } else {
            OperatorSequence::general(items)
        }
    }
}

impl GridFile {
    pub fn from_grid(f: &GridFunction) -> Self {
        GridFile {
            dim: f.dim(),
            grid_size: f.grid_size(),
            points: f.values().iter().map(|v| matrix_to_json(v.matrix())).collect(),
        }
    }

    pub fn into_grid(self) -> Result<GridFunction> {
        if self.points.len() != self.grid_size {
            return Err(Error::InvalidArgument(format!(
                "grid_size is {} but {} points were given",
                self.grid_size,
                self.points.len()
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        let values = self
            .points
            .iter()
            .map(|m| matrix_from_json(m, Some(self.dim)).and_then(GeneralOperator::new))
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(values)
    }
}

pub fn sequence_from_str(s: &str) -> Result<OperatorSequence> {
    serde_json::from_str::<SequenceFile>(s)?.into_sequence()
}

pub fn sequence_to_string(seq: &OperatorSequence) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SequenceFile::from_sequence(seq))?)
}

pub fn grid_from_str(s: &str) -> Result<GridFunction> {
    serde_json::from_str::<GridFile>(s)?.into_grid()
}

pub fn grid_to_string(f: &GridFunction) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GridFile::from_grid(f))?)
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<OperatorSequence> {
    sequence_from_str(&fs::read_to_string(path)?)
}

pub fn write_sequence(path: impl AsRef<Path>, seq: &OperatorSequence) -> Result<()> {
    Ok(fs::write(path, sequence_to_string(seq)?)?)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridFunction> {
    grid_from_str(&fs::read_to_string(path)?)
}

pub fn write_grid(path: impl AsRef<Path>, f: &GridFunction) -> Result<()> {
    Ok(fs::write(path, grid_to_string(f)?)?)
}
