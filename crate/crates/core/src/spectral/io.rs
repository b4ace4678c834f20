//! Field file format.
//!
//! A file is one UTF-8 JSON header line `{"type":"scalar"|"vector","n":N,"version":1}`
//! terminated by `\n`, followed by little-endian `f64` nodal values in row-major
//! order (axis 0 = `x1`). Vector files store the two component arrays back to back.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    #[serde(rename = "type")]
    kind: String,
    n: usize,
    version: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(v) => v.grid(),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            FieldData::Vector(v) => Ok(v),
            FieldData::Scalar(_) => Err(Error::Format(
                "expected a vector field, found scalar".into(),
            )),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            FieldData::Scalar(f) => Ok(f),
            FieldData::Vector(_) => Err(Error::Format(
                "expected a scalar field, found vector".into(),
            )),
        }
    }
}

fn write_array<W: Write>(w: &mut W, a: &Array2<f64>) -> Result<()> {
    for v in a.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<R: Read>(r: &mut R, n: usize) -> Result<Array2<f64>> {
    let mut bytes = vec![0u8; n * n * 8];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("truncated payload for N = {n}: {e}")))?;
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Array2::from_shape_vec((n, n), values).expect("n*n values"))
}

pub fn write_field<W: Write>(w: &mut W, field: &FieldData) -> Result<()> {
    let (kind, grid) = match field {
        FieldData::Scalar(f) => ("scalar", f.grid()),
        FieldData::Vector(v) => ("vector", v.grid()),
    };
    let header = Header {
        kind: kind.to_string(),
        n: grid.n(),
        version: FORMAT_VERSION,
    };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    match field {
        FieldData::Scalar(f) => write_array(w, f.values())?,
        FieldData::Vector(v) => {
            write_array(w, v.u1().values())?;
            write_array(w, v.u2().values())?;
        }
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: &mut R) -> Result<FieldData> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing newline after header".into()));
    }
    let header: Header = serde_json::from_slice(&line[..line.len() - 1])
        .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {}",
            header.version
        )));
    }
    let grid = Grid::new(header.n)?;
    let field = match header.kind.as_str() {
        "scalar" => FieldData::Scalar(ScalarField::from_values(grid, read_array(r, grid.n())?)?),
        "vector" => {
            let u1 = ScalarField::from_values(grid, read_array(r, grid.n())?)?;
            let u2 = ScalarField::from_values(grid, read_array(r, grid.n())?)?;
            FieldData::Vector(VectorField::new(u1, u2)?)
        }
        other => return Err(Error::Format(format!("unknown field type {other:?}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(field)
}

pub fn save(path: impl AsRef<Path>, field: &FieldData) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<FieldData> {
    read_field(&mut BufReader::new(File::open(path)?))
}
