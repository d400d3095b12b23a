//! NSFIELD files: one text header line
//! `NSFIELD 1 <N> <L> <n> <p> <epsilon> <variant-tag>` followed by the `n^N`
//! cell values as little-endian f64 in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::potential::PotentialVariant;

const MAGIC: &str = "NSFIELD";
const VERSION: &str = "1";
/// Headers longer than this are rejected before looking for the newline.
const MAX_HEADER: usize = 4096;

/// A field together with the problem parameters stored in its header.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredField {
    pub field: Field,
    pub p: f64,
    pub epsilon: f64,
    pub variant: PotentialVariant,
}

pub fn encode_field(field: &Field, p: f64, epsilon: f64, variant: PotentialVariant) -> Vec<u8> {
    let grid = field.grid();
    let header = format!(
        "{MAGIC} {VERSION} {} {} {} {} {} {}\n",
        grid.dim(),
        grid.half_width(),
        grid.cells_per_axis(),
        p,
        epsilon,
        variant.tag()
    );
    let mut out = Vec::with_capacity(header.len() + 8 * field.values().len());
    out.extend_from_slice(header.as_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<StoredField> {
    let fail = |offset: usize, message: String| Error::Format {
        offset: offset as u64,
        message,
    };
    let end = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| fail(bytes.len().min(MAX_HEADER), "header line is not terminated".into()))?;
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|e| fail(e.valid_up_to(), "header is not UTF-8".into()))?;

    // (byte offset, token)
    let mut tokens = Vec::new();
    let mut pos = 0;
    for tok in header.split(' ') {
        if !tok.is_empty() {
            tokens.push((pos, tok));
        }
        pos += tok.len() + 1;
    }
    if tokens.len() != 8 {
        return Err(fail(0, format!("header has {} fields, expected 8", tokens.len())));
    }
    if tokens[0].1 != MAGIC {
        return Err(fail(0, format!("bad magic `{}`", tokens[0].1)));
    }
    if tokens[1].1 != VERSION {
        return Err(fail(tokens[1].0, format!("unsupported version `{}`", tokens[1].1)));
    }
    fn number<T: std::str::FromStr>(
        (offset, tok): (usize, &str),
        what: &str,
    ) -> Result<T> {
        tok.parse().map_err(|_| Error::Format {
            offset: offset as u64,
            message: format!("cannot parse {what} from `{tok}`"),
        })
    }
    let dim: usize = number(tokens[2], "dimension")?;
    let half_width: f64 = number(tokens[3], "half width")?;
    let n: usize = number(tokens[4], "cells per axis")?;
    let p: f64 = number(tokens[5], "exponent")?;
    let epsilon: f64 = number(tokens[6], "epsilon")?;
    let variant: PotentialVariant = tokens[7]
        .1
        .parse()
        .map_err(|_| fail(tokens[7].0, format!("unknown variant `{}`", tokens[7].1)))?;
    let grid = Grid::new(dim, half_width, n).map_err(|e| fail(tokens[2].0, e.to_string()))?;

    let body = &bytes[end + 1..];
    let expected = grid.len() * 8;
    if body.len() < expected {
        return Err(fail(
            bytes.len(),
            format!(
                "truncated: header announces {} values, file holds {} bytes of data",
                grid.len(),
                body.len()
            ),
        ));
    }
    if body.len() > expected {
        return Err(fail(
            end + 1 + expected,
            format!("{} trailing bytes after {} values", body.len() - expected, grid.len()),
        ));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(fail(end + 1 + 8 * i, "non-finite value".into()));
    }
    let field = Field::from_values(grid, values)?;
    Ok(StoredField {
        field,
        p,
        epsilon,
        variant,
    })
}

pub fn save_field(
    path: &Path,
    field: &Field,
    p: f64,
    epsilon: f64,
    variant: PotentialVariant,
) -> Result<()> {
    let bytes = encode_field(field, p, epsilon, variant);
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| Error::io(path, e))
}

pub fn load_field(path: &Path) -> Result<StoredField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes)
}
