//! Headerless numeric CSV: one value per line on a line, `n1` rows of `n2`
//! values for an image. Larger lattices are stored row-major with the last
//! axis along each line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qdcart::LatticeShape;

use crate::CliError;

/// Parsed rows, each holding at least one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
}

pub fn parse(text: &str) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 1;
        for field in line.split(',') {
            let token = field.trim();
            let at = col + (field.len() - field.trim_start().len());
            let value: f64 = token.parse().map_err(|_| {
                CliError::usage(format!(
                    "line {}, column {at}: cannot parse {token:?} as a number",
                    ln + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::usage(format!(
                    "line {}, column {at}: value {token} is not finite",
                    ln + 1
                )));
            }
            row.push(value);
            col += field.chars().count() + 1;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::usage("input contains no values"));
    }
    Ok(Table { rows })
}

pub fn read(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
}

/// `d:n1,n2,...`.
pub fn parse_shape(spec: &str) -> Result<LatticeShape, CliError> {
    let bad = || CliError::usage(format!("shape must look like d:n1[,n2...], got {spec:?}"));
    let (d, sides) = spec.split_once(':').ok_or_else(bad)?;
    let d: usize = d.trim().parse().map_err(|_| bad())?;
    let sides: Vec<usize> = sides
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if sides.len() != d {
        return Err(CliError::usage(format!(
            "shape {spec:?} lists {} sides for dimension {d}",
            sides.len()
        )));
    }
    LatticeShape::new(sides).map_err(CliError::from)
}

/// Lattice and row-major values. Without an explicit shape a single column is
/// a line and a rectangular block is an image.
pub fn to_lattice(table: &Table, shape: Option<LatticeShape>) -> Result<(LatticeShape, Vec<f64>), CliError> {
    let values: Vec<f64> = table.rows.iter().flatten().copied().collect();
    let width = table.rows[0].len();
    if let Some((k, row)) = table.rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(CliError::usage(format!(
            "row {} has {} values but row 1 has {width}",
            k + 1,
            row.len()
        )));
    }
    let shape = match shape {
        Some(shape) => {
            if shape.len() != values.len() {
                return Err(CliError::usage(format!(
                    "shape {shape} needs {} values, input has {}",
                    shape.len(),
                    values.len()
                )));
            }
            if shape.ndim() == 2 && width != shape.dims()[1] {
                return Err(CliError::usage(format!(
                    "shape {shape} needs {} values per row, input has {width}",
                    shape.dims()[1]
                )));
            }
            shape
        }
        None if width == 1 => LatticeShape::line(values.len())?,
        None => LatticeShape::new(vec![table.rows.len(), width])?,
    };
    Ok((shape, values))
}

/// Values formatted with shortest round-trip decimals.
pub fn format(shape: &LatticeShape, values: &[f64]) -> String {
    let width = if shape.ndim() == 1 {
        1
    } else {
        *shape.dims().last().expect("nonempty shape")
    };
    let mut out = String::with_capacity(values.len() * 8);
    for row in values.chunks(width) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("writing to a string");
        }
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, shape: &LatticeShape, values: &[f64]) -> Result<(), CliError> {
    fs::write(path, format(shape, values))
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}
