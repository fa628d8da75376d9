//! File formats: IDX image sets in, binary PGM and plain matrix CSV out.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::LinalgError;
use crate::matrix::DenseMatrix;

/// IDX magic for unsigned-byte data with three dimensions.
pub const IDX_UBYTE_RANK3_MAGIC: u32 = 0x0000_0803;
const IDX_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("IDX: wrong magic 0x{found:08x} at offset 0 (expected 0x{IDX_UBYTE_RANK3_MAGIC:08x})")]
    BadMagic { found: u32 },

    #[error("IDX: truncated at offset {offset}: need {needed} bytes, have {available}")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },

    #[error("IDX: dimensions at offset {offset} overflow the addressable size")]
    DimensionOverflow { offset: usize },

    #[error("IDX: {extra} unexpected trailing bytes at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },

    #[error("CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Matrix(#[from] LinalgError),
}

impl DataError {
    fn io(path: &Path, source: io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Decoded IDX image set, pixels stored image after image in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImageSet {
    pub count: usize,
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<u8>,
}

impl IdxImageSet {
    pub fn pixels_per_image(&self) -> usize {
        self.height * self.width
    }

    pub fn image(&self, index: usize) -> &[u8] {
        let len = self.pixels_per_image();
        &self.pixels[index * len..(index + 1) * len]
    }
}

/// Parses an unsigned-byte rank-3 IDX file (the MNIST image container).
pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImageSet, DataError> {
    let read_u32 = |offset: usize| -> Result<u32, DataError> {
        bytes
            .get(offset..offset + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or(DataError::Truncated {
                offset,
                needed: 4,
                available: bytes.len().saturating_sub(offset),
            })
    };
    let magic = read_u32(0)?;
    if magic != IDX_UBYTE_RANK3_MAGIC {
        return Err(DataError::BadMagic { found: magic });
    }
    let count = read_u32(4)? as usize;
    let height = read_u32(8)? as usize;
    let width = read_u32(12)? as usize;
    let payload = count
        .checked_mul(height)
        .and_then(|x| x.checked_mul(width))
        .ok_or(DataError::DimensionOverflow { offset: 4 })?;
    let available = bytes.len() - IDX_HEADER_LEN;
    if available < payload {
        return Err(DataError::Truncated {
            offset: IDX_HEADER_LEN,
            needed: payload,
            available,
        });
    }
    if available > payload {
        return Err(DataError::TrailingBytes {
            offset: IDX_HEADER_LEN + payload,
            extra: available - payload,
        });
    }
    Ok(IdxImageSet {
        count,
        height,
        width,
        pixels: bytes[IDX_HEADER_LEN..].to_vec(),
    })
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImageSet, DataError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    parse_idx_images(&bytes)
}

/// Encodes an image set back into IDX bytes.
pub fn encode_idx_images(set: &IdxImageSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(IDX_HEADER_LEN + set.pixels.len());
    for v in [
        IDX_UBYTE_RANK3_MAGIC,
        set.count as u32,
        set.height as u32,
        set.width as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&set.pixels);
    out
}

/// One row per image, flattened row-major and scaled to `[0, 1]`.
pub fn images_to_matrix(set: &IdxImageSet) -> DenseMatrix {
    let d = set.pixels_per_image();
    DenseMatrix::from_fn(set.count, d, |i, j| {
        f64::from(set.pixels[i * d + j]) / 255.0
    })
}

/// Reshapes a flattened row-major image into a `height x width` matrix.
pub fn image_from_row(row: &[f64], height: usize, width: usize) -> Result<DenseMatrix, DataError> {
    Ok(DenseMatrix::from_row_major(height, width, row)?)
}

/// Clamps to `[0, 1]` and quantizes to a byte, rounding half up.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Binary (`P5`) PGM bytes with maxval 255.
pub fn encode_pgm(image: &DenseMatrix) -> Vec<u8> {
    let (h, w) = image.shape();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(h * w);
    for i in 0..h {
        for j in 0..w {
            out.push(quantize(image.get(i, j)));
        }
    }
    out
}

pub fn write_pgm(image: &DenseMatrix, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| DataError::io(path, e))
}

/// Parses a headerless CSV of decimal rows.
pub fn parse_matrix_csv(text: &str) -> Result<DenseMatrix, DataError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|field| {
                let field = field.trim();
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| DataError::Csv {
                        line: idx + 1,
                        reason: format!("`{field}` is not a finite decimal"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(DataError::Csv {
                    line: idx + 1,
                    reason: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Csv {
            line: 0,
            reason: "no data rows".into(),
        });
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_matrix_csv(&text)
}

/// Writes rows of shortest round-trip decimals.
pub fn write_matrix_csv<W: Write>(a: &DenseMatrix, mut out: W) -> io::Result<()> {
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()
}

pub fn save_matrix_csv(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    write_matrix_csv(a, BufWriter::new(file)).map_err(|e| DataError::io(path, e))
}

/// One value per line.
pub fn save_vector_csv(values: &[f64], path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut text = String::new();
    for v in values {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| DataError::io(path, e))
}
