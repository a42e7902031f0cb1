//! File formats: decimal-string JSON values, CSV tables, PGM rasters and
//! plain-text point clouds.

use serde::{Deserialize, Serialize};

use crate::complex::{BigComplex, Precision};
use crate::error::{Error, Result};

/// A complex number as two decimal strings (never binary floats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimalComplex {
    pub re: String,
    pub im: String,
}

impl From<&BigComplex> for DecimalComplex {
    fn from(z: &BigComplex) -> Self {
        let (re, im) = z.to_exact_parts();
        DecimalComplex { re, im }
    }
}

impl DecimalComplex {
    pub fn to_big(&self, prec: Precision) -> Result<BigComplex> {
        BigComplex::from_decimal_parts(prec, &self.re, &self.im)
    }
}

/// A CSV table with a header row, comma separated, LF line endings.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Plain-text cloud: a `#` header with `mu` and the precision, then one
/// `re im` line per point in decimal.
pub fn cloud_text(mu: &BigComplex, points: &[BigComplex], digits: usize) -> String {
    let mut out = format!("# mu={} precision={}\n", mu.to_decimal(digits), mu.prec().bits());
    for z in points {
        out.push_str(&z.re().to_string_radix(10, Some(digits)));
        out.push(' ');
        out.push_str(&z.im().to_string_radix(10, Some(digits)));
        out.push('\n');
    }
    out
}

/// Greyscale raster of a point cloud: pixels hit by a point are black, the
/// rest white. Rows run from the top (largest imaginary part) down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    pub comment: String,
}

impl Graymap {
    /// Rasterize `points` (plane coordinates) over `center +- (half_width,
    /// half_height)` with square cells of side `h`.
    pub fn rasterize(
        points: &[(f64, f64)],
        center: (f64, f64),
        half_width: f64,
        half_height: f64,
        h: f64,
        comment: String,
    ) -> Result<Self> {
        // written to reject NaN as well
        if [h, half_width, half_height].iter().any(|x| x.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidArgument("raster window and cell size must be positive".into()));
        }
        let width = (2.0 * half_width / h).ceil() as usize;
        let height = (2.0 * half_height / h).ceil() as usize;
        if width == 0 || height == 0 || width.saturating_mul(height) > 1 << 26 {
            return Err(Error::InvalidArgument(format!("raster of {width}x{height} pixels is out of range")));
        }
        let mut pixels = vec![255u8; width * height];
        let (left, top) = (center.0 - half_width, center.1 + half_height);
        for &(x, y) in points {
            let col = ((x - left) / h).floor();
            let row = ((top - y) / h).floor();
            if col >= 0.0 && row >= 0.0 && (col as usize) < width && (row as usize) < height {
                pixels[row as usize * width + col as usize] = 0;
            }
        }
        Ok(Graymap { width, height, pixels, comment })
    }

    /// P2 (ASCII) when `binary` is false, P5 otherwise; maxval 255.
    pub fn encode(&self, binary: bool) -> Vec<u8> {
        let magic = if binary { "P5" } else { "P2" };
        let mut out = format!("{magic}\n# {}\n{} {}\n255\n", self.comment.replace('\n', " "), self.width, self.height)
            .into_bytes();
        if binary {
            out.extend_from_slice(&self.pixels);
        } else {
            for row in self.pixels.chunks(self.width) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        out
    }
}
