//! PBM (P1/P4) and PGM (P2/P5, maxval <= 255) ingestion.

use std::path::{Path, PathBuf};

use super::{BinaryField, FieldError};

/// Options for [`load_field`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadOptions {
    /// Gray values `<= threshold` are dark. Required for PGM inputs.
    pub threshold: Option<u8>,
    /// Pixel edge in model units; overrides any sidecar header.
    pub pixel_size: Option<f64>,
}

fn parse_err(offset: usize, message: impl Into<String>) -> FieldError {
    FieldError::Parse {
        offset,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, FieldError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            if start >= self.bytes.len() {
                return Err(parse_err(start, format!("truncated payload: expected {what}")));
            }
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(start, format!("{what} out of range")))
    }

    /// Single ASCII bit for P1, where digits need not be separated.
    fn bit(&mut self) -> Result<bool, FieldError> {
        self.skip_space_and_comments();
        match self.bytes.get(self.pos) {
            Some(b'0') => {
                self.pos += 1;
                Ok(false)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(true)
            }
            Some(_) => Err(parse_err(self.pos, "expected 0 or 1")),
            None => Err(parse_err(self.pos, "truncated payload")),
        }
    }

    /// Exactly one whitespace byte separates a binary header from its raster.
    fn header_terminator(&mut self) -> Result<(), FieldError> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(parse_err(self.pos, "expected whitespace before raster data")),
        }
    }
}

fn gray_to_dark(value: usize, maxval: usize, threshold: u8) -> bool {
    let scaled = if maxval == 255 {
        value
    } else {
        (value * 255 + maxval / 2) / maxval
    };
    scaled <= threshold as usize
}

/// Decodes a PBM/PGM byte stream into a unit-pixel field.
pub fn parse_pnm(bytes: &[u8], threshold: Option<u8>) -> Result<BinaryField, FieldError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(parse_err(0, "malformed magic number"));
    }
    let kind = bytes[1];
    if !matches!(kind, b'1' | b'2' | b'4' | b'5') {
        return Err(parse_err(0, format!("malformed magic number P{}", kind as char)));
    }
    let gray = matches!(kind, b'2' | b'5');
    let threshold = match (gray, threshold) {
        (true, None) => return Err(FieldError::MissingThreshold),
        (_, t) => t.unwrap_or(0),
    };

    let mut cur = Cursor { bytes, pos: 2 };
    let nx = cur.number("width")?;
    let ny = cur.number("height")?;
    if nx == 0 || ny == 0 {
        return Err(parse_err(cur.pos, "zero-sized image"));
    }
    let maxval = if gray {
        let at = cur.pos;
        let m = cur.number("maxval")?;
        if m == 0 || m > 255 {
            return Err(parse_err(at, format!("maxval {m} outside 1..=255")));
        }
        m
    } else {
        1
    };

    let total = nx
        .checked_mul(ny)
        .ok_or_else(|| parse_err(cur.pos, "image too large"))?;
    let mut dark = Vec::with_capacity(total);
    match kind {
        b'1' => {
            for _ in 0..total {
                dark.push(cur.bit()?);
            }
        }
        b'2' => {
            for _ in 0..total {
                let at = cur.pos;
                let v = cur.number("gray value")?;
                if v > maxval {
                    return Err(parse_err(at, format!("gray value {v} exceeds maxval {maxval}")));
                }
                dark.push(gray_to_dark(v, maxval, threshold));
            }
        }
        b'4' => {
            cur.header_terminator()?;
            let row_bytes = nx.div_ceil(8);
            let need = row_bytes * ny;
            let data = &bytes[cur.pos..];
            if data.len() < need {
                return Err(parse_err(
                    bytes.len(),
                    format!("truncated payload: {} of {need} raster bytes", data.len()),
                ));
            }
            for row in 0..ny {
                for col in 0..nx {
                    let byte = data[row * row_bytes + col / 8];
                    dark.push(byte & (0x80 >> (col % 8)) != 0);
                }
            }
        }
        b'5' => {
            cur.header_terminator()?;
            let data = &bytes[cur.pos..];
            if data.len() < total {
                return Err(parse_err(
                    bytes.len(),
                    format!("truncated payload: {} of {total} raster bytes", data.len()),
                ));
            }
            for (k, &v) in data[..total].iter().enumerate() {
                if v as usize > maxval {
                    return Err(parse_err(
                        cur.pos + k,
                        format!("gray value {v} exceeds maxval {maxval}"),
                    ));
                }
                dark.push(gray_to_dark(v as usize, maxval, threshold));
            }
        }
        _ => unreachable!(),
    }
    BinaryField::from_bits(nx, ny, 1.0, dark)
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".hupa");
    PathBuf::from(name)
}

/// Reads the optional `<image>.hupa` sidecar: `lengths=<Lx,Ly>` and
/// optionally `periodic=true`. Returns (pixel size, periodic flag).
fn read_sidecar(path: &Path, nx: usize, ny: usize) -> Result<Option<(f64, bool)>, FieldError> {
    let side = sidecar_path(path);
    let Ok(text) = std::fs::read_to_string(&side) else {
        return Ok(None);
    };
    let mut pixel = None;
    let mut periodic = false;
    let mut offset = 0;
    for token in text.split_ascii_whitespace() {
        let at = text[offset..].find(token).map_or(offset, |k| offset + k);
        offset = at + token.len();
        let Some((key, value)) = token.split_once('=') else {
            return Err(parse_err(at, format!("sidecar: malformed field `{token}`")));
        };
        match key {
            "lengths" => {
                let parsed: Result<Vec<f64>, _> = value.split(',').map(str::parse).collect();
                let lengths = match parsed {
                    Ok(v) if v.len() == 2 && v.iter().all(|l| l.is_finite() && *l > 0.0) => v,
                    _ => return Err(parse_err(at, format!("sidecar: bad lengths `{value}`"))),
                };
                let hx = lengths[0] / nx as f64;
                let hy = lengths[1] / ny as f64;
                if (hx - hy).abs() > 1e-12 * hx.max(hy) {
                    return Err(FieldError::NonSquarePixels { offset: at, hx, hy });
                }
                pixel = Some(hx);
            }
            "periodic" => periodic = value == "true",
            other => return Err(parse_err(at, format!("sidecar: unknown field `{other}`"))),
        }
    }
    Ok(Some((pixel.unwrap_or(1.0), periodic)))
}

/// Loads a PBM/PGM raster. Pixels default to one model unit unless the sidecar
/// or `options.pixel_size` says otherwise.
pub fn load_field(path: impl AsRef<Path>, options: LoadOptions) -> Result<BinaryField, FieldError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| FieldError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let field = parse_pnm(&bytes, options.threshold)?;
    let (nx, ny) = (field.width(), field.height());
    let sidecar = read_sidecar(path, nx, ny)?;
    let periodic = sidecar.is_some_and(|(_, p)| p);
    let pixel = match (options.pixel_size, sidecar) {
        (Some(h), _) => h,
        (None, Some((h, _))) => h,
        (None, None) => 1.0,
    };
    let field = if pixel == 1.0 {
        field
    } else {
        BinaryField::from_bits(nx, ny, pixel, field.dark)?
    };
    Ok(field.assert_periodic(periodic))
}
