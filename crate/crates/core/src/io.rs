//! Data ingestion (3-column CSV, PPM images), label/table writers, and the
//! RGB image segmentation pipeline.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{KentError, Result};
use crate::fitter::{fit, FitConfig};
use crate::model::{MixtureModel, UnitVector3};
use crate::selection::{map_classify, select_g, SelectionTable};

/// Points loaded from a file, with bookkeeping for rows that could not be
/// mapped onto the sphere.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Vec<UnitVector3>,
    /// Data rows encountered (header excluded).
    pub source_rows: usize,
    /// Rows skipped because they had no direction (norm below 1e-12).
    pub skipped_rows: usize,
}

fn parse_row(line: &str) -> Option<Vector3<f64>> {
    let mut parts = line.split(',');
    let x = parts.next()?.trim().parse::<f64>().ok()?;
    let y = parts.next()?.trim().parse::<f64>().ok()?;
    let z = parts.next()?.trim().parse::<f64>().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some(Vector3::new(x, y, z))
}

/// Loads a 3-column CSV of directions. A non-numeric first row is treated
/// as a header. With `normalize`, rows are mapped y → y/‖y‖ and rows with
/// ‖y‖ < 1e-12 are skipped and counted; without it, rows must already be
/// unit-norm within 1e-6 and violations are rejected with their row numbers.
pub fn load_csv(path: &Path, normalize: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut source_rows = 0usize;
    let mut skipped_rows = 0usize;
    let mut bad_norm_rows: Vec<usize> = Vec::new();
    let mut first_content = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let header_allowed = first_content;
        first_content = false;
        let Some(v) = parse_row(line) else {
            if header_allowed {
                continue;
            }
            return Err(KentError::Parse {
                line: line_no,
                message: format!("expected 3 numeric comma-separated fields, got {line:?}"),
            });
        };
        source_rows += 1;
        let norm = v.norm();
        if normalize {
            if norm < 1e-12 {
                skipped_rows += 1;
                continue;
            }
            points.push(UnitVector3::from_unnormalized(v)?);
        } else {
            if (norm - 1.0).abs() > 1e-6 {
                bad_norm_rows.push(line_no);
                continue;
            }
            points.push(UnitVector3::from_unnormalized(v)?);
        }
    }
    if !bad_norm_rows.is_empty() {
        return Err(KentError::Format(format!(
            "rows are not unit-norm within 1e-6 (pass --normalize to project them): lines {:?}",
            bad_norm_rows
        )));
    }
    if points.is_empty() {
        return Err(KentError::Domain(format!(
            "no usable rows in {} ({} skipped)",
            path.display(),
            skipped_rows
        )));
    }
    Ok(Dataset {
        points,
        source_rows,
        skipped_rows,
    })
}

/// Writes points as a `x,y,z` CSV; floats use the shortest round-trip
/// representation, so reloading reproduces them exactly.
pub fn write_points_csv(path: &Path, points: &[UnitVector3]) -> Result<()> {
    let mut out = String::from("x,y,z\n");
    for p in points {
        let [x, y, z] = p.coords();
        out.push_str(&format!("{x},{y},{z}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the `index,label` CSV consumed by downstream tooling.
pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGrid {
    pub width: usize,
    pub height: usize,
    pixels: Vec<u8>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height * 3 {
            return Err(KentError::Format(format!(
                "image needs exactly {}x{}x3 = {} bytes, got {}",
                width,
                height,
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(ImageGrid {
            width,
            height,
            pixels,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel(&self, idx: usize) -> (u8, u8, u8) {
        let o = idx * 3;
        (self.pixels[o], self.pixels[o + 1], self.pixels[o + 2])
    }

    pub fn bytes(&self) -> &[u8] {
        &self.pixels
    }
}

struct PpmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PpmCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(KentError::Format("unexpected end of PPM header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| KentError::Format("non-ASCII PPM header token".into()))
    }

    fn usize_token(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse::<usize>()
            .map_err(|_| KentError::Format(format!("invalid PPM {what}: {tok:?}")))
    }
}

/// Reads a P3 (ASCII) or P6 (binary) PPM with maxval 255; comments are
/// allowed anywhere in the header.
pub fn load_ppm(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path)?;
    let mut cur = PpmCursor {
        bytes: &bytes,
        pos: 0,
    };
    let magic = cur.token()?;
    if magic != "P3" && magic != "P6" {
        return Err(KentError::Format(format!(
            "unsupported magic {magic:?}; only P3 and P6 PPM are supported"
        )));
    }
    let width = cur.usize_token("width")?;
    let height = cur.usize_token("height")?;
    let maxval = cur.usize_token("maxval")?;
    if maxval != 255 {
        return Err(KentError::Format(format!(
            "unsupported maxval {maxval}; only 255 is supported"
        )));
    }
    let count = width * height * 3;
    let pixels = if magic == "P6" {
        // exactly one whitespace byte separates the header from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(KentError::Format("missing raster separator in P6".into()));
        }
        let start = cur.pos + 1;
        if bytes.len() < start + count {
            return Err(KentError::Format(format!(
                "P6 raster truncated: need {count} bytes, have {}",
                bytes.len().saturating_sub(start)
            )));
        }
        bytes[start..start + count].to_vec()
    } else {
        let mut px = Vec::with_capacity(count);
        for _ in 0..count {
            let v = cur.usize_token("sample")?;
            if v > 255 {
                return Err(KentError::Format(format!("P3 sample {v} exceeds 255")));
            }
            px.push(v as u8);
        }
        px
    };
    ImageGrid::new(width, height, pixels)
}

/// Writes a binary P6 PPM with maxval 255. A load/save round trip of a P6
/// file reproduces the pixel bytes exactly.
pub fn save_ppm(path: &Path, img: &ImageGrid) -> Result<()> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(img.bytes());
    fs::write(path, out)?;
    Ok(())
}

/// Maps pixels onto S² by y → y/‖y‖. Pure-black pixels have no direction;
/// their indices are returned separately and receive the reserved label 0.
pub fn image_to_sphere(img: &ImageGrid) -> (Dataset, Vec<usize>) {
    let mut points = Vec::with_capacity(img.len());
    let mut unmapped = Vec::new();
    for idx in 0..img.len() {
        let (r, g, b) = img.pixel(idx);
        if r == 0 && g == 0 && b == 0 {
            unmapped.push(idx);
            continue;
        }
        let v = Vector3::new(r as f64, g as f64, b as f64);
        points.push(UnitVector3::from_unnormalized(v).expect("nonzero pixel"));
    }
    (
        Dataset {
            points,
            source_rows: img.len(),
            skipped_rows: unmapped.len(),
        },
        unmapped,
    )
}

/// Number of mixture components for segmentation: fixed or chosen by the
/// selection rule over g in [2, 10].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentCount {
    Fixed(usize),
    Auto,
}

impl std::str::FromStr for ComponentCount {
    type Err = KentError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(ComponentCount::Auto);
        }
        s.parse::<usize>()
            .map(ComponentCount::Fixed)
            .map_err(|_| KentError::Domain(format!("expected a component count or \"auto\", got {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    /// One label per pixel in row-major order; 0 marks unmapped pixels.
    pub labels: Vec<usize>,
    pub model: MixtureModel,
    /// Present when the component count was selected automatically.
    pub table: Option<SelectionTable>,
}

/// Full image segmentation: map to the sphere, fit (or select g), classify,
/// and reassemble per-pixel labels with 0 for unmapped pixels.
pub fn segment_image(img: &ImageGrid, count: ComponentCount, cfg: &FitConfig) -> Result<Segmentation> {
    let (dataset, unmapped) = image_to_sphere(img);
    if dataset.points.is_empty() {
        return Err(KentError::Domain(
            "empty dataset: every pixel is pure black".into(),
        ));
    }
    let (model, table) = match count {
        ComponentCount::Fixed(g) => {
            let mut c = cfg.clone();
            c.g = g;
            (fit(&dataset.points, &c)?.model, None)
        }
        ComponentCount::Auto => {
            let table = select_g(&dataset.points, 2, 10, cfg)?;
            (table.selected_report().model.clone(), Some(table))
        }
    };
    let mapped = map_classify(&dataset.points, &model);
    let mut labels = vec![0usize; img.len()];
    let mut next_unmapped = unmapped.iter().peekable();
    let mut it = mapped.labels().iter();
    for (idx, slot) in labels.iter_mut().enumerate() {
        if next_unmapped.peek() == Some(&&idx) {
            next_unmapped.next();
            continue;
        }
        *slot = *it.next().expect("one label per mapped pixel");
    }
    Ok(Segmentation {
        labels,
        model,
        table,
    })
}

/// Paints every pixel with its cluster's mean RGB; label 0 stays black.
pub fn recolor_image(img: &ImageGrid, labels: &[usize]) -> Result<ImageGrid> {
    if labels.len() != img.len() {
        return Err(KentError::Domain(format!(
            "labels ({}) must cover every pixel ({})",
            labels.len(),
            img.len()
        )));
    }
    let g = labels.iter().copied().max().unwrap_or(0);
    let mut sums = vec![[0.0f64; 3]; g + 1];
    let mut counts = vec![0usize; g + 1];
    for (idx, &l) in labels.iter().enumerate() {
        let (r, gg, b) = img.pixel(idx);
        sums[l][0] += r as f64;
        sums[l][1] += gg as f64;
        sums[l][2] += b as f64;
        counts[l] += 1;
    }
    let palette: Vec<[u8; 3]> = sums
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(l, (s, &c))| {
            if l == 0 || c == 0 {
                [0, 0, 0]
            } else {
                [
                    (s[0] / c as f64).round() as u8,
                    (s[1] / c as f64).round() as u8,
                    (s[2] / c as f64).round() as u8,
                ]
            }
        })
        .collect();
    let mut pixels = Vec::with_capacity(img.len() * 3);
    for &l in labels {
        pixels.extend_from_slice(&palette[l]);
    }
    ImageGrid::new(img.width, img.height, pixels)
}
