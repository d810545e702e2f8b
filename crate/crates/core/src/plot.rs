//! Minimal PNG line plots: axes, tick labels in a 5x7 bitmap font, one
//! polyline per series and a legend.

use std::fs;
use std::path::Path;

use crate::color::RgbImage;
use crate::error::{Error, Result};
use crate::pipeline::SpectraTable;

pub const DEFAULT_SIZE: (usize, usize) = (640, 400);

const PALETTE: [[u8; 3]; 6] = [
    [31, 119, 180],
    [214, 39, 40],
    [44, 160, 44],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '.' => [0, 0, 0, 0, 0, 0x0C, 0x0C],
        '-' => [0, 0, 0, 0x1F, 0, 0, 0],
        '+' => [0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0],
        '_' => [0, 0, 0, 0, 0, 0, 0x1F],
        ':' => [0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        '/' => [0, 0x01, 0x02, 0x04, 0x08, 0x10, 0],
        _ => [0; 7],
    }
}

struct Canvas {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![255; width * height * 3],
        }
    }

    fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = (y as usize * self.width + x as usize) * 3;
            self.data[i..i + 3].copy_from_slice(&c);
        }
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: [u8; 3]) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.set(x, y, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, c: [u8; 3]) {
        for (k, ch) in s.chars().enumerate() {
            let g = glyph(ch);
            for (row, bits) in g.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        self.set(x + k as i64 * 6 + col, y + row as i64, c);
                    }
                }
            }
        }
    }

    /// Text rotated a quarter turn counter-clockwise, reading bottom to top.
    fn text_vertical(&mut self, x: i64, y: i64, s: &str, c: [u8; 3]) {
        for (k, ch) in s.chars().enumerate() {
            let g = glyph(ch);
            for (row, bits) in g.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        self.set(x + row as i64, y - k as i64 * 6 - col, c);
                    }
                }
            }
        }
    }
}

fn text_width(s: &str) -> i64 {
    s.chars().count() as i64 * 6
}

fn tick_label(v: f64, span: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if span >= 1e5 || span < 1e-3 {
        return format!("{v:.2e}");
    }
    let decimals = (2 - span.log10().floor() as i64).clamp(0, 6) as usize;
    format!("{v:.decimals$}")
}

fn padded_range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo == hi {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

impl LinePlot {
    pub fn render(&self, width: usize, height: usize) -> Result<RgbImage> {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        if pts.clone().next().is_none() {
            return Err(Error::Parse("nothing to plot".into()));
        }
        if pts.clone().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Parse("non-finite value in plot data".into()));
        }
        if width < 160 || height < 120 {
            return Err(Error::InvalidArgument(format!("plot size {width}x{height} too small")));
        }
        let (x0, x1) = padded_range(pts.clone().map(|p| p.0));
        let (y0, y1) = padded_range(pts.map(|p| p.1));
        let (left, right, top, bottom) = (80i64, width as i64 - 20, 30i64, height as i64 - 45);
        let px = |x: f64| left + ((x - x0) / (x1 - x0) * (right - left) as f64).round() as i64;
        let py = |y: f64| bottom - ((y - y0) / (y1 - y0) * (bottom - top) as f64).round() as i64;

        let mut cv = Canvas::new(width, height);
        let black = [0, 0, 0];
        let grey = [225, 225, 225];
        for t in 0..=4 {
            let fx = x0 + (x1 - x0) * t as f64 / 4.0;
            let fy = y0 + (y1 - y0) * t as f64 / 4.0;
            let (gx, gy) = (px(fx), py(fy));
            cv.line((gx, top), (gx, bottom), grey);
            cv.line((left, gy), (right, gy), grey);
            let lx = tick_label(fx, x1 - x0);
            cv.line((gx, bottom), (gx, bottom + 4), black);
            cv.text(gx - text_width(&lx) / 2, bottom + 8, &lx, black);
            let ly = tick_label(fy, y1 - y0);
            cv.line((left - 4, gy), (left, gy), black);
            cv.text(left - 8 - text_width(&ly), gy - 3, &ly, black);
        }
        cv.line((left, top), (left, bottom), black);
        cv.line((left, bottom), (right, bottom), black);
        cv.line((left, top), (right, top), black);
        cv.line((right, top), (right, bottom), black);

        cv.text((left + right) / 2 - text_width(&self.title) / 2, 10, &self.title, black);
        cv.text((left + right) / 2 - text_width(&self.x_label) / 2, bottom + 24, &self.x_label, black);
        cv.text_vertical(8, (top + bottom) / 2 + text_width(&self.y_label) / 2, &self.y_label, black);

        for (k, s) in self.series.iter().enumerate() {
            let c = PALETTE[k % PALETTE.len()];
            let mapped: Vec<(i64, i64)> = s.points.iter().map(|&(x, y)| (px(x), py(y))).collect();
            for w in mapped.windows(2) {
                cv.line(w[0], w[1], c);
            }
            if let [only] = mapped.as_slice() {
                cv.set(only.0, only.1, c);
            }
            let ly = top + 8 + k as i64 * 12;
            let lx = right - 16 - text_width(&s.label);
            cv.line((lx - 18, ly + 3), (lx - 4, ly + 3), c);
            cv.line((lx - 18, ly + 4), (lx - 4, ly + 4), c);
            cv.text(lx, ly, &s.label, black);
        }
        Ok(RgbImage {
            height,
            width,
            data: cv.data,
            gamma_applied: true,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let img = self.render(DEFAULT_SIZE.0, DEFAULT_SIZE.1)?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        img.write_png(path)
    }
}

fn records(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let parse = |e: csv::Error| Error::Parse(format!("{}: {e}", path.display()));
    let headers = rdr.headers().map_err(parse)?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Parse(format!("{}: empty CSV", path.display())));
    }
    let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>().map_err(parse)?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }
    Ok((headers, rows))
}

fn field(path: &Path, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("{}: `{s}` is not a finite number", path.display())))
}

/// Epoch on x, mean training MRAE on y, from `epoch,mean_mrae[,...]`.
pub fn plot_trace_csv(input: &Path, output: &Path) -> Result<()> {
    let (headers, rows) = records(input)?;
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("{}: missing `{name}` column", input.display())))
    };
    let (ce, cm) = (col("epoch")?, col("mean_mrae")?);
    let points = rows
        .iter()
        .map(|r| Ok((field(input, r.get(ce).unwrap_or(""))?, field(input, r.get(cm).unwrap_or(""))?)))
        .collect::<Result<Vec<_>>>()?;
    LinePlot {
        title: "Training MRAE".into(),
        x_label: "epoch".into(),
        y_label: "MRAE".into(),
        series: vec![Series {
            label: "train".into(),
            points,
        }],
    }
    .save(output)
}

fn spectrum_series(table: &SpectraTable, id: &str, label: &str) -> Result<Series> {
    let row = table
        .rows
        .iter()
        .find(|r| r.sample_id == id)
        .ok_or_else(|| Error::Parse(format!("no spectrum for sample `{id}`")))?;
    Ok(Series {
        label: label.to_string(),
        points: table.wavelengths_nm.iter().copied().zip(row.values.iter().copied()).collect(),
    })
}

/// One line per row of a spectra table (at most the first six).
pub fn plot_spectra_csv(input: &Path, output: &Path) -> Result<()> {
    records(input)?;
    let table = SpectraTable::read(input).map_err(|e| Error::Parse(e.to_string()))?;
    let series = table
        .rows
        .iter()
        .take(PALETTE.len())
        .map(|r| {
            let label = match r.replicate {
                Some(k) => format!("{} r{k}", r.sample_id),
                None => r.sample_id.clone(),
            };
            Series {
                label,
                points: table.wavelengths_nm.iter().copied().zip(r.values.iter().copied()).collect(),
            }
        })
        .collect();
    LinePlot {
        title: "Spectra".into(),
        x_label: "wavelength (nm)".into(),
        y_label: "reflectance".into(),
        series,
    }
    .save(output)
}

/// Ground-truth and reconstructed spectra of one sample overlaid.
pub fn plot_paired_spectra(gt: &SpectraTable, rc: &SpectraTable, sample_id: &str, output: &Path) -> Result<()> {
    LinePlot {
        title: format!("Sample {sample_id}"),
        x_label: "wavelength (nm)".into(),
        y_label: "reflectance".into(),
        series: vec![
            spectrum_series(gt, sample_id, "ground truth")?,
            spectrum_series(rc, sample_id, "reconstructed")?,
        ],
    }
    .save(output)
}

pub fn plot_paired_csv(gt: &Path, rc: &Path, sample_id: &str, output: &Path) -> Result<()> {
    records(gt)?;
    records(rc)?;
    let read = |p: &Path| SpectraTable::read(p).map_err(|e| Error::Parse(e.to_string()));
    plot_paired_spectra(&read(gt)?, &read(rc)?, sample_id, output)
}

/// Trace CSVs (with an `epoch` column) become an MRAE curve; anything else
/// is read as a spectra table.
pub fn plot_csv(input: &Path, output: &Path) -> Result<()> {
    let (headers, _) = records(input)?;
    if headers.iter().any(|h| h == "epoch") {
        plot_trace_csv(input, output)
    } else {
        plot_spectra_csv(input, output)
    }
}
