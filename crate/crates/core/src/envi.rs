//! ENVI header parsing and band-interleaved-by-line payloads.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cube::{CubeKind, Hypercube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    Bil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataType {
    Float32,
    Uint16,
}

impl DataType {
    pub fn size(self) -> usize {
        match self {
            DataType::Float32 => 4,
            DataType::Uint16 => 2,
        }
    }

    fn code(self) -> u32 {
        match self {
            DataType::Float32 => 4,
            DataType::Uint16 => 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteOrder {
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub interleave: Interleave,
    pub data_type: DataType,
    pub byte_order: ByteOrder,
    pub wavelengths_nm: Vec<f64>,
}

impl EnviHeader {
    pub fn payload_len(&self) -> usize {
        self.lines * self.bands * self.samples * self.data_type.size()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("ENVI\n");
        s += &format!("samples = {}\n", self.samples);
        s += &format!("lines = {}\n", self.lines);
        s += &format!("bands = {}\n", self.bands);
        s += "header offset = 0\n";
        s += "file type = ENVI Standard\n";
        s += &format!("data type = {}\n", self.data_type.code());
        s += "interleave = bil\n";
        s += &format!(
            "byte order = {}\n",
            match self.byte_order {
                ByteOrder::Little => 0,
                ByteOrder::Big => 1,
            }
        );
        if !self.wavelengths_nm.is_empty() {
            s += "wavelength units = Nanometers\n";
            let list: Vec<String> = self.wavelengths_nm.iter().map(|w| format!("{w}")).collect();
            s += &format!("wavelength = {{{}}}\n", list.join(", "));
        }
        s
    }
}

/// Splits header text into `(lowercase key, value)` pairs. Brace-delimited
/// values may span several lines.
fn header_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let line = line.trim();
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let mut value = value.trim().to_string();
        if value.starts_with('{') {
            while !value.contains('}') {
                match lines.next() {
                    Some(more) => {
                        value.push(' ');
                        value.push_str(more.trim());
                    }
                    None => {
                        return Err(Error::MalformedHeader(format!("unterminated brace list for `{key}`")))
                    }
                }
            }
        }
        out.push((key, value));
    }
    Ok(out)
}

pub fn parse_envi_header(text: &str) -> Result<EnviHeader> {
    let entries = header_entries(text)?;
    let find = |key: &str| entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let required = |key: &str| find(key).ok_or_else(|| Error::MalformedHeader(format!("missing `{key}`")));
    let positive = |key: &str| -> Result<usize> {
        let v = required(key)?;
        match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::MalformedHeader(format!("`{key}` must be a positive integer, got `{v}`"))),
        }
    };

    let samples = positive("samples")?;
    let lines = positive("lines")?;
    let bands = positive("bands")?;

    let interleave = required("interleave")?.to_ascii_lowercase();
    if interleave != "bil" {
        return Err(Error::UnsupportedInterleave(interleave));
    }

    let data_type = match required("data type")? {
        "4" => DataType::Float32,
        "12" => DataType::Uint16,
        other => return Err(Error::MalformedHeader(format!("unsupported data type `{other}`"))),
    };

    let byte_order = match find("byte order").unwrap_or("0") {
        "0" => ByteOrder::Little,
        "1" => ByteOrder::Big,
        other => return Err(Error::MalformedHeader(format!("bad byte order `{other}`"))),
    };

    let wavelengths_nm = match find("wavelength") {
        None => Vec::new(),
        Some(v) => {
            let inner = v.trim().trim_start_matches('{').trim_end_matches('}');
            let parsed: std::result::Result<Vec<f64>, _> = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let list = parsed.map_err(|e| Error::MalformedHeader(format!("bad wavelength list: {e}")))?;
            if list.len() != bands {
                return Err(Error::MalformedHeader(format!(
                    "{} wavelengths for {bands} bands",
                    list.len()
                )));
            }
            list
        }
    };

    Ok(EnviHeader {
        samples,
        lines,
        bands,
        interleave: Interleave::Bil,
        data_type,
        byte_order,
        wavelengths_nm,
    })
}

/// Decodes a BIL payload. Element `(row, col, band)` sits at byte offset
/// `((row * bands + band) * samples + col) * sizeof(data type)`.
pub fn read_bil_cube(header: &EnviHeader, bytes: &[u8]) -> Result<Hypercube> {
    let expected = header.payload_len();
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: bytes.len(),
        });
    }
    let (h, w, b) = (header.lines, header.samples, header.bands);
    let size = header.data_type.size();
    let decode = |off: usize| -> f64 {
        let raw = &bytes[off..off + size];
        match (header.data_type, header.byte_order) {
            (DataType::Float32, ByteOrder::Little) => f32::from_le_bytes(raw.try_into().unwrap()) as f64,
            (DataType::Float32, ByteOrder::Big) => f32::from_be_bytes(raw.try_into().unwrap()) as f64,
            (DataType::Uint16, ByteOrder::Little) => u16::from_le_bytes(raw.try_into().unwrap()) as f64,
            (DataType::Uint16, ByteOrder::Big) => u16::from_be_bytes(raw.try_into().unwrap()) as f64,
        }
    };
    let mut data = vec![0.0; h * w * b];
    for row in 0..h {
        for band in 0..b {
            let line = (row * b + band) * w;
            for col in 0..w {
                data[(row * w + col) * b + band] = decode((line + col) * size);
            }
        }
    }
    let wavelengths = if header.wavelengths_nm.is_empty() {
        (1..=b).map(|i| i as f64).collect()
    } else {
        header.wavelengths_nm.clone()
    };
    Hypercube::new(h, w, wavelengths, data, CubeKind::RawCounts)
}

/// Encodes a cube as little-endian float32 BIL.
pub fn write_bil_cube(cube: &Hypercube) -> (EnviHeader, Vec<u8>) {
    let (h, w, b) = cube.shape();
    let header = EnviHeader {
        samples: w,
        lines: h,
        bands: b,
        interleave: Interleave::Bil,
        data_type: DataType::Float32,
        byte_order: ByteOrder::Little,
        wavelengths_nm: cube.wavelengths_nm().to_vec(),
    };
    let mut bytes = Vec::with_capacity(header.payload_len());
    for row in 0..h {
        for band in 0..b {
            for col in 0..w {
                bytes.extend_from_slice(&(cube.get(row, col, band) as f32).to_le_bytes());
            }
        }
    }
    (header, bytes)
}

/// Payload path paired with a `.hdr` path (`x.hdr` -> `x.bil`).
pub fn payload_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bil")
}

/// Writes `<stem>.hdr` and `<stem>.bil`, returning the header path.
pub fn write_envi(stem: &Path, cube: &Hypercube) -> Result<PathBuf> {
    let hdr = stem.with_extension("hdr");
    let (header, bytes) = write_bil_cube(cube);
    fs::write(&hdr, header.to_text()).map_err(|e| Error::io(&hdr, e))?;
    let bil = payload_path(&hdr);
    fs::write(&bil, bytes).map_err(|e| Error::io(&bil, e))?;
    Ok(hdr)
}

/// Reads a cube from a `.hdr` path (or its stem) and the sibling `.bil`.
pub fn read_envi(path: &Path) -> Result<Hypercube> {
    let hdr = path.with_extension("hdr");
    let text = fs::read_to_string(&hdr).map_err(|e| Error::io(&hdr, e))?;
    let header = parse_envi_header(&text)?;
    let bil = payload_path(&hdr);
    let bytes = fs::read(&bil).map_err(|e| Error::io(&bil, e))?;
    read_bil_cube(&header, &bytes)
}
