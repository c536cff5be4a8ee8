//! File formats: binary PPM images, delimited-text signals, and key-value
//! manifests/reports.
//!
//! Signal files look like
//!
//! ```text
//! # relaxed-denoise signal
//! N=4 d=3 k=2 kind=matrix graph=chain:4
//! x_11,x_12,x_21,...
//! ```
//!
//! with one vertex per row and the `d x k` node matrix flattened row-major.
//! Values are written in shortest round-trip form, so a write/read cycle is
//! lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, Array3};

use crate::error::{DenoiseError, Result};
use crate::graph::GraphSpec;
use crate::signal::{MatrixSignal, VectorSignal};

const SIGNAL_MAGIC: &str = "# relaxed-denoise signal";

fn io_err(path: &Path, err: impl std::fmt::Display) -> DenoiseError {
    DenoiseError::Io { path: path.display().to_string(), message: err.to_string() }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_err(path, e))
}

/// `−1 → 0`, `+1 → 255`, affine in between, clamped outside `[−1, 1]`.
pub fn to_byte(v: f64) -> u8 {
    ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8
}

pub fn from_byte(b: u8) -> f64 {
    f64::from(b) / 127.5 - 1.0
}

/// Encodes a 3-channel pixel signal (row-major pixels) as binary PPM (P6).
pub fn encode_ppm(width: usize, height: usize, pixels: &VectorSignal) -> Result<Vec<u8>> {
    if pixels.dim() != 3 || pixels.num_vertices() != width * height {
        return Err(DenoiseError::Dimension(format!(
            "PPM {width}x{height} needs {} RGB pixels, got {}x{}",
            width * height,
            pixels.num_vertices(),
            pixels.dim()
        )));
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels.data().iter().map(|&v| to_byte(v)));
    Ok(out)
}

pub fn write_ppm(path: &Path, width: usize, height: usize, pixels: &VectorSignal) -> Result<()> {
    write_file(path, &encode_ppm(width, height, pixels)?)
}

/// Decodes a P6 PPM with maxval 255 into `(width, height, pixels)`.
pub fn decode_ppm(bytes: &[u8]) -> Result<(usize, usize, VectorSignal)> {
    let bad = |m: &str| DenoiseError::Data(format!("malformed PPM: {m}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII header"))?.to_string());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("only P6 with maxval 255 is supported"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let body = bytes.get(pos..pos + 3 * width * height).ok_or_else(|| bad("truncated pixel data"))?;
    let data = Array2::from_shape_vec((width * height, 3), body.iter().map(|&b| from_byte(b)).collect())
        .map_err(|e| bad(&e.to_string()))?;
    Ok((width, height, VectorSignal::new(data)?))
}

/// A signal file's contents.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalData {
    Vector(VectorSignal),
    Matrix(MatrixSignal),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalFile {
    pub graph: GraphSpec,
    pub signal: SignalData,
}

impl SignalFile {
    pub fn num_vertices(&self) -> usize {
        match &self.signal {
            SignalData::Vector(v) => v.num_vertices(),
            SignalData::Matrix(m) => m.num_vertices(),
        }
    }

    /// All scalar entries in storage order.
    pub fn values(&self) -> Vec<f64> {
        match &self.signal {
            SignalData::Vector(v) => v.data().iter().copied().collect(),
            SignalData::Matrix(m) => m.data().iter().copied().collect(),
        }
    }
}

pub fn encode_signal(file: &SignalFile) -> String {
    let (n, d, k, kind) = match &file.signal {
        SignalData::Vector(v) => (v.num_vertices(), v.dim(), 1, "vector"),
        SignalData::Matrix(m) => (m.num_vertices(), m.rows(), m.cols(), "matrix"),
    };
    let mut out = format!("{SIGNAL_MAGIC}\nN={n} d={d} k={k} kind={kind} graph={}\n", file.graph);
    let values = file.values();
    for row in values.chunks(d * k) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v:?}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn decode_signal(text: &str) -> Result<SignalFile> {
    let bad = |m: String| DenoiseError::Data(format!("malformed signal file: {m}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(SIGNAL_MAGIC) {
        return Err(bad("missing header line".into()));
    }
    let header = lines.next().ok_or_else(|| bad("missing shape line".into()))?;
    let mut n = None;
    let mut d = None;
    let mut k = None;
    let mut kind = None;
    let mut graph = None;
    for field in header.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| bad(format!("field `{field}`")))?;
        let parse = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("`{field}` is not a count")));
        match key {
            "N" => n = Some(parse(value)?),
            "d" => d = Some(parse(value)?),
            "k" => k = Some(parse(value)?),
            "kind" => kind = Some(value.to_string()),
            "graph" => graph = Some(value.parse::<GraphSpec>()?),
            _ => return Err(bad(format!("unknown field `{key}`"))),
        }
    }
    let (n, d, k) = match (n, d, k) {
        (Some(n), Some(d), Some(k)) => (n, d, k),
        _ => return Err(bad("shape line must name N, d and k".into())),
    };
    let graph = graph.ok_or_else(|| bad("shape line must name the graph".into()))?;
    if graph.num_vertices() != n {
        return Err(bad(format!("graph {graph} does not have {n} vertices")));
    }
    let mut values = Vec::with_capacity(n * d * k);
    for (row, line) in lines.enumerate() {
        let before = values.len();
        for tok in line.split(',') {
            values.push(tok.trim().parse::<f64>().map_err(|_| bad(format!("row {row}: `{tok}`")))?);
        }
        if values.len() - before != d * k {
            return Err(bad(format!("row {row} has {} values, expected {}", values.len() - before, d * k)));
        }
    }
    if values.len() != n * d * k {
        return Err(bad(format!("expected {n} rows, found {}", values.len() / (d * k).max(1))));
    }
    let signal = match kind.as_deref().unwrap_or(if k == 1 { "vector" } else { "matrix" }) {
        "vector" if k == 1 => SignalData::Vector(VectorSignal::new(
            Array2::from_shape_vec((n, d), values).map_err(|e| bad(e.to_string()))?,
        )?),
        "matrix" => SignalData::Matrix(MatrixSignal::new(
            Array3::from_shape_vec((n, d, k), values).map_err(|e| bad(e.to_string()))?,
        )?),
        other => return Err(bad(format!("kind `{other}` with k = {k}"))),
    };
    Ok(SignalFile { graph, signal })
}

pub fn write_signal(path: &Path, file: &SignalFile) -> Result<()> {
    write_file(path, encode_signal(file).as_bytes())
}

pub fn read_signal(path: &Path) -> Result<SignalFile> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| io_err(path, e))?;
    decode_signal(&text).map_err(|e| match e {
        DenoiseError::Data(m) => io_err(path, m),
        other => other,
    })
}

/// Ordered `key = value` records used for manifests and metric reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    /// Stores a real in shortest round-trip form, switching to exponent
    /// notation for very small or large magnitudes.
    pub fn set_real(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, format!("{value:?}"))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| DenoiseError::Data(format!("missing key `{key}`")))
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| DenoiseError::Data(format!("key `{key}` has unparsable value `{raw}`")))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn encode(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut kv = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DenoiseError::Data(format!("line {}: expected `key = value`", i + 1)))?;
            kv.set(k.trim(), v.trim());
        }
        Ok(kv)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.encode().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        Self::decode(&String::from_utf8_lossy(&bytes)).map_err(|e| io_err(path, e))
    }
}
