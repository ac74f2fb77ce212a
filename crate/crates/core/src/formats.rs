//! Binary file formats. All integers and floats are little-endian; every
//! file starts with a four-byte magic and a `u16` version.
//!
//! | magic  | body                                                              |
//! |--------|-------------------------------------------------------------------|
//! | `LVEC` | `count u32, dim u32, count*dim f32` (row-major)                   |
//! | `LLAB` | `count u32, L u32, count * ceil(L/8)` bytes, LSB-first bit rows   |
//! | `LIVF` | `dim u32, L u32, n u32, L*dim f32` representatives,               |
//! |        | then per cluster `len u32, len * u32` member ids, then `n*dim f32`|
//! | `LRTW` | `kind u8` (0 linear, 1 mlp), `L u32, n u32`, mlp adds `h u32`;    |
//! |        | linear payload `W (L*n)`, mlp payload `W1 (h*n), b1, W2 (L*h), b2`|
//!
//! Decoders reject wrong magics, unknown versions, truncation, trailing
//! bytes and non-finite floats, reporting the byte offset of the problem.

use std::fs;
use std::path::Path;

use crate::clustering::ClusteringResult;
use crate::error::{Error, Result};
use crate::ivf::{build_index, IvfIndex, Router};
use crate::learning::{LinearRouterModel, MlpRouterModel};
use crate::vectorspace::VectorSet;

pub const VERSION: u16 = 1;

pub const VECTORS_MAGIC: &[u8; 4] = b"LVEC";
pub const LABELS_MAGIC: &[u8; 4] = b"LLAB";
pub const INDEX_MAGIC: &[u8; 4] = b"LIVF";
pub const MODEL_MAGIC: &[u8; 4] = b"LRTW";

const MODEL_LINEAR: u8 = 0;
const MODEL_MLP: u8 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn new(magic: &[u8; 4]) -> Self {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(magic);
        w.0.extend_from_slice(&VERSION.to_le_bytes());
        w
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v)
            .map_err(|_| Error::InvalidParam(format!("{v} does not fit in u32")))?;
        self.0.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }

    fn f32s(&mut self, vs: &[f32]) {
        self.0.reserve(vs.len() * 4);
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    kind: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn open(kind: &'static str, buf: &'a [u8], magic: &[u8; 4]) -> Result<Self> {
        let mut r = Reader { kind, buf, pos: 0 };
        if r.take(4)? != magic {
            return Err(r.err_at(
                0,
                format!("bad magic, expected {:?}", String::from_utf8_lossy(magic)),
            ));
        }
        let at = r.pos;
        let version = r.u16()?;
        if version != VERSION {
            return Err(r.err_at(at, format!("unsupported version {version}")));
        }
        Ok(r)
    }

    fn err_at(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Format {
            kind: self.kind,
            offset: offset as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(self.err_at(
                self.pos,
                format!("truncated: need {n} bytes, {remaining} remain"),
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    /// `u32` that must be at least 1.
    fn count(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let v = self.u32()?;
        if v == 0 {
            return Err(self.err_at(at, format!("{what} must be >= 1")));
        }
        Ok(v)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let start = self.pos;
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| self.err_at(start, "size overflow"))?,
        )?;
        let mut out = Vec::with_capacity(n);
        for (i, b) in bytes.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            if !v.is_finite() {
                return Err(self.err_at(start + 4 * i, "non-finite float"));
            }
            out.push(v);
        }
        Ok(out)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<VectorSet> {
        let at = self.pos;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| self.err_at(at, "size overflow"))?;
        let data = self.f32s(n)?;
        VectorSet::new(cols, data).map_err(|e| self.err_at(at, e.to_string()))
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err_at(
                self.pos,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_vectors(set: &VectorSet) -> Result<Vec<u8>> {
    let mut w = Writer::new(VECTORS_MAGIC);
    w.u32(set.len())?;
    w.u32(set.dim())?;
    w.f32s(set.as_slice());
    Ok(w.0)
}

pub fn decode_vectors(buf: &[u8]) -> Result<VectorSet> {
    let mut r = Reader::open("LVEC", buf, VECTORS_MAGIC)?;
    let count = r.count("count")?;
    let dim = r.count("dim")?;
    let set = r.matrix(count, dim)?;
    r.finish()?;
    Ok(set)
}

pub fn write_vectors(path: &Path, set: &VectorSet) -> Result<()> {
    write_file(path, &encode_vectors(set)?)
}

pub fn read_vectors(path: &Path) -> Result<VectorSet> {
    decode_vectors(&read_file(path)?)
}

/// Bit-packed relevance rows, all of length `clusters`.
pub fn encode_labels(rows: &[Vec<bool>], clusters: usize) -> Result<Vec<u8>> {
    if rows.is_empty() || clusters == 0 {
        return Err(Error::InvalidParam(
            "label file needs >= 1 row and >= 1 cluster".into(),
        ));
    }
    let mut w = Writer::new(LABELS_MAGIC);
    w.u32(rows.len())?;
    w.u32(clusters)?;
    let row_bytes = clusters.div_ceil(8);
    for row in rows {
        if row.len() != clusters {
            return Err(Error::dim(clusters, row.len()));
        }
        let mut packed = vec![0u8; row_bytes];
        for (i, _) in row.iter().enumerate().filter(|(_, &b)| b) {
            packed[i / 8] |= 1 << (i % 8);
        }
        w.0.extend_from_slice(&packed);
    }
    Ok(w.0)
}

pub fn decode_labels(buf: &[u8]) -> Result<Vec<Vec<bool>>> {
    let mut r = Reader::open("LLAB", buf, LABELS_MAGIC)?;
    let count = r.count("count")?;
    let clusters = r.count("cluster count")?;
    let row_bytes = clusters.div_ceil(8);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let at = r.pos;
        let packed = r.take(row_bytes)?;
        let row: Vec<bool> = (0..clusters)
            .map(|i| packed[i / 8] >> (i % 8) & 1 == 1)
            .collect();
        let set_bits: u32 = packed.iter().map(|b| b.count_ones()).sum();
        if set_bits as usize != row.iter().filter(|&&b| b).count() {
            return Err(r.err_at(at, "padding bits set beyond the cluster count"));
        }
        rows.push(row);
    }
    r.finish()?;
    Ok(rows)
}

pub fn write_labels(path: &Path, rows: &[Vec<bool>], clusters: usize) -> Result<()> {
    write_file(path, &encode_labels(rows, clusters)?)
}

pub fn read_labels(path: &Path) -> Result<Vec<Vec<bool>>> {
    decode_labels(&read_file(path)?)
}

pub fn encode_index(idx: &IvfIndex) -> Result<Vec<u8>> {
    let mut w = Writer::new(INDEX_MAGIC);
    w.u32(idx.dim())?;
    w.u32(idx.num_clusters())?;
    w.u32(idx.docs().len())?;
    w.f32s(idx.rep_matrix().as_slice());
    for members in idx.clustering().members() {
        w.u32(members.len())?;
        for &id in members {
            w.u32(id)?;
        }
    }
    w.f32s(idx.docs().as_slice());
    Ok(w.0)
}

pub fn decode_index(buf: &[u8]) -> Result<IvfIndex> {
    let mut r = Reader::open("LIVF", buf, INDEX_MAGIC)?;
    let dim = r.count("dim")?;
    let clusters = r.count("cluster count")?;
    let n = r.count("document count")?;
    let reps = r.matrix(clusters, dim)?;
    let members_at = r.pos;
    let mut members = Vec::with_capacity(clusters);
    for _ in 0..clusters {
        let at = r.pos;
        let len = r.u32()?;
        if len > n {
            return Err(r.err_at(at, format!("member list of {len} exceeds {n} documents")));
        }
        members.push((0..len).map(|_| r.u32()).collect::<Result<Vec<_>>>()?);
    }
    let clustering = ClusteringResult::from_members(members, reps, n)
        .map_err(|e| r.err_at(members_at, e.to_string()))?;
    let docs = r.matrix(n, dim)?;
    r.finish()?;
    build_index(docs, clustering)
}

pub fn write_index(path: &Path, idx: &IvfIndex) -> Result<()> {
    write_file(path, &encode_index(idx)?)
}

pub fn read_index(path: &Path) -> Result<IvfIndex> {
    decode_index(&read_file(path)?)
}

/// A trained router as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum RouterModel {
    Linear(LinearRouterModel),
    Mlp(MlpRouterModel),
}

impl RouterModel {
    pub fn into_router(self) -> Router {
        match self {
            RouterModel::Linear(m) => Router::LearntLinear(m),
            RouterModel::Mlp(m) => Router::LearntMlp(m),
        }
    }
}

pub fn encode_model(model: &RouterModel) -> Result<Vec<u8>> {
    let mut w = Writer::new(MODEL_MAGIC);
    match model {
        RouterModel::Linear(m) => {
            w.u8(MODEL_LINEAR);
            w.u32(m.num_clusters())?;
            w.u32(m.dim())?;
            w.f32s(m.weights().as_slice());
        }
        RouterModel::Mlp(m) => {
            w.u8(MODEL_MLP);
            w.u32(m.num_clusters())?;
            w.u32(m.dim())?;
            w.u32(m.hidden())?;
            let (w1, b1, w2, b2) = m.parts();
            w.f32s(w1.as_slice());
            w.f32s(b1);
            w.f32s(w2.as_slice());
            w.f32s(b2);
        }
    }
    Ok(w.0)
}

pub fn decode_model(buf: &[u8]) -> Result<RouterModel> {
    let mut r = Reader::open("LRTW", buf, MODEL_MAGIC)?;
    let kind_at = r.pos;
    let kind = r.u8()?;
    let model = match kind {
        MODEL_LINEAR => {
            let clusters = r.count("cluster count")?;
            let dim = r.count("dim")?;
            RouterModel::Linear(LinearRouterModel::new(r.matrix(clusters, dim)?))
        }
        MODEL_MLP => {
            let clusters = r.count("cluster count")?;
            let dim = r.count("dim")?;
            let hidden = r.count("hidden width")?;
            let w1 = r.matrix(hidden, dim)?;
            let b1 = r.f32s(hidden)?;
            let w2 = r.matrix(clusters, hidden)?;
            let b2 = r.f32s(clusters)?;
            RouterModel::Mlp(MlpRouterModel::new(w1, b1, w2, b2)?)
        }
        other => return Err(r.err_at(kind_at, format!("unknown model kind {other}"))),
    };
    r.finish()?;
    Ok(model)
}

pub fn write_model(path: &Path, model: &RouterModel) -> Result<()> {
    write_file(path, &encode_model(model)?)
}

pub fn read_model(path: &Path) -> Result<RouterModel> {
    decode_model(&read_file(path)?)
}

/// Parses a whitespace- or comma-separated text matrix, one vector per
/// non-empty line. Lines starting with `#` are skipped.
pub fn parse_text_matrix(text: &str) -> Result<VectorSet> {
    let mut dim = None;
    let mut data = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut n = 0;
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let v: f32 = tok.parse().map_err(|_| {
                Error::InvalidParam(format!(
                    "line {}: cannot parse {tok:?} as a number",
                    lineno + 1
                ))
            })?;
            data.push(v);
            n += 1;
        }
        match dim {
            None => dim = Some(n),
            Some(d) if d != n => {
                return Err(Error::InvalidParam(format!(
                    "line {}: expected {d} values, found {n}",
                    lineno + 1
                )))
            }
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| Error::InvalidParam("no vectors in input".into()))?;
    VectorSet::new(dim, data)
}
