//! Binary ensemble files: one JSON header line followed by raw coefficients.
//!
//! ```text
//! {"version":1,"modes":M,"count":K,"seed":S,"time":T,"measure":{...}}\n
//! K records × (M+1) × (re: f64 LE, im: f64 LE)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use bbmflow_core::random_fields::{Ensemble, MeasureSpec};
use bbmflow_core::spectral::SpectralField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
const PAIR_BYTES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub modes: usize,
    pub count: usize,
    pub seed: u64,
    pub time: f64,
    pub measure: MeasureSpec,
}

impl Header {
    pub fn of(e: &Ensemble) -> Self {
        Self {
            version: FORMAT_VERSION,
            modes: e.max_mode(),
            count: e.len(),
            seed: e.seed(),
            time: e.time(),
            measure: e.spec().clone(),
        }
    }

    pub fn body_len(&self) -> usize {
        self.count * (self.modes + 1) * PAIR_BYTES
    }
}

pub fn encode(e: &Ensemble) -> Vec<u8> {
    let header = Header::of(e);
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(header.body_len());
    for u in e.samples() {
        for c in u.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

/// Parses only the header line.
pub fn decode_header(bytes: &[u8]) -> Result<(Header, &[u8]), CliError> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| CliError::MalformedHeader("no header line".into()))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| CliError::MalformedHeader(e.to_string()))?;
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(CliError::VersionMismatch { found: v }),
        None => return Err(CliError::MalformedHeader("missing version".into())),
    }
    let header: Header =
        serde_json::from_value(value).map_err(|e| CliError::MalformedHeader(e.to_string()))?;
    if header.count == 0 {
        return Err(CliError::MalformedHeader("count must be positive".into()));
    }
    if header.measure.modes() != header.modes {
        return Err(CliError::MalformedHeader(format!(
            "measure has {} modes but header declares {}",
            header.measure.modes(),
            header.modes
        )));
    }
    Ok((header, &bytes[newline + 1..]))
}

pub fn decode(bytes: &[u8]) -> Result<Ensemble, CliError> {
    let (header, body) = decode_header(bytes)?;
    let expected = header.body_len();
    if body.len() < expected {
        return Err(CliError::TruncatedBody {
            expected,
            found: body.len(),
        });
    }
    if body.len() > expected {
        return Err(CliError::TrailingBytes {
            expected,
            found: body.len(),
        });
    }
    let f64_at = |k: usize| f64::from_le_bytes(body[k..k + 8].try_into().expect("8 bytes"));
    let record = (header.modes + 1) * PAIR_BYTES;
    let samples = (0..header.count)
        .map(|i| {
            let coeffs = (0..=header.modes)
                .map(|n| {
                    let at = i * record + n * PAIR_BYTES;
                    Complex64::new(f64_at(at), f64_at(at + 8))
                })
                .collect();
            SpectralField::new(coeffs).map_err(|e| CliError::InvalidRecord {
                index: i,
                reason: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble::new(header.measure, header.seed, header.time, samples)?)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_ensemble(e: &Ensemble, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &encode(e))
}

pub fn read_ensemble(path: &Path) -> Result<Ensemble, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes)
}
