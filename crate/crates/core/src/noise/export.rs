use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{NoiseRecord, NoiseRole};

/// JSON sidecar describing a raw little-endian `f64` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawHeader {
    pub fs: f64,
    pub band: (f64, f64),
    pub psd_level: f64,
    pub seed: u64,
    pub substream: u64,
    pub role: NoiseRole,
    pub n_samples: usize,
}

/// Writes `index,t,value` rows.
pub fn write_csv<W: Write>(record: &NoiseRecord, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "index,t,value")?;
    for (i, x) in record.samples().iter().enumerate() {
        writeln!(out, "{i},{},{x}", i as f64 * record.dt())?;
    }
    out.flush()
}

fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut p = data_path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes the samples to `data_path` and the header to `data_path` + `.json`.
pub fn write_raw(record: &NoiseRecord, data_path: &Path) -> io::Result<RawHeader> {
    let header = RawHeader {
        fs: record.sample_rate(),
        band: record.band(),
        psd_level: record.target_psd_level(),
        seed: record.seed(),
        substream: record.substream(),
        role: record.role(),
        n_samples: record.len(),
    };
    let mut bytes = Vec::with_capacity(record.len() * 8);
    for x in record.samples() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(data_path, bytes)?;
    let json = serde_json::to_vec_pretty(&header).map_err(io::Error::other)?;
    fs::write(sidecar_path(data_path), json)?;
    Ok(header)
}

pub fn read_raw(data_path: &Path) -> io::Result<(RawHeader, Vec<f64>)> {
    let header: RawHeader = serde_json::from_slice(&fs::read(sidecar_path(data_path))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let bytes = fs::read(data_path)?;
    if bytes.len() != header.n_samples * 8 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "expected {} bytes for {} samples, found {}",
                header.n_samples * 8,
                header.n_samples,
                bytes.len()
            ),
        ));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, samples))
}
