//! Binary timeseries container: one JSON header line, then channel-major
//! little-endian f32 samples.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TIMESERIES_VERSION: u32 = 1;
pub const ENCODING: &str = "f32le";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeseriesHeader {
    pub version: u32,
    pub channels: usize,
    pub channel_names: Vec<String>,
    pub rate: f64,
    pub samples: usize,
    pub encoding: String,
}

/// Channel-major samples with their rate and channel labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Timeseries {
    pub rate: f64,
    pub channel_names: Vec<String>,
    pub data: Vec<Vec<f32>>,
}

impl Timeseries {
    pub fn samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }
}

pub fn encode_timeseries(data: &[Vec<f32>], rate: f64, channel_names: &[String]) -> Result<Vec<u8>> {
    let samples = data.first().map_or(0, Vec::len);
    if data.iter().any(|c| c.len() != samples) {
        return Err(Error::Shape("channels differ in length".into()));
    }
    if channel_names.len() != data.len() {
        return Err(Error::Shape(format!(
            "{} channel names for {} channels",
            channel_names.len(),
            data.len()
        )));
    }
    let header = TimeseriesHeader {
        version: TIMESERIES_VERSION,
        channels: data.len(),
        channel_names: channel_names.to_vec(),
        rate,
        samples,
        encoding: ENCODING.into(),
    };
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    out.push(b'\n');
    out.reserve(4 * data.len() * samples);
    for ch in data {
        for v in ch {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_timeseries(buf: &[u8], origin: &Path) -> Result<Timeseries> {
    let nl = buf
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::format(origin, "missing header line"))?;
    let header: TimeseriesHeader =
        serde_json::from_slice(&buf[..nl]).map_err(|e| Error::format(origin, format!("bad header: {e}")))?;
    if header.version != TIMESERIES_VERSION {
        return Err(Error::format(origin, format!("unsupported version {}", header.version)));
    }
    if header.encoding != ENCODING {
        return Err(Error::format(origin, format!("unknown encoding {}", header.encoding)));
    }
    if header.channel_names.len() != header.channels {
        return Err(Error::format(origin, "channel name count differs from channel count"));
    }
    let payload = &buf[nl + 1..];
    let expected = 4 * header.channels * header.samples;
    if payload.len() != expected {
        return Err(Error::format(
            origin,
            format!("payload has {} bytes, header implies {expected}", payload.len()),
        ));
    }
    let data = if header.samples == 0 {
        vec![Vec::new(); header.channels]
    } else {
        payload
            .chunks_exact(4 * header.samples)
            .map(|ch| {
                ch.chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                    .collect()
            })
            .collect()
    };
    Ok(Timeseries {
        rate: header.rate,
        channel_names: header.channel_names,
        data,
    })
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_timeseries(path: &Path, data: &[Vec<f32>], rate: f64, channel_names: &[String]) -> Result<()> {
    write_atomic(path, &encode_timeseries(data, rate, channel_names)?)
}

pub fn read_timeseries(path: &Path) -> Result<Timeseries> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_timeseries(&buf, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ts");
        let data = vec![vec![1.5f32, -0.0, f32::MIN_POSITIVE], vec![3.25, 1e-30, -7.0]];
        write_timeseries(&path, &data, 64.0, &names(2)).unwrap();
        let back = read_timeseries(&path).unwrap();
        assert_eq!(back.rate, 64.0);
        for (a, b) in back.data.iter().flatten().zip(data.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn payload_size_is_four_bytes_per_value() {
        let buf = encode_timeseries(&vec![vec![0.0; 10]; 3], 512.0, &names(3)).unwrap();
        let nl = buf.iter().position(|b| *b == b'\n').unwrap();
        assert_eq!(buf.len() - nl - 1, 4 * 3 * 10);
    }

    #[test]
    fn truncation_reports_both_counts() {
        let buf = encode_timeseries(&vec![vec![0.0; 10]; 3], 512.0, &names(3)).unwrap();
        let err = decode_timeseries(&buf[..buf.len() - 4], Path::new("x"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("116") && err.contains("120"), "{err}");
    }

    #[test]
    fn unknown_encoding_is_rejected() {
        let buf = encode_timeseries(&[vec![0.0]], 1.0, &names(1)).unwrap();
        let text = String::from_utf8_lossy(&buf).replace("f32le", "f64be");
        assert!(decode_timeseries(text.as_bytes(), Path::new("x")).is_err());
    }
}
