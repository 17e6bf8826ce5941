//! Binary checkpoint container.
//!
//! Layout (little-endian): magic `MMD1`, u32 version, u8 feature kind,
//! u32 EEG channels, u32 hidden channels, u32 kernel, u32 stage count and
//! one u32 dilation per stage, f64 segment seconds, u32 array count, then
//! per array: u32 name length, UTF-8 name, u32 rank, u32 per dimension and
//! the f32 payload.

use std::path::Path;

use super::{DecoderConfig, DecoderParams, MAX_STAGES};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::signal::FeatureKind;

pub const MAGIC: &[u8; 4] = b"MMD1";
pub const VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

pub fn write_checkpoint(params: &DecoderParams<f32>) -> Vec<u8> {
    let cfg = params.config();
    let mut out = Vec::with_capacity(64 + 4 * params.parameter_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(cfg.feature_kind.code());
    put_u32(&mut out, cfg.eeg_channels);
    put_u32(&mut out, cfg.hidden_channels);
    put_u32(&mut out, cfg.kernel);
    put_u32(&mut out, cfg.dilations.len());
    for d in &cfg.dilations {
        put_u32(&mut out, *d);
    }
    out.extend_from_slice(&cfg.segment_seconds.to_le_bytes());
    let shapes = cfg.param_shapes();
    put_u32(&mut out, shapes.len());
    for ((name, _), arr) in shapes.iter().zip(params.arrays()) {
        put_u32(&mut out, name.len());
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, arr.shape().len());
        for d in arr.shape() {
            put_u32(&mut out, *d);
        }
        for v in arr.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated at byte {}", self.pos)),
        }
    }

    fn u32(&mut self) -> std::result::Result<usize, String> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }
}

fn parse(buf: &[u8]) -> std::result::Result<DecoderParams<f32>, String> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("not a decoder checkpoint (bad magic)".into());
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let code = r.take(1)?[0];
    let feature_kind = FeatureKind::from_code(code).ok_or(format!("unknown feature kind {code}"))?;
    let eeg_channels = r.u32()?;
    let hidden_channels = r.u32()?;
    let kernel = r.u32()?;
    let stages = r.u32()?;
    if stages > MAX_STAGES {
        return Err(format!("{stages} stages"));
    }
    let dilations = (0..stages)
        .map(|_| r.u32())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let segment_seconds = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
    let config = DecoderConfig {
        feature_kind,
        eeg_channels,
        hidden_channels,
        kernel,
        dilations,
        segment_seconds,
    };
    config.validate().map_err(|e| e.to_string())?;
    let shapes = config.param_shapes();
    let count = r.u32()?;
    if count != shapes.len() {
        return Err(format!("{count} arrays, config needs {}", shapes.len()));
    }
    let mut arrays = Vec::with_capacity(count);
    for (name, shape) in &shapes {
        let len = r.u32()?;
        let got = std::str::from_utf8(r.take(len)?).map_err(|_| "array name is not UTF-8")?;
        if got != *name {
            return Err(format!("expected array {name}, found {got}"));
        }
        let rank = r.u32()?;
        let dims = (0..rank).map(|_| r.u32()).collect::<std::result::Result<Vec<_>, _>>()?;
        if dims != *shape {
            return Err(format!("{name}: shape {dims:?} does not match config {shape:?}"));
        }
        let n: usize = dims.iter().product();
        let bytes = r.take(4 * n)?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        arrays.push(Tensor::new(&dims, data).map_err(|e| e.to_string())?);
    }
    if r.pos != buf.len() {
        return Err(format!("{} trailing bytes", buf.len() - r.pos));
    }
    DecoderParams::from_arrays(config, arrays).map_err(|e| e.to_string())
}

pub fn read_checkpoint(buf: &[u8], origin: &Path) -> Result<DecoderParams<f32>> {
    parse(buf).map_err(|msg| Error::format(origin, msg))
}

pub fn save_checkpoint(params: &DecoderParams<f32>, path: &Path) -> Result<()> {
    crate::data::write_atomic(path, &write_checkpoint(params))
}

pub fn load_checkpoint(path: &Path) -> Result<DecoderParams<f32>> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&buf, path)
}
