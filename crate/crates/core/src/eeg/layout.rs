//! Electrode layouts on the unit sphere.
//!
//! Positions come from an idealised spherical 10-10 model: the equator
//! ring (Fpz, T7, Oz, ...) sits at 90° from the vertex with 18° spacing,
//! midline rows at 22.5° steps, and numbered electrodes are spread evenly
//! along the great-circle arc from the row's midline point to its ring
//! point. The 9/10 electrodes sit on a lower ring at 112.5°.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Biosemi 64-channel cap, in the order the system stores them.
pub const BIOSEMI64: [&str; 64] = [
    "Fp1", "AF7", "AF3", "F1", "F3", "F5", "F7", "FT7", "FC5", "FC3", "FC1", "C1", "C3", "C5", "T7", "TP7", "CP5",
    "CP3", "CP1", "P1", "P3", "P5", "P7", "P9", "PO7", "PO3", "O1", "Iz", "Oz", "POz", "Pz", "CPz", "Fpz", "Fp2",
    "AF8", "AF4", "AFz", "Fz", "F2", "F4", "F6", "F8", "FT8", "FC6", "FC4", "FC2", "FCz", "Cz", "C2", "C4", "C6", "T8",
    "TP8", "CP6", "CP4", "CP2", "P2", "P4", "P6", "P8", "P10", "PO8", "PO4", "O2",
];

/// Channels of the 63-electrode easycap-M1 montage absent from Biosemi 64.
pub const EASYCAP_ONLY: [&str; 4] = ["FT9", "FT10", "TP9", "TP10"];
/// Biosemi 64 channels absent from the easycap-M1 montage.
pub const BIOSEMI_ONLY: [&str; 5] = ["Fpz", "Iz", "P9", "P10", "PO4"];

/// Default frontal set averaged for the frontal-power artifact detector.
pub const FRONTAL_CHANNELS: [&str; 5] = ["Fp1", "Fp2", "AF3", "AF4", "Fz"];

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelLayout {
    names: Vec<String>,
    positions: Vec<[f64; 3]>,
}

impl ChannelLayout {
    pub fn new(names: Vec<String>, positions: Vec<[f64; 3]>) -> Result<Self> {
        if names.len() != positions.len() {
            return Err(Error::Shape(format!(
                "{} names vs {} positions",
                names.len(),
                positions.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if seen.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate channel {n}")));
            }
        }
        for (n, p) in names.iter().zip(&positions) {
            let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "position of {n} is not on the unit sphere (|p| = {norm})"
                )));
            }
        }
        Ok(Self { names, positions })
    }

    /// Builds a layout from standard 10-10 labels.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let names: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let positions = names
            .iter()
            .map(|n| standard_position(n).ok_or_else(|| Error::InvalidArgument(format!("unknown 10-10 label {n}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, positions)
    }

    pub fn biosemi64() -> Self {
        Self::from_labels(&BIOSEMI64).expect("built-in layout")
    }

    /// 63-channel easycap-M1 montage (earlobe reference not included).
    pub fn easycap_m1() -> Self {
        let mut labels: Vec<&str> = BIOSEMI64
            .iter()
            .copied()
            .filter(|l| !BIOSEMI_ONLY.contains(l))
            .collect();
        labels.extend(EASYCAP_ONLY);
        Self::from_labels(&labels).expect("built-in layout")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Plain-text table: one channel per line, `name x y z`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (n, p) in self.names.iter().zip(&self.positions) {
            let _ = writeln!(s, "{n} {:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut names = Vec::new();
        let mut positions = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::InvalidArgument(format!(
                    "layout line {}: expected `name x y z`",
                    lineno + 1
                )));
            }
            let mut p = [0.0; 3];
            for (k, f) in fields[1..].iter().enumerate() {
                p[k] = f
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("layout line {}: bad number {f}", lineno + 1)))?;
            }
            names.push(fields[0].to_string());
            positions.push(p);
        }
        Self::new(names, positions)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Great-circle angle between two unit vectors, in radians.
pub fn angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    d.acos()
}

fn spherical(polar_deg: f64, azimuth_deg: f64, right: bool) -> [f64; 3] {
    let (t, a) = (polar_deg.to_radians(), azimuth_deg.to_radians());
    let side = if right { 1.0 } else { -1.0 };
    [side * t.sin() * a.sin(), t.sin() * a.cos(), t.cos()]
}

fn slerp(a: [f64; 3], b: [f64; 3], frac: f64) -> [f64; 3] {
    let om = angle(&a, &b);
    if om < 1e-12 {
        return a;
    }
    let (wa, wb) = (((1.0 - frac) * om).sin() / om.sin(), (frac * om).sin() / om.sin());
    let p = [wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]];
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

/// Idealised unit-sphere position of a 10-10 label (`Fp1`, `AFz`, `TP10`, ...).
pub fn standard_position(label: &str) -> Option<[f64; 3]> {
    let split = label.find(|c: char| c.is_ascii_digit() || c == 'z')?;
    let (row, idx) = label.split_at(split);
    // (midline polar angle, midline azimuth, ring azimuth of the 7/8 electrode)
    let (mid_polar, mid_az, ring_az) = match row.to_ascii_uppercase().as_str() {
        "FP" => (90.0, 0.0, 18.0),
        "AF" => (67.5, 0.0, 36.0),
        "F" => (45.0, 0.0, 54.0),
        "FC" | "FT" => (22.5, 0.0, 72.0),
        "C" | "T" => (0.0, 0.0, 90.0),
        "CP" | "TP" => (22.5, 180.0, 108.0),
        "P" => (45.0, 180.0, 126.0),
        "PO" => (67.5, 180.0, 144.0),
        "O" => (90.0, 180.0, 162.0),
        "I" => (112.5, 180.0, 162.0),
        _ => return None,
    };
    if idx == "z" {
        return Some(spherical(mid_polar, mid_az, true));
    }
    let k: u32 = idx.parse().ok()?;
    if k == 0 {
        return None;
    }
    let right = k.is_multiple_of(2);
    let step = if right { k } else { k + 1 }; // 2, 4, 6, 8, 10
    let mid = spherical(mid_polar, mid_az, right);
    match step {
        2 | 4 | 6 | 8 if row.eq_ignore_ascii_case("FP") => (step == 2).then(|| spherical(90.0, ring_az, right)),
        2 | 4 | 6 | 8 => {
            let ring = spherical(90.0, ring_az, right);
            Some(slerp(mid, ring, step as f64 / 8.0))
        }
        10 => Some(spherical(112.5, ring_az, right)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_layouts_have_expected_sizes() {
        assert_eq!(ChannelLayout::biosemi64().len(), 64);
        assert_eq!(ChannelLayout::easycap_m1().len(), 63);
    }

    #[test]
    fn landmarks_land_where_expected() {
        let cz = standard_position("Cz").unwrap();
        assert!((cz[2] - 1.0).abs() < 1e-12);
        let fpz = standard_position("Fpz").unwrap();
        assert!((fpz[1] - 1.0).abs() < 1e-12);
        let t7 = standard_position("T7").unwrap();
        assert!((t7[0] + 1.0).abs() < 1e-12);
        let c3 = standard_position("C3").unwrap();
        assert!((angle(&cz, &c3).to_degrees() - 45.0).abs() < 1e-9);
        assert!(standard_position("Xy1").is_none());
    }

    #[test]
    fn text_round_trip() {
        let l = ChannelLayout::easycap_m1();
        assert_eq!(ChannelLayout::parse(&l.to_text()).unwrap(), l);
    }

    #[test]
    fn rejects_duplicates_and_off_sphere_points() {
        assert!(ChannelLayout::new(vec!["a".into(), "a".into()], vec![[1.0, 0.0, 0.0]; 2]).is_err());
        assert!(ChannelLayout::new(vec!["a".into()], vec![[2.0, 0.0, 0.0]]).is_err());
    }
}
