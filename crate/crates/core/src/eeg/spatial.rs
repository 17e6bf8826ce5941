use super::layout::angle;
use super::{ChannelLayout, EegRecording};
use crate::error::{Error, Result};

/// Number of neighbours used to synthesise a missing channel.
pub const NEIGHBOURS: usize = 4;

/// Re-expresses `x` in `target`'s channel order. Channels present in both
/// layouts are copied unchanged, missing ones are an inverse-distance
/// weighted mix of the nearest source electrodes within 90°, and source
/// channels not in `target` are dropped.
pub fn map_layout(x: &EegRecording, target: &ChannelLayout) -> Result<EegRecording> {
    let src = x.layout();
    let limit = std::f64::consts::FRAC_PI_2;
    let mut data = Vec::with_capacity(target.len());
    for (name, pos) in target.names().iter().zip(target.positions()) {
        if let Some(i) = src.index_of(name) {
            data.push(x.data()[i].clone());
            continue;
        }
        let mut near: Vec<(f64, usize)> = src
            .positions()
            .iter()
            .enumerate()
            .map(|(i, p)| (angle(pos, p), i))
            .filter(|(d, _)| *d <= limit)
            .collect();
        if near.is_empty() {
            return Err(Error::NoNeighbours(name.clone()));
        }
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        near.truncate(NEIGHBOURS);
        if near[0].0 < 1e-12 {
            // Same location under another name.
            data.push(x.data()[near[0].1].clone());
            continue;
        }
        let weights: Vec<f64> = near.iter().map(|(d, _)| 1.0 / d).collect();
        let total: f64 = weights.iter().sum();
        let mut ch = vec![0.0; x.samples()];
        for ((_, i), w) in near.iter().zip(&weights) {
            let w = w / total;
            for (o, v) in ch.iter_mut().zip(&x.data()[*i]) {
                *o += w * v;
            }
        }
        data.push(ch);
    }
    Ok(x.replace_layout(data, target.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_recording(layout: ChannelLayout, f: impl Fn(&[f64; 3]) -> f64) -> EegRecording {
        let data = layout.positions().iter().map(|p| vec![f(p); 3]).collect();
        EegRecording::new(data, 64.0, layout).unwrap()
    }

    #[test]
    fn same_layout_is_identity() {
        let x = field_recording(ChannelLayout::biosemi64(), |p| p[0] - 2.0 * p[2]);
        assert_eq!(map_layout(&x, x.layout()).unwrap(), x);
    }

    #[test]
    fn constant_field_stays_constant() {
        let x = field_recording(ChannelLayout::easycap_m1(), |_| 7.25);
        let y = map_layout(&x, &ChannelLayout::biosemi64()).unwrap();
        assert_eq!(y.channels(), 64);
        for ch in y.data() {
            assert!(ch.iter().all(|v| (v - 7.25).abs() < 1e-12));
        }
    }

    #[test]
    fn dipole_field_at_fpz() {
        let d = [0.2, 0.9, 0.4];
        let field = |p: &[f64; 3]| d[0] * p[0] + d[1] * p[1] + d[2] * p[2];
        let x = field_recording(ChannelLayout::easycap_m1(), field);
        let target = ChannelLayout::biosemi64();
        let y = map_layout(&x, &target).unwrap();
        let i = target.index_of("Fpz").unwrap();
        let truth = field(&target.positions()[i]);
        let rel = (y.data()[i][0] - truth).abs() / truth.abs();
        assert!(rel < 0.15, "{rel}");
    }

    #[test]
    fn round_trip_keeps_shared_channels_bit_exact() {
        let x = field_recording(ChannelLayout::easycap_m1(), |p| (3.0 * p[0]).sin() + p[1].powi(3));
        let there = map_layout(&x, &ChannelLayout::biosemi64()).unwrap();
        let back = map_layout(&there, x.layout()).unwrap();
        for name in x.layout().names() {
            if crate::eeg::layout::EASYCAP_ONLY.contains(&name.as_str()) {
                continue;
            }
            let i = x.layout().index_of(name).unwrap();
            assert_eq!(back.data()[i], x.data()[i]);
        }
    }

    #[test]
    fn isolated_target_is_an_error() {
        let src = ChannelLayout::from_labels(&["Oz"]).unwrap();
        let x = EegRecording::new(vec![vec![1.0]], 64.0, src).unwrap();
        let target = ChannelLayout::from_labels(&["Fpz"]).unwrap();
        assert!(matches!(map_layout(&x, &target), Err(Error::NoNeighbours(_))));
    }
}
