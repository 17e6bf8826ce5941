use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmdec::analysis::{average_sigmoids, composite_predict, lda_fit};
use mmdec::data::{decode_timeseries, encode_timeseries, SplitFractions};
use mmdec::eeg::{common_average_reference, threshold_interpolate, ChannelLayout, EegRecording};
use mmdec::signal::fir_zero_phase;
use mmdec::train::{balanced_batches, enumerate_examples, SegmentPlan};

fn recording(rows: Vec<Vec<f64>>) -> EegRecording {
    let names = ["Fz", "Cz", "Pz", "Oz", "C3", "C4"];
    let layout = ChannelLayout::from_labels(&names[..rows.len()]).unwrap();
    EegRecording::new(rows, 64.0, layout).unwrap()
}

fn rows(channels: usize, samples: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1e-3f64..1e-3, samples), channels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn car_sums_to_zero(x in (2usize..=6).prop_flat_map(|c| rows(c, 40))) {
        let c = x.len() as f64;
        let y = common_average_reference(&recording(x)).unwrap();
        for t in 0..y.samples() {
            let s: f64 = y.data().iter().map(|ch| ch[t]).sum();
            prop_assert!(s.abs() < 1e-9 * c);
        }
    }

    #[test]
    fn glitch_interpolation_is_idempotent(
        x in (1usize..=6).prop_flat_map(|c| rows(c, 50)),
        spikes in prop::collection::vec((0usize..6, 0usize..50, -2e-3f64..2e-3), 0..20),
    ) {
        let mut x = x;
        let c = x.len();
        for (ch, t, v) in spikes {
            x[ch % c][t] = v;
        }
        let (once, _) = threshold_interpolate(&recording(x), 5e-4).unwrap();
        let (twice, mask) = threshold_interpolate(&once, 5e-4).unwrap();
        prop_assert_eq!(once.data(), twice.data());
        prop_assert_eq!(mask.flagged_samples(), 0);
    }

    #[test]
    fn zero_phase_filter_keeps_mirror_symmetry(half in prop::collection::vec(-1.0f64..1.0, 600..1200)) {
        let mut x = half.clone();
        x.push(0.3);
        x.extend(half.iter().rev());
        let y = fir_zero_phase(&x, 512.0, (70.0, 220.0), 513).unwrap();
        let n = y.len();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for i in 0..n / 2 {
            prop_assert!((y[i] - y[n - 1 - i]).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn onsets_step_by_the_stride_and_stay_inside(samples in 0usize..5000, stride in 1usize..100) {
        let plan = SegmentPlan { len: 192, stride, gap: 64 };
        let ex = enumerate_examples(0, samples, plan);
        for w in ex.windows(2) {
            prop_assert_eq!(w[1].matched_onset, w[0].matched_onset + stride);
        }
        for e in &ex {
            prop_assert!(e.matched_onset + e.len <= samples);
            prop_assert!(e.mismatched_onset + e.len <= samples);
            prop_assert_eq!(e.mismatched_onset, e.matched_onset + e.len + plan.gap);
        }
    }

    #[test]
    fn every_batch_is_half_and_half(n in 0usize..2000, seed in any::<u64>()) {
        let ex = enumerate_examples(0, n * 64 + 448, SegmentPlan::from_seconds(3.0, 1.0, 1.0, 64.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batches = balanced_batches(&ex, 128, &mut rng);
        prop_assert_eq!(batches.len(), ex.len() / 128);
        for b in batches {
            prop_assert_eq!(b.len(), 128);
            prop_assert_eq!(b.iter().filter(|e| e.label == 1).count(), 64);
        }
    }

    #[test]
    fn splits_partition_each_trial(seconds in 1usize..2000, extra in 0usize..64, rate in prop::sample::select(vec![64.0, 512.0])) {
        let n = seconds * rate as usize + extra;
        let [a, b, c] = SplitFractions::default().ranges(n, rate);
        prop_assert_eq!(a.start, 0);
        prop_assert_eq!(a.end, b.start);
        prop_assert_eq!(b.end, c.start);
        prop_assert_eq!(c.end, n);
        prop_assert_eq!(a.end % rate as usize, 0);
        prop_assert_eq!(b.end % rate as usize, 0);
    }

    #[test]
    fn timeseries_round_trip_is_bit_exact(bits in prop::collection::vec(prop::collection::vec(any::<u32>(), 17), 1..4)) {
        let data: Vec<Vec<f32>> = bits
            .iter()
            .map(|r| r.iter().map(|b| f32::from_bits(*b)).map(|v| if v.is_finite() { v } else { 0.0 }).collect())
            .collect();
        let names: Vec<String> = (0..data.len()).map(|i| format!("ch{i}")).collect();
        let buf = encode_timeseries(&data, 512.0, &names).unwrap();
        let ts = decode_timeseries(&buf, std::path::Path::new("mem")).unwrap();
        let same = ts.data.iter().flatten().zip(data.iter().flatten()).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
        prop_assert_eq!(ts.channel_names, names);
    }

    #[test]
    fn averaging_ignores_instance_order(
        probs in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 20), 1..12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut shuffled = probs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = average_sigmoids(&probs).unwrap();
        let b = average_sigmoids(&shuffled).unwrap();
        for (x, y) in a.averaged.iter().zip(&b.averaged) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shrinking_towards_one_half_keeps_decisions(
        probs in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 20), 1..12),
        s in 0.01f64..1.0,
    ) {
        let shrunk: Vec<Vec<f64>> = probs.iter().map(|r| r.iter().map(|p| 0.5 + s * (p - 0.5)).collect()).collect();
        let a = average_sigmoids(&probs).unwrap();
        let b = average_sigmoids(&shrunk).unwrap();
        for ((m, da), db) in a.averaged.iter().zip(a.decisions()).zip(b.decisions()) {
            if (m - 0.5).abs() > 1e-12 {
                prop_assert_eq!(da, db);
            }
        }
    }

    #[test]
    fn lda_decisions_survive_common_affine_maps(
        seed in any::<u64>(),
        scale in 0.05f64..20.0,
        shift in -5.0f64..5.0,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let y = (i % 2) as u8;
            let c = 0.4 + 0.2 * f64::from(y);
            points.push([c + rng.random_range(-0.15..0.15), c + rng.random_range(-0.1..0.1)]);
            labels.push(y);
        }
        let moved: Vec<[f64; 2]> = points.iter().map(|p| [scale * p[0] + shift, scale * p[1] + shift]).collect();
        let a = lda_fit(&points, &labels).unwrap();
        let b = lda_fit(&moved, &labels).unwrap();
        for (p, q) in points.iter().zip(&moved) {
            let sa = a.score(p[0], p[1]);
            if sa.abs() > 1e-9 {
                prop_assert_eq!(composite_predict(&a, p[0], p[1]).1, composite_predict(&b, q[0], q[1]).1);
            }
        }
    }
}
