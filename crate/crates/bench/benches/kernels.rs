use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mmdec::autodiff::kernels::{conv1d_backward, conv1d_forward, ConvDims};
use mmdec::autodiff::Tensor;
use mmdec::model::{init_glorot, DecoderConfig};
use mmdec::signal::{fir_zero_phase, resample, FeatureKind};

fn ramp(n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|i| ((i as f32) * scale).sin()).collect()
}

fn conv(c: &mut Criterion) {
    let dims = ConvDims {
        c_in: 16,
        c_out: 16,
        kernel: 3,
        dilation: 3,
        t_in: 192,
    };
    let x = ramp(dims.c_in * dims.t_in, 0.37);
    let w = ramp(dims.c_out * dims.c_in * dims.kernel, 0.11);
    let b = vec![0.1f32; dims.c_out];
    c.bench_function("conv1d_forward 16x16x3 d3 t192", |bch| {
        bch.iter(|| conv1d_forward(black_box(&x), &w, &b, dims))
    });
    let dout = ramp(dims.c_out * dims.t_out(), 0.23);
    c.bench_function("conv1d_backward 16x16x3 d3 t192", |bch| {
        bch.iter(|| {
            let mut dx = vec![0.0f32; x.len()];
            let mut dw = vec![0.0f32; w.len()];
            let mut db = vec![0.0f32; b.len()];
            conv1d_backward(black_box(&x), &w, &dout, dims, Some(&mut dx), &mut dw, &mut db);
            dw
        })
    });
}

fn decoder(c: &mut Criterion) {
    for kind in [FeatureKind::Envelope, FeatureKind::EnvelopeModulations] {
        let cfg = DecoderConfig::new(kind);
        let params = init_glorot(&cfg, 0).unwrap();
        let t = cfg.segment_samples();
        let eeg = Tensor::new(&[cfg.eeg_channels, t], ramp(cfg.eeg_channels * t, 0.05)).unwrap();
        let a = Tensor::new(&[1, t], ramp(t, 0.3)).unwrap();
        let b = Tensor::new(&[1, t], ramp(t, 0.7)).unwrap();
        c.bench_function(&format!("decoder forward {kind}"), |bch| {
            bch.iter(|| params.forward(black_box(&eeg), &a, &b).unwrap())
        });
        c.bench_function(&format!("decoder loss_and_grad {kind}"), |bch| {
            bch.iter(|| {
                params
                    .loss_and_grad(black_box(eeg.clone()), a.clone(), b.clone(), 1.0)
                    .unwrap()
            })
        });
    }
}

fn dsp(c: &mut Criterion) {
    let x: Vec<f64> = (0..8192 * 4).map(|i| (i as f64 * 0.01).sin()).collect();
    c.bench_function("resample 8192 Hz -> 512 Hz, 4 s", |bch| {
        bch.iter(|| resample(black_box(&x), 8192.0, 512.0).unwrap())
    });
    c.bench_function("fir_zero_phase 70-220 Hz, 4 s at 8192 Hz", |bch| {
        bch.iter(|| fir_zero_phase(black_box(&x), 8192.0, (70.0, 220.0), 8193).unwrap())
    });
}

criterion_group!(benches, conv, decoder, dsp);
criterion_main!(benches);
