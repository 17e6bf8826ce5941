//! The twin-module match-mismatch decoder: an EEG module and a stimulus
//! module project their inputs to 16-channel timeseries, two cosine
//! similarity matrices are formed against the candidate segments, and a
//! bias-free linear readout of their difference gives the logit.

mod checkpoint;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, MAGIC, VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Real, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::signal::FeatureKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    pub feature_kind: FeatureKind,
    pub eeg_channels: usize,
    pub hidden_channels: usize,
    pub kernel: usize,
    pub dilations: Vec<usize>,
    pub segment_seconds: f64,
}

impl DecoderConfig {
    pub fn new(feature_kind: FeatureKind) -> Self {
        Self {
            feature_kind,
            eeg_channels: 64,
            hidden_channels: 16,
            kernel: 3,
            dilations: vec![1, 3, 9],
            segment_seconds: 3.0,
        }
    }

    pub fn rate(&self) -> f64 {
        self.feature_kind.rate()
    }

    /// Training/evaluation segment length in samples.
    pub fn segment_samples(&self) -> usize {
        (self.segment_seconds * self.rate()).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.eeg_channels == 0 || self.hidden_channels == 0 || self.kernel == 0 {
            return Err(Error::Config("channel counts and kernel must be positive".into()));
        }
        if self.dilations.is_empty() || self.dilations.contains(&0) {
            return Err(Error::Config("dilations must be non-empty and positive".into()));
        }
        if self.dilations.len() > MAX_STAGES {
            return Err(Error::Config(format!("at most {MAX_STAGES} convolution stages")));
        }
        let rf = receptive_field(self).samples;
        if self.segment_samples() <= rf {
            return Err(Error::Config(format!(
                "segment of {} samples does not exceed the receptive field ({rf})",
                self.segment_samples()
            )));
        }
        Ok(())
    }

    /// Names and shapes of every parameter array, in storage order.
    pub fn param_shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        debug_assert!(self.dilations.len() <= MAX_STAGES);
        let (c, l, k) = (self.eeg_channels, self.hidden_channels, self.kernel);
        let layers = self.dilations.len();
        let mut v = vec![
            ("eeg.0.spatial", vec![l, c]),
            ("eeg.0.temporal", vec![l, k]),
            ("eeg.0.bias", vec![l]),
        ];
        for i in 1..layers {
            v.push((EEG_W[i], vec![l, l, k]));
            v.push((EEG_B[i], vec![l]));
        }
        for i in 0..layers {
            let cin = if i == 0 { 1 } else { l };
            v.push((STIM_W[i], vec![l, cin, k]));
            v.push((STIM_B[i], vec![l]));
        }
        v.push(("readout", vec![l * l]));
        v
    }
}

pub const MAX_STAGES: usize = 4;

// Layer names for up to four dilation stages.
const EEG_W: [&str; 4] = ["", "eeg.1.weight", "eeg.2.weight", "eeg.3.weight"];
const EEG_B: [&str; 4] = ["", "eeg.1.bias", "eeg.2.bias", "eeg.3.bias"];
const STIM_W: [&str; 4] = ["stim.0.weight", "stim.1.weight", "stim.2.weight", "stim.3.weight"];
const STIM_B: [&str; 4] = ["stim.0.bias", "stim.1.bias", "stim.2.bias", "stim.3.bias"];

/// Span of input samples feeding one output sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReceptiveField {
    pub samples: usize,
    pub seconds: f64,
}

pub fn receptive_field(config: &DecoderConfig) -> ReceptiveField {
    let samples = 1 + config.dilations.iter().map(|d| (config.kernel - 1) * d).sum::<usize>();
    ReceptiveField {
        samples,
        seconds: samples as f64 / config.rate(),
    }
}

/// All learnable arrays of one decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderParams<T: Real = f32> {
    config: DecoderConfig,
    arrays: Vec<Tensor<T>>,
}

impl<T: Real> DecoderParams<T> {
    /// Wraps arrays in `param_shapes` order, checking shapes and finiteness.
    pub fn from_arrays(config: DecoderConfig, arrays: Vec<Tensor<T>>) -> Result<Self> {
        config.validate()?;
        let shapes = config.param_shapes();
        if arrays.len() != shapes.len() {
            return Err(Error::Shape(format!(
                "expected {} arrays, got {}",
                shapes.len(),
                arrays.len()
            )));
        }
        for ((name, shape), a) in shapes.iter().zip(&arrays) {
            if a.shape() != shape.as_slice() {
                return Err(Error::Shape(format!("{name}: expected {shape:?}, got {:?}", a.shape())));
            }
            if a.data().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("decoder parameters"));
            }
        }
        Ok(Self { config, arrays })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn arrays(&self) -> &[Tensor<T>] {
        &self.arrays
    }

    pub fn arrays_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.arrays
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.config
            .param_shapes()
            .iter()
            .position(|(n, _)| *n == name)
            .map(|i| &self.arrays[i])
    }

    pub fn parameter_count(&self) -> usize {
        self.arrays.iter().map(Tensor::len).sum()
    }

    pub fn cast<U: Real>(&self) -> DecoderParams<U> {
        DecoderParams {
            config: self.config.clone(),
            arrays: self.arrays.iter().map(Tensor::cast).collect(),
        }
    }

    /// Flattened copy of every parameter, in storage order.
    pub fn flatten(&self) -> Vec<T> {
        self.arrays.iter().flat_map(|a| a.data().iter().copied()).collect()
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        let mut off = 0;
        for a in &mut self.arrays {
            let n = a.len();
            a.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(())
    }
}

/// Glorot-uniform initialisation with zero biases. Convolution fans count
/// channels times kernel taps; the two factors of the separable layer are
/// drawn independently with their own fans.
pub fn init_glorot(config: &DecoderConfig, seed: u64) -> Result<DecoderParams<f32>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrays = config
        .param_shapes()
        .into_iter()
        .map(|(name, shape)| {
            let n: usize = shape.iter().product();
            let data = match glorot_bound(name, &shape) {
                Some(a) => (0..n).map(|_| rng.random_range(-a..=a) as f32).collect(),
                None => vec![0.0f32; n],
            };
            Tensor::new(&shape, data)
        })
        .collect::<Result<Vec<_>>>()?;
    DecoderParams::from_arrays(config.clone(), arrays)
}

/// `sqrt(6 / (fan_in + fan_out))`, or `None` for bias arrays.
pub fn glorot_bound(name: &str, shape: &[usize]) -> Option<f64> {
    if name.ends_with("bias") {
        return None;
    }
    let (fan_in, fan_out) = match shape {
        [o, c, k] => (c * k, o * k),
        // Spatial [O, C] acts as a 1-tap conv from C to O channels; the
        // temporal [O, K] factor maps one channel to one over K taps.
        [o, c] if name.ends_with("spatial") => (*c, *o),
        [_, k] => (*k, *k),
        // Readout: 256 inputs to one logit.
        [n] => (*n, 1),
        _ => return None,
    };
    Some((6.0 / (fan_in + fan_out) as f64).sqrt())
}

/// Result of one decoder evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelOutput<T = f32> {
    pub probability: T,
    pub logit: T,
    /// Similarities against the first and second candidate, `[L, L]` row-major.
    pub similarity_a: Vec<T>,
    pub similarity_b: Vec<T>,
}

/// Tape handles for one recorded forward pass.
pub struct Recorded {
    pub params: Vec<Var>,
    pub eeg_embedding: Var,
    pub similarity_a: Var,
    pub similarity_b: Var,
    pub logit: Var,
    pub probability: Var,
}

fn check_inputs<T: Real>(config: &DecoderConfig, eeg: &Tensor<T>, a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    let es = eeg.shape();
    if es.len() != 2 || es[0] != config.eeg_channels {
        return Err(Error::Shape(format!(
            "EEG segment must be [{}, T], got {es:?}",
            config.eeg_channels
        )));
    }
    for s in [a.shape(), b.shape()] {
        if s != [1, es[1]] {
            return Err(Error::Shape(format!(
                "stimulus segment must be [1, {}], got {s:?}",
                es[1]
            )));
        }
    }
    let rf = receptive_field(config).samples;
    if es[1] < rf {
        return Err(Error::TooShort {
            required: rf,
            actual: es[1],
        });
    }
    Ok(())
}

impl<T: Real> DecoderParams<T> {
    fn record_eeg(&self, tape: &mut Tape<T>, p: &[Var], eeg: Var) -> Result<Var> {
        let d = &self.config.dilations;
        let mut h = tape.separable_conv1d(eeg, p[0], p[1], p[2], d[0])?;
        for (i, &dil) in d.iter().enumerate().skip(1) {
            h = tape.relu(h);
            let w = 3 + 2 * (i - 1);
            h = tape.conv1d(h, p[w], p[w + 1], dil)?;
        }
        Ok(h)
    }

    fn record_stim(&self, tape: &mut Tape<T>, p: &[Var], x: Var) -> Result<Var> {
        let d = &self.config.dilations;
        let base = 3 + 2 * (d.len() - 1);
        let mut h = x;
        for (i, &dil) in d.iter().enumerate() {
            if i > 0 {
                h = tape.relu(h);
            }
            h = tape.conv1d(h, p[base + 2 * i], p[base + 2 * i + 1], dil)?;
        }
        Ok(h)
    }

    /// Records the forward pass on `tape`. Parameters become leaves that
    /// require gradients when `trainable` is set.
    pub fn record(
        &self,
        tape: &mut Tape<T>,
        eeg: Tensor<T>,
        a: Tensor<T>,
        b: Tensor<T>,
        trainable: bool,
    ) -> Result<Recorded> {
        check_inputs(&self.config, &eeg, &a, &b)?;
        let params: Vec<Var> = self
            .arrays
            .iter()
            .map(|t| tape.leaf(t.clone().with_grad(trainable)))
            .collect();
        let eeg = tape.leaf(eeg);
        let a = tape.leaf(a);
        let b = tape.leaf(b);
        let e = self.record_eeg(tape, &params, eeg)?;
        let ga = self.record_stim(tape, &params, a)?;
        let gb = self.record_stim(tape, &params, b)?;
        let sa = tape.cosine_similarity(e, ga)?;
        let sb = tape.cosine_similarity(e, gb)?;
        let diff = tape.sub(sa, sb)?;
        let readout = *params.last().expect("readout array");
        let logit = tape.dot(diff, readout)?;
        let probability = tape.sigmoid(logit);
        Ok(Recorded {
            params,
            eeg_embedding: e,
            similarity_a: sa,
            similarity_b: sb,
            logit,
            probability,
        })
    }

    /// Probability that `a` is the stimulus segment matching `eeg`.
    pub fn forward(&self, eeg: &Tensor<T>, a: &Tensor<T>, b: &Tensor<T>) -> Result<ModelOutput<T>> {
        let mut tape = Tape::new();
        let r = self.record(&mut tape, eeg.clone(), a.clone(), b.clone(), false)?;
        Ok(ModelOutput {
            probability: tape.value(r.probability).item(),
            logit: tape.value(r.logit).item(),
            similarity_a: tape.value(r.similarity_a).data().to_vec(),
            similarity_b: tape.value(r.similarity_b).data().to_vec(),
        })
    }

    /// BCE loss of one example and its gradient, one vector per array.
    pub fn loss_and_grad(&self, eeg: Tensor<T>, a: Tensor<T>, b: Tensor<T>, y: T) -> Result<(T, Vec<Vec<T>>)> {
        let mut tape = Tape::new();
        let r = self.record(&mut tape, eeg, a, b, true)?;
        let loss = tape.bce(r.probability, y)?;
        let grads = tape.backward(loss)?;
        let g = r
            .params
            .iter()
            .zip(&self.arrays)
            .map(|(v, arr)| grads.get(*v).map_or_else(|| vec![T::zero(); arr.len()], <[T]>::to_vec))
            .collect();
        Ok((tape.value(loss).item(), g))
    }

    /// Projected EEG timeseries `[L, T − receptive field + 1]`.
    pub fn embed_eeg(&self, eeg: &Tensor<T>) -> Result<Tensor<T>> {
        let mut tape = Tape::new();
        let p: Vec<Var> = self.arrays.iter().map(|t| tape.leaf(t.clone())).collect();
        let x = tape.leaf(eeg.clone());
        let e = self.record_eeg(&mut tape, &p, x)?;
        Ok(tape.value(e).clone())
    }

    /// Projected stimulus timeseries `[L, T − receptive field + 1]`.
    pub fn embed_stimulus(&self, stim: &Tensor<T>) -> Result<Tensor<T>> {
        let mut tape = Tape::new();
        let p: Vec<Var> = self.arrays.iter().map(|t| tape.leaf(t.clone())).collect();
        let x = tape.leaf(stim.clone());
        let e = self.record_stim(&mut tape, &p, x)?;
        Ok(tape.value(e).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_inputs(t: usize, seed: u64) -> (Tensor<f32>, Tensor<f32>, Tensor<f32>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        (
            Tensor::new(&[64, t], v(64 * t)).unwrap(),
            Tensor::new(&[1, t], v(t)).unwrap(),
            Tensor::new(&[1, t], v(t)).unwrap(),
        )
    }

    #[test]
    fn receptive_field_values() {
        let env = receptive_field(&DecoderConfig::new(FeatureKind::Envelope));
        assert_eq!(env.samples, 27);
        assert_eq!((env.seconds * 1000.0).round(), 422.0);
        let ffr = receptive_field(&DecoderConfig::new(FeatureKind::EnvelopeModulations));
        assert_eq!((ffr.seconds * 1000.0).round(), 53.0);
    }

    #[test]
    fn glorot_bounds_and_zero_biases() {
        let cfg = DecoderConfig::new(FeatureKind::Envelope);
        let p = init_glorot(&cfg, 1).unwrap();
        for ((name, shape), arr) in cfg.param_shapes().iter().zip(p.arrays()) {
            match glorot_bound(name, shape) {
                None => assert!(arr.data().iter().all(|v| *v == 0.0), "{name}"),
                Some(a) => assert!(arr.data().iter().all(|v| (*v as f64).abs() <= a + 1e-7)),
            }
        }
        let a = glorot_bound("eeg.1.weight", &[16, 16, 3]).unwrap();
        assert!((a - 0.25).abs() < 1e-12);
        assert_eq!(init_glorot(&cfg, 1).unwrap(), p);
        assert_ne!(init_glorot(&cfg, 2).unwrap(), p);
    }

    #[test]
    fn parameter_count() {
        let p = init_glorot(&DecoderConfig::new(FeatureKind::Envelope), 0).unwrap();
        // separable 16·64 + 16·3 + 16, two dense 16·16·3 + 16, stimulus
        // 16·3 + 16 and two dense, readout 256
        let expected = 1024 + 48 + 16 + 2 * (768 + 16) + (48 + 16) + 2 * (768 + 16) + 256;
        assert_eq!(p.parameter_count(), expected);
        assert_eq!(p.arrays().len(), 14);
    }

    #[test]
    fn projected_length_is_t_minus_26() {
        let p = init_glorot(&DecoderConfig::new(FeatureKind::Envelope), 0).unwrap();
        let (eeg, a, _) = random_inputs(192, 3);
        assert_eq!(p.embed_eeg(&eeg).unwrap().shape(), &[16, 166]);
        assert_eq!(p.embed_stimulus(&a).unwrap().shape(), &[16, 166]);
    }

    #[test]
    fn identical_candidates_give_one_half() {
        let p = init_glorot(&DecoderConfig::new(FeatureKind::Envelope), 4).unwrap();
        let (eeg, a, _) = random_inputs(192, 5);
        let out = p.forward(&eeg, &a, &a).unwrap();
        assert_eq!(out.probability, 0.5);
        assert_eq!(out.logit, 0.0);
    }

    #[test]
    fn swapping_candidates_negates_the_logit() {
        let p = init_glorot(&DecoderConfig::new(FeatureKind::Envelope), 6).unwrap();
        let (eeg, a, b) = random_inputs(192, 7);
        let ab = p.forward(&eeg, &a, &b).unwrap();
        let ba = p.forward(&eeg, &b, &a).unwrap();
        assert_eq!(ab.logit, -ba.logit);
        assert!((ab.probability + ba.probability - 1.0).abs() < 1e-6);
        assert_eq!(ab.similarity_a, ba.similarity_b);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = init_glorot(&DecoderConfig::new(FeatureKind::Envelope), 0).unwrap();
        let (eeg, a, _) = random_inputs(192, 1);
        let short = Tensor::new(&[1, 100], vec![0.0; 100]).unwrap();
        assert!(p.forward(&eeg, &a, &short).is_err());
        let (tiny, ta, tb) = random_inputs(20, 1);
        assert!(matches!(p.forward(&tiny, &ta, &tb), Err(Error::TooShort { .. })));
    }

    #[test]
    fn config_rejects_segments_inside_the_receptive_field() {
        let mut cfg = DecoderConfig::new(FeatureKind::Envelope);
        cfg.segment_seconds = 0.4;
        assert!(cfg.validate().is_err());
    }
}
