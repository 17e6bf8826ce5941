//! Minimal dense compute core with reverse-mode differentiation.
//!
//! [`Tape`] records the handful of operations the decoder needs; the free
//! functions below are the same kernels without gradient bookkeeping.

mod gradcheck;
pub mod kernels;
mod tape;
mod tensor;

pub use gradcheck::grad_check;
pub use tape::{Grads, Tape, Var};
pub use tensor::{Real, Tensor};

use crate::error::{Error, Result};
use kernels::ConvDims;

/// Geometry of one convolutional layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvLayerSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub dilation: usize,
    pub separable: bool,
}

impl ConvLayerSpec {
    pub fn dense(in_channels: usize, out_channels: usize, kernel_size: usize, dilation: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel_size,
            dilation,
            separable: false,
        }
    }

    pub fn separable(in_channels: usize, out_channels: usize, kernel_size: usize, dilation: usize) -> Self {
        Self {
            separable: true,
            ..Self::dense(in_channels, out_channels, kernel_size, dilation)
        }
    }

    /// Samples consumed by the kernel span.
    pub fn span(&self) -> usize {
        (self.kernel_size - 1) * self.dilation + 1
    }

    /// Learnable weights per output filter (bias excluded).
    pub fn weights_per_filter(&self) -> usize {
        if self.separable {
            self.in_channels + self.kernel_size
        } else {
            self.in_channels * self.kernel_size
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.dilation == 0 {
            return Err(Error::InvalidArgument("kernel size and dilation must be >= 1".into()));
        }
        Ok(())
    }

    fn dims(&self, x: &Tensor<impl Real>) -> Result<ConvDims> {
        self.validate()?;
        let s = x.shape();
        if s.len() != 2 || s[0] != self.in_channels {
            return Err(Error::Shape(format!(
                "expected [{}, T] input, got {s:?}",
                self.in_channels
            )));
        }
        if s[1] < self.span() {
            return Err(Error::TooShort {
                required: self.span(),
                actual: s[1],
            });
        }
        Ok(ConvDims {
            c_in: self.in_channels,
            c_out: self.out_channels,
            kernel: self.kernel_size,
            dilation: self.dilation,
            t_in: s[1],
        })
    }
}

/// Unpadded dilated convolution: `out[o, t] = b[o] + Σ_c Σ_k w[o, c, k] x[c, t + k·d]`.
pub fn conv1d_dilated<T: Real>(
    x: &Tensor<T>,
    spec: &ConvLayerSpec,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let dims = spec.dims(x)?;
    if weights.shape() != [spec.out_channels, spec.in_channels, spec.kernel_size] || bias.shape() != [spec.out_channels]
    {
        return Err(Error::Shape(format!(
            "weights {:?} / bias {:?} do not match {spec:?}",
            weights.shape(),
            bias.shape()
        )));
    }
    let out = kernels::conv1d_forward(x.data(), weights.data(), bias.data(), dims);
    Ok(Tensor::from_parts(vec![dims.c_out, dims.t_out()], out))
}

/// Rank-1 convolution with `w[o, c, k] = spatial[o, c] · temporal[o, k]`.
pub fn separable_conv1d<T: Real>(
    x: &Tensor<T>,
    spec: &ConvLayerSpec,
    spatial: &Tensor<T>,
    temporal: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let dims = spec.dims(x)?;
    if spatial.shape() != [spec.out_channels, spec.in_channels]
        || temporal.shape() != [spec.out_channels, spec.kernel_size]
        || bias.shape() != [spec.out_channels]
    {
        return Err(Error::Shape(format!(
            "spatial {:?} / temporal {:?} / bias {:?} do not match {spec:?}",
            spatial.shape(),
            temporal.shape(),
            bias.shape()
        )));
    }
    let (out, _) = kernels::separable_forward(x.data(), spatial.data(), temporal.data(), bias.data(), dims);
    Ok(Tensor::from_parts(vec![dims.c_out, dims.t_out()], out))
}

pub fn relu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    Tensor::from_parts(x.shape().to_vec(), kernels::relu_forward(x.data()))
}

/// `S[i, j] = <a_i, b_j> / (‖a_i‖ ‖b_j‖)`, norms floored at 1e-12.
pub fn cosine_similarity_matrix<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    if a.shape().len() != 2 || a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "cosine_similarity_matrix: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (rows, cols) = (a.shape()[0], a.shape()[1]);
    let (ah, _) = kernels::normalize_rows(a.data(), cols);
    let (bh, _) = kernels::normalize_rows(b.data(), cols);
    Ok(Tensor::from_parts(
        vec![rows, rows],
        kernels::cosine_from_normalized(&ah, &bh, cols),
    ))
}

/// Bias-free single-neuron readout over the flattened input.
pub fn linear_readout<T: Real>(d: &Tensor<T>, v: &Tensor<T>) -> Result<T> {
    if d.len() != v.len() {
        return Err(Error::Shape(format!(
            "readout: {} inputs vs {} weights",
            d.len(),
            v.len()
        )));
    }
    Ok(d.data()
        .iter()
        .zip(v.data())
        .fold(T::zero(), |acc, (a, b)| acc + *a * *b))
}

pub fn sigmoid<T: Real>(z: T) -> T {
    kernels::sigmoid(z)
}

/// Binary cross-entropy with the probability clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss<T: Real>(p: T, y: T) -> Result<T> {
    if y != T::zero() && y != T::one() {
        return Err(Error::InvalidArgument(format!("target must be 0 or 1, got {y:?}")));
    }
    Ok(kernels::bce(p, y))
}
