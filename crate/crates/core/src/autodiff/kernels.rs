//! Forward and backward kernels for the operations the decoder uses.
//!
//! Layout conventions: signals are `[channels, time]`, dense convolution
//! weights `[out, in, kernel]`, separable weights `spatial [out, in]` and
//! `temporal [out, kernel]`. No padding anywhere; a layer with kernel `k`
//! and dilation `d` shortens the signal by `(k - 1) * d` samples.

use super::tensor::Real;

/// Dot product with eight independent accumulators so the loop vectorises.
/// The reduction order is fixed, so results are reproducible.
#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for j in 0..8 {
            acc[j] += x[j] * y[j];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail += *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[inline]
fn sum<T: Real>(x: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let c = x.chunks_exact(8);
    let r = c.remainder();
    for ch in c {
        for j in 0..8 {
            acc[j] += ch[j];
        }
    }
    let tail: T = r.iter().copied().sum();
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Output length of an unpadded dilated convolution, or `None` if the input
/// is shorter than the kernel span.
pub fn conv_output_len(t_in: usize, kernel: usize, dilation: usize) -> Option<usize> {
    let span = (kernel - 1) * dilation + 1;
    (t_in >= span).then(|| t_in - span + 1)
}

/// Geometry of one convolution call.
#[derive(Clone, Copy, Debug)]
pub struct ConvDims {
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub t_in: usize,
}

impl ConvDims {
    pub fn t_out(&self) -> usize {
        self.t_in - (self.kernel - 1) * self.dilation
    }
}

pub fn conv1d_forward<T: Real>(x: &[T], w: &[T], b: &[T], dims: ConvDims) -> Vec<T> {
    let ConvDims {
        c_in,
        c_out,
        kernel,
        dilation,
        t_in,
    } = dims;
    let t_out = dims.t_out();
    let mut out = vec![T::zero(); c_out * t_out];
    for (o, row) in out.chunks_exact_mut(t_out).enumerate() {
        row.fill(b[o]);
        for c in 0..c_in {
            let xc = &x[c * t_in..(c + 1) * t_in];
            for k in 0..kernel {
                let wv = w[(o * c_in + c) * kernel + k];
                axpy(wv, &xc[k * dilation..k * dilation + t_out], row);
            }
        }
    }
    out
}

/// Accumulates gradients of a dense dilated convolution. `dx` is skipped
/// when the input does not need a gradient.
pub fn conv1d_backward<T: Real>(
    x: &[T],
    w: &[T],
    dout: &[T],
    dims: ConvDims,
    mut dx: Option<&mut [T]>,
    dw: &mut [T],
    db: &mut [T],
) {
    let ConvDims {
        c_in,
        kernel,
        dilation,
        t_in,
        ..
    } = dims;
    let t_out = dims.t_out();
    for (o, g) in dout.chunks_exact(t_out).enumerate() {
        db[o] += sum(g);
        for c in 0..c_in {
            let xc = &x[c * t_in..(c + 1) * t_in];
            for k in 0..kernel {
                let idx = (o * c_in + c) * kernel + k;
                let lo = k * dilation;
                dw[idx] += dot(g, &xc[lo..lo + t_out]);
                if let Some(dx) = dx.as_deref_mut() {
                    axpy(w[idx], g, &mut dx[c * t_in + lo..c * t_in + lo + t_out]);
                }
            }
        }
    }
}

/// Rank-1 factored convolution: `w[o, c, k] = spatial[o, c] * temporal[o, k]`.
/// Returns the output and the spatially projected input `[c_out, t_in]`,
/// which the backward pass reuses.
pub fn separable_forward<T: Real>(x: &[T], spatial: &[T], temporal: &[T], b: &[T], dims: ConvDims) -> (Vec<T>, Vec<T>) {
    let ConvDims {
        c_in,
        c_out,
        kernel,
        dilation,
        t_in,
    } = dims;
    let t_out = dims.t_out();
    let mut projected = vec![T::zero(); c_out * t_in];
    for (o, p) in projected.chunks_exact_mut(t_in).enumerate() {
        for c in 0..c_in {
            axpy(spatial[o * c_in + c], &x[c * t_in..(c + 1) * t_in], p);
        }
    }
    let mut out = vec![T::zero(); c_out * t_out];
    for (o, row) in out.chunks_exact_mut(t_out).enumerate() {
        row.fill(b[o]);
        let p = &projected[o * t_in..(o + 1) * t_in];
        for k in 0..kernel {
            let lo = k * dilation;
            axpy(temporal[o * kernel + k], &p[lo..lo + t_out], row);
        }
    }
    (out, projected)
}

#[allow(clippy::too_many_arguments)]
pub fn separable_backward<T: Real>(
    x: &[T],
    spatial: &[T],
    temporal: &[T],
    projected: &[T],
    dout: &[T],
    dims: ConvDims,
    mut dx: Option<&mut [T]>,
    dspatial: &mut [T],
    dtemporal: &mut [T],
    db: &mut [T],
) {
    let ConvDims {
        c_in,
        kernel,
        dilation,
        t_in,
        ..
    } = dims;
    let t_out = dims.t_out();
    let mut dp = vec![T::zero(); t_in];
    for (o, g) in dout.chunks_exact(t_out).enumerate() {
        db[o] += sum(g);
        let p = &projected[o * t_in..(o + 1) * t_in];
        dp.fill(T::zero());
        for k in 0..kernel {
            let lo = k * dilation;
            dtemporal[o * kernel + k] += dot(g, &p[lo..lo + t_out]);
            axpy(temporal[o * kernel + k], g, &mut dp[lo..lo + t_out]);
        }
        for c in 0..c_in {
            let xc = &x[c * t_in..(c + 1) * t_in];
            dspatial[o * c_in + c] += dot(&dp, xc);
            if let Some(dx) = dx.as_deref_mut() {
                axpy(spatial[o * c_in + c], &dp, &mut dx[c * t_in..(c + 1) * t_in]);
            }
        }
    }
}

pub fn relu_forward<T: Real>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect()
}

/// Subgradient at exactly zero is zero.
pub fn relu_backward<T: Real>(x: &[T], dout: &[T], dx: &mut [T]) {
    for ((d, &xi), &g) in dx.iter_mut().zip(x).zip(dout) {
        if xi > T::zero() {
            *d += g;
        }
    }
}

/// Norm floor for all-zero channels.
pub const NORM_FLOOR: f64 = 1e-12;

/// Per-row unit normalisation; returns normalised rows and the (floored) norms.
pub fn normalize_rows<T: Real>(a: &[T], cols: usize) -> (Vec<T>, Vec<T>) {
    let floor = T::of(NORM_FLOOR);
    let mut hat = Vec::with_capacity(a.len());
    let mut norms = Vec::with_capacity(a.len() / cols.max(1));
    for row in a.chunks_exact(cols) {
        let n = dot(row, row).sqrt().max(floor);
        norms.push(n);
        hat.extend(row.iter().map(|&v| v / n));
    }
    (hat, norms)
}

/// `S[i, j] = <a_hat_i, b_hat_j>` for row-normalised inputs.
pub fn cosine_from_normalized<T: Real>(a_hat: &[T], b_hat: &[T], cols: usize) -> Vec<T> {
    let ra = a_hat.len() / cols;
    let rb = b_hat.len() / cols;
    let mut s = Vec::with_capacity(ra * rb);
    for ai in a_hat.chunks_exact(cols) {
        for bj in b_hat.chunks_exact(cols) {
            s.push(dot(ai, bj));
        }
    }
    debug_assert_eq!(s.len(), ra * rb);
    s
}

/// Back-propagates through the row normalisation: given the gradient wrt the
/// normalised rows, accumulates the gradient wrt the raw rows into `dx`.
pub fn normalize_rows_backward<T: Real>(hat: &[T], norms: &[T], dhat: &[T], cols: usize, dx: &mut [T]) {
    let floor = T::of(NORM_FLOOR);
    for (i, n) in norms.iter().enumerate() {
        let h = &hat[i * cols..(i + 1) * cols];
        let g = &dhat[i * cols..(i + 1) * cols];
        let d = &mut dx[i * cols..(i + 1) * cols];
        if *n > floor {
            let proj = dot(h, g);
            for ((di, &gi), &hi) in d.iter_mut().zip(g).zip(h) {
                *di += (gi - hi * proj) / *n;
            }
        } else {
            for (di, &gi) in d.iter_mut().zip(g) {
                *di += gi / *n;
            }
        }
    }
}

/// `dA_hat = dS · B_hat` and `dB_hat = dSᵀ · A_hat`.
pub fn cosine_backward_normalized<T: Real>(a_hat: &[T], b_hat: &[T], ds: &[T], cols: usize) -> (Vec<T>, Vec<T>) {
    let ra = a_hat.len() / cols;
    let rb = b_hat.len() / cols;
    let mut da = vec![T::zero(); a_hat.len()];
    let mut db = vec![T::zero(); b_hat.len()];
    for i in 0..ra {
        for j in 0..rb {
            let g = ds[i * rb + j];
            axpy(g, &b_hat[j * cols..(j + 1) * cols], &mut da[i * cols..(i + 1) * cols]);
            axpy(g, &a_hat[i * cols..(i + 1) * cols], &mut db[j * cols..(j + 1) * cols]);
        }
    }
    (da, db)
}

pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Probability clamp applied inside the cross-entropy.
pub const BCE_CLAMP: f64 = 1e-7;

pub fn bce<T: Real>(p: T, y: T) -> T {
    let eps = T::of(BCE_CLAMP);
    let pc = p.max(eps).min(T::one() - eps);
    -(y * pc.ln() + (T::one() - y) * (T::one() - pc).ln())
}

pub fn bce_grad<T: Real>(p: T, y: T) -> T {
    let eps = T::of(BCE_CLAMP);
    if p <= eps || p >= T::one() - eps {
        return T::zero();
    }
    -y / p + (T::one() - y) / (T::one() - p)
}
