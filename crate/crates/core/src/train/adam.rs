use crate::autodiff::Real;

/// Adam moment estimates for one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T: Real = f32> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Updates skipped because a gradient was not finite.
    pub skipped: u64,
}

impl<T: Real> AdamState<T> {
    /// Zeroed moments shaped like `sizes`.
    pub fn new(sizes: &[usize]) -> Self {
        Self {
            m: sizes.iter().map(|n| vec![T::zero(); *n]).collect(),
            v: sizes.iter().map(|n| vec![T::zero(); *n]).collect(),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            skipped: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place. Returns `false`
/// (leaving everything untouched) when any gradient is not finite.
pub fn adam_step<T: Real>(params: &mut [&mut [T]], grads: &[Vec<T>], state: &mut AdamState<T>, lr: f64) -> bool {
    assert_eq!(params.len(), grads.len(), "parameter/gradient arity");
    if grads.iter().flatten().any(|g| !g.is_finite()) {
        state.skipped += 1;
        return false;
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (T::of(state.beta1), T::of(state.beta2));
    let c1 = T::of(1.0 - state.beta1.powi(t));
    let c2 = T::of(1.0 - state.beta2.powi(t));
    let (lr, eps) = (T::of(lr), T::of(state.eps));
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        assert_eq!(p.len(), g.len(), "parameter/gradient shape");
        for (((pi, gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (T::one() - b1) * *gi;
            *vi = b2 * *vi + (T::one() - b2) * *gi * *gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *pi -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut w = [0.0f64];
        let mut s = AdamState::<f64>::new(&[1]);
        adam_step(&mut [&mut w[..]], &[vec![1.0]], &mut s, 1e-3);
        assert!((w[0] + 1e-3 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut w = [0.25f32, -1.5];
        let mut s = AdamState::<f32>::new(&[2]);
        adam_step(&mut [&mut w[..]], &[vec![0.0, 0.0]], &mut s, 1e-3);
        assert_eq!(w, [0.25, -1.5]);
    }

    #[test]
    fn converges_on_a_quadratic() {
        let mut w = [0.0f64];
        let mut s = AdamState::<f64>::new(&[1]);
        for _ in 0..200 {
            let g = 2.0 * (w[0] - 3.0);
            adam_step(&mut [&mut w[..]], &[vec![g]], &mut s, 0.1);
        }
        assert!((w[0] - 3.0).abs() < 0.5, "{}", w[0]);
    }

    #[test]
    fn non_finite_gradient_is_skipped() {
        let mut w = [1.0f32];
        let mut s = AdamState::<f32>::new(&[1]);
        assert!(!adam_step(&mut [&mut w[..]], &[vec![f32::NAN]], &mut s, 1e-3));
        assert_eq!((w[0], s.step, s.skipped), (1.0, 0, 1));
    }
}
