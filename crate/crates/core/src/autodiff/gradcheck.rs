/// Compares a reverse-mode gradient against central finite differences.
///
/// `f` returns the scalar value and its analytic gradient at a parameter
/// vector. Returns the largest elementwise
/// `|g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8)`.
pub fn grad_check<F>(f: F, params: &[f64], eps: f64) -> f64
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = f(params);
    assert_eq!(analytic.len(), params.len(), "gradient length");
    let mut p = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + eps;
        let (up, _) = f(&p);
        p[i] = orig - eps;
        let (down, _) = f(&p);
        p[i] = orig;
        let fd = (up - down) / (2.0 * eps);
        let ad = analytic[i];
        let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    worst
}
