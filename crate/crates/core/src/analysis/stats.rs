use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, StudentsT};

use crate::error::{Error, Result};

/// Alternative hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tails {
    Two,
    /// Statistic (correlation or mean difference) is positive.
    Greater,
    /// Statistic is negative.
    Less,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsResult {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub tails: Tails,
    pub paired: bool,
    pub df: f64,
}

fn p_from_t(t: f64, df: f64, tails: Tails) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    let p = match tails {
        Tails::Two => 2.0 * dist.cdf(-t.abs()),
        Tails::Greater => dist.cdf(-t),
        Tails::Less => dist.cdf(t),
    };
    p.clamp(0.0, 1.0)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sum of squared deviations.
fn ss(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Pearson correlation with the t-transform p-value (`n − 2` df).
pub fn pearson_corr(x: &[f64], y: &[f64], tails: Tails) -> Result<StatsResult> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} vs {} values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("correlation needs 3 points, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let (sxx, syy) = (ss(x, mx), ss(y, my));
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("correlation input"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let t = if r.abs() == 1.0 {
        r * f64::INFINITY
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    Ok(StatsResult {
        test: "pearson (t-transform)".into(),
        statistic: r,
        p_value: p_from_t(t, df, tails),
        tails,
        paired: false,
        df,
    })
}

/// Student t-test on `a − b`: paired on differences, otherwise pooled variance.
pub fn t_test(a: &[f64], b: &[f64], paired: bool, tails: Tails) -> Result<StatsResult> {
    let (t, df) = if paired {
        if a.len() != b.len() {
            return Err(Error::Shape(format!("{} vs {} paired values", a.len(), b.len())));
        }
        if a.len() < 2 {
            return Err(Error::InsufficientData("paired t-test needs 2 pairs".into()));
        }
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let n = d.len() as f64;
        let md = mean(&d);
        let var = ss(&d, md) / (n - 1.0);
        if var == 0.0 {
            return Err(Error::ZeroVariance("paired differences"));
        }
        (md / (var / n).sqrt(), n - 1.0)
    } else {
        if a.len() < 2 || b.len() < 2 {
            return Err(Error::InsufficientData("t-test needs 2 values per group".into()));
        }
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (ma, mb) = (mean(a), mean(b));
        let df = na + nb - 2.0;
        let pooled = (ss(a, ma) + ss(b, mb)) / df;
        if pooled == 0.0 {
            return Err(Error::ZeroVariance("t-test groups"));
        }
        ((ma - mb) / (pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
    };
    Ok(StatsResult {
        test: if paired { "paired t" } else { "student t" }.into(),
        statistic: t,
        p_value: p_from_t(t, df, tails),
        tails,
        paired,
        df,
    })
}

/// Mean and two-sided t-interval half-width at `level`. The margin is 0
/// for fewer than two values.
pub fn mean_with_margin(x: &[f64], level: f64) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, 0.0);
    }
    let m = mean(x);
    if x.len() < 2 {
        return (m, 0.0);
    }
    let n = x.len() as f64;
    let sd = (ss(x, m) / (n - 1.0)).sqrt();
    let q = StudentsT::new(0.0, 1.0, n - 1.0)
        .expect("df > 0")
        .inverse_cdf(0.5 + level / 2.0);
    (m, q * sd / n.sqrt())
}

/// Accuracy interval of a fair-coin classifier on `n` examples: the
/// central `level` quantiles of Binomial(n, 0.5), divided by `n`.
pub fn random_classifier_interval(n: u64, level: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one example".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must be in (0, 1), got {level}")));
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    let alpha = (1.0 - level) / 2.0;
    // Smallest k with P(X <= k) >= q.
    let quantile = |q: f64| -> u64 {
        let (mut lo, mut hi) = (0u64, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if b.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    Ok((
        quantile(alpha) as f64 / n as f64,
        quantile(1.0 - alpha) as f64 / n as f64,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: StatsResult,
}

impl Regression {
    pub fn describe(&self) -> String {
        format!(
            "accuracy = {:.2} {} {:.3}/Hz x pitch (R = {:.2}, p = {:.3}, {})",
            self.intercept,
            if self.slope < 0.0 { "-" } else { "+" },
            self.slope.abs(),
            self.correlation.statistic,
            self.correlation.p_value,
            self.correlation.test
        )
    }
}

/// Least-squares line of accuracy against mean pitch, with a single-tailed
/// Pearson test in the direction of the fitted slope.
pub fn pitch_accuracy_regression(pitch: &[f64], accuracy: &[f64]) -> Result<Regression> {
    if pitch.len() != accuracy.len() {
        return Err(Error::Shape("pitch and accuracy lengths differ".into()));
    }
    if pitch.len() < 3 {
        return Err(Error::InsufficientData("regression needs 3 stories".into()));
    }
    let (mx, my) = (mean(pitch), mean(accuracy));
    let sxx = ss(pitch, mx);
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("pitch"));
    }
    let sxy: f64 = pitch.iter().zip(accuracy).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let tails = if slope < 0.0 { Tails::Less } else { Tails::Greater };
    let correlation = if ss(accuracy, my) == 0.0 {
        StatsResult {
            test: "pearson (t-transform)".into(),
            statistic: 0.0,
            p_value: 1.0,
            tails,
            paired: false,
            df: (pitch.len() - 2) as f64,
        }
    } else {
        pearson_corr(pitch, accuracy, tails)?
    };
    Ok(Regression {
        slope,
        intercept,
        correlation,
    })
}
