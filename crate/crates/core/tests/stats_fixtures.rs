//! Reference values computed once at 50 significant digits and embedded.

#![allow(clippy::excessive_precision)]

use mmdec::analysis::{pearson_corr, pitch_accuracy_regression, t_test, Tails};
use mmdec::autodiff::bce_loss;

const X: [f64; 10] = [1.2, 2.3, 2.9, 4.1, 5.0, 5.8, 7.2, 8.1, 8.8, 10.3];
const Y: [f64; 10] = [2.1, 2.0, 3.7, 3.9, 5.6, 4.8, 7.9, 7.1, 9.4, 9.0];
const W: [f64; 10] = [0.31, -1.2, 0.85, 0.44, -0.27, 1.9, -0.66, 0.12, 0.73, -0.05];
const A: [f64; 8] = [76.1, 81.3, 79.4, 72.8, 84.0, 77.5, 80.2, 74.9];
const B: [f64; 8] = [73.0, 80.1, 75.2, 73.5, 79.9, 74.8, 78.0, 71.6];
const C: [f64; 7] = [64.2, 70.3, 59.8, 66.1, 62.7, 68.4, 61.5];

const TOL: f64 = 1e-10;

fn close(got: f64, want: f64) {
    assert!((got - want).abs() < TOL, "got {got:e}, want {want:e}");
}

/// `(statistic, [two, greater, less])`
fn check<F: Fn(Tails) -> (f64, f64)>(f: F, stat: f64, p: [f64; 3]) {
    for (tails, want) in [Tails::Two, Tails::Greater, Tails::Less].into_iter().zip(p) {
        let (s, pv) = f(tails);
        close(s, stat);
        close(pv, want);
    }
}

#[test]
fn pearson_strong_positive() {
    check(
        |t| {
            let r = pearson_corr(&X, &Y, t).unwrap();
            (r.statistic, r.p_value)
        },
        0.961_316_206_614_946_791_51,
        [
            9.349_532_806_719_116_602_5e-6,
            4.674_766_403_359_558_301_2e-6,
            0.999_995_325_233_596_640_44,
        ],
    );
}

#[test]
fn pearson_near_zero() {
    check(
        |t| {
            let r = pearson_corr(&X, &W, t).unwrap();
            (r.statistic, r.p_value)
        },
        0.068_508_363_761_441_692_441,
        [
            0.850_839_337_703_448_163_01,
            0.425_419_668_851_724_081_5,
            0.574_580_331_148_275_918_5,
        ],
    );
}

#[test]
fn paired_t_test() {
    check(
        |t| {
            let r = t_test(&A, &B, true, t).unwrap();
            assert_eq!(r.df, 7.0);
            (r.statistic, r.p_value)
        },
        4.370_302_908_416_328_540_6,
        [
            0.003_272_852_128_577_466_827_9,
            0.001_636_426_064_288_733_414,
            0.998_363_573_935_711_266_59,
        ],
    );
}

#[test]
fn unpaired_t_test_large_effect() {
    check(
        |t| {
            let r = t_test(&A, &C, false, t).unwrap();
            assert_eq!(r.df, 13.0);
            (r.statistic, r.p_value)
        },
        7.059_118_996_508_431_085_9,
        [
            8.553_959_350_775_163_650_8e-6,
            4.276_979_675_387_581_825_4e-6,
            0.999_995_723_020_324_612_42,
        ],
    );
}

#[test]
fn unpaired_t_test_small_effect() {
    check(
        |t| {
            let r = t_test(&A, &B, false, t).unwrap();
            (r.statistic, r.p_value)
        },
        1.459_948_163_718_573_870_8,
        [
            0.166_378_723_130_481_339_96,
            0.083_189_361_565_240_669_982,
            0.916_810_638_434_759_330_02,
        ],
    );
}

#[test]
fn bce_at_one_half_is_ln_two() {
    assert_eq!(bce_loss(0.5f64, 1.0).unwrap(), std::f64::consts::LN_2);
    assert_eq!(bce_loss(1.0f64, 1.0).unwrap(), -(1.0f64 - 1e-7).ln());
    assert!((bce_loss(0.8f64, 0.0).unwrap() - 1.609_437_912_434_100_3).abs() < 1e-12);
}

#[test]
fn correlation_signs() {
    let x: Vec<f64> = (0..12).map(f64::from).collect();
    let neg: Vec<f64> = x.iter().map(|v| -2.0 * v + 1.0).collect();
    assert_eq!(pearson_corr(&x, &x, Tails::Two).unwrap().statistic, 1.0);
    assert_eq!(pearson_corr(&x, &neg, Tails::Two).unwrap().statistic, -1.0);
}

#[test]
fn regression_describes_slope_and_test() {
    let pitch = [110.0, 125.0, 150.0, 180.0, 205.0, 220.0];
    let acc: Vec<f64> = pitch.iter().map(|p| 77.63 - 0.088 * p).collect();
    let r = pitch_accuracy_regression(&pitch, &acc).unwrap();
    assert!((r.slope + 0.088).abs() < 1e-9 && (r.intercept - 77.63).abs() < 1e-9);
    assert!(
        r.describe().starts_with("accuracy = 77.63 - 0.088/Hz x pitch"),
        "{}",
        r.describe()
    );
    assert_eq!(r.correlation.tails, Tails::Less);
}
