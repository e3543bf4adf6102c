//! Independent reference computations for the acceptance suite.

use statrs::distribution::{ContinuousCDF, Normal};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        kronrod += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integral of `f` over `[a, b]`: the
/// interval with the largest error estimate is bisected until the summed
/// estimate is below `tol` relative to the total, or 4000 intervals exist.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    while parts.len() < 4000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol * total.abs() || !err.is_finite() {
            break;
        }
        let k = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // Sum small to large to limit rounding.
    let mut values: Vec<f64> = parts.iter().map(|p| p.2).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    values.iter().sum()
}

/// `E1(t)` from its definition, after substituting `s = t e^u`:
/// `integral_0^inf exp(-t e^u) du`.
pub fn e1_by_quadrature(t: f64) -> f64 {
    // exp(-t e^u) is below 1e-300 once t e^u > 700.
    let upper = (700.0 / t).ln().max(1.0);
    integrate(&|u: f64| (-t * u.exp()).exp(), 0.0, upper, 1e-15)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

/// Two-sided critical value for `tests` simultaneous tests at family level `alpha`.
pub fn bonferroni_z(alpha: f64, tests: usize) -> f64 {
    normal_quantile(1.0 - alpha / (2.0 * tests as f64))
}

/// Pooled two-sample z statistic for proportions `k1/n1` and `k2/n2`.
pub fn two_proportion_z(k1: usize, n1: usize, k2: usize, n2: usize) -> f64 {
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let p = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median of `blocks` block means, with standard error
/// `sqrt(pi/2) * sd(block means) / sqrt(blocks)`.
pub fn median_of_means(xs: &[f64], blocks: usize) -> (f64, f64) {
    let size = xs.len() / blocks;
    let means: Vec<f64> = (0..blocks).map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / blocks as f64;
    let sd = (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (blocks - 1) as f64).sqrt();
    (median(&means), (std::f64::consts::PI / 2.0).sqrt() * sd / (blocks as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_on_known_integrals() {
        assert!((integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14) - 2.0).abs() < 1e-14);
        assert!((integrate(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-14) - (1.0 - (-40.0f64).exp())).abs() < 1e-14);
        // Integrable log singularity at 0.
        assert!((integrate(&|x: f64| if x > 0.0 { x.ln() } else { 0.0 }, 0.0, 1.0, 1e-12) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn e1_reference() {
        // Abramowitz & Stegun table values.
        assert!((e1_by_quadrature(1.0) / 0.219_383_934_395_520_3 - 1.0).abs() < 1e-14);
        assert!((e1_by_quadrature(0.5) / 0.559_773_594_776_160_8 - 1.0).abs() < 1e-14);
        assert!((e1_by_quadrature(10.0) / 4.156_968_929_685_324e-6 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn statistics_helpers() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((bonferroni_z(0.01, 25) - normal_quantile(1.0 - 0.0002)).abs() < 1e-12);
        assert_eq!(two_proportion_z(50, 100, 50, 100), 0.0);
        assert!(two_proportion_z(60, 100, 40, 100) > 2.8);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let (m, se) = median_of_means(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 3);
        assert_eq!(m, 2.0);
        assert!(se > 0.0);
    }
}
