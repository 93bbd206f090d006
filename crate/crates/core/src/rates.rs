//! Observed convergence orders.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// `log2(e_{l-1} / e_l)` for consecutive entries.
pub fn log2_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// `log(e_{l-1} / e_l) / log(x_{l-1} / x_l)` for consecutive entries, e.g.
/// the order with respect to mesh width or degrees of freedom.
pub fn observed_orders(xs: &[f64], errors: &[f64]) -> Vec<f64> {
    xs.windows(2)
        .zip(errors.windows(2))
        .map(|(x, e)| (e[0] / e[1]).ln() / (x[0] / x[1]).ln())
        .collect()
}

/// Least-squares slope of `log(ys)` against `log(xs)`; `None` with fewer than
/// two points or degenerate abscissae.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_of_geometric_sequence() {
        let e = [1.0, 0.25, 0.0625];
        for r in log2_ratios(&e) {
            assert!((r - 2.0).abs() < 1e-14);
        }
        let h = [0.5, 0.25, 0.125];
        for r in observed_orders(&h, &e) {
            assert!((r - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 100.0, 1000.0, 1e4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.75)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 0.75).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
        assert!(loglog_slope(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }
}
