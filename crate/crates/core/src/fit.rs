//! Least-squares slope fits on log-log data, used everywhere a scaling law
//! is checked against measurements.

/// Slope and intercept of ln(y) against ln(x). Points with y <= 0 are
/// rejected; callers pass measured norms that are positive by construction.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points for a slope");
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys
        .iter()
        .map(|&y| {
            assert!(y > 0.0, "log-log fit needs positive ordinates, got {y}");
            y.ln()
        })
        .collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    loglog_fit(xs, ys).0
}

/// Successive dyadic orders log2(e_i / e_{i+1}) for a refinement study where
/// the grid doubles between entries.
pub fn dyadic_orders(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = [10.0_f64, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 * x.powf(-1.5)).collect();
        let (s, b) = loglog_fit(&xs, &ys);
        assert!((s + 1.5).abs() < 1e-12);
        assert!((b - 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn orders_from_halving() {
        let errs = [1.0, 1.0 / 16.0, 1.0 / 256.0];
        let o = dyadic_orders(&errs);
        assert!((o[0] - 4.0).abs() < 1e-13 && (o[1] - 4.0).abs() < 1e-13);
    }
}
