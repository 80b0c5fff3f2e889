//! Small regression helpers shared by the scaling checks.

/// Least-squares slope of `y` against `x`; None with fewer than two
/// distinct abscissae.
pub fn linear_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Least-squares `(slope, intercept)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let slope = linear_slope(points)?;
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    Some((slope, (sy - slope * sx) / n))
}

/// Median by sorting in place (average of middle pair for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_is_exact_on_lines() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.5 * i as f64 - 1.0)).collect();
        assert!((linear_slope(&pts).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn slope_invariant_under_vertical_scaling() {
        // Multiplying the data by λ shifts log-values by a constant and
        // leaves the slope exactly unchanged.
        let pts: Vec<(f64, f64)> = (1..8)
            .map(|i| ((i as f64).ln(), (2.0 * (i as f64).powf(1.3)).ln()))
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (*x, y + 7.0f64.ln())).collect();
        let s1 = linear_slope(&pts).unwrap();
        let s2 = linear_slope(&scaled).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
