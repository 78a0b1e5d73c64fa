use super::SimError;

/// Mean and 95 % normal-approximation half-width over independent runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub n_runs: usize,
}

/// `1.96 s / sqrt(n)` with the n - 1 sample standard deviation.
pub fn aggregate(values: &[f64]) -> Result<Aggregate, SimError> {
    let n = values.len();
    if n < 2 {
        return Err(SimError::InsufficientRuns(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Aggregate {
        mean,
        ci_halfwidth: 1.96 * var.sqrt() / (n as f64).sqrt(),
        n_runs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = aggregate(&[10.0, 10.0, 10.0]).unwrap();
        assert_eq!((a.mean, a.ci_halfwidth, a.n_runs), (10.0, 0.0, 3));
        let a = aggregate(&[8.0, 12.0]).unwrap();
        assert_eq!(a.mean, 10.0);
        assert!((a.ci_halfwidth - 3.92).abs() < 0.01);
        assert_eq!(aggregate(&[1.0]), Err(SimError::InsufficientRuns(1)));
    }

    #[test]
    fn ci_scales_inverse_sqrt_n() {
        let base = [1.0, 3.0, 2.0, 6.0];
        let once = aggregate(&base).unwrap().ci_halfwidth;
        let rep: Vec<f64> = base.iter().cycle().take(64).copied().collect();
        let many = aggregate(&rep).unwrap().ci_halfwidth;
        // 16x the data: sqrt(16) narrower, up to the n - 1 correction.
        let expected = once / 4.0 * (16.0 * 3.0 / 63.0f64).sqrt();
        assert!((many - expected).abs() < 1e-12);
    }
}
