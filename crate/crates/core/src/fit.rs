//! Ordinary least-squares line fits used for scaling exponents.

use crate::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Standard error of the slope (zero when fewer than three points).
    pub slope_stderr: T,
    pub points: usize,
}

impl<T: Real> LinearFit<T> {
    /// Confidence half-width used in verdicts: one standard error.
    pub fn half_width(&self) -> T {
        self.slope_stderr
    }
}

/// Fits y = intercept + slope·x. Returns `None` for fewer than two points or
/// degenerate abscissae.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Option<LinearFit<T>> {
    let m = x.len().min(y.len());
    if m < 2 {
        return None;
    }
    let mf = lit::<T>(m as f64);
    let mx = x[..m].iter().fold(T::zero(), |s, &v| s + v) / mf;
    let my = y[..m].iter().fold(T::zero(), |s, &v| s + v) / mf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for i in 0..m {
        sxx = sxx + (x[i] - mx) * (x[i] - mx);
        sxy = sxy + (x[i] - mx) * (y[i] - my);
    }
    if sxx <= T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if m > 2 {
        let ssr = (0..m).fold(T::zero(), |s, i| {
            let r = y[i] - intercept - slope * x[i];
            s + r * r
        });
        (ssr / lit::<T>((m - 2) as f64) / sxx).sqrt()
    } else {
        T::zero()
    };
    Some(LinearFit { slope, intercept, slope_stderr, points: m })
}

/// Fits log y against log x.
pub fn loglog_fit<T: Real>(x: &[T], y: &[T]) -> Option<LinearFit<T>> {
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0f64).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn power_law() {
        let x: Vec<f32> = vec![1.0, 10.0, 100.0];
        let y: Vec<f32> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-5);
    }

    #[test]
    fn degenerate() {
        assert!(linear_fit(&[1.0f64], &[2.0]).is_none());
        assert!(linear_fit(&[1.0f64, 1.0], &[2.0, 3.0]).is_none());
    }
}
