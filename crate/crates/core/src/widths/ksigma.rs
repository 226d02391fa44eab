//! Closed-form width bounds for `K_sigma`.

use crate::spaces::{sigma, Bracket, Method};

/// `sigma_{nN+1}`: the coordinate subspaces cover all but the tail.
pub fn ksigma_nonlinear_width_upper(alpha: f64, n: u64, big_n: u64) -> f64 {
    sigma(alpha, n as f64 * big_n as f64 + 1.0)
}

/// Lower bound `max_{s > n} sigma_s sqrt(1 - n/s)`.
///
/// For any `n`-dimensional subspace the squared distances of
/// `e_1, .., e_s` sum to at least `s - n`; weighting the points
/// `sigma_j e_j` by `sigma_j^{-2}` and using that `sigma` decreases gives
/// the bound. `n` may be huge, so it is passed as a real.
fn trace_lower(alpha: f64, n: f64) -> f64 {
    let mut best: f64 = 0.0;
    let mut x = 2f64.powi(-12);
    while x <= 2f64.powi(80) {
        let s = (n + (n * x).max(1.0)).ceil();
        best = best.max(sigma(alpha, s) * (1.0 - n / s).max(0.0).sqrt());
        x *= 2f64.powf(0.125);
    }
    best
}

/// Bracket for `d_n(K_sigma)` with `n` given as a real to allow huge indices.
pub fn ksigma_linear_width_bracket(alpha: f64, n: f64) -> Bracket {
    if n <= 0.0 {
        return Bracket::exact(1.0, Method::ClosedForm);
    }
    Bracket::new(trace_lower(alpha, n), Method::ClosedForm, sigma(alpha, n + 1.0), Method::ClosedForm)
}

/// Bracket for `d_n(K_sigma, N)`: `d_{nN}(K_sigma) <= d_n(K_sigma, N) <= sigma_{nN+1}`.
pub fn ksigma_nonlinear_width_bracket(alpha: f64, n: u64, big_n: f64) -> Bracket {
    if n == 0 {
        return Bracket::exact(1.0, Method::ClosedForm);
    }
    let nn = n as f64 * big_n;
    Bracket::new(trace_lower(alpha, nn), Method::ClosedForm, sigma(alpha, nn + 1.0), Method::ClosedForm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_examples() {
        assert!((ksigma_nonlinear_width_upper(1.0, 2, 3) - 0.5773602566704804).abs() < 1e-12);
        assert!((ksigma_nonlinear_width_upper(1.0, 2, 3) - 0.5773503).abs() < 1e-4);
        assert!((ksigma_nonlinear_width_upper(1.0, 1, 1) - 0.8228263240800893).abs() < 1e-12);
        assert_eq!(ksigma_nonlinear_width_upper(1.0, 4, 3), 0.5);
    }

    #[test]
    fn brackets_are_ordered() {
        for n in [1.0, 3.0, 100.0, 1e12] {
            let b = ksigma_linear_width_bracket(1.0, n);
            assert!(b.lower > 0.0 && b.lower <= b.upper, "{b:?}");
        }
    }
}
