//! Closed forms for the inner and outer entropy numbers of `K_sigma`.

use crate::spaces::{sigma, Bracket, Method};

/// `sqrt(sigma_{2^n}^2 + sigma_{2^n+1}^2)`.
///
/// This is the radius at which the largest-norm-first inner greedy cover of
/// `K_sigma` first needs at most `2^n` balls. Centres other than the origin
/// are forced to pay this price; see [`ksigma_inner_entropy`] for the value
/// once the origin is admitted as a centre.
pub fn ksigma_inner_entropy_exact(alpha: f64, n: u32) -> f64 {
    let k = 2f64.powi(n as i32);
    sigma(alpha, k).hypot(sigma(alpha, k + 1.0))
}

/// Inner entropy number of the untruncated `K_sigma`: `sigma_{2^n}`.
///
/// Centres `sigma_j e_j` for `j < 2^n` together with the origin cover the
/// remaining points at radius `sigma_{2^n}`; any `2^n` inner balls of smaller
/// radius miss one of `sigma_1 e_1, .., sigma_{2^n} e_{2^n}` or the origin,
/// because distinct points of the set are farther apart than `sigma_{2^n}`
/// there.
pub fn ksigma_inner_entropy(alpha: f64, n: u32) -> f64 {
    sigma(alpha, 2f64.powi(n as i32))
}

/// Bracket for the outer entropy number `e_n(K_sigma)`:
/// `e_n <= e~_n <= 2 e_n` with `e~_n = sigma_{2^n}`.
pub fn ksigma_entropy_bracket(alpha: f64, n: u32) -> Bracket {
    let s = ksigma_inner_entropy(alpha, n);
    Bracket::new(0.5 * s, Method::ClosedForm, s, Method::ClosedForm)
}
