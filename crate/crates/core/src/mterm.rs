//! Best n-term and m-term approximation in an orthonormal system, the
//! de la Vallee-Poussin multiplier operators, and the restricted m-term chain.
//!
//! Elements are coefficient vectors of length `J` with respect to the first
//! `J` members of an orthonormal system, so norms are euclidean.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::harness::{Status, Verdict};

/// The first `size` elements of an orthonormal system.
#[derive(Debug, Clone, Copy)]
pub struct Dictionary {
    pub size: usize,
}

impl Dictionary {
    pub fn check(&self, f: &DVector<f64>) -> Result<()> {
        if f.len() != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, got: f.len() });
        }
        Ok(())
    }

    pub fn norm(&self, f: &DVector<f64>) -> f64 {
        f.norm()
    }
}

/// `E_n(f)`: norm of the coefficients with index above `n`.
pub fn best_tail(f: &DVector<f64>, n: usize) -> Result<f64> {
    if n > f.len() {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds J = {}", f.len())));
    }
    Ok(f.rows(n, f.len() - n).norm())
}

/// Indices of the `m` largest magnitudes, ties to the lower index.
fn kept(f: &DVector<f64>, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].abs().total_cmp(&f[a].abs()).then(a.cmp(&b)));
    order.truncate(m);
    order
}

/// `sigma_m(f)`: norm of all but the `m` largest coefficients.
pub fn best_m_term(f: &DVector<f64>, m: usize) -> Result<f64> {
    if m > f.len() {
        return Err(Error::InvalidArgument(format!("m = {m} exceeds J = {}", f.len())));
    }
    let keep = kept(f, m);
    let mut s = 0.0;
    for (i, v) in f.iter().enumerate() {
        if !keep.contains(&i) {
            s += v * v;
        }
    }
    Ok(s.sqrt())
}

/// `m`-term error when only the first `limit` dictionary elements may be used.
pub fn best_m_term_restricted(f: &DVector<f64>, m: usize, limit: usize) -> Result<f64> {
    let limit = limit.min(f.len());
    let head = f.rows(0, limit).clone_owned();
    let tail = f.rows(limit, f.len() - limit).norm();
    Ok(best_m_term(&head, m.min(limit))?.hypot(tail))
}

/// Multipliers `1` up to `n_k`, `0` beyond `a2 n_k`, linear in between.
#[derive(Debug, Clone, Copy)]
pub struct VPOperator {
    pub n_k: usize,
    pub a2: f64,
}

impl VPOperator {
    pub fn new(n_k: usize, a2: f64) -> Result<Self> {
        if n_k == 0 || a2 <= 1.0 {
            return Err(Error::InvalidArgument(format!("need n_k >= 1 and A2 > 1, got {n_k}, {a2}")));
        }
        Ok(VPOperator { n_k, a2 })
    }

    /// Multiplier of the `j`-th element, `j` counted from 1.
    pub fn multiplier(&self, j: usize) -> f64 {
        let (j, lo, hi) = (j as f64, self.n_k as f64, self.a2 * self.n_k as f64);
        if j <= lo {
            1.0
        } else if j >= hi {
            0.0
        } else {
            (hi - j) / (hi - lo)
        }
    }

    /// Operator norm bound; multipliers lie in `[0, 1]`.
    pub fn a3(&self) -> f64 {
        1.0
    }

    /// Number of elements the range can use: `floor(A2 n_k)`.
    pub fn span(&self) -> usize {
        (self.a2 * self.n_k as f64).floor() as usize
    }
}

pub fn vp_apply(v: &VPOperator, f: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(f.len(), |i, _| v.multiplier(i + 1) * f[i])
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `C(M, m) <= (b M / m)^m` with `b = e`, compared in logarithms.
pub fn binomial_witness(big_m: usize, m: usize) -> bool {
    if m == 0 || m > big_m {
        return m == 0;
    }
    ln_binomial(big_m, m) <= m as f64 * (std::f64::consts::E * big_m as f64 / m as f64).ln() + 1e-12
}

fn chain_precondition(v: &VPOperator, m: usize) -> Result<()> {
    if !(1 < m && (m as f64) < v.a2 * v.n_k as f64) {
        return Err(Error::Precondition(format!("need 1 < m < A2 n_k, got m = {m}, A2 n_k = {}", v.a2 * v.n_k as f64)));
    }
    Ok(())
}

/// Both sides of the restricted m-term chain over the set `k`:
/// `sup sigma_m(f, D_{A2 n_k})` and `(1 + 2 A3) max(sup E_{n_k}(f), sup sigma_m(f))`.
pub fn sigma_chain_sides(k: &[DVector<f64>], v: &VPOperator, m: usize) -> Result<(f64, f64)> {
    chain_precondition(v, m)?;
    if k.is_empty() {
        return Err(Error::EmptySeries);
    }
    let span = v.span();
    let mut lhs: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let mut sig: f64 = 0.0;
    for f in k {
        if f.len() < v.n_k {
            return Err(Error::DimensionMismatch { expected: v.n_k, got: f.len() });
        }
        lhs = lhs.max(best_m_term_restricted(f, m, span)?);
        tail = tail.max(best_tail(f, v.n_k)?);
        sig = sig.max(best_m_term(f, m)?);
    }
    Ok((lhs, (1.0 + 2.0 * v.a3()) * tail.max(sig)))
}

/// The chain of [`sigma_chain_sides`] together with the binomial count
/// bound for `(floor(A2 n_k), m)`. The witness is the ratio of the two sides.
pub fn check_sigma_chain(k: &[DVector<f64>], v: &VPOperator, m: usize) -> Result<Verdict> {
    let (lhs, rhs) = sigma_chain_sides(k, v, m)?;
    let span = v.span();
    let chain = lhs <= rhs * (1.0 + 1e-12);
    let binom = binomial_witness(span, m);
    let status = if chain && binom { Status::Holds } else { Status::Violated };
    let witness = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    let details = format!(
        "n_k = {}, A2 = {}, m = {m}; lhs = {lhs:.6e}, rhs = {rhs:.6e}; binomial C({span},{m}) <= (e {span}/{m})^{m}: {binom}",
        v.n_k, v.a2
    );
    Ok(Verdict {
        check: "sigma-chain".into(),
        status,
        witness: Some(witness),
        window: [m as u64, m as u64],
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn tails() {
        let f = v(&[3.0, 2.0, 1.0, 0.5]);
        assert!((best_tail(&f, 2).unwrap() - 1.118034).abs() < 1e-6);
        assert_eq!(best_tail(&f, 4).unwrap(), 0.0);
        assert_eq!(best_tail(&v(&[1.0, 0.0, 0.0]), 0).unwrap(), 1.0);
        assert!(best_tail(&f, 5).is_err());
    }

    #[test]
    fn m_terms() {
        assert!((best_m_term(&v(&[3.0, 2.0, 1.0, 0.5]), 2).unwrap() - 1.118034).abs() < 1e-6);
        assert!((best_m_term(&v(&[0.5, 3.0, 1.0, 2.0]), 2).unwrap() - 1.118034).abs() < 1e-6);
        let f = v(&[0.5, 3.0, 1.0, 2.0]);
        assert_eq!(best_m_term(&f, 0).unwrap(), f.norm());
        assert_eq!(kept(&v(&[1.0, -1.0, 1.0]), 2), vec![0, 1]);
    }

    #[test]
    fn vp_examples() {
        let op = VPOperator::new(2, 2.0).unwrap();
        assert_eq!(vp_apply(&op, &v(&[1.0, 1.0, 1.0, 1.0])).as_slice(), &[1.0, 1.0, 0.5, 0.0]);
        assert_eq!(vp_apply(&op, &v(&[2.0, -1.0, 0.0, 0.0, 0.0])), v(&[2.0, -1.0, 0.0, 0.0, 0.0]));
        assert_eq!(vp_apply(&op, &v(&[0.0, 0.0, 0.0, 4.0, 5.0])).amax(), 0.0);
    }

    #[test]
    fn binomial_examples() {
        // C(16, 4) = 1820 <= (4 e)^4.
        assert!((ln_binomial(16, 4).exp() - 1820.0).abs() < 1e-6);
        assert!(binomial_witness(16, 4));
        assert!(((std::f64::consts::E * 4.0).powi(4) - 13977.126408484923).abs() < 1e-8);
    }

    #[test]
    fn chain_trivial_and_precondition() {
        let op = VPOperator::new(8, 2.0).unwrap();
        let mut f = DVector::zeros(64);
        f[3] = 1.0;
        let verdict = check_sigma_chain(&[f.clone()], &op, 4).unwrap();
        assert_eq!(verdict.status, Status::Holds);
        assert_eq!(verdict.witness, Some(0.0));
        assert!(check_sigma_chain(&[f.clone()], &op, 1).is_err());
        assert!(check_sigma_chain(&[f], &op, 16).is_err());
    }
}
