//! John-type ellipsoids of symmetric convex bodies.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spaces::{NormKind, NormSpec};
use crate::widths::rng_for;

pub const JOHN_TOL: f64 = 1e-8;
pub const JOHN_MAX_ITERS: usize = 100_000;
const SANDWICH_SAMPLES: usize = 1000;

/// A centrally symmetric convex body in `R^d`.
#[derive(Debug, Clone)]
pub enum UnitBall {
    /// The unit ball of a norm.
    Norm(NormSpec),
    /// Convex hull of the listed vertices; the list must be closed under negation.
    Vertices(Vec<DVector<f64>>),
    /// `{z : |<a_i, z>| <= 1 for all i}`.
    Slabs(Vec<DVector<f64>>),
    /// `{c : ||B c||_X <= 1}` for an orthonormal `D x n` frame `B` of a subspace of `X`.
    Subspace { basis: DMatrix<f64>, norm: NormSpec },
}

impl UnitBall {
    pub fn dim(&self) -> usize {
        match self {
            UnitBall::Norm(s) => s.dim(),
            UnitBall::Vertices(v) | UnitBall::Slabs(v) => v.first().map_or(0, |x| x.len()),
            UnitBall::Subspace { basis, .. } => basis.ncols(),
        }
    }

    /// Minkowski gauge of `z`.
    pub fn gauge(&self, z: &DVector<f64>) -> f64 {
        match self {
            UnitBall::Norm(s) => s.eval(z.as_slice()),
            UnitBall::Slabs(a) => a.iter().map(|ai| ai.dot(z).abs()).fold(0.0, f64::max),
            UnitBall::Vertices(v) => vertex_gauge(v, z),
            UnitBall::Subspace { basis, norm } => norm.eval((basis * z).as_slice()),
        }
    }
}

/// `min sum lambda_i` over `lambda >= 0` with `sum lambda_i v_i = z`.
fn vertex_gauge(v: &[DVector<f64>], z: &DVector<f64>) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = v.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for k in 0..z.len() {
        let terms: Vec<_> = vars.iter().zip(v).map(|(&x, vi)| (x, vi[k])).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, z[k]);
    }
    lp.solve().map_or(f64::INFINITY, |s| s.objective())
}

/// Linear `phi` with `phi(B_2) ⊆ B_Y ⊆ factor * phi(B_2)`.
#[derive(Debug, Clone)]
pub struct JohnMap {
    pub phi: DMatrix<f64>,
    /// Sandwich factor claimed for the body class.
    pub factor: f64,
    /// `phi * phi^T`.
    pub shape: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest sampled `||phi(u)||_Y` over unit `u`.
    pub inner_max: f64,
    /// Largest sampled `||phi^{-1}(v)||_2` over boundary points `v` of `B_Y`.
    pub outer_max: f64,
}

/// Centered minimum-volume ellipsoid `{z : z^T A z <= 1}` around `±p_i`, by
/// Khachiyan's iteration with away steps. Returns `A`, the convergence flag
/// and the iteration count.
pub(crate) fn centered_mvee(p: &[DVector<f64>], tol: f64, max_iters: usize) -> (DMatrix<f64>, bool, usize) {
    let d = p[0].len();
    let m = p.len();
    let nf = d as f64;
    let mut u = vec![1.0 / m as f64; m];
    let mut iters = 0;
    let mut converged = false;
    let mut xinv;
    let mut mvals = vec![0.0; m];
    loop {
        let mut x = DMatrix::zeros(d, d);
        for (pi, &ui) in p.iter().zip(&u) {
            x += pi * pi.transpose() * ui;
        }
        xinv = x.clone().try_inverse().unwrap_or_else(|| x.pseudo_inverse(1e-14).unwrap());
        for (mv, pi) in mvals.iter_mut().zip(p) {
            *mv = (pi.transpose() * &xinv * pi)[0];
        }
        let (jp, &mp) = mvals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let (jm, &mm) = mvals
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let up = mp / nf - 1.0;
        let down = 1.0 - mm / nf;
        if up.max(down) <= tol {
            converged = true;
            break;
        }
        if iters >= max_iters {
            break;
        }
        iters += 1;
        let (j, tau) = if up >= down {
            (jp, (mp / nf - 1.0) / (mp - 1.0))
        } else {
            let floor = -u[jm] / (1.0 - u[jm]);
            let tau = if mm > 1.0 { ((mm / nf - 1.0) / (mm - 1.0)).max(floor) } else { floor };
            (jm, tau)
        };
        for ui in u.iter_mut() {
            *ui *= 1.0 - tau;
        }
        u[j] = (u[j] + tau).max(0.0);
    }
    let scale = mvals.iter().copied().fold(0.0, f64::max);
    (xinv / scale, converged, iters)
}

fn sym_sqrt(a: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let e = a.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| l.max(0.0).powf(power)));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

fn check_symmetric(v: &[DVector<f64>]) -> Result<()> {
    let scale = v.iter().map(|x| x.amax()).fold(0.0, f64::max).max(1.0);
    for x in v {
        if !v.iter().any(|y| (x + y).amax() <= 1e-12 * scale) {
            return Err(Error::NonSymmetric);
        }
    }
    Ok(())
}

/// John map of a symmetric body of dimension at most 8.
///
/// Norm balls use the diagonal solution. Polytopes use the minimum-volume
/// ellipsoid of the vertices (shrunk by `sqrt d`) or of the slab normals
/// (polarized); the latter inclusion `phi(B_2) ⊆ B_Y` is exact by construction.
pub fn john_ellipsoid(ball: &UnitBall, dim: usize) -> Result<JohnMap> {
    if ball.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: ball.dim() });
    }
    if dim == 0 || dim > 8 {
        return Err(Error::InvalidArgument(format!("john_ellipsoid needs 1 <= dim <= 8, got {dim}")));
    }
    let d = dim as f64;
    let (phi, factor, converged, iterations) = match ball {
        UnitBall::Norm(s) => {
            let (scale, factor) = match s.kind() {
                NormKind::Euclidean => (1.0, 1.0),
                NormKind::Max => (1.0, d.sqrt()),
                NormKind::P(p) if p >= 2.0 => (1.0, d.powf(0.5 - 1.0 / p)),
                NormKind::P(p) => (d.powf(0.5 - 1.0 / p), d.powf(1.0 / p - 0.5)),
            };
            (DMatrix::identity(dim, dim) * scale, factor, true, 0)
        }
        UnitBall::Vertices(v) => {
            check_symmetric(v)?;
            let (a, ok, it) = centered_mvee(v, JOHN_TOL, JOHN_MAX_ITERS);
            (sym_sqrt(&a, -0.5) / d.sqrt(), d.sqrt(), ok, it)
        }
        UnitBall::Slabs(a) => {
            if a.iter().all(|x| x.amax() == 0.0) {
                return Err(Error::InvalidArgument("slab normals are all zero".into()));
            }
            let nz: Vec<DVector<f64>> = a.iter().filter(|x| x.amax() > 0.0).cloned().collect();
            let (m, ok, it) = centered_mvee(&nz, JOHN_TOL, JOHN_MAX_ITERS);
            (sym_sqrt(&m, 0.5), d.sqrt(), ok, it)
        }
        UnitBall::Subspace { basis, norm } => {
            if basis.nrows() != norm.dim() {
                return Err(Error::DimensionMismatch { expected: norm.dim(), got: basis.nrows() });
            }
            match norm.kind() {
                NormKind::Euclidean => (DMatrix::identity(dim, dim), 1.0, true, 0),
                NormKind::Max => {
                    let rows: Vec<DVector<f64>> = basis.row_iter().map(|r| r.transpose()).collect();
                    return john_ellipsoid(&UnitBall::Slabs(rows), dim);
                }
                NormKind::P(p) => {
                    // ||B c||_p <= k^{1/p - 1/2} ||c||_2 when B has k nonzero rows.
                    let k = basis.row_iter().filter(|r| r.amax() > 0.0).count() as f64;
                    let s = if p >= 2.0 { 1.0 } else { k.powf(0.5 - 1.0 / p) };
                    (DMatrix::identity(dim, dim) * s, d.powf((0.5 - 1.0 / p).abs()), true, 0)
                }
            }
        }
    };
    let phi_inv = phi.clone().try_inverse().ok_or_else(|| Error::Precondition("body is not full-dimensional".into()))?;
    let mut rng = rng_for(0x6a6f_686e, dim as u64, 0);
    let mut inner_max: f64 = 0.0;
    let mut outer_max: f64 = 0.0;
    for _ in 0..SANDWICH_SAMPLES {
        let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let u = g.normalize();
        inner_max = inner_max.max(ball.gauge(&(&phi * &u)));
        let v = &u / ball.gauge(&u);
        outer_max = outer_max.max((&phi_inv * v).norm());
    }
    if let UnitBall::Vertices(v) = ball {
        for x in v {
            outer_max = outer_max.max((&phi_inv * x).norm());
        }
    }
    let shape = &phi * phi.transpose();
    Ok(JohnMap { phi, factor, shape, converged, iterations, inner_max, outer_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn max_ball_is_round() {
        let j = john_ellipsoid(&UnitBall::Norm(NormSpec::max(2).unwrap()), 2).unwrap();
        assert!((j.phi.clone() - DMatrix::identity(2, 2)).amax() < 1e-12);
        let square = vec![v(&[1.0, 1.0]), v(&[-1.0, -1.0]), v(&[1.0, -1.0]), v(&[-1.0, 1.0])];
        let j = john_ellipsoid(&UnitBall::Vertices(square), 2).unwrap();
        assert!(j.converged);
        assert!((j.phi.clone() - DMatrix::identity(2, 2)).amax() < 1e-7, "{}", j.phi);
        let slabs = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])];
        let j = john_ellipsoid(&UnitBall::Slabs(slabs), 2).unwrap();
        assert!((j.phi.clone() - DMatrix::identity(2, 2)).amax() < 1e-7);
    }

    #[test]
    fn cross_polytope_disc() {
        let r = 0.7071068;
        let j = john_ellipsoid(&UnitBall::Norm(NormSpec::p(1.0, 2).unwrap()), 2).unwrap();
        assert!((j.phi[(0, 0)] - r).abs() < 1e-7 && j.phi[(0, 1)].abs() < 1e-12);
        let diamond = vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        let j = john_ellipsoid(&UnitBall::Vertices(diamond), 2).unwrap();
        assert!((j.phi[(0, 0)] - r).abs() < 1e-7 && (j.phi[(1, 1)] - r).abs() < 1e-7);
        assert!(j.inner_max <= 1.0 + 1e-7);
        assert!(j.outer_max <= 2f64.sqrt() + 1e-7);
    }

    #[test]
    fn euclidean_is_identity() {
        let j = john_ellipsoid(&UnitBall::Norm(NormSpec::euclidean(3).unwrap()), 3).unwrap();
        assert_eq!(j.phi, DMatrix::identity(3, 3));
        assert_eq!(j.factor, 1.0);
    }

    #[test]
    fn skewed_slabs_sandwich() {
        let slabs = vec![v(&[1.0, 0.3, 0.0]), v(&[0.2, 1.0, -0.5]), v(&[0.0, 0.4, 2.0]), v(&[0.7, -0.7, 0.7])];
        let j = john_ellipsoid(&UnitBall::Slabs(slabs), 3).unwrap();
        assert!(j.converged);
        assert!(j.inner_max <= 1.0 + 1e-9, "{}", j.inner_max);
        assert!(j.outer_max <= 3f64.sqrt() * (1.0 + 1e-6), "{}", j.outer_max);
    }

    #[test]
    fn max_norm_subspace_line() {
        // span{(1,1)/sqrt2} in l_inf^2: ||c (1,1)/sqrt2||_inf = |c|/sqrt2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let basis = DMatrix::from_column_slice(2, 1, &[h, h]);
        let j = john_ellipsoid(&UnitBall::Subspace { basis, norm: NormSpec::max(2).unwrap() }, 1).unwrap();
        assert!((j.phi[(0, 0)] - 2f64.sqrt()).abs() < 1e-7, "{}", j.phi);
        assert_eq!(j.factor, 1.0);
    }

    #[test]
    fn rejects_asymmetric_vertices() {
        let tri = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, -1.0])];
        assert!(matches!(john_ellipsoid(&UnitBall::Vertices(tri), 2), Err(Error::NonSymmetric)));
    }
}
