//! Linear and nonlinear Kolmogorov widths of finite clouds.

mod exact;
mod linalg;
mod minimax;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct WidthOptions {
    pub restarts: usize,
    pub seed: u64,
    pub sweeps: usize,
    /// Use the exact enumeration when the span has dimension two or three.
    pub exact_small: bool,
    pub polish: bool,
    /// Enumerate all assignments for tiny nonlinear instances.
    pub enumerate_partitions: bool,
    /// Restarts of each cluster fit inside the nonlinear search.
    pub inner_restarts: usize,
}

impl Default for WidthOptions {
    fn default() -> Self {
        WidthOptions {
            restarts: 32,
            seed: 0x6b77_6964_7468,
            sweeps: 50,
            exact_small: true,
            polish: true,
            enumerate_partitions: true,
            inner_restarts: 4,
        }
    }
}

mod ksigma;
mod nonlinear;

pub use ksigma::{ksigma_linear_width_bracket, ksigma_nonlinear_width_bracket, ksigma_nonlinear_width_upper};

use crate::error::{Error, Result};
use crate::spaces::{sup_norm, Bracket, Cloud, CompactSetModel, Method, NormSpec};
use linalg::{complete_basis, principal_frame};
pub(crate) use linalg::{orth, orthonormality_defect};
pub(crate) use minimax::rng_for;

/// Largest `n * N` accepted by the nonlinear solver.
pub const NONLINEAR_GUARD: usize = 10_000;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// `N` subspaces given by orthonormal bases, the assignment of every point
/// to one of them, and the largest point-to-assigned-subspace distance.
#[derive(Debug, Clone)]
pub struct SubspaceFamily {
    pub subspaces: Vec<DMatrix<f64>>,
    pub assignment: Vec<usize>,
    pub achieved: f64,
}

impl SubspaceFamily {
    /// Maximum over points of the distance to the assigned subspace.
    pub fn recompute(&self, cloud: &Cloud) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (p, &a) in cloud.points().iter().zip(&self.assignment) {
            worst = worst.max(dist_to_subspace(p, &self.subspaces[a], cloud.norm())?);
        }
        Ok(worst)
    }

    pub fn max_orthonormality_defect(&self) -> f64 {
        self.subspaces.iter().map(orthonormality_defect).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct WidthResult {
    pub bracket: Bracket,
    pub witness: SubspaceFamily,
    pub restarts_used: usize,
}

fn check_frame(basis: &DMatrix<f64>, space: &NormSpec) -> Result<()> {
    if basis.nrows() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: basis.nrows() });
    }
    let defect = orthonormality_defect(basis);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NonOrthonormal(defect));
    }
    Ok(())
}

/// Distance from `f` to the span of the orthonormal columns of `basis`.
/// Exact for the euclidean norm; for other norms the value of a convex
/// coordinate-descent minimization, hence an upper bound.
pub fn dist_to_subspace(f: &DVector<f64>, basis: &DMatrix<f64>, space: &NormSpec) -> Result<f64> {
    Ok(best_approximation(f, basis, space)?.1)
}

/// Best approximation of `f` from the span of `basis` and its distance.
pub fn best_approximation(f: &DVector<f64>, basis: &DMatrix<f64>, space: &NormSpec) -> Result<(DVector<f64>, f64)> {
    if f.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: f.len() });
    }
    check_frame(basis, space)?;
    let n = basis.ncols();
    if n == 0 {
        return Ok((DVector::zeros(f.len()), space.eval(f.as_slice())));
    }
    let proj_coeffs = basis.tr_mul(f);
    let proj = basis * &proj_coeffs;
    if space.is_euclidean() {
        let d = (f - &proj).norm();
        return Ok((proj, d));
    }
    let eval = |c: &DVector<f64>| space.eval((f - basis * c).as_slice());
    let zero = DVector::zeros(n);
    let (mut c, mut g) = {
        let gp = eval(&proj_coeffs);
        let g0 = eval(&zero);
        if gp <= g0 {
            (proj_coeffs, gp)
        } else {
            (zero, g0)
        }
    };
    let (c_low, _) = space.euclidean_equivalence();
    let radius = 2.0 * space.eval(f.as_slice()) / c_low + 1e-300;
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        dirs.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut e = DVector::zeros(n);
                e[i] = std::f64::consts::FRAC_1_SQRT_2;
                e[j] = s * std::f64::consts::FRAC_1_SQRT_2;
                dirs.push(e);
            }
        }
    }
    for _ in 0..200 {
        let before = g;
        for d in &dirs {
            let mut line = |s: f64| eval(&(&c + d * s));
            let (s, v) = crate::spaces::golden_line_min(&mut line, -radius, radius);
            if v < g {
                c += d * s;
                g = v;
            }
        }
        if before - g <= 1e-13 * before.max(1e-300) {
            break;
        }
    }
    Ok((basis * c, g))
}

pub fn linear_width(k: &CompactSetModel, n: usize) -> Result<WidthResult> {
    linear_width_with(k, n, &WidthOptions::default())
}

fn zero_width(cloud: &Cloud, basis: DMatrix<f64>, big_n: usize) -> Result<WidthResult> {
    let family = SubspaceFamily { subspaces: vec![basis; big_n], assignment: vec![0; cloud.len()], achieved: 0.0 };
    let achieved = family.recompute(cloud)?;
    Ok(WidthResult {
        bracket: Bracket::new(0.0, Method::Trivial, achieved, Method::Spectral),
        witness: SubspaceFamily { achieved, ..family },
        restarts_used: 0,
    })
}

pub fn linear_width_with(k: &CompactSetModel, n: usize, opts: &WidthOptions) -> Result<WidthResult> {
    let cloud = k.realize();
    let dim = cloud.dim();
    let gap = k.tail_gap();
    if n > dim {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds the dimension {dim}")));
    }
    if n == 0 {
        let s = sup_norm(k);
        let family = SubspaceFamily { subspaces: vec![DMatrix::zeros(dim, 0)], assignment: vec![0; cloud.len()], achieved: s };
        return Ok(WidthResult { bracket: Bracket::exact(s, Method::Trivial).with_tail_gap(gap), witness: family, restarts_used: 0 });
    }
    let pts = cloud.points();
    let (frame, svals) = principal_frame(pts);
    if n >= frame.ncols() {
        let mut r = zero_width(&cloud, complete_basis(&frame, n), 1)?;
        r.bracket = r.bracket.with_tail_gap(gap);
        return Ok(r);
    }
    let q: Vec<DVector<f64>> = pts.iter().map(|p| frame.tr_mul(p)).collect();
    let fit = minimax::fit_subspace(&q, n, opts, 0);
    let basis = orth(&(&frame * &fit.basis));
    let family = SubspaceFamily { subspaces: vec![basis], assignment: vec![0; cloud.len()], achieved: 0.0 };
    let achieved = family.recompute(&cloud)?;
    let family = SubspaceFamily { achieved, ..family };
    let m = pts.len() as f64;
    let spectral = (svals.iter().skip(n).map(|s| s * s).sum::<f64>() / m).sqrt();
    let (mut lower, mut lower_method) =
        if fit.dual > spectral { (fit.dual, Method::DualWeights) } else { (spectral, Method::Spectral) };
    let mut upper_method = if fit.exact { Method::Enumeration } else { Method::Heuristic };
    if fit.exact && cloud.norm().is_euclidean() {
        lower = achieved;
        lower_method = Method::Enumeration;
    }
    if !cloud.norm().is_euclidean() {
        lower *= cloud.norm().euclidean_equivalence().0;
        lower_method = Method::NormEquivalence;
        upper_method = Method::Heuristic;
    }
    Ok(WidthResult {
        bracket: Bracket::new(lower.min(achieved), lower_method, achieved, upper_method).with_tail_gap(gap),
        witness: family,
        restarts_used: if fit.exact { 0 } else { opts.restarts },
    })
}

pub fn nonlinear_width(k: &CompactSetModel, n: usize, big_n: usize) -> Result<WidthResult> {
    nonlinear_width_with(k, n, big_n, &WidthOptions::default())
}

/// Assign every point to its nearest subspace under the cloud's norm.
fn family_from_bases(cloud: &Cloud, bases: Vec<DMatrix<f64>>) -> Result<SubspaceFamily> {
    let mut assignment = Vec::with_capacity(cloud.len());
    let mut achieved: f64 = 0.0;
    for p in cloud.points() {
        let mut best = (0, f64::INFINITY);
        for (s, b) in bases.iter().enumerate() {
            let d = dist_to_subspace(p, b, cloud.norm())?;
            if d < best.1 {
                best = (s, d);
            }
        }
        achieved = achieved.max(best.1);
        assignment.push(best.0);
    }
    Ok(SubspaceFamily { subspaces: bases, assignment, achieved })
}

pub fn nonlinear_width_with(k: &CompactSetModel, n: usize, big_n: usize, opts: &WidthOptions) -> Result<WidthResult> {
    if big_n == 0 {
        return Err(Error::InvalidArgument("library size N must be positive".into()));
    }
    if n.saturating_mul(big_n) > NONLINEAR_GUARD {
        return Err(Error::GuardExceeded(format!("n*N = {} exceeds {NONLINEAR_GUARD}", n.saturating_mul(big_n))));
    }
    if big_n == 1 || n == 0 {
        let mut r = linear_width_with(k, n, opts)?;
        let s = r.witness.subspaces[0].clone();
        r.witness.subspaces = vec![s; big_n];
        return Ok(r);
    }
    let cloud = k.realize();
    let gap = k.tail_gap();
    let dim = cloud.dim();
    if n > dim {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds the dimension {dim}")));
    }
    let pts = cloud.points();
    let (frame, _) = principal_frame(pts);
    let rank = frame.ncols();
    let nonzero: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].iter().any(|&x| x != 0.0)).collect();
    if n >= rank {
        let mut r = zero_width(&cloud, complete_basis(&frame, n), big_n)?;
        r.bracket = r.bracket.with_tail_gap(gap);
        return Ok(r);
    }
    if big_n >= nonzero.len() {
        let mut bases: Vec<DMatrix<f64>> = nonzero
            .iter()
            .map(|&i| {
                let u = DMatrix::from_column_slice(dim, 1, pts[i].normalize().as_slice());
                complete_basis(&u, n)
            })
            .collect();
        while bases.len() < big_n {
            bases.push(complete_basis(&frame, n));
        }
        let family = family_from_bases(&cloud, bases)?;
        let achieved = family.achieved;
        return Ok(WidthResult {
            bracket: Bracket::new(0.0, Method::Trivial, achieved, Method::Construction).with_tail_gap(gap),
            witness: family,
            restarts_used: 0,
        });
    }
    let lin = linear_width_with(k, n, opts)?;
    let lower_lin = if n * big_n >= rank { 0.0 } else { linear_width_with(k, n * big_n, opts)?.bracket.lower };
    let q: Vec<DVector<f64>> = pts.iter().map(|p| frame.tr_mul(p)).collect();
    let enumerated = opts.enumerate_partitions
        && pts.len() <= nonlinear::ENUMERATION_MAX_POINTS
        && big_n <= nonlinear::ENUMERATION_MAX_LIBRARY;
    let search = if enumerated {
        nonlinear::enumerate(&q, n, big_n, opts)
    } else {
        nonlinear::heuristic(&q, n, big_n, opts)
    };
    let bases: Vec<DMatrix<f64>> = search.subspaces.iter().map(|b| orth(&(&frame * b))).collect();
    let mut family = family_from_bases(&cloud, bases)?;
    let mut upper_method = if enumerated { Method::Enumeration } else { Method::KSubspaces };
    if lin.witness.achieved < family.achieved {
        family = SubspaceFamily {
            subspaces: vec![lin.witness.subspaces[0].clone(); big_n],
            assignment: vec![0; pts.len()],
            achieved: lin.witness.achieved,
        };
        upper_method = lin.bracket.upper_method;
    }
    let mut lower = lower_lin;
    let mut lower_method = Method::Spectral;
    if let Some(l) = search.lower {
        let l = if cloud.norm().is_euclidean() { l } else { l * cloud.norm().euclidean_equivalence().0 };
        if l > lower {
            lower = l;
            lower_method = Method::Enumeration;
        }
    }
    let achieved = family.achieved;
    Ok(WidthResult {
        bracket: Bracket::new(lower.min(achieved), lower_method, achieved, upper_method).with_tail_gap(gap),
        witness: family,
        restarts_used: if enumerated { 0 } else { opts.restarts },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(pts: &[&[f64]]) -> CompactSetModel {
        let d = pts[0].len();
        CompactSetModel::cloud(
            "t",
            pts.iter().map(|p| DVector::from_column_slice(p)).collect(),
            NormSpec::euclidean(d).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn dist_examples() {
        let e2 = NormSpec::euclidean(2).unwrap();
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        assert_eq!(dist_to_subspace(&e1, &b, &e2).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = DMatrix::from_column_slice(2, 1, &[h, h]);
        assert!((dist_to_subspace(&e1, &b, &e2).unwrap() - h).abs() < 1e-12);
        let e3 = NormSpec::euclidean(3).unwrap();
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let f = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
        assert_eq!(dist_to_subspace(&f, &b, &e3).unwrap(), 1.0);
        let bad = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(dist_to_subspace(&e1, &bad, &e2), Err(Error::NonOrthonormal(_))));
    }

    #[test]
    fn max_norm_distance_to_a_line() {
        // dist_inf(e_1, span{(1,1)/sqrt2}) = min_c max(|1-c|, |c|) = 1/2.
        let s = NormSpec::max(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = DMatrix::from_column_slice(2, 1, &[h, h]);
        let d = dist_to_subspace(&DVector::from_column_slice(&[1.0, 0.0]), &b, &s).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
    }

    #[test]
    fn linear_width_examples() {
        let k = model(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = linear_width(&k, 1).unwrap();
        assert!(r.bracket.exact);
        assert!((r.bracket.upper - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(linear_width(&k, 2).unwrap().bracket.upper, 0.0);
        assert_eq!(linear_width(&k, 0).unwrap().bracket.upper, 1.0);
        assert!(linear_width(&k, 3).is_err());
    }

    #[test]
    fn nonlinear_width_examples() {
        let k = model(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(nonlinear_width(&k, 1, 2).unwrap().bracket.upper < 1e-15);
        let k3 = model(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = nonlinear_width(&k3, 1, 2).unwrap();
        assert!((r.bracket.upper - 0.5f64.sqrt()).abs() < 1e-9, "{:?}", r.bracket);
        assert!(r.bracket.exact);
        assert!(nonlinear_width(&k3, 200, 100).is_err());
    }
}
