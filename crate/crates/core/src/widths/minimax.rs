//! Minimax subspace fitting: minimize `max_i dist(q_i, V)` over
//! `n`-dimensional subspaces `V` of the span of the points.
//!
//! Upper bounds come from a log-sum-exp smoothing of the maximum, minimized by
//! Riemannian gradient steps with an annealed temperature, and from a
//! Gauss-Newton solve of the active-set optimality system. Lower bounds come
//! from weights `w` on the simplex: `min_V sum_i w_i dist(q_i, V)^2` is the
//! sum of the trailing eigenvalues of `sum_i w_i q_i q_i^T`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::exact::exact_fit;
use super::linalg::{complement, complete_basis, orth, principal_frame, residual_sq, sym_eigen_sorted};
use super::WidthOptions;

#[derive(Debug, Clone)]
pub(crate) struct Fit {
    /// Orthonormal `r x n` basis in the caller's coordinates.
    pub basis: DMatrix<f64>,
    /// Certified lower bound on the optimal maximum distance.
    pub dual: f64,
    pub exact: bool,
}

pub(crate) fn rng_for(seed: u64, stream: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(restart);
    rng
}

pub(crate) fn fit_subspace(q: &[DVector<f64>], n: usize, opts: &WidthOptions, stream: u64) -> Fit {
    let r = q[0].len();
    let (frame, _) = principal_frame(q);
    let rank = frame.ncols();
    if n >= rank {
        return Fit { basis: complete_basis(&frame, n.min(r)), dual: 0.0, exact: true };
    }
    let loc: Vec<DVector<f64>> = q.iter().map(|p| frame.tr_mul(p)).collect();
    let scale = loc.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let loc: Vec<DVector<f64>> = loc.iter().map(|p| p / scale).collect();
    if n == 0 {
        return Fit { basis: DMatrix::zeros(r, 0), dual: scale, exact: true };
    }
    if opts.exact_small && (rank == 2 || (rank == 3 && loc.len() <= 40)) {
        if let Some(f) = exact_fit(&loc, n) {
            return Fit { basis: &frame * f.basis, dual: f.value * scale, exact: true };
        }
    }
    let uniform = vec![1.0 / loc.len() as f64; loc.len()];
    let mut dual = weighted_dual(&loc, &uniform, n);
    let runs: Vec<(f64, DMatrix<f64>, f64)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let v0 = if k == 0 {
                DMatrix::identity(rank, n)
            } else {
                let mut rng = rng_for(opts.seed, stream, k as u64);
                orth(&DMatrix::from_fn(rank, n, |_, _| StandardNormal.sample(&mut rng)))
            };
            descend(&loc, n, v0, opts.sweeps)
        })
        .collect();
    let mut best_k = 0;
    for (k, run) in runs.iter().enumerate() {
        dual = dual.max(run.2);
        if run.0 < runs[best_k].0 {
            best_k = k;
        }
    }
    let mut v = runs[best_k].1.clone();
    let mut value = runs[best_k].0;
    if opts.polish {
        if let Some((pv, pval, w)) = polish(&loc, n, &v) {
            if pval <= value {
                v = pv;
                value = pval;
            }
            if let Some(w) = w {
                dual = dual.max(weighted_dual(&loc, &w, n));
            }
        }
    }
    let dual = dual.min(value);
    Fit { basis: &frame * v, dual: dual.sqrt() * scale, exact: false }
}

fn residuals(q: &[DVector<f64>], v: &DMatrix<f64>, out: &mut [f64]) -> f64 {
    let mut m: f64 = 0.0;
    for (o, p) in out.iter_mut().zip(q) {
        *o = residual_sq(p, v);
        m = m.max(*o);
    }
    m
}

/// Lower bound on `min_V max_i dist(q_i, V)^2` from simplex weights `w`.
pub(crate) fn weighted_dual(q: &[DVector<f64>], w: &[f64], n: usize) -> f64 {
    let r = q[0].len();
    let mut c = DMatrix::zeros(r, r);
    for (p, &wi) in q.iter().zip(w) {
        if wi > 0.0 {
            c.ger(wi, p, p, 1.0);
        }
    }
    let (vals, _) = sym_eigen_sorted(&c);
    vals[..r - n].iter().map(|x| x.max(0.0)).sum()
}

fn smooth_max(f: &[f64], tau: f64) -> f64 {
    let fmax = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    fmax + tau * f.iter().map(|x| ((x - fmax) / tau).exp()).sum::<f64>().ln()
}

/// Annealed log-sum-exp descent. Returns the best maximum squared distance
/// seen, its subspace and the best dual value at the visited weights.
fn descend(q: &[DVector<f64>], n: usize, mut v: DMatrix<f64>, sweeps: usize) -> (f64, DMatrix<f64>, f64) {
    const INNER: usize = 25;
    let m = q.len();
    let mut f = vec![0.0; m];
    let mut fmax = residuals(q, &v, &mut f);
    let mut best = (fmax, v.clone());
    let mut dual: f64 = 0.0;
    let mut tau = fmax;
    if fmax <= 0.0 {
        return (0.0, v, 0.0);
    }
    let mut eta = 1.0;
    let mut w = vec![0.0; m];
    let mut trial = vec![0.0; m];
    for sweep in 0..sweeps {
        for _ in 0..INNER {
            let top = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            for (wi, fi) in w.iter_mut().zip(&f) {
                *wi = ((fi - top) / tau).exp();
                s += *wi;
            }
            let mut dir = DMatrix::zeros(v.nrows(), n);
            for (p, &wi) in q.iter().zip(&w) {
                let b = v.tr_mul(p);
                let res = p - &v * &b;
                dir.ger(wi / s, &res, &b, 1.0);
            }
            let g2 = dir.norm_squared();
            if g2 < 1e-30 {
                break;
            }
            let f0 = smooth_max(&f, tau);
            let mut accepted = false;
            for _ in 0..40 {
                let cand = orth(&(&v + &dir * eta));
                residuals(q, &cand, &mut trial);
                let f1 = smooth_max(&trial, tau);
                if f1 <= f0 - 2e-4 * eta * g2 {
                    v = cand;
                    std::mem::swap(&mut f, &mut trial);
                    accepted = true;
                    eta = (eta * 2.0).min(1e6);
                    break;
                }
                eta *= 0.5;
            }
            fmax = f.iter().copied().fold(0.0, f64::max);
            if fmax < best.0 {
                best = (fmax, v.clone());
            }
            if !accepted {
                eta = 1.0;
                break;
            }
        }
        if sweep % 5 == 4 || sweep + 1 == sweeps {
            let top = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut ws: Vec<f64> = f.iter().map(|fi| ((fi - top) / tau).exp()).collect();
            let s: f64 = ws.iter().sum();
            ws.iter_mut().for_each(|x| *x /= s);
            dual = dual.max(weighted_dual(q, &ws, n));
        }
        tau *= 0.7;
        if tau < 1e-14 * best.0 {
            break;
        }
    }
    (best.0, best.1, dual)
}

struct Kkt<'a> {
    q: &'a [DVector<f64>],
    active: &'a [usize],
    n: usize,
    p: usize,
}

impl Kkt<'_> {
    fn residual(&self, v: &DMatrix<f64>, w: &DMatrix<f64>, t: f64, lam: &[f64]) -> DVector<f64> {
        let k = self.active.len();
        let nx = self.p * self.n;
        let mut out = DVector::zeros(k + nx + 1);
        let mut g = DMatrix::zeros(v.nrows(), self.n);
        for (a, &i) in self.active.iter().enumerate() {
            let qi = &self.q[i];
            out[a] = residual_sq(qi, v) - t;
            let b = v.tr_mul(qi);
            g.ger(lam[a], qi, &b, 1.0);
        }
        let s = w.tr_mul(&g);
        for a in 0..self.p {
            for b in 0..self.n {
                out[k + a * self.n + b] = s[(a, b)];
            }
        }
        out[k + nx] = lam.iter().sum::<f64>() - 1.0;
        out
    }

    fn jacobian(&self, v: &DMatrix<f64>, w: &DMatrix<f64>, lam: &[f64]) -> DMatrix<f64> {
        let (k, n, p) = (self.active.len(), self.n, self.p);
        let nx = p * n;
        let mut j = DMatrix::zeros(k + nx + 1, nx + 1 + k);
        let r = v.nrows();
        let mut c = DMatrix::zeros(r, r);
        for (a, &i) in self.active.iter().enumerate() {
            let qi = &self.q[i];
            c.ger(lam[a], qi, qi, 1.0);
            let bi = v.tr_mul(qi);
            let ci = w.tr_mul(qi);
            for x in 0..p {
                for y in 0..n {
                    j[(a, x * n + y)] = -2.0 * ci[x] * bi[y];
                    j[(k + x * n + y, nx + 1 + a)] = ci[x] * bi[y];
                }
            }
            j[(a, nx)] = -1.0;
        }
        let wcw = w.tr_mul(&(&c * w));
        let vcv = v.tr_mul(&(&c * v));
        for a in 0..p {
            for b in 0..n {
                let row = k + a * n + b;
                for cc in 0..p {
                    j[(row, cc * n + b)] += wcw[(a, cc)];
                }
                for d in 0..n {
                    j[(row, a * n + d)] -= vcv[(d, b)];
                }
            }
        }
        for a in 0..k {
            j[(k + nx, nx + 1 + a)] = 1.0;
        }
        j
    }

    /// Levenberg-Marquardt on the active-set system, rebasing the subspace
    /// after every accepted step.
    fn solve(&self, v0: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64, Vec<f64>)> {
        let k = self.active.len();
        let nx = self.p * self.n;
        let mut v = v0.clone();
        let mut w = complement(&v);
        let mut t = self.active.iter().map(|&i| residual_sq(&self.q[i], &v)).sum::<f64>() / k as f64;
        let mut lam = vec![1.0 / k as f64; k];
        let mut res = self.residual(&v, &w, t, &lam);
        let mut mu = 1e-6;
        for _ in 0..80 {
            let rn = res.norm();
            if rn < 1e-14 {
                break;
            }
            let jac = self.jacobian(&v, &w, &lam);
            let a = jac.tr_mul(&jac);
            let g = jac.tr_mul(&res);
            let mut accepted = false;
            while mu < 1e10 {
                let mut damped = a.clone();
                for i in 0..damped.nrows() {
                    damped[(i, i)] += mu * a[(i, i)].max(1e-12);
                }
                let step = match damped.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&g)),
                    None => match damped.lu().solve(&(-&g)) {
                        Some(s) => s,
                        None => {
                            mu *= 4.0;
                            continue;
                        }
                    },
                };
                let x = DMatrix::from_fn(self.p, self.n, |a, b| step[a * self.n + b]);
                let nv = orth(&(&v + &w * x));
                let nw = orth(&(&w - &nv * nv.tr_mul(&w)));
                let nt = t + step[nx];
                let nl: Vec<f64> = lam.iter().enumerate().map(|(i, l)| l + step[nx + 1 + i]).collect();
                let nres = self.residual(&nv, &nw, nt, &nl);
                if nres.norm() < rn {
                    v = nv;
                    w = nw;
                    t = nt;
                    lam = nl;
                    res = nres;
                    mu = (mu / 3.0).max(1e-15);
                    accepted = true;
                    break;
                }
                mu *= 4.0;
            }
            if !accepted {
                break;
            }
        }
        if res.norm() < 1e-9 {
            Some((v, t, lam))
        } else {
            None
        }
    }
}

/// Active-set refinement of a near-optimal subspace. Returns the refined
/// subspace, its maximum squared distance and, when the optimality system
/// was solved with nonnegative multipliers, the multipliers as simplex
/// weights over all points.
fn polish(q: &[DVector<f64>], n: usize, v0: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64, Option<Vec<f64>>)> {
    let m = q.len();
    let r = q[0].len();
    let mut f = vec![0.0; m];
    let fmax0 = residuals(q, v0, &mut f);
    if fmax0 <= 0.0 {
        return None;
    }
    let mut best: Option<(DMatrix<f64>, f64, Option<Vec<f64>>)> = None;
    let mut consider = |v: DMatrix<f64>, val: f64, w: Option<Vec<f64>>| {
        let better = match &best {
            None => true,
            Some(b) => val < b.1 || (val <= b.1 && w.is_some() && b.2.is_none()),
        };
        if better {
            best = Some((v, val, w));
        }
    };
    for delta in [1e-2, 1e-3, 1e-5] {
        let mut active: Vec<usize> = (0..m).filter(|&i| f[i] >= fmax0 * (1.0 - delta)).collect();
        let mut v = v0.clone();
        for _ in 0..16 {
            let kkt = Kkt { q, active: &active, n, p: r - n };
            let Some((nv, t, lam)) = kkt.solve(&v) else { break };
            v = nv;
            let mut fv = vec![0.0; m];
            let val = residuals(q, &v, &mut fv);
            let (imin, lmin) = lam.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &l)| if l < b.1 { (i, l) } else { b });
            if lmin < -1e-10 && active.len() > 1 {
                consider(v.clone(), val, None);
                active.remove(imin);
                continue;
            }
            let outside: Vec<usize> = (0..m).filter(|i| !active.contains(i) && fv[*i] > t + 1e-12).collect();
            if !outside.is_empty() {
                consider(v.clone(), val, None);
                active.extend(outside);
                active.sort_unstable();
                continue;
            }
            let mut w = vec![0.0; m];
            let s: f64 = lam.iter().map(|l| l.max(0.0)).sum();
            for (a, &i) in active.iter().enumerate() {
                w[i] = lam[a].max(0.0) / s;
            }
            consider(v.clone(), val, Some(w));
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_finds_diagonal_line_with_certificate() {
        let q = vec![DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.0, 1.0])];
        let opts = WidthOptions { exact_small: false, ..WidthOptions::default() };
        let f = fit_subspace(&q, 1, &opts, 0);
        let val = q.iter().map(|p| residual_sq(p, &f.basis)).fold(0.0, f64::max).sqrt();
        assert!((val - 0.5f64.sqrt()).abs() < 1e-12, "{val}");
        assert!((f.dual - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
