//! Smallest enclosing ball of a finite cloud.
//!
//! Euclidean clouds: away-step Frank-Wolfe on the dual over the simplex,
//! followed by a support polish that solves the circumcenter equations of the
//! active points. The dual weights certify the lower bound, the center the
//! upper bound. Other norms: coordinate-descent minimax for the center with
//! the half-diameter as lower bound.

use nalgebra::{DMatrix, DVector};

use super::{Bracket, Cloud, Method};

#[derive(Debug, Clone)]
pub struct EnclosingBall {
    pub center: DVector<f64>,
    pub radius: Bracket,
}

const FW_MAX_ITERS: usize = 100_000;
const POLISH_EVERY: usize = 16;

pub fn chebyshev_ball(cloud: &Cloud) -> EnclosingBall {
    if cloud.norm().is_euclidean() {
        euclidean_ball(cloud.points())
    } else {
        general_ball(cloud)
    }
}

fn sq_dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn combination(points: &[DVector<f64>], lambda: &[f64]) -> DVector<f64> {
    let mut c = DVector::zeros(points[0].len());
    for (p, &l) in points.iter().zip(lambda) {
        if l != 0.0 {
            c.axpy(l, p, 1.0);
        }
    }
    c
}

/// Dual value `sum_i l_i |p_i - c_l|^2` with `c_l = sum_i l_i p_i`.
fn dual_value(points: &[DVector<f64>], lambda: &[f64]) -> f64 {
    let c = combination(points, lambda);
    points.iter().zip(lambda).filter(|(_, &l)| l > 0.0).map(|(p, &l)| l * sq_dist(p, &c)).sum()
}

fn certified(points: &[DVector<f64>], lambda: &[f64], center: DVector<f64>) -> EnclosingBall {
    let upper = points.iter().map(|p| sq_dist(p, &center)).fold(0.0, f64::max).sqrt();
    let lower = dual_value(points, lambda).max(0.0).sqrt().min(upper);
    EnclosingBall { center, radius: Bracket::new(lower, Method::DualCertificate, upper, Method::EnclosingBall) }
}

fn euclidean_ball(points: &[DVector<f64>]) -> EnclosingBall {
    let m = points.len();
    let far = |from: &DVector<f64>| {
        let mut best = (0, -1.0);
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, from);
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    };
    let (a, _) = far(&points[0]);
    let (b, dab) = far(&points[a]);
    if dab == 0.0 {
        return EnclosingBall { center: points[0].clone(), radius: Bracket::exact(0.0, Method::EnclosingBall) };
    }
    let mut lambda = vec![0.0; m];
    lambda[a] = 0.5;
    lambda[b] = 0.5;
    let mut c = combination(points, &lambda);
    let mut d2 = vec![0.0; m];

    for iter in 0..FW_MAX_ITERS {
        if iter % 128 == 127 {
            c = combination(points, &lambda);
        }
        for (i, p) in points.iter().enumerate() {
            d2[i] = sq_dist(p, &c);
        }
        let phi: f64 = lambda.iter().zip(&d2).map(|(l, d)| l * d).sum();
        let (k, dk) = d2.iter().enumerate().fold((0, -1.0), |b, (i, &d)| if d > b.1 { (i, d) } else { b });
        let delta_plus = dk / phi - 1.0;
        let converged = delta_plus <= 1e-15;
        if converged || iter % POLISH_EVERY == 0 {
            if let Some(ball) = polish(points, &lambda, &d2, dk) {
                return ball;
            }
            if converged {
                break;
            }
        }
        let (j, dj) = d2
            .iter()
            .enumerate()
            .filter(|(i, _)| lambda[*i] > 0.0)
            .fold((usize::MAX, f64::INFINITY), |b, (i, &d)| if d < b.1 { (i, d) } else { b });
        let delta_minus = 1.0 - dj / phi;
        if delta_plus >= delta_minus || j == usize::MAX {
            let beta = delta_plus / (2.0 * (1.0 + delta_plus));
            for l in lambda.iter_mut() {
                *l *= 1.0 - beta;
            }
            lambda[k] += beta;
            c = &c * (1.0 - beta) + &points[k] * beta;
        } else {
            let lj = lambda[j];
            let step = delta_minus / (2.0 * (1.0 - delta_minus));
            let drop = lj / (1.0 - lj);
            if step >= drop {
                for l in lambda.iter_mut() {
                    *l *= 1.0 + drop;
                }
                lambda[j] = 0.0;
                let s: f64 = lambda.iter().sum();
                for l in lambda.iter_mut() {
                    *l /= s;
                }
                c = combination(points, &lambda);
            } else {
                for l in lambda.iter_mut() {
                    *l *= 1.0 + step;
                }
                lambda[j] -= step;
                c = &c * (1.0 + step) - &points[j] * step;
            }
        }
    }
    let c = combination(points, &lambda);
    certified(points, &lambda, c)
}

/// Circumcenter of the active points inside their affine hull. Succeeds when
/// the barycentric weights are nonnegative and no point lies outside.
fn polish(points: &[DVector<f64>], lambda: &[f64], d2: &[f64], dmax: f64) -> Option<EnclosingBall> {
    let by_weight: Vec<usize> = (0..points.len()).filter(|&i| lambda[i] > 0.0).collect();
    let near_sphere: Vec<usize> = by_weight.iter().copied().filter(|&i| d2[i] >= dmax * (1.0 - 1e-7)).collect();
    for support in [near_sphere, by_weight] {
        if support.is_empty() {
            continue;
        }
        if let Some(ball) = circumball(points, &support) {
            return Some(ball);
        }
    }
    None
}

fn circumball(points: &[DVector<f64>], support: &[usize]) -> Option<EnclosingBall> {
    let p0 = &points[support[0]];
    let k = support.len() - 1;
    let mut weights = vec![0.0; points.len()];
    let center = if k == 0 {
        weights[support[0]] = 1.0;
        p0.clone()
    } else {
        let a = DMatrix::from_fn(k, p0.len(), |r, c| points[support[r + 1]][c] - p0[c]);
        let g = &a * a.transpose();
        let rhs = DVector::from_fn(k, |r, _| 0.5 * g[(r, r)]);
        let mu = g.svd(true, true).solve(&rhs, 1e-13).ok()?;
        let l0 = 1.0 - mu.sum();
        if l0 < -1e-12 || mu.iter().any(|&x| x < -1e-12) {
            return None;
        }
        weights[support[0]] = l0.max(0.0);
        for (r, &i) in support[1..].iter().enumerate() {
            weights[i] = mu[r].max(0.0);
        }
        let s: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= s;
        }
        p0 + a.transpose() * mu
    };
    let ball = certified(points, &weights, center);
    if ball.radius.upper - ball.radius.lower <= 1e-12 * ball.radius.upper.max(1e-300) {
        Some(EnclosingBall { radius: Bracket { exact: true, ..ball.radius }, ..ball })
    } else {
        None
    }
}

fn general_ball(cloud: &Cloud) -> EnclosingBall {
    let points = cloud.points();
    let norm = cloud.norm();
    let m = points.len();
    let mut diam: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            diam = diam.max(norm.dist(&points[i], &points[j]));
        }
    }
    let objective = |c: &DVector<f64>| points.iter().map(|p| norm.dist(p, c)).fold(0.0, f64::max);
    let mut c = euclidean_ball(points).center;
    let mut g = objective(&c);
    for _ in 0..200 {
        let before = g;
        for k in 0..c.len() {
            let x0 = c[k];
            let mut probe = c.clone();
            let mut f = |x: f64| {
                probe[k] = x;
                objective(&probe)
            };
            let (x, v) = golden_min(&mut f, x0 - g, x0 + g, 100);
            if v < g {
                c[k] = x;
                g = v;
            }
        }
        if before - g <= 1e-14 * before.max(1e-300) {
            break;
        }
    }
    EnclosingBall { center: c, radius: Bracket::new(0.5 * diam, Method::Packing, g, Method::EnclosingBall) }
}

/// Golden-section search on `[lo, hi]` with the default iteration cap.
pub(crate) fn golden_line_min(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    golden_min(f, lo, hi, 200)
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(f: &mut dyn FnMut(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= 1e-15 * (lo.abs() + hi.abs()).max(1e-300) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
