//! Exact minimax subspaces in spans of dimension two and three.
//!
//! Hyperplanes: the objective `max_i |<q_i, u>|` over unit normals `u` is
//! minimized at a vertex of the arrangement of great circles
//! `{u : <w, u> = 0}`, `w` ranging over `q_i` and `q_i ± q_j`.
//!
//! Lines in three dimensions: the objective `max_i |q_i|^2 - <q_i, u>^2`
//! attains its minimum at a point where one, two or three branches are
//! active; each case reduces to finitely many candidates (axes, pair
//! equalities inside or orthogonal to a pair plane, and intersections of two
//! conics).

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::linalg::complement;

const TINY: f64 = 1e-13;

pub(crate) struct ExactFit {
    pub basis: DMatrix<f64>,
    pub value: f64,
}

/// Returns `None` when the instance is outside the supported shapes.
pub(crate) fn exact_fit(q: &[DVector<f64>], n: usize) -> Option<ExactFit> {
    let r = q[0].len();
    match (r, n) {
        (2, 1) => Some(hyperplane_2d(q)),
        (3, 2) => Some(hyperplane_3d(q)),
        (3, 1) => Some(lines_3d(q)),
        _ => None,
    }
}

fn hyper_value(q: &[DVector<f64>], u: &DVector<f64>) -> f64 {
    q.iter().fold(0.0f64, |m, p| m.max(p.dot(u).abs()))
}

fn differences(q: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let scale = q.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let mut w: Vec<DVector<f64>> = Vec::new();
    for i in 0..q.len() {
        w.push(q[i].clone());
        for j in i + 1..q.len() {
            w.push(&q[i] - &q[j]);
            w.push(&q[i] + &q[j]);
        }
    }
    w.retain(|v| v.norm() > TINY * scale);
    w
}

fn finish_hyperplane(q: &[DVector<f64>], best: (f64, DVector<f64>)) -> ExactFit {
    let u = DMatrix::from_column_slice(q[0].len(), 1, best.1.as_slice());
    ExactFit { basis: complement(&u), value: best.0 }
}

fn hyperplane_2d(q: &[DVector<f64>]) -> ExactFit {
    let mut best = (f64::INFINITY, DVector::from_column_slice(&[1.0, 0.0]));
    for w in differences(q) {
        let u = DVector::from_column_slice(&[-w[1], w[0]]).normalize();
        let v = hyper_value(q, &u);
        if v < best.0 {
            best = (v, u);
        }
    }
    finish_hyperplane(q, best)
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn hyperplane_3d(q: &[DVector<f64>]) -> ExactFit {
    let w: Vec<Vector3<f64>> = differences(q).iter().map(v3).collect();
    let qs: Vec<Vector3<f64>> = q.iter().map(v3).collect();
    let mut best = (f64::INFINITY, Vector3::x());
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            let c = w[a].cross(&w[b]);
            let nc = c.norm();
            if nc <= TINY * w[a].norm() * w[b].norm() {
                continue;
            }
            let u = c / nc;
            let v = qs.iter().fold(0.0f64, |m, p| m.max(p.dot(&u).abs()));
            if v < best.0 {
                best = (v, u);
            }
        }
    }
    finish_hyperplane(q, (best.0, DVector::from_column_slice(best.1.as_slice())))
}

fn line_value(qs: &[Vector3<f64>], u: &Vector3<f64>) -> f64 {
    qs.iter().fold(0.0f64, |m, p| m.max(p.norm_squared() - p.dot(u).powi(2))).max(0.0)
}

/// Unit vectors `u = cos t g1 + sin t g2` with `u^T M u = c`.
fn on_circle(g1: &Vector3<f64>, g2: &Vector3<f64>, m: &Matrix3<f64>, c: f64, out: &mut Vec<Vector3<f64>>) {
    let a11 = g1.dot(&(m * g1));
    let a22 = g2.dot(&(m * g2));
    let a12 = g1.dot(&(m * g2));
    let a = 0.5 * (a11 - a22);
    let b = a12;
    let rhs = c - 0.5 * (a11 + a22);
    let rad = a.hypot(b);
    let scale = m.norm().max(c.abs()).max(1e-300);
    if rad <= TINY * scale {
        if rhs.abs() <= 1e-10 * scale {
            out.push(*g1);
            out.push(*g2);
            out.push((g1 + g2).normalize());
        }
        return;
    }
    let ratio = rhs / rad;
    if ratio.abs() > 1.0 + 1e-12 {
        return;
    }
    let phi0 = b.atan2(a);
    let delta = ratio.clamp(-1.0, 1.0).acos();
    for phi in [phi0 + delta, phi0 - delta] {
        let t = 0.5 * phi;
        out.push(g1 * t.cos() + g2 * t.sin());
    }
}

fn plane_basis(normal: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let n = normal.normalize();
    let pick = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let g1 = (pick - n * n.dot(&pick)).normalize();
    let g2 = n.cross(&g1);
    (g1, g2)
}

fn det_pencil(a1: &Matrix3<f64>, a2: &Matrix3<f64>, phi: f64) -> f64 {
    (a1 * phi.cos() + a2 * phi.sin()).determinant()
}

/// Common zeros on the sphere of the quadratic forms `a1`, `a2`.
fn conic_intersections(a1: &Matrix3<f64>, a2: &Matrix3<f64>, out: &mut Vec<Vector3<f64>>) {
    const SAMPLES: usize = 96;
    let mut roots = Vec::new();
    let step = std::f64::consts::PI / SAMPLES as f64;
    let mut prev = det_pencil(a1, a2, 0.0);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for s in 1..=SAMPLES {
        let phi = s as f64 * step;
        let cur = det_pencil(a1, a2, phi);
        if cur == 0.0 {
            roots.push(phi);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut lo, mut hi, mut flo) = (phi - step, phi, prev);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = det_pencil(a1, a2, mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    for phi in roots {
        let d = a1 * phi.cos() + a2 * phi.sin();
        let eig = d.symmetric_eigen();
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&x, &y| eig.eigenvalues[x].abs().total_cmp(&eig.eigenvalues[y].abs()));
        let e0: Vector3<f64> = eig.eigenvectors.column(idx[0]).into_owned();
        let (la, lb) = (eig.eigenvalues[idx[1]], eig.eigenvalues[idx[2]]);
        let ea: Vector3<f64> = eig.eigenvectors.column(idx[1]).into_owned();
        let eb: Vector3<f64> = eig.eigenvectors.column(idx[2]).into_owned();
        out.push(e0);
        let mut normals = Vec::new();
        if la.abs() <= 1e-10 * lb.abs() {
            normals.push(eb);
        } else if la * lb < 0.0 {
            normals.push(ea * la.abs().sqrt() + eb * lb.abs().sqrt());
            normals.push(ea * la.abs().sqrt() - eb * lb.abs().sqrt());
        }
        for nrm in normals {
            let (g1, g2) = plane_basis(&nrm);
            let before = out.len();
            on_circle(&g1, &g2, a1, 0.0, out);
            if out.len() == before {
                on_circle(&g1, &g2, a2, 0.0, out);
            }
        }
    }
}

fn lines_3d(q: &[DVector<f64>]) -> ExactFit {
    let qs: Vec<Vector3<f64>> = q.iter().map(v3).collect();
    let scale = qs.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let nz: Vec<Vector3<f64>> = qs.iter().copied().filter(|p| p.norm() > TINY * scale).collect();
    let mut cands: Vec<Vector3<f64>> = nz.iter().map(|p| p.normalize()).collect();
    let outer = |p: &Vector3<f64>| p * p.transpose();
    for i in 0..nz.len() {
        for j in 0..nz.len() {
            if i == j {
                continue;
            }
            let (qi, qj) = (nz[i], nz[j]);
            let c = qi.norm_squared() - qj.norm_squared();
            if i < j {
                let cr = qi.cross(&qj);
                if cr.norm() > TINY * qi.norm() * qj.norm() {
                    cands.push(cr.normalize());
                    let g1 = qi.normalize();
                    let g2 = (qj - g1 * g1.dot(&qj)).normalize();
                    on_circle(&g1, &g2, &(outer(&qi) - outer(&qj)), c, &mut cands);
                }
            }
            // Branch i stationary at its maximum (u orthogonal to q_i) while tied with j.
            let (g1, g2) = plane_basis(&qi);
            on_circle(&g1, &g2, &outer(&qj), -c, &mut cands);
        }
    }
    let id = Matrix3::identity();
    for i in 0..nz.len() {
        for j in i + 1..nz.len() {
            for k in j + 1..nz.len() {
                let (qi, qj, qk) = (nz[i], nz[j], nz[k]);
                let a1 = outer(&qi) - outer(&qj) - id * (qi.norm_squared() - qj.norm_squared());
                let a2 = outer(&qi) - outer(&qk) - id * (qi.norm_squared() - qk.norm_squared());
                conic_intersections(&a1, &a2, &mut cands);
            }
        }
    }
    let mut best = (f64::INFINITY, Vector3::x());
    for u in cands {
        let nu = u.norm();
        if !(nu > 0.0) || !nu.is_finite() {
            continue;
        }
        let u = u / nu;
        let v = line_value(&qs, &u);
        if v < best.0 {
            best = (v, u);
        }
    }
    ExactFit { basis: DMatrix::from_column_slice(3, 1, best.1.as_slice()), value: best.0.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn grid_line_2d(q: &[DVector<f64>]) -> f64 {
        let mut best = f64::INFINITY;
        let steps = 200_000;
        for s in 0..steps {
            let t = std::f64::consts::PI * s as f64 / steps as f64;
            let u = DVector::from_column_slice(&[-t.sin(), t.cos()]);
            best = best.min(hyper_value(q, &u));
        }
        best
    }

    #[test]
    fn two_unit_vectors() {
        let q = vec![DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.0, 1.0])];
        let f = exact_fit(&q, 1).unwrap();
        assert!((f.value - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planar_lines_match_angle_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = rng.gen_range(2..7);
            let q: Vec<DVector<f64>> =
                (0..m).map(|_| DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let f = exact_fit(&q, 1).unwrap();
            let g = grid_line_2d(&q);
            assert!(f.value <= g + 1e-12);
            assert!(g - f.value < 1e-4);
        }
    }

    #[test]
    fn lines_in_space_match_sphere_search() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let m = rng.gen_range(3..7);
            let q: Vec<DVector<f64>> =
                (0..m).map(|_| DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let qs: Vec<Vector3<f64>> = q.iter().map(v3).collect();
            let f = exact_fit(&q, 1).unwrap();
            // Dense sphere grid followed by a local refinement.
            let mut best = (f64::INFINITY, Vector3::x());
            let k = 400;
            for a in 0..k {
                for b in 0..k {
                    let th = std::f64::consts::PI * a as f64 / k as f64;
                    let ph = std::f64::consts::PI * b as f64 / k as f64;
                    let u = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
                    let v = line_value(&qs, &u);
                    if v < best.0 {
                        best = (v, u);
                    }
                }
            }
            let mut step = 0.01;
            let mut u = best.1;
            while step > 1e-9 {
                let mut moved = false;
                for d in [Vector3::x(), Vector3::y(), Vector3::z()] {
                    for s in [step, -step] {
                        let w = (u + d * s).normalize();
                        let v = line_value(&qs, &w);
                        if v < best.0 {
                            best.0 = v;
                            u = w;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            assert!(f.value <= best.0.sqrt() + 1e-9, "{} vs {}", f.value, best.0.sqrt());
        }
    }
}
