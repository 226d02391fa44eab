//! Minimax selection of `N` subspaces: exhaustive over assignments for tiny
//! clouds, K-subspaces with restarts and single-point moves otherwise.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use super::linalg::{complete_basis, residual_sq};
use super::minimax::{fit_subspace, rng_for};
use super::WidthOptions;

pub(crate) const ENUMERATION_MAX_POINTS: usize = 9;
pub(crate) const ENUMERATION_MAX_LIBRARY: usize = 3;
const LOCAL_SEARCH_MAX_POINTS: usize = 64;
const MAX_ROUNDS: usize = 50;
const MAX_MOVES: usize = 400;
const QUICK_SWEEPS: usize = 10;

#[derive(Clone)]
struct ClusterFit {
    basis: DMatrix<f64>,
    value: f64,
    dual: f64,
}

pub(crate) struct Search {
    /// Bases in the reduced coordinates of the points.
    pub subspaces: Vec<DMatrix<f64>>,
    /// Certified lower bound on the optimal objective (not squared), when
    /// the search was exhaustive.
    pub lower: Option<f64>,
}

struct Fitter<'a> {
    q: &'a [DVector<f64>],
    n: usize,
    opts: WidthOptions,
    memo: HashMap<Vec<usize>, ClusterFit>,
}

fn stream_of(members: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in members {
        h ^= i as u64 + 1;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

impl<'a> Fitter<'a> {
    fn new(q: &'a [DVector<f64>], n: usize, opts: &WidthOptions) -> Self {
        let inner = WidthOptions { restarts: opts.inner_restarts.max(1), ..*opts };
        Fitter { q, n, opts: inner, memo: HashMap::new() }
    }

    /// Cheap fits for scoring moves during the search.
    fn quick(q: &'a [DVector<f64>], n: usize, opts: &WidthOptions) -> Self {
        let inner = WidthOptions { restarts: 1, sweeps: QUICK_SWEEPS, ..*opts };
        Fitter { q, n, opts: inner, memo: HashMap::new() }
    }

    fn fit(&mut self, members: &[usize]) -> ClusterFit {
        if let Some(f) = self.memo.get(members) {
            return f.clone();
        }
        let r = self.q[0].len();
        let f = if members.is_empty() {
            ClusterFit { basis: complete_basis(&DMatrix::zeros(r, 0), self.n), value: 0.0, dual: 0.0 }
        } else {
            let pts: Vec<DVector<f64>> = members.iter().map(|&i| self.q[i].clone()).collect();
            let fit = fit_subspace(&pts, self.n, &self.opts, stream_of(members));
            let value = pts.iter().map(|p| residual_sq(p, &fit.basis)).fold(0.0, f64::max);
            let dual = if fit.exact { value.sqrt() } else { fit.dual };
            ClusterFit { basis: fit.basis, value, dual }
        };
        self.memo.insert(members.to_vec(), f.clone());
        f
    }

    fn clusters(assign: &[usize], big_n: usize) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); big_n];
        for (i, &a) in assign.iter().enumerate() {
            c[a].push(i);
        }
        c
    }

    fn objective(&mut self, assign: &[usize], big_n: usize) -> (f64, Vec<DMatrix<f64>>) {
        let mut val: f64 = 0.0;
        let mut bases = Vec::with_capacity(big_n);
        for c in Self::clusters(assign, big_n) {
            let f = self.fit(&c);
            val = val.max(f.value);
            bases.push(f.basis);
        }
        (val, bases)
    }
}

/// Nearest subspace for every point, ties to the lowest index.
pub(crate) fn nearest(q: &[DVector<f64>], bases: &[DMatrix<f64>]) -> (Vec<usize>, f64) {
    let mut worst: f64 = 0.0;
    let assign = q
        .iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (s, b) in bases.iter().enumerate() {
                let d = residual_sq(p, b);
                if d < best.1 {
                    best = (s, d);
                }
            }
            worst = worst.max(best.1);
            best.0
        })
        .collect();
    (assign, worst)
}

pub(crate) fn enumerate(q: &[DVector<f64>], n: usize, big_n: usize, opts: &WidthOptions) -> Search {
    let m = q.len();
    let mut fitter = Fitter::new(q, n, opts);
    let mut assign = vec![0usize; m];
    let mut best: Option<(f64, Vec<DMatrix<f64>>)> = None;
    let mut lower = f64::INFINITY;
    loop {
        let mut part_upper: f64 = 0.0;
        let mut part_lower: f64 = 0.0;
        let mut bases = Vec::new();
        for c in Fitter::clusters(&assign, big_n) {
            let f = fitter.fit(&c);
            part_upper = part_upper.max(f.value);
            part_lower = part_lower.max(f.dual);
            bases.push(f.basis);
        }
        lower = lower.min(part_lower);
        if best.as_ref().map_or(true, |b| part_upper < b.0) {
            best = Some((part_upper, bases));
        }
        // Next restricted growth string with labels below big_n.
        let mut i = m - 1;
        loop {
            if i == 0 {
                let (_, subspaces) = best.expect("at least one assignment");
                return Search { subspaces, lower: Some(lower) };
            }
            let cap = assign[..i].iter().copied().max().unwrap_or(0) + 1;
            if assign[i] + 1 <= cap && assign[i] + 1 < big_n {
                assign[i] += 1;
                for a in assign.iter_mut().skip(i + 1) {
                    *a = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn farthest_first(q: &[DVector<f64>], big_n: usize) -> Vec<usize> {
    let mut seeds: Vec<DMatrix<f64>> = Vec::new();
    let mut dist: Vec<f64> = q.iter().map(|p| p.norm_squared()).collect();
    for _ in 0..big_n {
        let (i, d) = dist.iter().enumerate().fold((0, -1.0), |b, (i, &d)| if d > b.1 { (i, d) } else { b });
        if d <= 0.0 {
            break;
        }
        let line = DMatrix::from_column_slice(q[i].len(), 1, q[i].normalize().as_slice());
        for (dj, p) in dist.iter_mut().zip(q) {
            *dj = dj.min(residual_sq(p, &line));
        }
        seeds.push(line);
    }
    if seeds.is_empty() {
        return vec![0; q.len()];
    }
    nearest(q, &seeds).0
}

fn k_subspaces(q: &[DVector<f64>], n: usize, big_n: usize, opts: &WidthOptions, restart: usize) -> (f64, Vec<DMatrix<f64>>) {
    let m = q.len();
    let mut fitter = Fitter::quick(q, n, opts);
    let mut assign = if restart == 0 {
        farthest_first(q, big_n)
    } else {
        let mut rng = rng_for(opts.seed, 0x6b73_7562, restart as u64);
        (0..m).map(|_| rng.gen_range(0..big_n)).collect()
    };
    let (mut best_val, mut best_bases) = fitter.objective(&assign, big_n);
    for _ in 0..MAX_ROUNDS {
        let (_, bases) = fitter.objective(&assign, big_n);
        let (next, worst) = nearest(q, &bases);
        if worst < best_val {
            best_val = worst;
            best_bases = bases;
        }
        if next == assign {
            break;
        }
        assign = next;
        let (val, bases) = fitter.objective(&assign, big_n);
        if val < best_val {
            best_val = val;
            best_bases = bases;
        }
    }
    if m <= LOCAL_SEARCH_MAX_POINTS {
        local_search(&mut fitter, q, big_n, &mut assign, &mut best_val, &mut best_bases);
    }
    (best_val, best_bases)
}

/// Single-point moves, worst-served points first, first improvement taken.
fn local_search(
    fitter: &mut Fitter,
    q: &[DVector<f64>],
    big_n: usize,
    assign: &mut [usize],
    best_val: &mut f64,
    best_bases: &mut Vec<DMatrix<f64>>,
) {
    let m = q.len();
    let (mut cur, _) = fitter.objective(assign, big_n);
    let mut moves = 0;
    'outer: while moves < MAX_MOVES {
        let (_, bases) = fitter.objective(assign, big_n);
        let mut order: Vec<usize> = (0..m).collect();
        let d: Vec<f64> = (0..m).map(|i| residual_sq(&q[i], &bases[assign[i]])).collect();
        order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
        for &i in &order {
            for c in 0..big_n {
                if c == assign[i] {
                    continue;
                }
                let old = assign[i];
                assign[i] = c;
                let (val, bases) = fitter.objective(assign, big_n);
                if val < cur * (1.0 - 1e-12) {
                    cur = val;
                    moves += 1;
                    if val < *best_val {
                        *best_val = val;
                        *best_bases = bases;
                    }
                    continue 'outer;
                }
                assign[i] = old;
            }
        }
        break;
    }
    let (_, worst) = nearest(q, best_bases);
    *best_val = best_val.min(worst);
}

pub(crate) fn heuristic(q: &[DVector<f64>], n: usize, big_n: usize, opts: &WidthOptions) -> Search {
    let runs: Vec<(f64, Vec<DMatrix<f64>>)> =
        (0..opts.restarts.max(1)).into_par_iter().map(|k| k_subspaces(q, n, big_n, opts, k)).collect();
    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if r.0 < runs[best].0 {
            best = k;
        }
    }
    let (value, mut subspaces) = runs.into_iter().nth(best).expect("at least one restart");
    // Refit the winning clusters with the full inner solver and continue
    // the move search on the accurate objective.
    let (mut assign, _) = nearest(q, &subspaces);
    let mut fitter = Fitter::new(q, n, opts);
    let (full, bases) = fitter.objective(&assign, big_n);
    let (_, worst) = nearest(q, &bases);
    let (mut v, mut b) = (full.min(worst), bases);
    if q.len() <= LOCAL_SEARCH_MAX_POINTS {
        local_search(&mut fitter, q, big_n, &mut assign, &mut v, &mut b);
    }
    if v < value {
        subspaces = b;
    }
    Search { subspaces, lower: None }
}
