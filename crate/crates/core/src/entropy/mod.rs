//! Covering, packing, entropy and inner entropy numbers.
//!
//! Covers use closed balls (`dist <= eps`), packings strict separation
//! (`dist > eps`). Outer covers draw their centres from a finite pool: the
//! points, pairwise midpoints (small clouds) and the enclosing-ball centre.

use fixedbitset::FixedBitSet;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spaces::{chebyshev_ball, Bracket, Cloud, CompactSetModel, Method};

mod clique;
mod ksigma;
mod setcover;

pub use ksigma::{ksigma_entropy_bracket, ksigma_inner_entropy, ksigma_inner_entropy_exact};

use setcover::SetCover;

#[derive(Debug, Clone)]
pub struct CoverResult {
    pub epsilon: f64,
    pub centers: Vec<DVector<f64>>,
    pub inner: bool,
    pub cardinality: usize,
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct PackingResult {
    pub epsilon: f64,
    pub points: Vec<DVector<f64>>,
    pub indices: Vec<usize>,
    pub cardinality: usize,
    pub maximal: bool,
    /// True when the packing is known to be of maximum size.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct EntropyOptions {
    /// Node budget for every branch-and-bound call.
    pub node_budget: u64,
    /// Largest cloud handed to the exact set-cover search.
    pub exact_limit: usize,
    /// Largest cloud whose pairwise midpoints join the outer centre pool.
    pub midpoint_limit: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions { node_budget: 1_000_000, exact_limit: 500, midpoint_limit: 64 }
    }
}

/// Exhaustive maximum packing is always attempted up to this size.
pub const EXHAUSTIVE_PACKING_LIMIT: usize = 25;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive and finite, got {eps}")))
    }
}

/// Candidate centres and their distances to every point of a cloud.
struct Pool {
    m: usize,
    centers: Vec<DVector<f64>>,
    dist: Vec<f64>,
    /// Point indices by decreasing norm, ties to the lowest index.
    order: Vec<usize>,
}

impl Pool {
    fn new(cloud: &Cloud, inner: bool, opts: &EntropyOptions) -> Self {
        let m = cloud.len();
        let norm = cloud.norm();
        let pts = cloud.points();
        let mut centers: Vec<DVector<f64>> = pts.to_vec();
        if !inner {
            if m <= opts.midpoint_limit {
                for i in 0..m {
                    for j in i + 1..m {
                        centers.push((&pts[i] + &pts[j]) * 0.5);
                    }
                }
            }
            centers.push(chebyshev_ball(cloud).center);
        }
        let mut dist = vec![0.0; centers.len() * m];
        for (c, center) in centers.iter().enumerate() {
            for p in 0..m {
                dist[c * m + p] = if c < m && c > p { dist[p * m + c] } else { norm.dist(center, &pts[p]) };
            }
        }
        let norms: Vec<f64> = (0..m).map(|i| cloud.point_norm(i)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
        Pool { m, centers, dist, order }
    }

    fn d(&self, c: usize, p: usize) -> f64 {
        self.dist[c * self.m + p]
    }

    /// Largest-norm-first greedy cover; returns centre indices into the pool.
    fn greedy(&self, eps: f64, inner: bool) -> Vec<usize> {
        let m = self.m;
        let mut covered = vec![false; m];
        let mut chosen = Vec::new();
        for &p in &self.order {
            if covered[p] {
                continue;
            }
            let c = if inner {
                p
            } else {
                let mut best = (p, 0);
                for c in 0..self.centers.len() {
                    if self.d(c, p) > eps {
                        continue;
                    }
                    let gain = (0..m).filter(|&q| !covered[q] && self.d(c, q) <= eps).count();
                    if gain > best.1 {
                        best = (c, gain);
                    }
                }
                best.0
            };
            for (q, cov) in covered.iter_mut().enumerate() {
                if self.d(c, q) <= eps {
                    *cov = true;
                }
            }
            chosen.push(c);
        }
        chosen
    }

    fn set_cover(&self, eps: f64, inner: bool) -> SetCover {
        let n_centers = if inner { self.m } else { self.centers.len() };
        let sets = (0..n_centers)
            .map(|c| {
                let mut b = FixedBitSet::with_capacity(self.m);
                for p in 0..self.m {
                    if self.d(c, p) <= eps {
                        b.insert(p);
                    }
                }
                b
            })
            .collect();
        SetCover::new(self.m, sets)
    }

    /// Sorted distinct values of the distance table.
    fn radii(&self, inner: bool) -> Vec<f64> {
        let rows = if inner { self.m } else { self.centers.len() };
        let mut r: Vec<f64> = self.dist[..rows * self.m].to_vec();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

fn pairwise(cloud: &Cloud) -> Vec<f64> {
    let m = cloud.len();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let v = cloud.dist(i, j);
            d[i * m + j] = v;
            d[j * m + i] = v;
        }
    }
    d
}

fn distinct_points(m: usize, d: &[f64]) -> usize {
    (0..m).filter(|&i| (0..i).all(|j| d[j * m + i] > 0.0)).count()
}

/// Lowest-index-first maximal packing with separation `> eps`.
fn greedy_packing(m: usize, d: &[f64], eps: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m {
        if chosen.iter().all(|&j| d[j * m + i] > eps) {
            chosen.push(i);
        }
    }
    chosen
}

/// Same as [`greedy_packing`] with separation `>= delta`.
fn greedy_packing_closed(m: usize, d: &[f64], delta: f64) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m {
        if chosen.iter().all(|&j| d[j * m + i] >= delta) {
            chosen.push(i);
        }
    }
    chosen.len()
}

fn compat_graph(m: usize, d: &[f64], eps: f64) -> Vec<FixedBitSet> {
    (0..m)
        .map(|i| {
            let mut b = FixedBitSet::with_capacity(m);
            for j in 0..m {
                if j != i && d[i * m + j] > eps {
                    b.insert(j);
                }
            }
            b
        })
        .collect()
}

pub fn greedy_cover(k: &CompactSetModel, eps: f64, inner: bool) -> Result<CoverResult> {
    greedy_cover_with(k, eps, inner, &EntropyOptions::default())
}

pub fn greedy_cover_with(k: &CompactSetModel, eps: f64, inner: bool, opts: &EntropyOptions) -> Result<CoverResult> {
    check_eps(eps)?;
    let cloud = k.realize();
    let pool = Pool::new(&cloud, inner, opts);
    let chosen = pool.greedy(eps, inner);
    Ok(CoverResult {
        epsilon: eps,
        cardinality: chosen.len(),
        centers: chosen.iter().map(|&c| pool.centers[c].clone()).collect(),
        inner,
        exact: false,
    })
}

/// Bracket for the minimal covering number at radius `eps`. Inner covers are
/// exact when the search completes; outer covers are exact only relative to
/// the centre pool, so their lower bound is the packing certificate.
pub fn min_cover_exact(k: &CompactSetModel, eps: f64, inner: bool, node_budget: u64) -> Result<Bracket> {
    let opts = EntropyOptions { node_budget, ..EntropyOptions::default() };
    covering_number(k, eps, inner, &opts)
}

pub fn covering_number(k: &CompactSetModel, eps: f64, inner: bool, opts: &EntropyOptions) -> Result<Bracket> {
    check_eps(eps)?;
    let cloud = k.realize();
    let m = cloud.len();
    let d = pairwise(&cloud);
    // Points of a (> 2 eps)-packing need distinct balls of radius eps.
    let pack = greedy_packing(m, &d, 2.0 * eps).len() as f64;
    let pool = Pool::new(&cloud, inner, opts);
    let greedy = pool.greedy(eps, inner).len();
    if m > opts.exact_limit {
        return Ok(Bracket::new(pack, Method::Packing, greedy as f64, Method::Greedy));
    }
    let sc = pool.set_cover(eps, inner);
    let alt = sc.greedy();
    let incumbent = if alt.len() < greedy { alt } else { pool.greedy(eps, inner) };
    let upper_method = if incumbent.len() < greedy { Method::BranchAndBound } else { Method::Greedy };
    let inc_len = incumbent.len();
    let s = sc.search(None, Some(incumbent), opts.node_budget);
    let best = s.best.map(|b| b.len()).unwrap_or(inc_len);
    let upper_method = if best < inc_len { Method::BranchAndBound } else { upper_method };
    let (lower, lower_method) = if inner {
        let bb = if s.complete { best } else { s.root_lower };
        if (bb as f64) >= pack {
            (bb as f64, Method::BranchAndBound)
        } else {
            (pack, Method::Packing)
        }
    } else {
        (pack, Method::Packing)
    };
    Ok(Bracket::new(lower, lower_method, best as f64, upper_method))
}

/// Lowest-index-first maximal packing; for clouds of at most
/// [`EXHAUSTIVE_PACKING_LIMIT`] points the exhaustive maximum is returned.
pub fn max_packing(k: &CompactSetModel, eps: f64) -> Result<PackingResult> {
    check_eps(eps)?;
    let cloud = k.realize();
    if cloud.len() <= EXHAUSTIVE_PACKING_LIMIT {
        return maximum_packing(k, eps, u64::MAX);
    }
    let d = pairwise(&cloud);
    let idx = greedy_packing(cloud.len(), &d, eps);
    Ok(packing_result(&cloud, eps, idx, false))
}

/// Maximum packing by clique search; `exact` reports whether the search
/// finished within the budget.
pub fn maximum_packing(k: &CompactSetModel, eps: f64, node_budget: u64) -> Result<PackingResult> {
    check_eps(eps)?;
    let cloud = k.realize();
    let m = cloud.len();
    let d = pairwise(&cloud);
    let initial = greedy_packing(m, &d, eps);
    let adj = compat_graph(m, &d, eps);
    let s = clique::max_clique(&adj, initial, node_budget);
    let mut idx = s.best;
    idx.sort_unstable();
    // Grow to a maximal packing in index order.
    for i in 0..m {
        if !idx.contains(&i) && idx.iter().all(|&j| d[j * m + i] > eps) {
            idx.push(i);
        }
    }
    idx.sort_unstable();
    Ok(packing_result(&cloud, eps, idx, s.complete))
}

fn packing_result(cloud: &Cloud, eps: f64, idx: Vec<usize>, exact: bool) -> PackingResult {
    PackingResult {
        epsilon: eps,
        points: idx.iter().map(|&i| cloud.points()[i].clone()).collect(),
        cardinality: idx.len(),
        indices: idx,
        maximal: true,
        exact,
    }
}

/// Bracket for the maximal packing number `P~_eps`. The upper side is the
/// smaller of the colouring bound and the inner greedy cover count at
/// `eps / 2` (two packing points never share an inner ball of that radius).
pub fn packing_number(k: &CompactSetModel, eps: f64, node_budget: u64) -> Result<Bracket> {
    check_eps(eps)?;
    let cloud = k.realize();
    let m = cloud.len();
    let d = pairwise(&cloud);
    let initial = greedy_packing(m, &d, eps);
    let adj = compat_graph(m, &d, eps);
    let s = clique::max_clique(&adj, initial, node_budget);
    let found = s.best.len() as f64;
    if s.complete {
        return Ok(Bracket::exact(found, Method::BranchAndBound));
    }
    let pool = Pool::new(&cloud, true, &EntropyOptions::default());
    let cover = pool.greedy(0.5 * eps, true).len();
    let (upper, um) = if cover <= s.colour_bound {
        (cover as f64, Method::Greedy)
    } else {
        (s.colour_bound as f64, Method::BranchAndBound)
    };
    Ok(Bracket::new(found, Method::Packing, upper, um))
}

pub fn entropy_number(k: &CompactSetModel, n: u32, inner: bool) -> Result<Bracket> {
    entropy_number_with(k, n, inner, &EntropyOptions::default())
}

/// Bracket for `e_n` (outer) or `e~_n` (inner): the smallest radius at which
/// `2^n` balls cover the set.
pub fn entropy_number_with(k: &CompactSetModel, n: u32, inner: bool, opts: &EntropyOptions) -> Result<Bracket> {
    let gap = k.tail_gap();
    let cloud = k.realize();
    let m = cloud.len();
    if n >= 63 || (1u64 << n) >= m as u64 {
        return Ok(Bracket::exact(0.0, Method::Trivial).with_tail_gap(gap));
    }
    let budget = 1usize << n;
    let d = pairwise(&cloud);
    if distinct_points(m, &d) <= budget {
        return Ok(Bracket::exact(0.0, Method::Trivial).with_tail_gap(gap));
    }
    if !inner && n == 0 {
        return Ok(chebyshev_ball(&cloud).radius.with_tail_gap(gap));
    }
    let pool = Pool::new(&cloud, inner, opts);
    let radii = pool.radii(inner);

    // Greedy threshold: smallest radius found by bisection with count <= 2^n.
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pool.greedy(radii[mid], inner).len() <= budget {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut upper = radii[hi];
    let mut upper_method = Method::Greedy;
    let mut hi_idx = hi;

    // Packing certificate: more than 2^n points pairwise >= delta apart force
    // some ball to hold two of them, so the radius is at least delta / 2.
    let mut pd: Vec<f64> = d.iter().copied().filter(|&x| x > 0.0).collect();
    pd.sort_by(f64::total_cmp);
    pd.dedup();
    let (mut plo, mut phi) = (0usize, pd.len());
    while plo < phi {
        let mid = (plo + phi) / 2;
        if greedy_packing_closed(m, &d, pd[mid]) > budget {
            plo = mid + 1;
        } else {
            phi = mid;
        }
    }
    let mut lower = if plo == 0 { 0.0 } else { 0.5 * pd[plo - 1] };
    let mut lower_method = Method::Packing;

    if m <= opts.exact_limit {
        let mut lo = radii.partition_point(|&r| r < lower).min(hi_idx);
        let mut proven = true;
        while lo < hi_idx {
            let mid = (lo + hi_idx) / 2;
            let sc = pool.set_cover(radii[mid], inner);
            let inc = sc.greedy();
            let s = sc.search(Some(budget), Some(inc), opts.node_budget);
            if s.best.is_some() {
                hi_idx = mid;
                upper = radii[mid];
                upper_method = Method::BranchAndBound;
            } else if s.complete {
                lo = mid + 1;
            } else {
                proven = false;
                break;
            }
        }
        // Inner thresholds are attained at a tabulated radius, so every radius
        // below `lo` being infeasible pins the lower bound to `radii[lo]`.
        if inner && radii[lo] > lower {
            lower = radii[lo];
            lower_method = Method::BranchAndBound;
        }
        if proven && inner {
            lower = upper;
            lower_method = Method::BranchAndBound;
        }
    }
    Ok(Bracket::new(lower.min(upper), lower_method, upper, upper_method).with_tail_gap(gap))
}

/// Radius at which the largest-norm-first inner greedy first uses at most
/// `2^n` centres, found by bisection over the tabulated distances.
pub fn greedy_inner_threshold(k: &CompactSetModel, n: u32) -> Result<f64> {
    let cloud = k.realize();
    let m = cloud.len();
    if n >= 63 || (1u64 << n) >= m as u64 {
        return Ok(0.0);
    }
    let pool = Pool::new(&cloud, true, &EntropyOptions::default());
    let radii = pool.radii(true);
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pool.greedy(radii[mid], true).len() <= 1usize << n {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(radii[hi])
}
