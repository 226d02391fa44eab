//! Explicit Lipschitz mappings built from a family of `n`-dimensional
//! subspaces, sampled Lipschitz constants and fixed-width upper bounds.
//!
//! The parameter domain of every map is `B_2(R^n) x [-1, 1]^ell` with the norm
//! `max(||x||_2, ||y||_inf)`.

mod john;

pub use john::{john_ellipsoid, JohnMap, UnitBall, JOHN_MAX_ITERS, JOHN_TOL};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::{golden_line_min, CompactSetModel, NormSpec};
use crate::widths::{best_approximation, orth, orthonormality_defect, rng_for};

/// Pairs per sampling chunk; each chunk owns an RNG stream.
pub const CHUNK_PAIRS: usize = 4096;
pub const DEFAULT_PAIRS: usize = 100_000;
/// Coordinate-descent sweeps in [`fixed_width_upper`].
pub const LOCAL_ITERS: usize = 200;
/// Offsets of the adversarial pairs from breakpoints and cube faces.
pub const ADVERSARIAL_OFFSET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Phi,
    Psi,
    Theta,
    Xi,
    /// `x -> A x + b` on `B_2(R^n)`.
    Affine,
}

/// Hat functions `psi_j` on `[-1, 1]` with breakpoints `a_j = 2j/N - 1`.
#[derive(Debug, Clone, Copy)]
pub struct HatSystem {
    pub n: usize,
}

impl HatSystem {
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.n).map(|j| 2.0 * j as f64 / self.n as f64 - 1.0).collect()
    }

    pub fn center(&self, j: usize) -> f64 {
        (2.0 * j as f64 + 1.0) / self.n as f64 - 1.0
    }

    pub fn eval(&self, j: usize, t: f64) -> f64 {
        (1.0 - self.n as f64 * (t - self.center(j)).abs()).max(0.0)
    }

    /// The only hat that can be nonzero at `t`.
    pub fn active(&self, t: f64) -> usize {
        let j = ((t + 1.0) * self.n as f64 / 2.0).floor();
        (j.max(0.0) as usize).min(self.n - 1)
    }
}

/// Bumps `phi_j(y) = 2 (1/2 - ||c_j - y||_inf)_+` on the `2^ell` unit subcubes of `[-1, 1]^ell`.
#[derive(Debug, Clone, Copy)]
pub struct CubeBumpSystem {
    pub ell: usize,
}

impl CubeBumpSystem {
    pub fn len(&self) -> usize {
        1 << self.ell
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit `k` of `j` selects the sign of coordinate `k`.
    pub fn center(&self, j: usize) -> Vec<f64> {
        (0..self.ell).map(|k| if j >> k & 1 == 1 { 0.5 } else { -0.5 }).collect()
    }

    pub fn eval(&self, j: usize, y: &[f64]) -> f64 {
        let c = self.center(j);
        let d = c.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        2.0 * (0.5 - d).max(0.0)
    }

    /// The only bump that can be nonzero at `y`.
    pub fn active(&self, y: &[f64]) -> usize {
        y.iter().enumerate().map(|(k, &v)| usize::from(v > 0.0) << k).sum()
    }
}

/// One of the constructed maps with its claimed Lipschitz constant.
///
/// `charts[j]` is the full linear chart multiplying the `j`-th hat or bump,
/// scale factors included.
#[derive(Debug, Clone)]
pub struct LipschitzMapSpec {
    pub kind: MapKind,
    pub n: usize,
    pub ell: usize,
    pub charts: Vec<DMatrix<f64>>,
    pub offset: DVector<f64>,
    pub gamma: f64,
    pub ambient: NormSpec,
    /// Number of nonzero charts before padding.
    pub family_size: usize,
    pub john: Vec<JohnMap>,
}

impl LipschitzMapSpec {
    pub fn domain_dim(&self) -> usize {
        self.n + self.ell
    }

    pub fn domain_norm(&self, z: &[f64]) -> f64 {
        let x = z[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt();
        z[self.n..].iter().fold(x, |m, v| m.max(v.abs()))
    }

    /// Nearest point of the domain ball (radial for `x`, clamped for `y`).
    pub fn project(&self, z: &mut [f64]) {
        let x = z[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt();
        if x > 1.0 {
            z[..self.n].iter_mut().for_each(|v| *v /= x);
        }
        z[self.n..].iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
    }

    fn weight(&self, y: &[f64]) -> (usize, f64) {
        match self.kind {
            MapKind::Phi | MapKind::Theta => {
                let h = HatSystem { n: self.charts.len() };
                let j = h.active(y[0]);
                (j, h.eval(j, y[0]))
            }
            MapKind::Psi | MapKind::Xi => {
                let c = CubeBumpSystem { ell: self.ell };
                let j = c.active(y);
                (j, c.eval(j, y))
            }
            MapKind::Affine => (0, 1.0),
        }
    }

    pub fn eval(&self, z: &[f64]) -> DVector<f64> {
        let (j, w) = self.weight(&z[self.n..]);
        let x = DVector::from_column_slice(&z[..self.n]);
        &self.offset + &self.charts[j] * x * w
    }

    /// Parameter `y` at which chart `j` has weight one.
    pub fn anchor(&self, j: usize) -> Vec<f64> {
        match self.kind {
            MapKind::Phi | MapKind::Theta => vec![HatSystem { n: self.charts.len() }.center(j)],
            MapKind::Psi | MapKind::Xi => CubeBumpSystem { ell: self.ell }.center(j),
            MapKind::Affine => Vec::new(),
        }
    }

    /// Output scaled by `t`, constant by `|t|`.
    pub fn dilated(&self, t: f64) -> Self {
        let mut m = self.clone();
        m.charts.iter_mut().for_each(|c| *c *= t);
        m.offset *= t;
        m.gamma *= t.abs();
        m
    }

    /// `x -> a x + offset` on `B_2(R^n)`, claimed constant `||a||_{2 -> X}`
    /// bounded through the euclidean equivalence of the target norm.
    pub fn affine(a: DMatrix<f64>, offset: DVector<f64>, ambient: NormSpec) -> Result<Self> {
        if a.nrows() != ambient.dim() || offset.len() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), got: a.nrows() });
        }
        let op = a.singular_values().iter().copied().fold(0.0, f64::max);
        let gamma = op * ambient.euclidean_equivalence().1;
        Ok(Self {
            kind: MapKind::Affine,
            n: a.ncols(),
            ell: 0,
            charts: vec![a],
            offset,
            gamma,
            ambient,
            family_size: 1,
            john: Vec::new(),
        })
    }
}

fn check_family(bases: &[DMatrix<f64>]) -> Result<(usize, usize)> {
    let first = bases.first().ok_or_else(|| Error::InvalidArgument("empty subspace family".into()))?;
    let (d, n) = first.shape();
    if n == 0 {
        return Err(Error::InvalidArgument("charts need n >= 1".into()));
    }
    for b in bases {
        if b.shape() != (d, n) {
            return Err(Error::DimensionMismatch { expected: n, got: b.ncols() });
        }
        let defect = orthonormality_defect(b);
        if defect > 1e-10 {
            return Err(Error::NonOrthonormal(defect));
        }
    }
    Ok((d, n))
}

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

fn padded(mut charts: Vec<DMatrix<f64>>, ell: usize) -> Vec<DMatrix<f64>> {
    let (d, n) = charts[0].shape();
    charts.resize(1 << ell, DMatrix::zeros(d, n));
    charts
}

/// `Phi(x, t) = sum_j psi_j(t) B_j x` for orthonormal frames `B_j`; claimed `N + 1`.
pub fn build_phi(bases: &[DMatrix<f64>]) -> Result<LipschitzMapSpec> {
    let (d, n) = check_family(bases)?;
    Ok(LipschitzMapSpec {
        kind: MapKind::Phi,
        n,
        ell: 1,
        charts: bases.to_vec(),
        offset: DVector::zeros(d),
        gamma: bases.len() as f64 + 1.0,
        ambient: NormSpec::euclidean(d)?,
        family_size: bases.len(),
        john: Vec::new(),
    })
}

/// `Psi(x, y) = sum_j phi_j(y) B_j x` over `2^ell` cubes, `ell = ceil(log2 N)`,
/// unused cubes carrying the zero chart; claimed `3`.
pub fn build_psi(bases: &[DMatrix<f64>]) -> Result<LipschitzMapSpec> {
    let (d, n) = check_family(bases)?;
    let ell = ceil_log2(bases.len());
    Ok(LipschitzMapSpec {
        kind: MapKind::Psi,
        n,
        ell,
        charts: padded(bases.to_vec(), ell),
        offset: DVector::zeros(d),
        gamma: 3.0,
        ambient: NormSpec::euclidean(d)?,
        family_size: bases.len(),
        john: Vec::new(),
    })
}

/// Charts `2 M B_j phi_j` with `phi_j` the John map of the unit ball of `span B_j` in `ambient`.
fn banach_charts(bases: &[DMatrix<f64>], ambient: &NormSpec) -> Result<(Vec<DMatrix<f64>>, Vec<JohnMap>, f64)> {
    let (d, n) = check_family(bases)?;
    if d != ambient.dim() {
        return Err(Error::DimensionMismatch { expected: ambient.dim(), got: d });
    }
    let mut charts = Vec::with_capacity(bases.len());
    let mut johns = Vec::with_capacity(bases.len());
    let mut m: f64 = 0.0;
    for b in bases {
        let j = john_ellipsoid(&UnitBall::Subspace { basis: b.clone(), norm: ambient.clone() }, n)?;
        m = m.max(j.factor);
        johns.push(j);
    }
    for (b, j) in bases.iter().zip(&johns) {
        charts.push(b * &j.phi * (2.0 * m));
    }
    Ok((charts, johns, m))
}

/// `Theta(x, t) = 2 sum_j psi_j(t) Psibar_j(x)`; claimed `2 M (N + 1)`.
pub fn build_theta(bases: &[DMatrix<f64>], ambient: &NormSpec) -> Result<LipschitzMapSpec> {
    let (charts, john, m) = banach_charts(bases, ambient)?;
    Ok(LipschitzMapSpec {
        kind: MapKind::Theta,
        n: charts[0].ncols(),
        ell: 1,
        gamma: 2.0 * m * (bases.len() as f64 + 1.0),
        offset: DVector::zeros(ambient.dim()),
        charts,
        ambient: ambient.clone(),
        family_size: bases.len(),
        john,
    })
}

/// `Xi(x, y) = 2 sum_j phi_j(y) Psibar_j(x)`; claimed `6 M`.
pub fn build_xi(bases: &[DMatrix<f64>], ambient: &NormSpec) -> Result<LipschitzMapSpec> {
    let (charts, john, m) = banach_charts(bases, ambient)?;
    let ell = ceil_log2(bases.len());
    Ok(LipschitzMapSpec {
        kind: MapKind::Xi,
        n: charts[0].ncols(),
        ell,
        gamma: 6.0 * m,
        offset: DVector::zeros(ambient.dim()),
        charts: padded(charts, ell),
        ambient: ambient.clone(),
        family_size: bases.len(),
        john,
    })
}

pub fn build_theta_xi(bases: &[DMatrix<f64>], ambient: &NormSpec) -> Result<(LipschitzMapSpec, LipschitzMapSpec)> {
    Ok((build_theta(bases, ambient)?, build_xi(bases, ambient)?))
}

fn ratio(map: &LipschitzMapSpec, u: &[f64], v: &[f64]) -> f64 {
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let den = map.domain_norm(&diff);
    if den == 0.0 {
        return 0.0;
    }
    let out = map.eval(u) - map.eval(v);
    map.ambient.eval(out.as_slice()) / den
}

fn unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > 0.0 {
            return g.into_iter().map(|v| v / r).collect();
        }
    }
}

fn uniform_point(map: &LipschitzMapSpec, rng: &mut impl Rng) -> Vec<f64> {
    let n = map.n;
    let mut z = if n > 0 {
        let r = rng.gen::<f64>().powf(1.0 / n as f64);
        unit(rng, n).into_iter().map(|v| v * r).collect()
    } else {
        Vec::new()
    };
    z.extend((0..map.ell).map(|_| rng.gen_range(-1.0..=1.0)));
    z
}

/// Unit `x` nearly maximizing `||chart x||_X` among a few random candidates.
fn steep_direction(map: &LipschitzMapSpec, j: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut best = (unit(rng, map.n), -1.0);
    for _ in 0..16 {
        let x = unit(rng, map.n);
        let v = map.ambient.eval((&map.charts[j] * DVector::from_column_slice(&x)).as_slice());
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}

/// Pairs straddling every breakpoint and cube face within [`ADVERSARIAL_OFFSET`],
/// plus pairs moving towards each chart anchor while shrinking `x`.
fn adversarial_max(map: &LipschitzMapSpec, rng: &mut impl Rng) -> f64 {
    let mut best: f64 = 0.0;
    if map.kind == MapKind::Affine || map.n == 0 {
        return best;
    }
    let charts = map.charts.len();
    for j in 0..charts {
        let anchor = map.anchor(j);
        for rep in 0..8 {
            let x = steep_direction(map, j, rng);
            let delta = ADVERSARIAL_OFFSET * rng.gen_range(0.01..=1.0);
            let off = if rep % 2 == 0 { 0.0 } else { delta * rng.gen::<f64>() };
            // Towards the anchor along all parameter axes, radially shrinking x.
            let sign: Vec<f64> = (0..map.ell).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            let mut u: Vec<f64> = x.clone();
            u.extend(anchor.iter().zip(&sign).map(|(c, s)| c + s * off));
            let mut v: Vec<f64> = x.iter().map(|a| a * (1.0 - delta)).collect();
            v.extend(anchor.iter().zip(&sign).map(|(c, s)| c + s * (off + delta)));
            map.project(&mut u);
            map.project(&mut v);
            best = best.max(ratio(map, &u, &v));
            // Across the faces of the support of chart j.
            for k in 0..map.ell {
                for face in [-0.5, 0.5] {
                    let b = anchor[k] + face;
                    let x2 = unit(rng, map.n);
                    let mut u = x.clone();
                    let mut yu = anchor.clone();
                    yu[k] = b - delta * rng.gen::<f64>();
                    let mut yv = yu.clone();
                    yv[k] = b + delta * rng.gen::<f64>();
                    let mut v = if rep % 2 == 0 { x.clone() } else { x2 };
                    u.extend(yu);
                    v.extend(yv);
                    map.project(&mut u);
                    map.project(&mut v);
                    best = best.max(ratio(map, &u, &v));
                }
            }
        }
    }
    if matches!(map.kind, MapKind::Phi | MapKind::Theta) {
        for &a in &(HatSystem { n: charts }).breakpoints() {
            for _ in 0..8 {
                let x = unit(rng, map.n);
                let x2 = unit(rng, map.n);
                let delta = ADVERSARIAL_OFFSET * rng.gen::<f64>();
                let mut u = x.clone();
                u.push(a - delta);
                let mut v = x2;
                v.push(a + ADVERSARIAL_OFFSET * rng.gen::<f64>());
                map.project(&mut u);
                map.project(&mut v);
                best = best.max(ratio(map, &u, &v));
            }
        }
    }
    best
}

/// Largest sampled `||map(u) - map(v)||_X / ||u - v||` over `pairs` random pairs
/// (half uniform, half local perturbations) plus the adversarial pairs.
/// A lower estimate of the true constant; independent of the thread schedule.
pub fn estimate_lipschitz(map: &LipschitzMapSpec, pairs: usize, seed: u64) -> f64 {
    let pairs = pairs.max(1);
    let chunks = pairs.div_ceil(CHUNK_PAIRS);
    let sampled = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64 + 1, 0);
            let count = CHUNK_PAIRS.min(pairs - c * CHUNK_PAIRS);
            let mut best: f64 = 0.0;
            for i in 0..count {
                let u = uniform_point(map, &mut rng);
                let v = if i % 2 == 0 {
                    uniform_point(map, &mut rng)
                } else {
                    let scale = 10f64.powf(rng.gen_range(-6.0..-1.0));
                    let mut v: Vec<f64> = u.iter().map(|a| a + scale * rng.sample::<f64, _>(StandardNormal)).collect();
                    map.project(&mut v);
                    v
                };
                best = best.max(ratio(map, &u, &v));
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    let mut rng = rng_for(seed, 0, 0);
    sampled.max(adversarial_max(map, &mut rng))
}

/// Coordinates of the best approximation of `target` from the range of `chart`.
fn chart_coordinates(chart: &DMatrix<f64>, target: &DVector<f64>, ambient: &NormSpec) -> Result<DVector<f64>> {
    let n = chart.ncols();
    if chart.amax() == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let q = orth(chart);
    let (g, _) = best_approximation(target, &q, ambient)?;
    let svd = chart.clone().svd(true, true);
    let x = svd.solve(&g, 1e-12).map_err(|e| Error::Precondition(e.to_string()))?;
    Ok(x)
}

fn local_min(map: &LipschitzMapSpec, f: &DVector<f64>, mut z: Vec<f64>) -> f64 {
    let err = |z: &[f64]| map.ambient.eval((f - map.eval(z)).as_slice());
    let mut g = err(&z);
    for _ in 0..LOCAL_ITERS {
        let before = g;
        for i in 0..z.len() {
            let (lo, hi) = if i < map.n {
                let rest: f64 = z[..map.n].iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v * v).sum();
                let r = (1.0 - rest).max(0.0).sqrt();
                (-r, r)
            } else {
                (-1.0, 1.0)
            };
            let mut w = z.clone();
            let mut line = |s: f64| {
                w[i] = s;
                err(&w)
            };
            let (s, v) = golden_line_min(&mut line, lo, hi);
            if v < g {
                z[i] = s;
                g = v;
            }
        }
        if before - g <= 1e-14 * before.max(1e-300) {
            break;
        }
    }
    g
}

/// `sup_f min_z ||f - map(z)||_X` with the inner minimum taken by coordinate
/// descent from the best chart anchor; an upper bound on the fixed width of this map.
pub fn fixed_width_upper(k: &CompactSetModel, map: &LipschitzMapSpec) -> Result<f64> {
    let cloud = k.realize();
    if cloud.dim() != map.ambient.dim() {
        return Err(Error::DimensionMismatch { expected: map.ambient.dim(), got: cloud.dim() });
    }
    let per_point: Result<Vec<f64>> = cloud
        .points()
        .par_iter()
        .map(|f| {
            let target = f - &map.offset;
            let mut best: Option<(f64, Vec<f64>)> = None;
            for j in 0..map.family_size.min(map.charts.len()).max(1) {
                let mut z: Vec<f64> = chart_coordinates(&map.charts[j], &target, &map.ambient)?.iter().copied().collect();
                z.extend(map.anchor(j));
                map.project(&mut z);
                let e = map.ambient.eval((f - map.eval(&z)).as_slice());
                if best.as_ref().map_or(true, |b| e < b.0) {
                    best = Some((e, z));
                }
            }
            let (_, z) = best.expect("at least one chart");
            Ok(local_min(map, f, z))
        })
        .collect();
    Ok(per_point?.into_iter().fold(0.0, f64::max))
}
