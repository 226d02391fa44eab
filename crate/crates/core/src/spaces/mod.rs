//! Normed spaces, compact set models and certified brackets.

use std::borrow::Cow;
use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};

mod enclosing;

pub use enclosing::{chebyshev_ball, EnclosingBall};
pub(crate) use enclosing::{golden_line_min, golden_min};

/// Which norm a [`NormSpec`] measures with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    Euclidean,
    /// `l_p` norm with finite `p >= 1`.
    P(f64),
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    kind: NormKind,
    dim: usize,
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(NormKind::Euclidean, dim)
    }

    pub fn max(dim: usize) -> Result<Self> {
        Self::new(NormKind::Max, dim)
    }

    pub fn p(p: f64, dim: usize) -> Result<Self> {
        Self::new(NormKind::P(p), dim)
    }

    pub fn new(kind: NormKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let kind = match kind {
            NormKind::P(p) if !(p >= 1.0) || p.is_nan() => {
                return Err(Error::InvalidArgument(format!("p-norm exponent {p} < 1")))
            }
            NormKind::P(p) if p == 2.0 => NormKind::Euclidean,
            NormKind::P(p) if p.is_infinite() => NormKind::Max,
            k => k,
        };
        Ok(NormSpec { kind, dim })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        NormSpec { kind: self.kind, dim }
    }

    pub fn is_euclidean(&self) -> bool {
        self.kind == NormKind::Euclidean
    }

    /// Exponent of the norm, `f64::INFINITY` for the max-norm.
    pub fn exponent(&self) -> f64 {
        match self.kind {
            NormKind::Euclidean => 2.0,
            NormKind::P(p) => p,
            NormKind::Max => f64::INFINITY,
        }
    }

    /// Norm of a slice of the right length; the caller checks dimensions.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            NormKind::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::Max => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::P(p) => {
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
                scale * s.powf(1.0 / p)
            }
        }
    }

    pub fn dist(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self.kind {
            NormKind::Euclidean => a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            NormKind::Max => a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            NormKind::P(_) => {
                let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                self.eval(&d)
            }
        }
    }

    /// Constants `(c, C)` with `c |x|_2 <= |x| <= C |x|_2` in this dimension.
    pub fn euclidean_equivalence(&self) -> (f64, f64) {
        let d = self.dim as f64;
        match self.kind {
            NormKind::Euclidean => (1.0, 1.0),
            NormKind::Max => (d.powf(-0.5), 1.0),
            NormKind::P(p) if p >= 2.0 => (d.powf(1.0 / p - 0.5), 1.0),
            NormKind::P(p) => (1.0, d.powf(1.0 / p - 0.5)),
        }
    }
}

pub fn norm_of(x: &DVector<f64>, space: &NormSpec) -> Result<f64> {
    if x.len() != space.dim {
        return Err(Error::DimensionMismatch { expected: space.dim, got: x.len() });
    }
    Ok(space.eval(x.as_slice()))
}

/// Provenance tag of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Trivial,
    ClosedForm,
    EnclosingBall,
    DualCertificate,
    Greedy,
    GreedyThreshold,
    Packing,
    BranchAndBound,
    Enumeration,
    Spectral,
    DualWeights,
    Heuristic,
    NormEquivalence,
    KSubspaces,
    LocalSearch,
    Sampled,
    Construction,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Trivial => "trivial",
            Method::ClosedForm => "closed-form",
            Method::EnclosingBall => "enclosing-ball",
            Method::DualCertificate => "dual-certificate",
            Method::Greedy => "greedy",
            Method::GreedyThreshold => "greedy-threshold",
            Method::Packing => "packing",
            Method::BranchAndBound => "branch-and-bound",
            Method::Enumeration => "enumeration",
            Method::Spectral => "spectral",
            Method::DualWeights => "dual-weights",
            Method::Heuristic => "heuristic",
            Method::NormEquivalence => "norm-equivalence",
            Method::KSubspaces => "k-subspaces",
            Method::LocalSearch => "local-search",
            Method::Sampled => "sampled",
            Method::Construction => "construction",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Certified interval `[lower, upper]` for a nonnegative quantity.
///
/// `tail_gap` is an additive allowance for points dropped by a truncation;
/// the true value of the untruncated object lies in
/// `[lower - tail_gap, upper + tail_gap]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub lower_method: Method,
    pub upper_method: Method,
    pub tail_gap: f64,
}

pub const EXACT_REL_TOL: f64 = 1e-9;
const ORDER_REL_TOL: f64 = 1e-12;

impl Bracket {
    pub fn new(lower: f64, lower_method: Method, upper: f64, upper_method: Method) -> Self {
        let scale = upper.abs().max(1.0);
        debug_assert!(
            lower <= upper + 1e-9 * scale,
            "bracket out of order: [{lower}, {upper}] ({lower_method}/{upper_method})"
        );
        let lower = lower.max(0.0);
        // Rounding can leave a certified lower bound a few ulps above the upper one.
        let lower = if lower > upper { upper } else { lower };
        let exact = upper - lower <= EXACT_REL_TOL * scale;
        Bracket { lower, upper, exact, lower_method, upper_method, tail_gap: 0.0 }
    }

    pub fn exact(value: f64, method: Method) -> Self {
        Bracket { lower: value, upper: value, exact: true, lower_method: method, upper_method: method, tail_gap: 0.0 }
    }

    pub fn with_tail_gap(mut self, gap: f64) -> Self {
        self.tail_gap = gap;
        self
    }

    /// Multiply both bounds by `|t|`.
    pub fn scaled(&self, t: f64) -> Self {
        let a = t.abs();
        Bracket { lower: self.lower * a, upper: self.upper * a, tail_gap: self.tail_gap * a, ..*self }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn is_ordered(&self) -> bool {
        self.lower >= 0.0 && self.lower <= self.upper + ORDER_REL_TOL * self.upper.abs().max(1.0)
    }

    /// Whether `x` is consistent with the bracket, widened by `slack` and the tail gap.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        let s = slack + self.tail_gap;
        x >= self.lower - s && x <= self.upper + s
    }
}

/// A finite point cloud in a normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct Cloud {
    points: Vec<DVector<f64>>,
    norm: NormSpec,
}

impl Cloud {
    pub fn new(points: Vec<DVector<f64>>, norm: NormSpec) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point cloud is empty".into()));
        }
        for p in &points {
            if p.len() != norm.dim() {
                return Err(Error::DimensionMismatch { expected: norm.dim(), got: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite coordinate".into()));
            }
        }
        Ok(Cloud { points, norm })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.norm.dist(&self.points[i], &self.points[j])
    }

    pub fn point_norm(&self, i: usize) -> f64 {
        self.norm.eval(self.points[i].as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetVariant {
    Cloud(Cloud),
    /// `{sigma_j e_j : j = 1..truncation} ∪ {0}` in euclidean space.
    KSigma { alpha: f64, truncation: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactSetModel {
    pub label: String,
    pub variant: SetVariant,
}

/// `sigma_j = 1 / (log2 log2 (j + 3))^alpha`, accepting real `j >= 1`.
pub fn sigma(alpha: f64, j: f64) -> f64 {
    1.0 / (j + 3.0).log2().log2().powf(alpha)
}

impl CompactSetModel {
    pub fn cloud(label: impl Into<String>, points: Vec<DVector<f64>>, norm: NormSpec) -> Result<Self> {
        Ok(CompactSetModel { label: label.into(), variant: SetVariant::Cloud(Cloud::new(points, norm)?) })
    }

    pub fn ksigma(label: impl Into<String>, alpha: f64, truncation: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be positive".into()));
        }
        Ok(CompactSetModel { label: label.into(), variant: SetVariant::KSigma { alpha, truncation } })
    }

    /// The finite cloud the model stands for. `K_sigma` is realized in
    /// dimension `J` with the points `sigma_j e_j` in order followed by `0`.
    pub fn realize(&self) -> Cow<'_, Cloud> {
        match &self.variant {
            SetVariant::Cloud(c) => Cow::Borrowed(c),
            SetVariant::KSigma { alpha, truncation } => {
                let j = *truncation;
                let mut pts = Vec::with_capacity(j + 1);
                for i in 0..j {
                    let mut v = DVector::zeros(j);
                    v[i] = sigma(*alpha, (i + 1) as f64);
                    pts.push(v);
                }
                pts.push(DVector::zeros(j));
                let norm = NormSpec::euclidean(j).expect("positive truncation");
                Cow::Owned(Cloud { points: pts, norm })
            }
        }
    }

    /// Distance from the untruncated set to the realized cloud.
    pub fn tail_gap(&self) -> f64 {
        match &self.variant {
            SetVariant::Cloud(_) => 0.0,
            SetVariant::KSigma { alpha, truncation } => sigma(*alpha, (*truncation + 1) as f64),
        }
    }

    pub fn sigma_values(&self) -> Option<Vec<f64>> {
        match &self.variant {
            SetVariant::Cloud(_) => None,
            SetVariant::KSigma { alpha, truncation } => {
                Some((1..=*truncation).map(|j| sigma(*alpha, j as f64)).collect())
            }
        }
    }
}

pub fn sup_norm(k: &CompactSetModel) -> f64 {
    match &k.variant {
        SetVariant::Cloud(c) => (0..c.len()).fold(0.0, |m, i| m.max(c.point_norm(i))),
        SetVariant::KSigma { alpha, .. } => sigma(*alpha, 1.0),
    }
}

pub fn chebyshev_radius(k: &CompactSetModel) -> Result<Bracket> {
    let cloud = k.realize();
    Ok(chebyshev_ball(&cloud).radius.with_tail_gap(k.tail_gap()))
}

pub fn scale_set(k: &CompactSetModel, t: f64) -> Result<CompactSetModel> {
    match &k.variant {
        SetVariant::Cloud(c) => {
            let pts = c.points().iter().map(|p| p * t).collect();
            Ok(CompactSetModel {
                label: format!("{}*{}", k.label, t),
                variant: SetVariant::Cloud(Cloud::new(pts, *c.norm())?),
            })
        }
        SetVariant::KSigma { .. } => Err(Error::Unsupported("scale_set needs a point cloud; realize K_sigma first".into())),
    }
}

/// Wrap a realized cloud back into a model.
pub fn cloud_model(label: impl Into<String>, cloud: Cloud) -> CompactSetModel {
    CompactSetModel { label: label.into(), variant: SetVariant::Cloud(cloud) }
}
