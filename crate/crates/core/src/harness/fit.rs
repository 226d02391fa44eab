use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{golden_min, Bracket};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModel {
    /// `C (log2 n)^beta / n^alpha`
    PolyLog,
    /// `C / (log2 n)^alpha`
    LogOnly,
    /// `C 2^{-c n^alpha}`
    StretchedExp,
}

impl RateModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateModel::PolyLog => "poly-log",
            RateModel::LogOnly => "log-only",
            RateModel::StretchedExp => "stretched-exp",
        }
    }

    pub fn eval(&self, fit: &RateFit, n: f64) -> f64 {
        match self {
            RateModel::PolyLog => fit.c * n.log2().powf(fit.beta) / n.powf(fit.alpha),
            RateModel::LogOnly => fit.c / n.log2().powf(fit.alpha),
            RateModel::StretchedExp => fit.c * (-fit.rate * n.powf(fit.alpha)).exp2(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub model: RateModel,
    pub c: f64,
    pub alpha: f64,
    /// Log exponent of the poly-log model, 0 otherwise.
    pub beta: f64,
    /// `c` of the stretched exponential, 0 otherwise.
    pub rate: f64,
    /// Weighted residual norm in the linearized (log) coordinates.
    pub residual: f64,
    pub window: [u64; 2],
}

/// Weighted least squares `min ||W^{1/2} (A x - y)||`; returns `x` and the residual norm.
fn wls(a: &DMatrix<f64>, y: &DVector<f64>, w: &[f64]) -> (DVector<f64>, f64) {
    let sw = DVector::from_iterator(w.len(), w.iter().map(|v| v.sqrt()));
    let mut aw = a.clone();
    for (i, s) in sw.iter().enumerate() {
        aw.row_mut(i).scale_mut(*s);
    }
    let yw = y.component_mul(&sw);
    let x = aw.clone().svd(true, true).solve(&yw, 1e-14).expect("svd solve");
    let r = (&aw * &x - yw).norm();
    (x, r)
}

/// Fit `model` to the bracket midpoints `series[n]` for `n` in `window`.
///
/// Each point is weighted by `1 / (1 + (width / midpoint)^2)`, so exact
/// brackets get unit weight. Points with nonpositive midpoint are skipped.
pub fn fit_rate(series: &[Bracket], model: RateModel, window: (usize, usize)) -> Result<RateFit> {
    let (lo, hi) = window;
    if hi < lo || hi - lo + 1 < 4 {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] needs at least 4 points")));
    }
    if hi >= series.len() {
        return Err(Error::InvalidArgument(format!("window end {hi} beyond series of length {}", series.len())));
    }
    if model != RateModel::StretchedExp && lo < 2 {
        return Err(Error::InvalidArgument("log models need n >= 2".into()));
    }
    if series[lo..=hi].iter().all(|b| b.midpoint() == 0.0) {
        return Err(Error::DegenerateSeries("all-zero series".into()));
    }
    let pts: Vec<(f64, f64, f64)> = (lo..=hi)
        .filter(|&n| series[n].midpoint() > 0.0)
        .map(|n| {
            let b = &series[n];
            let rel = b.width() / b.midpoint();
            (n as f64, b.midpoint(), 1.0 / (1.0 + rel * rel))
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::DegenerateSeries(format!("only {} positive points in the window", pts.len())));
    }
    let w: Vec<f64> = pts.iter().map(|p| p.2).collect();
    let m = pts.len();
    let win = [lo as u64, hi as u64];
    match model {
        RateModel::LogOnly => {
            let a = DMatrix::from_fn(m, 2, |i, j| if j == 0 { 1.0 } else { -pts[i].0.log2().ln() });
            let y = DVector::from_fn(m, |i, _| pts[i].1.ln());
            let (x, residual) = wls(&a, &y, &w);
            Ok(RateFit { model, c: x[0].exp(), alpha: x[1], beta: 0.0, rate: 0.0, residual, window: win })
        }
        RateModel::PolyLog => {
            let a = DMatrix::from_fn(m, 3, |i, j| match j {
                0 => 1.0,
                1 => -pts[i].0.ln(),
                _ => pts[i].0.log2().ln(),
            });
            let y = DVector::from_fn(m, |i, _| pts[i].1.ln());
            let (x, residual) = wls(&a, &y, &w);
            Ok(RateFit { model, c: x[0].exp(), alpha: x[1], beta: x[2], rate: 0.0, residual, window: win })
        }
        RateModel::StretchedExp => {
            let y = DVector::from_fn(m, |i, _| pts[i].1.log2());
            let solve = |alpha: f64| {
                let a = DMatrix::from_fn(m, 2, |i, j| if j == 0 { 1.0 } else { -pts[i].0.powf(alpha) });
                wls(&a, &y, &w)
            };
            let (alpha, _) = golden_min(&mut |al| solve(al).1, 1e-3, 3.0, 200);
            let (x, residual) = solve(alpha);
            Ok(RateFit { model, c: x[0].exp2(), alpha, beta: 0.0, rate: x[1], residual, window: win })
        }
    }
}
