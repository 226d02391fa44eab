//! Tri-state checks of inequality chains on certified brackets.
//!
//! A check is `violated` only when the certified sides contradict the
//! inequality; overlapping brackets give `indeterminate`.

mod fit;

pub use fit::{fit_rate, RateFit, RateModel};

use serde::Serialize;

use crate::entropy::{covering_number, entropy_number_with, packing_number, EntropyOptions};
use crate::error::{Error, Result};
use crate::lipschitz::{build_phi, build_psi, build_theta, build_xi, fixed_width_upper};
use crate::spaces::{chebyshev_radius, cloud_model, scale_set, sup_norm, Bracket, CompactSetModel};
use crate::widths::{nonlinear_width_with, WidthOptions, WidthResult};

/// Default window for log-scale quantities.
pub const DEFAULT_WINDOW: (usize, usize) = (3, 12);
/// Slack for the witness-level chain.
pub const CHAIN_TOL: f64 = 1e-6;
/// Allowed max/min spread of the two-sided ratio.
pub const BAND_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    Indeterminate,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Indeterminate => "indeterminate",
        }
    }

    /// Violated dominates indeterminate, which dominates holds.
    fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Holds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    /// `None` when no finite witness exists.
    pub witness: Option<f64>,
    pub window: [u64; 2],
    pub details: String,
}

impl Verdict {
    fn new(check: &str, status: Status, witness: Option<f64>, window: (usize, usize), details: String) -> Self {
        let witness = witness.filter(|w| w.is_finite());
        Verdict { check: check.into(), status, witness, window: [window.0 as u64, window.1 as u64], details }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

/// `(lower, upper)` of `max_i w_i x_i` over the given brackets.
fn weighted_max(items: impl Iterator<Item = (f64, Bracket)>) -> (f64, f64) {
    items.fold((0.0, 0.0), |(lo, hi), (w, b)| (lo.max(w * b.lower), hi.max(w * b.upper)))
}

/// Smallest certified `C` with `lhs <= C rhs` from brackets of both sides.
/// `0/0` counts as `0`; a positive left side over a zero right side is a violation.
fn ratio_constant(lhs: (f64, f64), rhs: (f64, f64)) -> (Status, f64) {
    if lhs.1 == 0.0 {
        (Status::Holds, 0.0)
    } else if rhs.0 > 0.0 {
        (Status::Holds, lhs.1 / rhs.0)
    } else if rhs.1 == 0.0 && lhs.0 > 0.0 {
        (Status::Violated, f64::INFINITY)
    } else {
        (Status::Indeterminate, f64::INFINITY)
    }
}

fn check_window(window: (usize, usize), e_len: usize, d_len: usize) -> Result<()> {
    let (lo, hi) = window;
    if e_len == 0 || d_len == 0 {
        return Err(Error::EmptySeries);
    }
    if lo < 1 || hi < lo {
        return Err(Error::InvalidArgument(format!("bad window [{lo}, {hi}]")));
    }
    Ok(())
}

/// Entropy index paired with `k` in the generalized inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NSchedule {
    /// `N_m = lambda^m`, entropy index `k`.
    Exponential { lambda: f64 },
    /// `N_m = m^{a m}`, entropy index `ceil((a + r) k log2 k)`.
    PolyPower { a: f64 },
}

impl NSchedule {
    pub fn library_size(&self, m: usize) -> f64 {
        match *self {
            NSchedule::Exponential { lambda } => lambda.powi(m as i32),
            NSchedule::PolyPower { a } => (m as f64).powf(a * m as f64),
        }
    }

    pub fn entropy_index(&self, r: f64, k: usize) -> usize {
        match *self {
            NSchedule::Exponential { .. } => k,
            NSchedule::PolyPower { a } => ((a + r) * k as f64 * (k as f64).log2()).ceil() as usize,
        }
    }
}

/// Carl-type check over prefixes `1..=n`, `n` in `window`:
/// `max_{k<=n} k^r e[idx(k)] <= C max_{m<=n} m^r d[m-1]`. The witness is the
/// largest prefix constant, so it never decreases when the window grows.
fn carl_core(
    name: &str,
    e: &[Bracket],
    d: &[Bracket],
    r: f64,
    window: (usize, usize),
    idx: impl Fn(usize) -> usize,
) -> Result<Verdict> {
    check_window(window, e.len(), d.len())?;
    let (lo, hi) = window;
    if d.len() < hi || e.len() <= idx(hi) {
        return Err(Error::InvalidArgument(format!("series too short for window [{lo}, {hi}]")));
    }
    let mut status = Status::Holds;
    let mut c: f64 = 0.0;
    for n in lo..=hi {
        let lhs = weighted_max((1..=n).map(|k| ((k as f64).powf(r), e[idx(k)])));
        let rhs = weighted_max((1..=n).map(|m| ((m as f64).powf(r), d[m - 1])));
        let (s, cn) = ratio_constant(lhs, rhs);
        status = status.and(s);
        c = c.max(cn);
    }
    let details = format!("r = {r}; C = max over n in [{lo}, {hi}] of the prefix ratio");
    Ok(Verdict::new(name, status, Some(c), window, details))
}

/// `e[k] = e_k`, `d[j] = d_j`; window `[1, n]`.
pub fn check_carl(e: &[Bracket], d: &[Bracket], r: f64, n: usize) -> Result<Verdict> {
    check_carl_window(e, d, r, (1, n))
}

pub fn check_carl_window(e: &[Bracket], d: &[Bracket], r: f64, window: (usize, usize)) -> Result<Verdict> {
    carl_core("carl", e, d, r, window, |k| k)
}

/// `d[j] = d_j(K, N_{j+1})` under `schedule`.
pub fn check_generalized_carl(
    e: &[Bracket],
    d: &[Bracket],
    r: f64,
    schedule: NSchedule,
    window: (usize, usize),
) -> Result<Verdict> {
    let name = match schedule {
        NSchedule::Exponential { .. } => "generalized-carl-exponential",
        NSchedule::PolyPower { .. } => "generalized-carl-polypower",
    };
    carl_core(name, e, d, r, window, |k| schedule.entropy_index(r, k))
}

/// Build the hat and bump maps from the nonlinear-width witness of `K` and
/// compare their fixed widths with the witness value.
pub fn check_width_chain(k: &CompactSetModel, n: usize, big_n: usize, opts: &WidthOptions) -> Verdict {
    match nonlinear_width_with(k, n, big_n, opts) {
        Ok(w) => check_width_chain_for(k, &w, n, big_n),
        Err(err) => Verdict::new("width-chain", Status::Indeterminate, None, (n, n), err.to_string()),
    }
}

/// [`check_width_chain`] on an already computed nonlinear width of `K`.
pub fn check_width_chain_for(k: &CompactSetModel, w: &WidthResult, n: usize, big_n: usize) -> Verdict {
    let window = (n, n);
    let cloud = k.realize();
    let norm = *cloud.norm();
    let bases = &w.witness.subspaces;
    let maps = if norm.is_euclidean() {
        build_phi(bases).and_then(|a| Ok((a, build_psi(bases)?)))
    } else {
        build_theta(bases, &norm).and_then(|a| Ok((a, build_xi(bases, &norm)?)))
    };
    let (first, second) = match maps {
        Ok(m) => m,
        Err(err) => return Verdict::new("width-chain", Status::Indeterminate, None, window, err.to_string()),
    };
    // The constructions assume sup ||f|| <= 1; dilate the maps otherwise.
    let scale = sup_norm(k).max(1.0);
    let (first, second) = (first.dilated(scale), second.dilated(scale));
    let values = fixed_width_upper(k, &first).and_then(|a| Ok((a, fixed_width_upper(k, &second)?)));
    let (a, b) = match values {
        Ok(v) => v,
        Err(err) => return Verdict::new("width-chain", Status::Indeterminate, None, window, err.to_string()),
    };
    let upper = w.bracket.upper;
    let worst = a.max(b);
    let status = if worst <= upper + CHAIN_TOL { Status::Holds } else { Status::Violated };
    let details = format!(
        "N = {big_n}; d_n(K,N) upper = {upper:.6e}; fixed widths {:?} = {a:.6e}, {:?} = {b:.6e}; map scale {scale}",
        first.kind, second.kind
    );
    Verdict::new("width-chain", status, Some(worst), window, details)
}

/// Packing-to-entropy step: with `eps` just above the nonlinear width, a
/// maximal `3 eps`-packing of size `mu` gives `e~_{ceil log2 mu} <= 3 eps`.
/// The witness is the implied constant `c = eps (mu / N)^{1/n}`.
pub fn check_entropy_from_width(
    k: &CompactSetModel,
    n: usize,
    big_n: usize,
    eps: Option<f64>,
    width_opts: &WidthOptions,
    entropy_opts: &EntropyOptions,
) -> Result<Verdict> {
    let name = "entropy-from-width";
    let window = (n, n);
    let mut model = k.clone();
    let mut scale = 1.0;
    let rad = chebyshev_radius(&model)?;
    if rad.upper >= 1.0 {
        scale = 0.5 / rad.upper;
        model = scale_set(&cloud_model(k.label.clone(), k.realize().into_owned()), scale)?;
    }
    let eps = match eps {
        Some(e) => e,
        None => {
            let w = nonlinear_width_with(&model, n, big_n, width_opts)?;
            (w.bracket.upper * (1.0 + 1e-6)).max(1e-9)
        }
    };
    let mu = packing_number(&model, 3.0 * eps, entropy_opts.node_budget)?;
    if !mu.exact {
        let details = format!("packing at 3 eps = {:.6e} not exact: {:?}", 3.0 * eps, mu);
        return Ok(Verdict::new(name, Status::Indeterminate, None, window, details));
    }
    let mu = mu.upper;
    let index = mu.log2().ceil().max(0.0) as u32;
    let e = entropy_number_with(&model, index, true, entropy_opts)?;
    let bound = 3.0 * eps;
    let status = if e.upper <= bound * (1.0 + 1e-12) {
        Status::Holds
    } else if e.lower > bound * (1.0 + 1e-12) {
        Status::Violated
    } else {
        Status::Indeterminate
    };
    let c = eps * (mu / big_n as f64).powf(1.0 / n.max(1) as f64);
    let details = format!(
        "scale = {scale}; eps = {eps:.6e}; mu = {mu}; inner entropy index {index} in [{:.6e}, {:.6e}] vs 3 eps = {bound:.6e}",
        e.lower, e.upper
    );
    Ok(Verdict::new(name, status, Some(c), window, details))
}

fn compare(lhs: &Bracket, rhs: &Bracket) -> Status {
    if lhs.lower >= rhs.upper {
        Status::Holds
    } else if lhs.upper < rhs.lower {
        Status::Violated
    } else {
        Status::Indeterminate
    }
}

/// `P~_eps >= N~_eps >= P~_{2 eps}` on certified sides. The witness is
/// the upper bound of `N~_eps`.
pub fn check_covering_sandwich(k: &CompactSetModel, eps: f64, opts: &EntropyOptions) -> Result<Verdict> {
    let p1 = packing_number(k, eps, opts.node_budget)?;
    let n1 = covering_number(k, eps, true, opts)?;
    let p2 = packing_number(k, 2.0 * eps, opts.node_budget)?;
    let status = compare(&p1, &n1).and(compare(&n1, &p2));
    let details = format!(
        "eps = {eps:.6e}; P~ in [{}, {}], N~ in [{}, {}], P~(2 eps) in [{}, {}]",
        p1.lower, p1.upper, n1.lower, n1.upper, p2.lower, p2.upper
    );
    Ok(Verdict::new("covering-sandwich", status, Some(n1.upper), (0, 0), details))
}

/// `e_n <= e~_n <= 2 e_n` on certified sides. The witness is
/// `e~_n.upper / e_n.lower`.
pub fn check_entropy_sandwich(k: &CompactSetModel, n: u32, opts: &EntropyOptions) -> Result<Verdict> {
    let e = entropy_number_with(k, n, false, opts)?;
    let inner = entropy_number_with(k, n, true, opts)?;
    let status = compare(&inner, &e).and(compare(&e.scaled(2.0), &inner));
    let witness = if e.lower > 0.0 { inner.upper / e.lower } else if inner.upper == 0.0 { 0.0 } else { f64::INFINITY };
    let details =
        format!("e_n in [{:.6e}, {:.6e}], e~_n in [{:.6e}, {:.6e}]", e.lower, e.upper, inner.lower, inner.upper);
    let n = n as usize;
    Ok(Verdict::new("entropy-sandwich", status, Some(witness), (n, n), details))
}

/// Width-to-entropy schedule `m = ceil(2 alpha n log2 n)`.
///
/// `c0` is the smallest constant with `d[n] <= c0 (log2 n)^beta / n^alpha`
/// on the window; each `n` is tested for `e[m] <= 3 c0 (log2 n)^beta / n^alpha`.
/// The verdict holds when the test holds from some `n0` to the window end
/// (`n0` is reported) and is violated when it fails certifiably at every `n`.
/// The witness is `max e[m] m^alpha / (log2 m)^{alpha + beta}` from `n0` on.
pub fn check_l6_schedule(d: &[Bracket], e: &[Bracket], alpha: f64, beta: f64, window: (usize, usize)) -> Result<Verdict> {
    let name = "l6-schedule";
    check_window(window, e.len(), d.len())?;
    let (lo, hi) = window;
    if lo < 4 {
        return Ok(Verdict::new(name, Status::Indeterminate, None, window, "window must start at n >= 4".into()));
    }
    let m_of = |n: usize| (2.0 * alpha * n as f64 * (n as f64).log2()).ceil() as usize;
    if d.len() <= hi || e.len() <= m_of(hi) {
        return Err(Error::InvalidArgument(format!("series too short for window [{lo}, {hi}]")));
    }
    let rate = |n: usize| (n as f64).log2().powf(beta) / (n as f64).powf(alpha);
    let c0 = (lo..=hi).map(|n| d[n].upper / rate(n)).fold(0.0, f64::max);
    let mut per_n = Vec::new();
    for n in lo..=hi {
        let bound = 3.0 * c0 * rate(n);
        let b = e[m_of(n)];
        per_n.push(if b.upper <= bound {
            Status::Holds
        } else if b.lower > bound {
            Status::Violated
        } else {
            Status::Indeterminate
        });
    }
    let suffix = per_n.iter().rev().take_while(|s| **s == Status::Holds).count();
    let status = if suffix > 0 {
        Status::Holds
    } else if per_n.iter().all(|s| *s == Status::Violated) {
        Status::Violated
    } else {
        Status::Indeterminate
    };
    let n0 = hi + 1 - suffix;
    let witness = (n0..=hi)
        .map(|n| {
            let m = m_of(n) as f64;
            e[m_of(n)].upper * m.powf(alpha) / m.log2().powf(alpha + beta)
        })
        .fold(0.0, f64::max);
    let details = format!("alpha = {alpha}, beta = {beta}; c0 = {c0:.6e}; holds from n0 = {n0}");
    Ok(Verdict::new(name, status, if suffix > 0 { Some(witness) } else { None }, window, details))
}

/// Lower bounds for `d[n] = d_{n-1}(K, N_n)` given entropy numbers `e[n]`.
///
/// Reports `C'' = min_n d[n].lower / g(n)` with `g` the rate shape of the
/// bound (`PolyLog`: `(log2 n)^{beta - alpha} / n^alpha`, `LogOnly`:
/// `(log2 n)^{-alpha}`) and the spread of `e[n].upper / d[n].upper`. Violated
/// if a certified positive entropy meets a zero width, or if even the
/// certified spread exceeds [`BAND_LIMIT`].
pub fn check_lower_bound_theorems(
    e: &[Bracket],
    d: &[Bracket],
    model: RateModel,
    alpha: f64,
    beta: f64,
    window: (usize, usize),
) -> Result<Verdict> {
    let name = "lower-bound";
    check_window(window, e.len(), d.len())?;
    let (lo, hi) = window;
    if lo < 2 || e.len() <= hi || d.len() <= hi {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] needs n >= 2 and full series")));
    }
    let g = |n: usize| {
        let l = (n as f64).log2();
        match model {
            RateModel::PolyLog => Ok(l.powf(beta - alpha) / (n as f64).powf(alpha)),
            RateModel::LogOnly => Ok(l.powf(-alpha)),
            RateModel::StretchedExp => Err(Error::Unsupported("stretched-exp lower bounds carry an unknown exponent".into())),
        }
    };
    if (lo..=hi).all(|n| e[n].upper == 0.0) {
        return Ok(Verdict::new(name, Status::Holds, Some(0.0), window, "zero entropy: band degenerate".into()));
    }
    let mut c2 = f64::INFINITY;
    for n in lo..=hi {
        c2 = c2.min(d[n].lower / g(n)?);
    }
    if (lo..=hi).any(|n| d[n].upper == 0.0 && e[n].lower > 0.0) {
        return Ok(Verdict::new(name, Status::Violated, Some(0.0), window, "zero width against positive entropy".into()));
    }
    let point: Vec<f64> = (lo..=hi).map(|n| e[n].upper / d[n].upper).collect();
    let band = point.iter().copied().fold(0.0, f64::max) / point.iter().copied().fold(f64::INFINITY, f64::min);
    let cert_hi = (lo..=hi).map(|n| e[n].lower / d[n].upper).fold(0.0, f64::max);
    let cert_lo = (lo..=hi).map(|n| e[n].upper / d[n].lower).fold(f64::INFINITY, f64::min);
    let certified_band = if cert_lo > 0.0 { cert_hi / cert_lo } else { 0.0 };
    let status = if certified_band > BAND_LIMIT {
        Status::Violated
    } else if band <= BAND_LIMIT && c2 > 0.0 {
        Status::Holds
    } else {
        Status::Indeterminate
    };
    let details = format!("C'' = {c2:.6e}; band = {band:.6}; certified band >= {certified_band:.6}");
    Ok(Verdict::new(name, status, Some(c2), window, details))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::ksigma_entropy_bracket;
    use crate::spaces::{sigma, Method, NormSpec};
    use crate::widths::{ksigma_linear_width_bracket, ksigma_nonlinear_width_bracket};
    use nalgebra::DVector;

    fn exact(v: f64) -> Bracket {
        Bracket::exact(v, Method::ClosedForm)
    }

    fn ks_e(len: usize) -> Vec<Bracket> {
        (0..len).map(|k| ksigma_entropy_bracket(1.0, k as u32)).collect()
    }

    #[test]
    fn carl_trivial_cases() {
        let zeros = vec![exact(0.0); 13];
        let v = check_carl(&zeros, &zeros, 1.0, 12).unwrap();
        assert_eq!((v.status, v.witness), (Status::Holds, Some(0.0)));
        let ones = vec![exact(1.0); 13];
        assert_eq!(check_carl(&ones, &zeros, 1.0, 12).unwrap().status, Status::Violated);
        assert!(matches!(check_carl(&[], &[], 1.0, 3), Err(Error::EmptySeries)));
    }

    #[test]
    fn carl_ksigma() {
        let d: Vec<Bracket> = (0..13).map(|j| ksigma_linear_width_bracket(1.0, j as f64)).collect();
        let v = check_carl(&ks_e(13), &d, 1.0, 12).unwrap();
        assert!(v.holds() && v.witness.unwrap() > 0.0, "{v:?}");
        let a = check_carl_window(&ks_e(13), &d, 1.0, (3, 8)).unwrap().witness.unwrap();
        let b = check_carl_window(&ks_e(13), &d, 1.0, (3, 12)).unwrap().witness.unwrap();
        assert!(b >= a);
    }

    #[test]
    fn generalized_carl() {
        let sched = NSchedule::Exponential { lambda: 2.0 };
        let d: Vec<Bracket> =
            (0..13).map(|j| ksigma_nonlinear_width_bracket(1.0, j as u64, sched.library_size(j + 1))).collect();
        assert!(check_generalized_carl(&ks_e(13), &d, 1.0, sched, (1, 12)).unwrap().holds());
        let zeros = vec![exact(0.0); 13];
        assert!(check_generalized_carl(&zeros, &zeros, 1.0, sched, (1, 12)).unwrap().holds());
        assert_eq!(check_generalized_carl(&ks_e(13), &zeros, 1.0, sched, (1, 12)).unwrap().status, Status::Violated);
        let poly = NSchedule::PolyPower { a: 1.0 };
        assert_eq!(poly.entropy_index(1.0, 12), 87);
        let d: Vec<Bracket> =
            (0..13).map(|j| ksigma_nonlinear_width_bracket(1.0, j as u64, poly.library_size(j + 1))).collect();
        assert!(check_generalized_carl(&ks_e(90), &d, 1.0, poly, (1, 12)).unwrap().holds());
    }

    #[test]
    fn width_chain_examples() {
        let k = CompactSetModel::cloud(
            "e",
            vec![DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.0, 1.0])],
            NormSpec::euclidean(2).unwrap(),
        )
        .unwrap();
        let v = check_width_chain(&k, 1, 2, &WidthOptions::default());
        assert!(v.holds(), "{v:?}");
        let ks = CompactSetModel::ksigma("ks", 1.0, 33).unwrap();
        let v = check_width_chain(&ks, 1, 4, &WidthOptions::default());
        assert!(v.holds(), "{v:?}");
        // The coordinate family gives sigma_5; tilted lines do better.
        assert!(v.witness.unwrap() <= sigma(1.0, 5.0) + 1e-6, "{v:?}");
    }

    #[test]
    fn entropy_from_width_examples() {
        let e = EntropyOptions::default();
        let w = WidthOptions::default();
        let one = CompactSetModel::cloud("p", vec![DVector::from_column_slice(&[0.3, 0.1])], NormSpec::euclidean(2).unwrap())
            .unwrap();
        assert!(check_entropy_from_width(&one, 1, 2, Some(0.1), &w, &e).unwrap().holds());
        let half = CompactSetModel::cloud(
            "e/2",
            vec![DVector::from_column_slice(&[0.5, 0.0]), DVector::from_column_slice(&[0.0, 0.5])],
            NormSpec::euclidean(2).unwrap(),
        )
        .unwrap();
        assert!(check_entropy_from_width(&half, 1, 1, Some(0.4), &w, &e).unwrap().holds());
        let ks = cloud_model("ks", CompactSetModel::ksigma("ks", 1.0, 65).unwrap().realize().into_owned());
        let ks = scale_set(&ks, 0.5).unwrap();
        let eps = 0.5 * sigma(1.0, 5.0) * (1.0 + 1e-9);
        let v = check_entropy_from_width(&ks, 2, 2, Some(eps), &w, &e).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn sandwiches() {
        let opts = EntropyOptions::default();
        let k = CompactSetModel::cloud(
            "tri",
            vec![
                DVector::from_column_slice(&[0.0, 0.0]),
                DVector::from_column_slice(&[1.0, 0.0]),
                DVector::from_column_slice(&[0.0, 1.0]),
            ],
            NormSpec::euclidean(2).unwrap(),
        )
        .unwrap();
        for eps in [0.3, 0.6, 1.2] {
            assert_ne!(check_covering_sandwich(&k, eps, &opts).unwrap().status, Status::Violated);
        }
        for n in 0..3 {
            assert_ne!(check_entropy_sandwich(&k, n, &opts).unwrap().status, Status::Violated);
        }
        let ks = CompactSetModel::ksigma("ks", 1.0, 20).unwrap();
        assert_ne!(check_entropy_sandwich(&ks, 2, &opts).unwrap().status, Status::Violated);
    }

    #[test]
    fn l6_cases() {
        let e = ks_e(100);
        let sched = NSchedule::Exponential { lambda: 2.0 };
        let d: Vec<Bracket> = (0..13).map(|n| ksigma_nonlinear_width_bracket(1.0, n as u64, sched.library_size(n))).collect();
        let v = check_l6_schedule(&d, &e, 0.5, 0.0, (4, 12)).unwrap();
        assert!(v.holds(), "{v:?}");
        let zeros = vec![exact(0.0); 100];
        assert!(check_l6_schedule(&zeros, &zeros, 0.5, 0.0, (4, 12)).unwrap().holds());
        let big = vec![exact(10.0); 100];
        let small = vec![exact(1e-3); 13];
        assert_eq!(check_l6_schedule(&small, &big, 0.5, 0.0, (4, 12)).unwrap().status, Status::Violated);
        assert_eq!(check_l6_schedule(&small, &big, 0.5, 0.0, (3, 12)).unwrap().status, Status::Indeterminate);
    }

    #[test]
    fn lower_bound_cases() {
        let e: Vec<Bracket> = (0..13).map(|n| ksigma_entropy_bracket(1.0, n as u32)).collect();
        let d: Vec<Bracket> = (0..13)
            .map(|n| if n == 0 { exact(1.0) } else { ksigma_nonlinear_width_bracket(1.0, n as u64 - 1, 2f64.powi(n as i32)) })
            .collect();
        let v = check_lower_bound_theorems(&e, &d, RateModel::LogOnly, 1.0, 0.0, (3, 12)).unwrap();
        assert!(v.holds(), "{v:?}");
        let zeros = vec![exact(0.0); 13];
        assert!(check_lower_bound_theorems(&zeros, &zeros, RateModel::LogOnly, 1.0, 0.0, (3, 12)).unwrap().holds());
        let e: Vec<Bracket> = (0..13).map(|n| exact(1.0 / (n as f64).log2().max(1.0))).collect();
        let d: Vec<Bracket> = (0..13).map(|n| exact(2f64.powi(-(n as i32)))).collect();
        let v = check_lower_bound_theorems(&e, &d, RateModel::LogOnly, 1.0, 0.0, (3, 12)).unwrap();
        assert_eq!(v.status, Status::Violated);
    }
}
