//! Config-driven experiment runner.
//!
//! Every experiment expands into granules (one per grid point). A granule
//! draws its random numbers from a stream derived from the run seed, the
//! experiment id and the granule index, so outputs do not depend on the
//! number of worker threads.

mod config;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub use config::{
    CarlSpec, EntropyFromWidthSpec, EntropyKind, EntropySpec, Experiment, L6Spec, LinearWidthSpec, LipschitzSpec,
    MtermSpec, NonlinearWidthSpec, NormName, ReproduceSpec, RunConfig, ScheduleName, SetSpec,
};
pub use report::{emit_report, fmt_num, sort_rows, PlotSeries, ReportRow, CSV_HEADER};

use crate::entropy::{
    entropy_number_with, greedy_inner_threshold, ksigma_entropy_bracket, ksigma_inner_entropy,
    ksigma_inner_entropy_exact, EntropyOptions,
};
use crate::error::{Error, Result};
use crate::harness::{
    check_carl_window, check_entropy_from_width, check_generalized_carl, check_l6_schedule, check_lower_bound_theorems,
    check_width_chain_for, fit_rate, NSchedule, RateModel, Status, Verdict, DEFAULT_WINDOW,
};
use crate::lipschitz::{build_phi, build_psi, build_theta, build_xi, estimate_lipschitz, DEFAULT_PAIRS};
use crate::mterm::{check_sigma_chain, sigma_chain_sides, VPOperator};
use crate::spaces::{cloud_model, scale_set, sup_norm, Bracket, CompactSetModel, Method, SetVariant};
use crate::widths::{
    ksigma_linear_width_bracket, ksigma_nonlinear_width_bracket, linear_width_with, nonlinear_width_with, rng_for,
    WidthOptions,
};
use config::norm_spec;

pub const DEFAULT_OUT_DIR: &str = "out";
/// Relative slack when comparing a sampled Lipschitz constant with its claim.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub quiet: bool,
    /// Record wall-clock times in `runtime_ms`; off by default so reruns are byte-identical.
    pub timings: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
    pub plots: Vec<PlotSeries>,
}

impl RunSummary {
    pub fn violated(&self) -> usize {
        self.verdicts.iter().filter(|v| v.status == Status::Violated).count()
    }

    /// 0 on success, 2 when any verdict is violated.
    pub fn exit_code(&self) -> i32 {
        if self.violated() > 0 {
            2
        } else {
            0
        }
    }
}

#[derive(Default)]
struct Output {
    rows: Vec<ReportRow>,
    verdicts: Vec<Verdict>,
}

type Task<'a> = Box<dyn Fn(u64) -> Result<Output> + Send + Sync + 'a>;

struct Granule<'a> {
    id: &'a str,
    seed: u64,
    stochastic: bool,
    label: String,
    task: Task<'a>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Seed of granule `index` of experiment `id`.
pub fn granule_seed(seed: u64, id: &str, index: u64) -> u64 {
    splitmix(splitmix(seed ^ fnv(id)) ^ index)
}

const SET_STREAM: u64 = 1 << 40;

fn ksigma_label(alpha: f64, j: usize) -> String {
    format!("ksigma(alpha={alpha},J={j})")
}

fn scaled(model: CompactSetModel, scale: Option<f64>) -> Result<CompactSetModel> {
    match scale {
        None => Ok(model),
        Some(t) => {
            let cloud = cloud_model(model.label.clone(), model.realize().into_owned());
            scale_set(&cloud, t)
        }
    }
}

fn build_sets(spec: &SetSpec, seed: u64, id: &str) -> Result<Vec<CompactSetModel>> {
    match spec {
        SetSpec::Ksigma { alpha, truncation, scale } => {
            Ok(vec![scaled(CompactSetModel::ksigma(ksigma_label(*alpha, *truncation), *alpha, *truncation)?, *scale)?])
        }
        SetSpec::Points { points, norm, p, scale } => {
            let dim = points.first().map_or(0, Vec::len);
            let norm = norm_spec(*norm, *p, dim)?;
            let pts = points.iter().map(|p| DVector::from_column_slice(p)).collect();
            Ok(vec![scaled(CompactSetModel::cloud("points", pts, norm)?, *scale)?])
        }
        SetSpec::Random { count, dim, norm, p, sphere, instances, scale } => {
            if *count == 0 || *dim == 0 || *instances == 0 {
                return Err(Error::InvalidArgument("random sets need positive count, dim and instances".into()));
            }
            let norm = norm_spec(*norm, *p, *dim)?;
            (0..*instances)
                .map(|i| {
                    let mut rng = rng_for(granule_seed(seed, id, SET_STREAM + i as u64), 0, 0);
                    let pts = (0..*count)
                        .map(|_| {
                            if *sphere {
                                let v = DVector::from_fn(*dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                                let r = v.norm();
                                if r > 0.0 {
                                    v / r
                                } else {
                                    v
                                }
                            } else {
                                DVector::from_fn(*dim, |_, _| rng.gen_range(-1.0..=1.0))
                            }
                        })
                        .collect();
                    scaled(CompactSetModel::cloud(format!("random-{i}"), pts, norm)?, *scale)
                })
                .collect()
        }
    }
}

fn width_opts(seed: u64, restarts: Option<usize>) -> WidthOptions {
    let d = WidthOptions::default();
    WidthOptions { seed, restarts: restarts.unwrap_or(d.restarts), ..d }
}

fn range(r: [usize; 2]) -> std::ops::RangeInclusive<usize> {
    r[0]..=r[1]
}

fn ksigma_alpha(k: &CompactSetModel) -> Option<f64> {
    match k.variant {
        SetVariant::KSigma { alpha, .. } => Some(alpha),
        SetVariant::Cloud(_) => None,
    }
}

fn one_row(row: ReportRow) -> Result<Output> {
    Ok(Output { rows: vec![row], verdicts: Vec::new() })
}

fn tag(mut v: Verdict, id: &str, label: &str) -> Verdict {
    v.check = format!("{id}/{}", v.check);
    v.details = format!("{label}: {}", v.details);
    v
}

/// Series of a Carl experiment: `(e, d)`.
fn carl_series(spec: &CarlSpec, k: Option<&CompactSetModel>, schedule: Option<NSchedule>, seed: u64) -> Result<(Vec<Bracket>, Vec<Bracket>)> {
    let hi = spec.window[1];
    let r_max = spec.r.iter().copied().fold(0.0, f64::max);
    let e_len = schedule.map_or(hi, |s| s.entropy_index(r_max, hi)) + 1;
    if let (Some(e), Some(d)) = (&spec.e, &spec.d) {
        let ex = |v: &Vec<f64>| v.iter().map(|&x| Bracket::exact(x, Method::Trivial)).collect();
        return Ok((ex(e), ex(d)));
    }
    let k = k.expect("validated: set or series");
    if let Some(alpha) = ksigma_alpha(k) {
        let e = (0..e_len).map(|i| ksigma_entropy_bracket(alpha, i as u32)).collect();
        let d = (0..hi)
            .map(|j| match schedule {
                None => ksigma_linear_width_bracket(alpha, j as f64),
                Some(s) => ksigma_nonlinear_width_bracket(alpha, j as u64, s.library_size(j + 1)),
            })
            .collect();
        return Ok((e, d));
    }
    let eo = EntropyOptions::default();
    let wo = width_opts(seed, None);
    let cloud = k.realize();
    let (m, dim) = (cloud.len(), cloud.dim());
    let e = (0..e_len).map(|i| entropy_number_with(k, i.min(64) as u32, false, &eo)).collect::<Result<Vec<_>>>()?;
    let d = (0..hi)
        .map(|j| {
            if j >= dim {
                return Ok(Bracket::exact(0.0, Method::Trivial));
            }
            match schedule {
                None => Ok(linear_width_with(k, j, &wo)?.bracket),
                Some(s) => {
                    let big_n = s.library_size(j + 1).min(m as f64).max(1.0) as usize;
                    Ok(nonlinear_width_with(k, j, big_n, &wo)?.bracket)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((e, d))
}

fn schedule_of(spec: &CarlSpec) -> Result<Option<NSchedule>> {
    match spec.schedule {
        ScheduleName::Linear => Ok(None),
        ScheduleName::Exponential => spec
            .lambda
            .map(|lambda| Some(NSchedule::Exponential { lambda }))
            .ok_or_else(|| Error::InvalidArgument("exponential schedule needs lambda".into())),
        ScheduleName::PolyPower => spec
            .a
            .map(|a| Some(NSchedule::PolyPower { a }))
            .ok_or_else(|| Error::InvalidArgument("poly-power schedule needs a".into())),
    }
}

/// Fits requested by an experiment: `(quantity, model, window)`.
fn fits_of(exp: &Experiment) -> Vec<(&'static str, RateModel, Option<[usize; 2]>, [usize; 2])> {
    match exp {
        Experiment::Entropy(s) => match s.fit {
            Some(m) => vec![("entropy", m, s.window, s.n), ("inner_entropy", m, s.window, s.n)],
            None => vec![],
        },
        Experiment::LinearWidth(s) => s.fit.map(|m| vec![("linear_width", m, s.window, s.n)]).unwrap_or_default(),
        Experiment::KsigmaReproduce(s) => vec![
            ("inner_entropy_closed_form", RateModel::LogOnly, s.window, s.n),
            ("greedy_threshold_closed_form", RateModel::LogOnly, s.window, s.n),
        ],
        _ => vec![],
    }
}

/// Window for fits and bands: the requested one, or the default clipped to the grid.
fn fit_window(window: Option<[usize; 2]>, grid: [usize; 2]) -> (usize, usize) {
    match window {
        Some(w) => (w[0], w[1]),
        None => (DEFAULT_WINDOW.0.max(grid[0]), DEFAULT_WINDOW.1.min(grid[1])),
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn expand<'a>(id: &'a str, exp: &'a Experiment, seed: u64) -> Result<Vec<Granule<'a>>> {
    let mut out: Vec<Granule<'a>> = Vec::new();
    let stochastic = exp.is_stochastic();
    let mut push = |label: String, task: Task<'a>| {
        let index = out.len() as u64;
        out.push(Granule { id, seed: granule_seed(seed, id, index), stochastic, label, task });
    };
    match exp {
        Experiment::Entropy(s) => {
            let opts = EntropyOptions { node_budget: s.node_budget.unwrap_or(EntropyOptions::default().node_budget), ..Default::default() };
            for k in build_sets(&s.set, seed, id)? {
                for n in range(s.n) {
                    let k = k.clone();
                    let kinds = s.entropy;
                    push(
                        k.label.clone(),
                        Box::new(move |_| {
                            let mut rows = Vec::new();
                            if kinds != EntropyKind::Inner {
                                rows.push(ReportRow::from_bracket("entropy", &entropy_number_with(&k, n as u32, false, &opts)?));
                            }
                            if kinds != EntropyKind::Outer {
                                rows.push(ReportRow::from_bracket("inner_entropy", &entropy_number_with(&k, n as u32, true, &opts)?));
                            }
                            Ok(Output { rows: rows.into_iter().map(|r| r.at(Some(n), None)).collect(), verdicts: vec![] })
                        }),
                    );
                }
            }
        }
        Experiment::LinearWidth(s) => {
            for k in build_sets(&s.set, seed, id)? {
                for n in range(s.n) {
                    let k = k.clone();
                    let restarts = s.restarts;
                    push(
                        k.label.clone(),
                        Box::new(move |g| {
                            let w = linear_width_with(&k, n, &width_opts(g, restarts))?;
                            one_row(ReportRow::from_bracket("linear_width", &w.bracket).at(Some(n), None))
                        }),
                    );
                }
            }
        }
        Experiment::NonlinearWidth(s) => {
            for k in build_sets(&s.set, seed, id)? {
                for n in range(s.n) {
                    for &big_n in &s.big_n {
                        let k = k.clone();
                        let restarts = s.restarts;
                        push(
                            k.label.clone(),
                            Box::new(move |g| {
                                let w = nonlinear_width_with(&k, n, big_n, &width_opts(g, restarts))?;
                                one_row(ReportRow::from_bracket("nonlinear_width", &w.bracket).at(Some(n), Some(big_n)))
                            }),
                        );
                    }
                }
            }
        }
        Experiment::Lipschitz(s) => {
            for k in build_sets(&s.set, seed, id)? {
                for n in range(s.n) {
                    for &big_n in &s.big_n {
                        let k = k.clone();
                        let (restarts, pairs) = (s.restarts, s.pairs.unwrap_or(DEFAULT_PAIRS));
                        push(
                            k.label.clone(),
                            Box::new(move |g| {
                                let w = nonlinear_width_with(&k, n, big_n, &width_opts(g, restarts))?;
                                let mut o = Output::default();
                                o.rows.push(ReportRow::from_bracket("nonlinear_width", &w.bracket).at(Some(n), Some(big_n)));
                                let norm = *k.realize().norm();
                                let bases = &w.witness.subspaces;
                                let maps = if norm.is_euclidean() {
                                    [build_phi(bases)?, build_psi(bases)?]
                                } else {
                                    [build_theta(bases, &norm)?, build_xi(bases, &norm)?]
                                };
                                let scale = sup_norm(&k).max(1.0);
                                for map in maps {
                                    let map = map.dilated(scale);
                                    let sampled = estimate_lipschitz(&map, pairs, g);
                                    let name = format!("lipschitz_{:?}", map.kind).to_lowercase();
                                    let mut row = ReportRow::value(&name, sampled, "sampled/construction");
                                    row.upper = map.gamma;
                                    row.exact = false;
                                    o.rows.push(row.at(Some(n), Some(big_n)));
                                    let ok = sampled <= map.gamma * (1.0 + LIPSCHITZ_SLACK);
                                    o.verdicts.push(Verdict {
                                        check: "lipschitz-constant".into(),
                                        status: if ok { Status::Holds } else { Status::Violated },
                                        witness: Some(sampled / map.gamma),
                                        window: [n as u64, n as u64],
                                        details: format!(
                                            "{:?}, N = {big_n}: sampled {sampled:.6e} vs claimed {:.6e} over {pairs} pairs",
                                            map.kind, map.gamma
                                        ),
                                    });
                                }
                                o.verdicts.push(check_width_chain_for(&k, &w, n, big_n));
                                Ok(o)
                            }),
                        );
                    }
                }
            }
        }
        Experiment::Carl(s) => {
            let schedule = schedule_of(s)?;
            let k = match &s.set {
                Some(set) => Some(
                    build_sets(set, seed, id)?
                        .into_iter()
                        .next()
                        .ok_or_else(|| Error::InvalidArgument("carl: empty set".into()))?,
                ),
                None => None,
            };
            let label = k.as_ref().map_or("series".to_string(), |k| k.label.clone());
            push(
                label,
                Box::new(move |g| {
                    let (e, d) = carl_series(s, k.as_ref(), schedule, g)?;
                    let window = (s.window[0], s.window[1]);
                    let mut o = Output::default();
                    for (i, b) in e.iter().enumerate() {
                        o.rows.push(ReportRow::from_bracket("entropy", b).at(Some(i), None));
                    }
                    for (j, b) in d.iter().enumerate() {
                        o.rows.push(ReportRow::from_bracket("width", b).at(Some(j), None));
                    }
                    for &r in &s.r {
                        o.verdicts.push(match schedule {
                            None => check_carl_window(&e, &d, r, window)?,
                            Some(sc) => check_generalized_carl(&e, &d, r, sc, window)?,
                        });
                    }
                    Ok(o)
                }),
            );
        }
        Experiment::EntropyFromWidth(s) => {
            for k in build_sets(&s.set, seed, id)? {
                for n in range(s.n) {
                    for &big_n in &s.big_n {
                        let k = k.clone();
                        push(
                            k.label.clone(),
                            Box::new(move |g| {
                                let v = check_entropy_from_width(
                                    &k,
                                    n,
                                    big_n,
                                    s.eps,
                                    &width_opts(g, s.restarts),
                                    &EntropyOptions::default(),
                                )?;
                                let mut o = Output::default();
                                if let Some(c) = v.witness {
                                    o.rows.push(ReportRow::value("implied_c", c, "packing").at(Some(n), Some(big_n)));
                                }
                                o.verdicts.push(v);
                                Ok(o)
                            }),
                        );
                    }
                }
            }
        }
        Experiment::L6(s) => {
            let k = build_sets(&s.set, seed, id)?.remove(0);
            let alpha = ksigma_alpha(&k).ok_or_else(|| Error::Unsupported("L6 needs an unscaled ksigma set".into()))?;
            push(
                k.label.clone(),
                Box::new(move |_| {
                    let hi = s.window[1];
                    let m_hi = (2.0 * s.rate_alpha * hi as f64 * (hi as f64).log2()).ceil().max(0.0) as usize;
                    let d: Vec<Bracket> = (0..=hi)
                        .map(|n| ksigma_nonlinear_width_bracket(alpha, n as u64, s.lambda.powi(n as i32)))
                        .collect();
                    let e: Vec<Bracket> = (0..=m_hi).map(|m| ksigma_entropy_bracket(alpha, m as u32)).collect();
                    let mut o = Output::default();
                    for (n, b) in d.iter().enumerate() {
                        o.rows.push(ReportRow::from_bracket("width", b).at(Some(n), None));
                    }
                    for (m, b) in e.iter().enumerate() {
                        o.rows.push(ReportRow::from_bracket("entropy", b).at(Some(m), None));
                    }
                    o.verdicts.push(check_l6_schedule(&d, &e, s.rate_alpha, s.beta, (s.window[0], s.window[1]))?);
                    Ok(o)
                }),
            );
        }
        Experiment::Mterm(s) => {
            let v = VPOperator::new(s.n_k, s.a2)?;
            for set in 0..s.sets {
                push(
                    format!("coeffs-{set}"),
                    Box::new(move |g| {
                        let mut rng = rng_for(g, 0, 0);
                        let k: Vec<DVector<f64>> = (0..s.members)
                            .map(|_| {
                                DVector::from_fn(s.size, |j, _| {
                                    rng.sample::<f64, _>(StandardNormal) * ((j + 1) as f64).powf(-s.decay)
                                })
                            })
                            .collect();
                        let mut o = Output::default();
                        for &m in &s.m {
                            let (lhs, rhs) = sigma_chain_sides(&k, &v, m)?;
                            o.rows.push(ReportRow::value("sigma_chain_lhs", lhs, "thresholding").at(Some(m), None));
                            o.rows.push(ReportRow::value("sigma_chain_rhs", rhs, "thresholding").at(Some(m), None));
                            o.verdicts.push(check_sigma_chain(&k, &v, m)?);
                        }
                        Ok(o)
                    }),
                );
            }
        }
        Experiment::KsigmaReproduce(s) => {
            let label = format!("ksigma(alpha={})", s.alpha);
            let alpha = s.alpha;
            if !(alpha > 0.0) {
                return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
            }
            for n in range(s.n) {
                push(
                    label.clone(),
                    Box::new(move |_| {
                        let mut o = Output::default();
                        let cf = |q: &str, v: f64| ReportRow::value(q, v, "closed-form").at(Some(n), None);
                        o.rows.push(cf("inner_entropy_closed_form", ksigma_inner_entropy(alpha, n as u32)));
                        o.rows.push(cf("greedy_threshold_closed_form", ksigma_inner_entropy_exact(alpha, n as u32)));
                        o.rows.push(ReportRow::from_bracket("entropy_closed_form", &ksigma_entropy_bracket(alpha, n as u32)).at(Some(n), None));
                        o.rows.push(ReportRow::from_bracket("linear_width_closed_form", &ksigma_linear_width_bracket(alpha, n as f64)).at(Some(n), None));
                        if n >= 1 {
                            let lib = s.lambda.powi(n as i32);
                            let b = ksigma_nonlinear_width_bracket(alpha, n as u64 - 1, lib);
                            o.rows.push(ReportRow::from_bracket("nonlinear_width_closed_form", &b).at(Some(n - 1), Some(lib as usize)));
                        }
                        if s.numeric {
                            let j = (1usize << n) + 8;
                            let k = CompactSetModel::ksigma(ksigma_label(alpha, j), alpha, j)?;
                            let b = entropy_number_with(&k, n as u32, true, &EntropyOptions::default())?;
                            o.rows.push(ReportRow::from_bracket("inner_entropy", &b).at(Some(n), None));
                            let t = greedy_inner_threshold(&k, n as u32)?;
                            o.rows.push(ReportRow::value("greedy_threshold", t, "greedy").at(Some(n), None));
                        }
                        Ok(o)
                    }),
                );
            }
            let (lo, hi) = fit_window(s.window, s.n);
            if hi >= lo + 3 && lo >= 2 {
                push(
                    label,
                    Box::new(move |_| {
                        let e: Vec<Bracket> = (0..=hi).map(|n| ksigma_entropy_bracket(alpha, n as u32)).collect();
                        let d: Vec<Bracket> = (0..=hi)
                            .map(|n| {
                                if n == 0 {
                                    Bracket::exact(1.0, Method::ClosedForm)
                                } else {
                                    ksigma_nonlinear_width_bracket(alpha, n as u64 - 1, s.lambda.powi(n as i32))
                                }
                            })
                            .collect();
                        let v = check_lower_bound_theorems(&e, &d, RateModel::LogOnly, alpha, 0.0, (lo, hi))?;
                        Ok(Output { rows: vec![], verdicts: vec![v] })
                    }),
                );
            }
        }
    }
    Ok(out)
}

fn fit_plots(id: &str, exp: &Experiment, rows: &[ReportRow], quiet: bool) -> Vec<PlotSeries> {
    let mut plots = Vec::new();
    for (quantity, model, window, grid) in fits_of(exp) {
        let mut by_label: BTreeMap<&str, Vec<&ReportRow>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.quantity == quantity && r.n.is_some()) {
            by_label.entry(&r.set_label).or_default().push(r);
        }
        for (label, rs) in by_label {
            let len = rs.iter().filter_map(|r| r.n).max().unwrap_or(0) as usize + 1;
            let mut series = vec![Bracket::exact(0.0, Method::Trivial); len];
            for r in &rs {
                series[r.n.unwrap() as usize] = Bracket::new(r.lower, Method::Trivial, r.upper, Method::Trivial);
            }
            let (lo, hi) = fit_window(window, grid);
            let name = sanitize(&format!("{id}_{label}_{quantity}"));
            match fit_rate(&series, model, (lo, hi.min(len.saturating_sub(1)))) {
                Ok(fit) => {
                    let points = (lo..=hi.min(len - 1)).map(|n| (n as f64, series[n].midpoint())).collect();
                    plots.push(PlotSeries { name, points, fit });
                }
                Err(e) => {
                    if !quiet {
                        eprintln!("{id}: no {} fit for {label}/{quantity}: {e}", model.as_str());
                    }
                }
            }
        }
    }
    plots
}

/// Run every experiment of `cfg` and write the reports.
pub fn run_config(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let seed = match opts.seed.or(cfg.seed) {
        Some(s) => s,
        None if cfg.is_stochastic() => {
            return Err(Error::InvalidArgument("a seed is required: set `seed` in the config or pass --seed".into()))
        }
        None => 0,
    };
    let out_dir = opts.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut granules = Vec::new();
    for (id, exp) in &cfg.experiment {
        granules.extend(expand(id, exp, seed)?);
    }
    let jobs = opts.jobs.or(cfg.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<(Output, u64)>> = pool.install(|| {
        granules
            .par_iter()
            .map(|g| {
                let t = Instant::now();
                let o = (g.task)(g.seed).map_err(|e| Error::InvalidArgument(format!("experiment {}: {e}", g.id)))?;
                Ok((o, t.elapsed().as_millis() as u64))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (g, res) in granules.iter().zip(results) {
        let (o, ms) = res?;
        for mut r in o.rows {
            r.experiment_id = g.id.to_string();
            r.set_label = g.label.clone();
            r.runtime_ms = if opts.timings { ms } else { 0 };
            r.seed = g.stochastic.then_some(g.seed);
            rows.push(r);
        }
        verdicts.extend(o.verdicts.into_iter().map(|v| tag(v, g.id, &g.label)));
    }
    sort_rows(&mut rows);
    let mut plots = Vec::new();
    for (id, exp) in &cfg.experiment {
        let mine: Vec<ReportRow> = rows.iter().filter(|r| &r.experiment_id == id).cloned().collect();
        plots.extend(fit_plots(id, exp, &mine, opts.quiet));
    }
    emit_report(&rows, &verdicts, &plots, &out_dir)?;
    if !opts.quiet {
        for id in cfg.experiment.keys() {
            let n_rows = rows.iter().filter(|r| &r.experiment_id == id).count();
            let prefix = format!("{id}/");
            let mine: Vec<&Verdict> = verdicts.iter().filter(|v| v.check.starts_with(&prefix)).collect();
            let bad = mine.iter().filter(|v| v.status == Status::Violated).count();
            eprintln!("{id}: {n_rows} rows, {} verdicts, {bad} violated", mine.len());
        }
        eprintln!("wrote {}", out_dir.display());
    }
    Ok(RunSummary { out_dir, rows, verdicts, plots })
}

pub fn run(config: &Path, opts: &RunOptions) -> Result<RunSummary> {
    run_config(&RunConfig::load(config)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_text(text: &str, dir: &Path, jobs: usize) -> Result<RunSummary> {
        let cfg = RunConfig::parse(text)?;
        run_config(&cfg, &RunOptions { out: Some(dir.to_path_buf()), jobs: Some(jobs), quiet: true, ..Default::default() })
    }

    #[test]
    fn ksigma_reproduce_matches_closed_form() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_text(
            "[experiment.ks]\nkind = \"ksigma-reproduce\"\nalpha = 1.0\nn = [1, 10]\n",
            dir.path(),
            1,
        )
        .unwrap();
        assert_eq!(s.exit_code(), 0);
        for r in s.rows.iter().filter(|r| r.quantity == "inner_entropy_closed_form") {
            assert_eq!(r.lower, ksigma_inner_entropy(1.0, r.n.unwrap() as u32));
        }
        assert_eq!(s.plots.len(), 2);
        assert!(dir.path().join("ks_ksigma_alpha_1__inner_entropy_closed_form.dat").exists());
    }

    #[test]
    fn violated_fixture_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_text(
            "[experiment.bad]\nkind = \"carl\"\ne = [1.0, 1.0, 1.0, 1.0]\nd = [0.0, 0.0, 0.0, 0.0]\nr = [1.0]\nwindow = [1, 3]\n",
            dir.path(),
            1,
        )
        .unwrap();
        assert_eq!(s.exit_code(), 2);
    }

    #[test]
    fn seed_required_for_random_sets() {
        let dir = tempfile::tempdir().unwrap();
        let text = "[experiment.w]\nkind = \"linear-width\"\nset = { type = \"random\", count = 4, dim = 2 }\nn = [1, 1]\n";
        assert!(run_text(text, dir.path(), 1).is_err());
    }

    #[test]
    fn granule_seeds_differ() {
        assert_ne!(granule_seed(1, "a", 0), granule_seed(1, "a", 1));
        assert_ne!(granule_seed(1, "a", 0), granule_seed(1, "b", 0));
        assert_eq!(granule_seed(9, "x", 3), granule_seed(9, "x", 3));
    }
}
