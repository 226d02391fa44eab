//! Acceptance criteria 1 to 12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kwidth::cli::{run_config, RunConfig, RunOptions};
use kwidth::entropy::{
    entropy_number_with, greedy_inner_threshold, ksigma_entropy_bracket, ksigma_inner_entropy,
    ksigma_inner_entropy_exact, EntropyOptions,
};
use kwidth::harness::{
    check_carl_window, check_covering_sandwich, check_entropy_from_width, check_entropy_sandwich,
    check_generalized_carl, check_lower_bound_theorems, check_width_chain, fit_rate, NSchedule, RateModel, Status,
};
use kwidth::lipschitz::{
    build_phi, build_psi, build_theta_xi, estimate_lipschitz, fixed_width_upper, john_ellipsoid, UnitBall,
    DEFAULT_PAIRS, JOHN_TOL,
};
use kwidth::mterm::{best_m_term, binomial_witness, check_sigma_chain, VPOperator};
use kwidth::spaces::{chebyshev_radius, cloud_model, scale_set, sigma, Bracket, Method};
use kwidth::widths::{
    ksigma_linear_width_bracket, ksigma_nonlinear_width_bracket, linear_width_with, nonlinear_width_with, WidthOptions,
};
use kwidth::{CompactSetModel, NormSpec};

const CONTAIN_TOL: f64 = 1e-9;
const EQUALITY_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-6;
const HEURISTIC_TOL: f64 = 1e-8;
const HOMOGENEITY_REL_TOL: f64 = 1e-9;
const LIPSCHITZ_SLACK: f64 = 1e-9;
const PHI_LOW_FRACTION: f64 = 0.8;
const JOHN_SANDWICH_TOL: f64 = 1e-6;
const CARL_STABILITY: f64 = 3.0;
const BAND_MAX: f64 = 4.0;
const RATE_RANGE: (f64, f64) = (0.85, 1.15);
const MTERM_TOL: f64 = 1e-12;

type Outcome = (bool, String);

fn unit(d: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

fn random_cloud(rng: &mut ChaCha8Rng, label: &str, m: usize, d: usize, norm: NormSpec) -> CompactSetModel {
    let pts = (0..m).map(|_| DVector::from_fn(d, |_, _| rng.gen_range(-1.0..=1.0))).collect();
    CompactSetModel::cloud(label, pts, norm).unwrap()
}

fn within(t: Instant, limit: u64) -> (bool, String) {
    let el = t.elapsed();
    (el <= Duration::from_secs(limit), format!("{:.1}s of {limit}s", el.as_secs_f64()))
}

fn c1() -> Outcome {
    let t = Instant::now();
    let opts = EntropyOptions::default();
    let mut contains = true;
    let mut equal = true;
    let mut greedy = true;
    let mut notes = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut exact_at_sigma = true;
    for n in 1..=10u32 {
        let j = (1usize << n) + 8;
        let k = CompactSetModel::ksigma("ks", 1.0, j).unwrap();
        let target = ksigma_inner_entropy_exact(1.0, n);
        let b = entropy_number_with(&k, n, true, &opts).unwrap();
        if !b.contains(target, CONTAIN_TOL) {
            contains = false;
        }
        max_gap = max_gap.max(b.tail_gap);
        if n <= 4 && !(b.exact && (b.upper - target).abs() <= EQUALITY_TOL) {
            equal = false;
            notes.push(format!("n={n}: certified [{:.7}, {:.7}] vs {target:.7}", b.lower, b.upper));
        }
        let g = greedy_inner_threshold(&k, n).unwrap();
        if (g - target).abs() > EQUALITY_TOL {
            greedy = false;
        }
        exact_at_sigma &= (b.upper - ksigma_inner_entropy(1.0, n)).abs() <= EQUALITY_TOL;
    }
    let (fast, time) = within(t, 60);
    (
        contains && equal && greedy && fast,
        format!(
            "bracket contains closed form (tail gap up to {max_gap:.3}): {contains}; exact equality n<=4: {equal}; \
             greedy matches: {greedy}; certified value equals sigma_(2^n) for all n: {exact_at_sigma}; {time}; {}",
            notes.join("; ")
        ),
    )
}

fn c2() -> Outcome {
    let t = Instant::now();
    let opts = EntropyOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut models = Vec::new();
    for i in 0..50 {
        let d = 1 + i % 6;
        let m = 10 + (i * 37) % 191;
        models.push(random_cloud(&mut rng, &format!("c{i}"), m, d, NormSpec::euclidean(d).unwrap()));
    }
    for j in [16, 33, 65] {
        models.push(CompactSetModel::ksigma(format!("ks{j}"), 1.0, j).unwrap());
    }
    let (mut checks, mut violated, mut indeterminate) = (0, 0, 0);
    for k in &models {
        let rad = chebyshev_radius(k).unwrap().upper;
        let mut verdicts = Vec::new();
        for f in [0.3, 0.7] {
            verdicts.push(check_covering_sandwich(k, f * rad, &opts).unwrap());
        }
        for n in 0..=3 {
            verdicts.push(check_entropy_sandwich(k, n, &opts).unwrap());
        }
        for v in verdicts {
            checks += 1;
            match v.status {
                Status::Violated => violated += 1,
                Status::Indeterminate => indeterminate += 1,
                Status::Holds => {}
            }
        }
    }
    let (fast, time) = within(t, 120);
    (violated == 0 && fast, format!("{checks} checks, {violated} violated, {indeterminate} indeterminate; {time}"))
}

/// `d_1` of a set in the plane by a grid over line angles.
fn angle_grid_width(points: &[[f64; 2]], steps: usize) -> f64 {
    (0..steps)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / steps as f64;
            let (c, s) = (th.cos(), th.sin());
            points.iter().map(|p| (p[0] * s - p[1] * c).abs()).fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c3() -> Outcome {
    let opts = WidthOptions::default();
    let e2 = CompactSetModel::cloud("e12", vec![unit(2, 0), unit(2, 1)], NormSpec::euclidean(2).unwrap()).unwrap();
    let oracle = angle_grid_width(&[[1.0, 0.0], [0.0, 1.0]], 1 << 20);
    let lin = linear_width_with(&e2, 1, &opts).unwrap().bracket;
    let ok_lin = (lin.upper - oracle).abs() <= ORACLE_TOL && (lin.lower - oracle).abs() <= ORACLE_TOL;
    // Partitions of {e1, e2, e3} into at most two groups: a singleton costs 0,
    // a pair {e_i, e_j} costs the planar width of {(1,0), (0,1)}, the triple
    // with N = 1 is not a partition into two groups.
    let e3 = CompactSetModel::cloud("e123", (0..3).map(|i| unit(3, i)).collect(), NormSpec::euclidean(3).unwrap()).unwrap();
    let nl = nonlinear_width_with(&e3, 1, 2, &opts).unwrap().bracket;
    let ok_nl = (nl.upper - oracle).abs() <= ORACLE_TOL && (nl.lower - oracle).abs() <= ORACLE_TOL;
    let heur_opts = WidthOptions { enumerate_partitions: false, ..opts };
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(3..=6);
        let d = rng.gen_range(2..=3);
        let k = random_cloud(&mut rng, "r", m, d, NormSpec::euclidean(d).unwrap());
        let a = nonlinear_width_with(&k, 1, 2, &opts).unwrap().bracket.upper;
        let b = nonlinear_width_with(&k, 1, 2, &heur_opts).unwrap().bracket.upper;
        worst = worst.max((a - b).abs());
    }
    let ok_heur = worst <= HEURISTIC_TOL;
    (
        ok_lin && ok_nl && ok_heur,
        format!(
            "oracle {oracle:.9}; d_1 [{:.9}, {:.9}]; d_1(N=2) [{:.9}, {:.9}]; heuristic vs enumeration max gap {worst:.2e}",
            lin.lower, lin.upper, nl.lower, nl.upper
        ),
    )
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= HOMOGENEITY_REL_TOL * a.abs().max(b.abs()).max(1e-300)
}

fn c4() -> Outcome {
    let opts = WidthOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut sets = Vec::new();
    for i in 0..3 {
        sets.push(random_cloud(&mut rng, &format!("h{i}"), 7, 3, NormSpec::euclidean(3).unwrap()));
    }
    sets.push(random_cloud(&mut rng, "hmax", 6, 3, NormSpec::max(3).unwrap()));
    sets.push(cloud_model("ks", CompactSetModel::ksigma("ks", 1.0, 12).unwrap().realize().into_owned()));
    for k in &sets {
        let base: Vec<Bracket> = vec![
            linear_width_with(k, 1, &opts).unwrap().bracket,
            linear_width_with(k, 2, &opts).unwrap().bracket,
            nonlinear_width_with(k, 1, 2, &opts).unwrap().bracket,
        ];
        let w = nonlinear_width_with(k, 1, 2, &opts).unwrap();
        let psi = build_psi(&w.witness.subspaces).unwrap();
        let fw = fixed_width_upper(k, &psi).unwrap();
        for t in [0.5, 2.0, -3.0] {
            let kt = scale_set(k, t).unwrap();
            let scaled: Vec<Bracket> = vec![
                linear_width_with(&kt, 1, &opts).unwrap().bracket,
                linear_width_with(&kt, 2, &opts).unwrap().bracket,
                nonlinear_width_with(&kt, 1, 2, &opts).unwrap().bracket,
            ];
            for (b, s) in base.iter().zip(&scaled) {
                for (x, y) in [(b.lower, s.lower), (b.upper, s.upper)] {
                    let want = t.abs() * x;
                    if !rel_close(want, y) {
                        ok = false;
                    }
                    worst = worst.max((want - y).abs() / want.abs().max(1e-300));
                }
            }
            let ft = fixed_width_upper(&kt, &psi.dilated(t)).unwrap();
            if !rel_close(t.abs() * fw, ft) {
                ok = false;
            }
            worst = worst.max((t.abs() * fw - ft).abs() / fw.max(1e-300));
        }
    }
    (ok, format!("{} sets x 3 scales; worst relative deviation {worst:.2e}", sets.len()))
}

/// Coordinate blocks: subspace `s` spans `e_{sn}, .., e_{sn+n-1}`.
fn blocks(n: usize, big_n: usize) -> Vec<DMatrix<f64>> {
    let d = n * big_n;
    (0..big_n).map(|s| DMatrix::from_fn(d, n, |i, j| if i == s * n + j { 1.0 } else { 0.0 })).collect()
}

fn c5() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, big_n) in [(2, 4), (3, 8)] {
        let phi = build_phi(&blocks(n, big_n)).unwrap();
        let v = estimate_lipschitz(&phi, DEFAULT_PAIRS, 5);
        let good = v <= (big_n as f64 + 1.0) * (1.0 + LIPSCHITZ_SLACK) && v >= PHI_LOW_FRACTION * big_n as f64;
        ok &= good;
        notes.push(format!("Phi({n},{big_n}) {v:.4}"));
    }
    for big_n in [4, 8] {
        let psi = build_psi(&blocks(2, big_n)).unwrap();
        let v = estimate_lipschitz(&psi, DEFAULT_PAIRS, 5);
        ok &= v <= 3.0 * (1.0 + LIPSCHITZ_SLACK);
        notes.push(format!("Psi(N={big_n}) {v:.4}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random_lines = |rng: &mut ChaCha8Rng, d: usize, k: usize| -> Vec<DMatrix<f64>> {
        (0..k)
            .map(|_| {
                let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..=1.0)).normalize();
                DMatrix::from_column_slice(d, 1, v.as_slice())
            })
            .collect()
    };
    let cases: Vec<(usize, Vec<DMatrix<f64>>)> = vec![
        (2, (0..2).map(|i| DMatrix::from_column_slice(2, 1, unit(2, i).as_slice())).collect()),
        (4, blocks(1, 4)),
        (4, blocks(2, 2)),
        (3, random_lines(&mut rng, 3, 3)),
    ];
    for (d, bases) in cases {
        let norm = NormSpec::max(d).unwrap();
        let (theta, xi) = build_theta_xi(&bases, &norm).unwrap();
        let vt = estimate_lipschitz(&theta, DEFAULT_PAIRS, 5);
        let vx = estimate_lipschitz(&xi, DEFAULT_PAIRS, 5);
        ok &= vt <= theta.gamma * (1.0 + LIPSCHITZ_SLACK) && vx <= xi.gamma * (1.0 + LIPSCHITZ_SLACK);
        notes.push(format!("d={d} N={}: Theta {vt:.3}/{}, Xi {vx:.3}/{}", bases.len(), theta.gamma, xi.gamma));
    }
    let (fast, time) = within(t, 60);
    (ok && fast, format!("{}; {time}", notes.join("; ")))
}

fn c6() -> Outcome {
    let opts = WidthOptions::default();
    let mut violated = 0;
    let mut runs = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut record = |v: kwidth::harness::Verdict| {
        runs += 1;
        if v.status != Status::Holds {
            violated += 1;
        }
        if let Some(w) = v.witness {
            let upper: f64 = v
                .details
                .split("upper = ")
                .nth(1)
                .and_then(|s| s.split(';').next())
                .and_then(|s| s.trim().parse().ok())
                .unwrap_or(f64::NAN);
            worst_gap = worst_gap.max(w - upper);
        }
    };
    for (j, n, big_n) in [(17, 1, 2), (17, 1, 4), (33, 1, 4), (17, 2, 2)] {
        record(check_width_chain(&CompactSetModel::ksigma("ks", 1.0, j).unwrap(), n, big_n, &opts));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..20 {
        let d = 2 + i % 3;
        let m = rng.gen_range(5..=10);
        let k = random_cloud(&mut rng, "r", m, d, NormSpec::euclidean(d).unwrap());
        record(check_width_chain(&k, 1, 2, &opts));
    }
    (violated == 0, format!("{runs} runs, {violated} not holding; max(fixed width - width upper) = {worst_gap:.2e}"))
}

fn c7() -> Outcome {
    let mut ok = true;
    let mut worst_in: f64 = 0.0;
    let mut worst_out: f64 = 0.0;
    let mut all_converged = true;
    for d in 1..=5usize {
        let cube: Vec<DVector<f64>> = (0..1usize << d)
            .map(|b| DVector::from_fn(d, |i, _| if b >> i & 1 == 1 { 1.0 } else { -1.0 }))
            .collect();
        let cross: Vec<DVector<f64>> = (0..d).flat_map(|i| [unit(d, i), -unit(d, i)]).collect();
        let bodies = [
            UnitBall::Vertices(cube),
            UnitBall::Vertices(cross),
            UnitBall::Norm(NormSpec::euclidean(d).unwrap()),
            UnitBall::Norm(NormSpec::max(d).unwrap()),
        ];
        let root = (d as f64).sqrt();
        for ball in &bodies {
            let j = john_ellipsoid(ball, d).unwrap();
            all_converged &= j.converged;
            ok &= j.inner_max <= 1.0 + JOHN_SANDWICH_TOL;
            ok &= j.outer_max <= root * (1.0 + JOHN_SANDWICH_TOL);
            worst_in = worst_in.max(j.inner_max - 1.0);
            worst_out = worst_out.max(j.outer_max / root - 1.0);
        }
    }
    (
        ok && all_converged,
        format!("inner excess {worst_in:.2e}, outer excess over sqrt(d) {worst_out:.2e}; Khachiyan converged to {JOHN_TOL:e}: {all_converged}"),
    )
}

fn c8() -> Outcome {
    let w = WidthOptions::default();
    let e = EntropyOptions::default();
    let mut verdicts = Vec::new();
    let ks = cloud_model("ks", CompactSetModel::ksigma("ks", 1.0, 65).unwrap().realize().into_owned());
    let ks = scale_set(&ks, 0.5).unwrap();
    let eps = 0.5 * sigma(1.0, 5.0) * (1.0 + 1e-9);
    verdicts.push(check_entropy_from_width(&ks, 2, 2, Some(eps), &w, &e).unwrap());
    verdicts.push(check_entropy_from_width(&ks, 2, 2, None, &w, &e).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10 {
        let d = 2 + i % 3;
        let k = random_cloud(&mut rng, "r", 12, d, NormSpec::euclidean(d).unwrap());
        verdicts.push(check_entropy_from_width(&k, 1, 2, None, &w, &e).unwrap());
    }
    let holds = verdicts.iter().filter(|v| v.holds()).count();
    (holds == verdicts.len(), format!("{holds} of {} runs hold on certified sides", verdicts.len()))
}

fn c9() -> Outcome {
    let e: Vec<Bracket> = (0..100).map(|k| ksigma_entropy_bracket(1.0, k as u32)).collect();
    let d: Vec<Bracket> = (0..13).map(|j| ksigma_linear_width_bracket(1.0, j as f64)).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let full = check_carl_window(&e, &d, r, (1, 12)).unwrap();
        let a = check_carl_window(&e, &d, r, (3, 8)).unwrap();
        let b = check_carl_window(&e, &d, r, (7, 12)).unwrap();
        let (ca, cb) = (a.witness.unwrap_or(f64::INFINITY), b.witness.unwrap_or(f64::INFINITY));
        let spread = ca.max(cb) / ca.min(cb);
        ok &= full.holds() && a.holds() && b.holds() && spread <= CARL_STABILITY;
        notes.push(format!("r={r}: C {ca:.3} / {cb:.3}"));
    }
    for sched in [NSchedule::Exponential { lambda: 2.0 }, NSchedule::PolyPower { a: 1.0 }] {
        let dn: Vec<Bracket> =
            (0..13).map(|j| ksigma_nonlinear_width_bracket(1.0, j as u64, sched.library_size(j + 1))).collect();
        let v = check_generalized_carl(&e, &dn, 1.0, sched, (1, 12)).unwrap();
        ok &= v.holds();
        notes.push(format!("{sched:?}: {}", v.status.as_str()));
    }
    (ok, notes.join("; "))
}

fn c10() -> Outcome {
    let e: Vec<Bracket> = (0..13).map(|n| ksigma_entropy_bracket(1.0, n as u32)).collect();
    let d: Vec<Bracket> = (0..13)
        .map(|n| {
            if n == 0 {
                Bracket::exact(1.0, Method::ClosedForm)
            } else {
                ksigma_nonlinear_width_bracket(1.0, n as u64 - 1, 2f64.powi(n as i32))
            }
        })
        .collect();
    let v = check_lower_bound_theorems(&e, &d, RateModel::LogOnly, 1.0, 0.0, (3, 12)).unwrap();
    let ratios: Vec<f64> = (3..=12).map(|n| e[n].upper / d[n].upper).collect();
    let band = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let s: Vec<Bracket> =
        (0..13).map(|n| Bracket::exact(ksigma_inner_entropy_exact(1.0, n as u32), Method::ClosedForm)).collect();
    let fit = fit_rate(&s, RateModel::LogOnly, (3, 12)).unwrap();
    let ok = v.holds() && band <= BAND_MAX && (RATE_RANGE.0..=RATE_RANGE.1).contains(&fit.alpha);
    (ok, format!("band {band:.4}; alpha fit {:.7}; {}", fit.alpha, v.details))
}

fn brute_m_term(f: &[f64], m: usize) -> f64 {
    let j = f.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << j) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let s: f64 = (0..j).filter(|i| mask >> i & 1 == 0).map(|i| f[i] * f[i]).sum();
        best = best.min(s.sqrt());
    }
    best
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let j = rng.gen_range(1..=12);
        let m = rng.gen_range(0..=4usize.min(j));
        let f: Vec<f64> = (0..j).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let got = best_m_term(&DVector::from_vec(f.clone()), m).unwrap();
        worst = worst.max((got - brute_m_term(&f, m)).abs());
    }
    let v = VPOperator::new(8, 2.0).unwrap();
    let mut held = 0;
    for _ in 0..100 {
        let k: Vec<DVector<f64>> = (0..8).map(|_| DVector::from_fn(64, |_, _| rng.gen_range(-1.0..=1.0))).collect();
        if check_sigma_chain(&k, &v, 4).unwrap().holds() {
            held += 1;
        }
    }
    let mut grid = 0;
    let mut binom = true;
    for n_k in [2, 4, 8, 16] {
        for a2 in [1.5, 2.0, 3.0] {
            let op = VPOperator::new(n_k, a2).unwrap();
            for m in 2..op.span() {
                if (m as f64) < a2 * n_k as f64 {
                    grid += 1;
                    binom &= binomial_witness(op.span(), m);
                }
            }
        }
    }
    (
        worst <= MTERM_TOL && held == 100 && binom,
        format!("brute-force gap {worst:.1e}; chain held on {held}/100; binomial b = e on {grid} grid points: {binom}"),
    )
}

fn suite_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/full_suite.toml")
}

fn c12() -> Outcome {
    let t = Instant::now();
    let cfg = RunConfig::load(&suite_path()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, 1), (&b, 4)] {
        let opts = RunOptions { out: Some(out.clone()), jobs: Some(jobs), quiet: true, ..Default::default() };
        run_config(&cfg, &opts).unwrap();
    }
    let same = ["results.csv", "verdicts.json"]
        .iter()
        .all(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap());
    let (fast, time) = within(t, 300);
    (same && fast, format!("jobs 1 vs 4 byte-identical: {same}; two runs {time}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("K_sigma inner entropy reproduction", c1),
        ("covering and entropy sandwiches", c2),
        ("width oracles", c3),
        ("homogeneity", c4),
        ("Lipschitz constants", c5),
        ("witness-level width chain", c6),
        ("John sandwich", c7),
        ("entropy from width", c8),
        ("Carl checks", c9),
        ("two-sided band and rate fit", c10),
        ("m-term", c11),
        ("determinism", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} ({:.1}s): {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
