//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p rmdp-bench --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rmdp_bench::cli::{GenArgs, Generator, SolveArgs, SolverArgs};
use rmdp_bench::commands::{cmd_gen, cmd_solve};
use robust_mdp::baselines::{run_baseline, stopping_threshold};
use robust_mdp::forge::{gen_garnet, GarnetParams};
use robust_mdp::fomvi::make_step_sizes;
use robust_mdp::prox::{lambert_w, project_simplex_l2, prox_simplex_entropy, prox_y, NormPair};
use robust_mdp::uncertainty::{is_member, StateUncertainty};
use robust_mdp::{
    duality_gap, return_value, robust_bellman, run_fom_vi, vi_robust, FomViOptions, FomViState, InitMode, Method,
    RobustMdp, Schedule, UncertaintyKind, UncertaintySpec, ViOptions,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn garnet(size: usize, seed: u64, kind: UncertaintyKind) -> RobustMdp {
    gen_garnet(&GarnetParams::new(size, size, seed), kind).unwrap()
}

// ---------------------------------------------------------------- criterion 1

const PROX_TRIALS: usize = 1000;
const FEAS_TOL: f64 = 1e-7;
const OBJ_TOL: f64 = 1e-4;

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.02).collect();
    let t: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / t).collect()
}

fn on_simplex(y: &[f64], tol: f64) -> bool {
    y.iter().all(|&v| v >= -tol) && (y.iter().sum::<f64>() - 1.0).abs() <= tol
}

fn kl(y: &[f64], c: &[f64]) -> f64 {
    y.iter().zip(c).map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 }).sum()
}

/// Minimum of a convex function on `[lo, hi]` by golden-section search.
fn golden(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = f(lo).min(f(hi));
    for _ in 0..90 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        let (f1, f2) = (f(m1), f(m2));
        best = best.min(f1).min(f2);
        if f1 < f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best
}

/// Minimum of a convex function over the simplex of dimension 1, 2 or 3.
fn simplex_min(n: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    match n {
        1 => f(&[1.0]),
        2 => golden(0.0, 1.0, |u| f(&[u, 1.0 - u])),
        _ => golden(0.0, 1.0, |u| golden(0.0, 1.0 - u, |w| f(&[u, w, (1.0 - u - w).max(0.0)]))),
    }
}

/// Exhaustive KKT enumeration: the projection is `z - theta` on some support.
fn kkt_projection(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let theta = (support.iter().map(|&i| z[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let inside_ok = support.iter().all(|&i| z[i] - theta >= -1e-15);
        let outside_ok = (0..n).filter(|i| mask & (1 << i) == 0).all(|i| z[i] - theta <= 1e-15);
        if inside_ok && outside_ok {
            return (0..n).map(|i| if mask & (1 << i) != 0 { z[i] - theta } else { 0.0 }).collect();
        }
    }
    unreachable!("some support satisfies the KKT conditions")
}

fn simplex_projection_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for trial in 0..PROX_TRIALS {
        let n = rng.random_range(1..=3);
        let z: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y = project_simplex_l2(&z).map_err(|e| e.to_string())?;
        check(on_simplex(&y, FEAS_TOL), || format!("projection trial {trial} infeasible"))?;
        let obj = |p: &[f64]| 0.5 * p.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let diff = (obj(&y) - obj(&kkt_projection(&z))).abs();
        worst = worst.max(diff);
        check(diff <= OBJ_TOL, || format!("projection trial {trial}: objective off by {diff:e}"))?;
    }
    Ok(worst)
}

fn entropy_prox_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for trial in 0..PROX_TRIALS {
        let n = rng.random_range(1..=3);
        let x = simplex(rng, n);
        let g: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let step = 0.1 + 3.0 * rng.random::<f64>();
        let y = prox_simplex_entropy(&x, &g, step).map_err(|e| e.to_string())?;
        check(on_simplex(&y, FEAS_TOL), || format!("entropy trial {trial} infeasible"))?;
        let obj = |p: &[f64]| p.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() + kl(p, &x) / step;
        let diff = (obj(&y) - simplex_min(n, obj)).abs();
        worst = worst.max(diff);
        check(diff <= OBJ_TOL, || format!("entropy trial {trial}: objective off by {diff:e}"))?;
    }
    Ok(worst)
}

struct ProxProblem {
    kind: UncertaintyKind,
    norm: NormPair,
    center: Vec<f64>,
    y_prev: Vec<f64>,
    g: Vec<f64>,
    sigma: f64,
    beta: f64,
}

impl ProxProblem {
    fn objective(&self, y: &[f64], rows: std::ops::Range<usize>) -> f64 {
        let yp = &self.y_prev[rows.clone()];
        let breg = match self.norm {
            NormPair::L2L2 => 0.5 * y.iter().zip(yp).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / self.sigma,
            NormPair::L1L1 => self.beta / self.sigma * kl(y, yp),
        };
        y.iter().zip(&self.g[rows]).map(|(a, b)| a * b).sum::<f64>() + breg
    }

    fn dist(&self, y: &[f64], rows: std::ops::Range<usize>) -> f64 {
        let c = &self.center[rows];
        match self.kind {
            UncertaintyKind::Ellipsoidal => 0.5 * y.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
            UncertaintyKind::KullbackLeibler => kl(y, c),
        }
    }
}

/// Every y-prox against weak duality: for its own multiplier `mu`,
/// `min_y L(y, mu) - mu alpha` (brute-force, row by row) lower-bounds the
/// optimum, so a feasible output within `OBJ_TOL` of it is within `OBJ_TOL`
/// of the optimum.
fn y_prox_suite(rng: &mut ChaCha8Rng, kind: UncertaintyKind, norm: NormPair) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for trial in 0..PROX_TRIALS {
        let na = rng.random_range(1..=2);
        let ns = rng.random_range(2..=3);
        let p = ProxProblem {
            kind,
            norm,
            center: (0..na).flat_map(|_| simplex(rng, ns)).collect(),
            y_prev: (0..na).flat_map(|_| simplex(rng, ns)).collect(),
            g: (0..na * ns).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect(),
            sigma: 0.2 + 2.0 * rng.random::<f64>(),
            beta: 0.5 + rng.random::<f64>(),
        };
        let alpha = 0.005 + 0.2 * rng.random::<f64>();
        let set = StateUncertainty::new(UncertaintySpec { kind, radius: alpha }, &p.center, ns).map_err(|e| e.to_string())?;
        let mut y = vec![0.0; na * ns];
        let stats = prox_y(norm, &set, &p.y_prev, &p.g, p.sigma, p.beta, 1e-10, &mut y).map_err(|e| e.to_string())?;
        check(is_member(&set, &y, FEAS_TOL), || format!("{kind:?}/{norm:?} trial {trial} infeasible"))?;
        let mu = stats.multiplier;
        let mut lower = -if mu.is_finite() { mu * alpha } else { 0.0 };
        let mut value = 0.0;
        for a in 0..na {
            let rows = a * ns..(a + 1) * ns;
            value += p.objective(&y[rows.clone()], rows.clone());
            lower += if mu.is_finite() {
                simplex_min(ns, |q| p.objective(q, rows.clone()) + mu * p.dist(q, rows.clone()))
            } else {
                // alpha = 0 style answer: the center itself
                p.objective(&p.center[rows.clone()], rows.clone())
            };
        }
        let excess = value - lower;
        worst = worst.max(excess);
        check(excess <= OBJ_TOL, || format!("{kind:?}/{norm:?} trial {trial}: excess {excess:e}"))?;
    }
    Ok(worst)
}

fn criterion_prox() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parts = vec![
        format!("projection {:.1e}", simplex_projection_suite(&mut rng)?),
        format!("entropy {:.1e}", entropy_prox_suite(&mut rng)?),
    ];
    for kind in [UncertaintyKind::Ellipsoidal, UncertaintyKind::KullbackLeibler] {
        for norm in [NormPair::L2L2, NormPair::L1L1] {
            let w = y_prox_suite(&mut rng, kind, norm)?;
            parts.push(format!("{}/{} {w:.1e}", kind.as_str(), norm.as_str()));
        }
    }
    Ok(format!("6 x {PROX_TRIALS} trials, worst objective gap: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- criterion 2

fn criterion_lambert() -> Outcome {
    check(lambert_w(0.0).map_err(|e| e.to_string())? == 0.0, || "W(0) != 0".into())?;
    let n = 10_000;
    let (lo, hi) = (-12.0f64, 8.0f64);
    let mut worst = 0.0f64;
    for i in 0..n {
        let x = 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64);
        let w = lambert_w(x).map_err(|e| e.to_string())?;
        let rel = (w * w.exp() - x).abs() / x;
        worst = worst.max(rel);
        check(rel <= 1e-12, || format!("x = {x:e}: relative error {rel:e}"))?;
    }
    Ok(format!("{n} log-spaced points in [1e-12, 1e8] plus 0, worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- criterion 3

fn criterion_contraction() -> Outcome {
    let tol = 1e-6;
    let mut worst_slack = f64::NEG_INFINITY;
    for kind in [UncertaintyKind::Ellipsoidal, UncertaintyKind::KullbackLeibler] {
        for seed in 0..5u64 {
            let inst = garnet(5, seed, kind);
            let bound = inst.value_bound();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..100)
                .map(|_| {
                    let v = (0..5).map(|_| bound * rng.random::<f64>()).collect();
                    let w = (0..5).map(|_| bound * rng.random::<f64>()).collect();
                    (v, w)
                })
                .collect();
            let slacks: Vec<f64> = pairs
                .par_iter()
                .map(|(v, w)| -> Result<f64, String> {
                    let apply = |u: &[f64]| -> Result<Vec<f64>, String> {
                        (0..5)
                            .map(|s| {
                                let r = robust_bellman(&inst, u, s, tol).map_err(|e| e.to_string())?;
                                check(r.converged, || format!("Bellman at state {s} did not converge"))?;
                                Ok(r.value)
                            })
                            .collect()
                    };
                    let (fv, fw) = (apply(v)?, apply(w)?);
                    let lhs = fv.iter().zip(&fw).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    let dist = v.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    Ok(lhs - (0.8 * dist + 4.0 * tol))
                })
                .collect::<Result<_, _>>()?;
            let max = slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            worst_slack = worst_slack.max(max);
            check(max <= 0.0, || format!("{} seed {seed}: contraction violated by {max:e}", kind.as_str()))?;
        }
    }
    Ok(format!("1000 pairs over 10 instances, max of lhs - rhs = {worst_slack:.2e}"))
}

// ---------------------------------------------------------------- criteria 4, 5

const AGREEMENT_SEEDS: [u64; 3] = [0, 1, 2];

fn criterion_cross_method() -> Outcome {
    let threshold = stopping_threshold(0.1, 0.8);
    let mut worst = 0.0f64;
    for size in [5, 10] {
        for seed in AGREEMENT_SEEDS {
            let inst = garnet(size, seed, UncertaintyKind::Ellipsoidal);
            let mut values = Vec::new();
            for method in [Method::Vi, Method::GsVi, Method::Avi, Method::AndersonVi] {
                let r = run_baseline(&inst, method, &ViOptions::new(0.1)).map_err(|e| e.to_string())?;
                check(r.converged, || format!("{method} did not converge on S=A={size}, seed {seed}"))?;
                values.push((method, return_value(&inst, &r.value)));
            }
            let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
            worst = worst.max(hi - lo);
            check(hi - lo <= 4.0 * threshold, || format!("S=A={size}, seed {seed}: spread {:.4} in {values:?}", hi - lo))?;
        }
    }
    Ok(format!("6 instances, largest pairwise return-value spread {worst:.4} (limit {:.4})", 4.0 * threshold))
}

fn criterion_fom_vi() -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_diff = 0.0f64;
    for size in [5, 10] {
        for seed in AGREEMENT_SEEDS {
            let inst = garnet(size, seed, UncertaintyKind::Ellipsoidal);
            let r = run_fom_vi(&inst, &FomViOptions::default()).map_err(|e| e.to_string())?;
            check(r.converged, || format!("FOM-VI did not converge on S=A={size}, seed {seed}"))?;
            let certified = r.final_gap.as_ref().map_or(f64::INFINITY, |g| g.gap);
            check(certified <= 0.05, || format!("S=A={size}, seed {seed}: certified gap {certified}"))?;
            // independent recheck at a tighter evaluator tolerance
            let gap = duality_gap(&inst, &r.policy, &r.kernel, 1e-4).map_err(|e| e.to_string())?;
            check(gap.gap <= 0.05, || format!("S=A={size}, seed {seed}: recheck gap {}", gap.gap))?;
            let vi = vi_robust(&inst, 0.1).map_err(|e| e.to_string())?;
            let diff = (r.reported_value(&inst) - return_value(&inst, &vi.value)).abs();
            check(diff <= 0.2, || format!("S=A={size}, seed {seed}: return value differs from VI by {diff}"))?;
            worst_gap = worst_gap.max(gap.gap);
            worst_diff = worst_diff.max(diff);
        }
    }
    Ok(format!("6 instances, worst rechecked gap {worst_gap:.4}, worst |FOM-VI - VI| return value {worst_diff:.4}"))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_kl() -> Outcome {
    let inst = garnet(10, 0, UncertaintyKind::KullbackLeibler);
    let options = FomViOptions { norm_pair: NormPair::L1L1, ..Default::default() };
    let r = run_fom_vi(&inst, &options).map_err(|e| e.to_string())?;
    check(r.converged, || format!("no convergence after {} epochs", r.epochs))?;
    let gap = duality_gap(&inst, &r.policy, &r.kernel, 1e-4).map_err(|e| e.to_string())?;
    check(gap.complete && gap.gap <= 0.05, || format!("independent gap {}", gap.gap))?;
    Ok(format!("KL Garnet S=A=10, l1 setup: {} epochs, independent gap {:.4}", r.epochs, gap.gap))
}

// ---------------------------------------------------------------- criterion 7

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(t, g)| (t.ln(), g.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_rate() -> Outcome {
    let inst = garnet(10, 0, UncertaintyKind::Ellipsoidal);
    let setup = make_step_sizes(&inst, NormPair::L2L2).map_err(|e| e.to_string())?;
    let horizon = 10_000u64;
    let mut parts = Vec::new();
    for q in [1u32, 2] {
        let schedule = Schedule { p: 2, q, ..Schedule::default() };
        let mut state = FomViState::new(&inst, InitMode::Uniform, false);
        let mut points = Vec::new();
        while state.iteration() < horizon {
            state.run_epoch(&inst, &setup, &schedule, 1e-10).map_err(|e| e.to_string())?;
            let g = duality_gap(&inst, &state.average_policy(), &state.average_kernel(), 1e-7).map_err(|e| e.to_string())?;
            points.push((state.iteration() as f64, g.gap));
        }
        let t_max = points.last().unwrap().0;
        let decade: Vec<(f64, f64)> = points.iter().copied().filter(|(t, _)| *t >= t_max / 10.0).collect();
        check(decade.iter().all(|p| p.1 > 0.0), || format!("q = {q}: non-positive gap in the final decade"))?;
        let slope = loglog_slope(&decade);
        let limit = -(q as f64) / (q as f64 + 1.0) + 0.25;
        check(slope <= limit, || format!("q = {q}: slope {slope:.3} above {limit:.3}"))?;
        parts.push(format!("q={q} slope {slope:.2} (limit {limit:.2}, {} points)", decade.len()));
    }
    Ok(parts.join("; "))
}

// ---------------------------------------------------------------- criterion 8

/// Nominal optimal return by plain value iteration with stopping threshold at `eps`.
fn nominal_optimal_return(inst: &RobustMdp, eps: f64) -> f64 {
    let (ns, na) = (inst.num_states(), inst.num_actions());
    let lambda = inst.discount();
    let (c, y) = (inst.costs(), inst.nominal_kernel());
    let mut v = vec![0.0; ns];
    loop {
        let next: Vec<f64> = (0..ns)
            .map(|s| {
                (0..na)
                    .map(|a| {
                        let row = &y[(s * na + a) * ns..(s * na + a + 1) * ns];
                        c[s * na + a] + lambda * row.iter().zip(&v).map(|(p, w)| p * w).sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff <= eps * (1.0 - lambda) / (2.0 * lambda) {
            return v.iter().zip(inst.initial_distribution()).map(|(a, b)| a * b).sum();
        }
    }
}

fn criterion_reduction() -> Outcome {
    let eps = 0.1;
    let mut worst = 0.0f64;
    for kind in [UncertaintyKind::Ellipsoidal, UncertaintyKind::KullbackLeibler] {
        let inst = garnet(10, 4, kind).with_uncertainty(UncertaintySpec { kind, radius: 0.0 });
        let oracle = nominal_optimal_return(&inst, eps / 10.0);
        for method in Method::ALL {
            let r = match method {
                Method::FomVi => run_fom_vi(&inst, &FomViOptions::default()),
                m => run_baseline(&inst, m, &ViOptions::new(eps)),
            }
            .map_err(|e| e.to_string())?;
            check(r.converged, || format!("{method} ({}) did not converge", kind.as_str()))?;
            let diff = (r.reported_value(&inst) - oracle).abs();
            worst = worst.max(diff);
            check(diff <= eps, || format!("{method} ({}): |value - nominal| = {diff}", kind.as_str()))?;
        }
    }
    Ok(format!("5 methods x 2 kinds at radius 0, worst deviation from nominal VI {worst:.4}"))
}

// ---------------------------------------------------------------- criterion 9

fn strip_elapsed(csv_text: &str) -> Vec<String> {
    csv_text
        .lines()
        .map(|line| line.rsplit_once(',').map_or(line, |(head, _)| head).to_string())
        .collect()
}

fn gen_into(dir: &Path, seed: u64) -> Result<Vec<u8>, String> {
    let out = dir.join("instance.json");
    let args = GenArgs {
        generator: Generator::Garnet,
        states: Some(6),
        actions: Some(4),
        branch: Some(0.5),
        kind: None,
        radius: None,
        samples: None,
        discount: None,
        seed,
        out: Some(out.clone()),
        out_dir: None,
    };
    cmd_gen(&args).map_err(|e| e.to_string())?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn solve_into(dir: &Path, method: &str) -> Result<String, String> {
    let args = SolveArgs {
        instance: dir.join("instance.json"),
        method: Some(method.into()),
        seed: None,
        random_init: false,
        run_id: Some("run".into()),
        solver: SolverArgs { out_dir: Some(dir.to_path_buf()), ..Default::default() },
    };
    cmd_solve(&args).map_err(|e| e.to_string())?;
    std::fs::read_to_string(dir.join("run.trace.csv")).map_err(|e| e.to_string())
}

fn criterion_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (ia, ib) = (gen_into(a.path(), 42)?, gen_into(b.path(), 42)?);
    check(ia == ib, || "instance files differ for the same seed".into())?;
    let c = tempfile::tempdir().map_err(|e| e.to_string())?;
    check(gen_into(c.path(), 43)? != ia, || "different seeds produced identical instances".into())?;
    let mut rows = 0;
    for method in ["fom_vi", "vi", "anderson_vi"] {
        let (ta, tb) = (solve_into(a.path(), method)?, solve_into(b.path(), method)?);
        let (sa, sb) = (strip_elapsed(&ta), strip_elapsed(&tb));
        check(sa == sb, || format!("{method}: traces differ beyond elapsed_seconds"))?;
        check(ta.lines().next().is_some_and(|h| h.ends_with(",elapsed_seconds")), || "unexpected trace header".into())?;
        rows += sa.len() - 1;
    }
    Ok(format!("byte-identical instances; {rows} trace rows identical modulo elapsed_seconds"))
}

// ----------------------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("prox oracle suite", criterion_prox),
        ("Lambert-W round trip", criterion_lambert),
        ("Bellman contraction", criterion_contraction),
        ("cross-method fixed-point agreement", criterion_cross_method),
        ("FOM-VI correctness", criterion_fom_vi),
        ("KL capability", criterion_kl),
        ("rate exponent", criterion_rate),
        ("reduction sanity", criterion_reduction),
        ("determinism", criterion_determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {} ({name}): {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
