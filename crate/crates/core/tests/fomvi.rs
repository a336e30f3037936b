//! FOM-VI checks against independent re-computations: a straight-line PDA
//! step, direct weighted means of the iterate history, certified Bellman
//! intervals, and plain nominal value iteration.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_mdp::fomvi::{make_step_sizes, pda_step};
use robust_mdp::forge::{gen_garnet, GarnetParams};
use robust_mdp::{
    linear_max_over_set, policy_value, return_value, robust_bellman, run_fom_vi, vi_robust, AdversarialKernel,
    FomViOptions, FomViState, InitMode, NormPair, RobustMdp, Schedule, UncertaintyKind, UncertaintySpec,
};

fn random_instance(seed: u64, ns: usize, na: usize, spec: UncertaintySpec) -> RobustMdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut row = |n: usize| {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
        let t: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / t).collect::<Vec<_>>()
    };
    let kernel: Vec<f64> = (0..ns * na).flat_map(|_| row(ns)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let costs = (0..ns * na).map(|_| 10.0 * rng.random::<f64>()).collect();
    RobustMdp::new(ns, na, 0.8, costs, kernel, vec![1.0 / ns as f64; ns], spec).unwrap()
}

/// Euclidean projection of `(a, b)` onto the 2-simplex.
fn project2(a: f64, b: f64) -> [f64; 2] {
    let u = ((a - b + 1.0) / 2.0).clamp(0.0, 1.0);
    [u, 1.0 - u]
}

#[test]
fn one_step_matches_straight_line_implementation() {
    let radius = 0.01;
    let inst = random_instance(5, 2, 2, UncertaintySpec::ellipsoidal(radius));
    let setup = make_step_sizes(&inst, NormPair::L2L2).unwrap();
    let (tau, sigma, lambda) = (setup.tau * 40.0, setup.sigma * 40.0, 0.8);
    let setup = robust_mdp::ProxSetup { tau, sigma, ..setup };
    let v = [3.0, 8.0];
    let s = 1;
    let x0 = [0.3, 0.7];
    let y0 = [0.2, 0.8, 0.6, 0.4];

    // x: projected gradient step on c + K^T y
    let c = inst.state_costs(s);
    let g: Vec<f64> = (0..2).map(|a| c[a] + lambda * (y0[2 * a] * v[0] + y0[2 * a + 1] * v[1])).collect();
    let x1 = project2(x0[0] - tau * g[0], x0[1] - tau * g[1]);
    // y: maximize <d, y> - |y - y0|^2 / (2 sigma) over the ellipsoid, by bisection on the multiplier
    let d: Vec<f64> = (0..4).map(|k| lambda * (2.0 * x1[k / 2] - x0[k / 2]) * v[k % 2]).collect();
    let center = inst.nominal_block(s).to_vec();
    let solve = |mu: f64| -> Vec<f64> {
        (0..2)
            .flat_map(|a| {
                let p = |k: usize| (y0[k] / sigma + mu * center[k] + d[k]) / (1.0 / sigma + mu);
                project2(p(2 * a), p(2 * a + 1))
            })
            .collect()
    };
    let dist = |y: &[f64]| 0.5 * y.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let mut y1 = solve(0.0);
    if dist(&y1) > radius {
        let (mut lo, mut hi) = (0.0, 1.0);
        while dist(&solve(hi)) > radius {
            hi *= 2.0;
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if dist(&solve(mid)) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        y1 = solve(hi);
    }
    assert!(dist(&solve(0.0)) > radius, "multiplier should be active in this configuration");

    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    pda_step(&inst, s, &setup, &v, &mut x, &mut y, 1e-14).unwrap();
    for (a, b) in x.iter().zip(&x1) {
        assert!((a - b).abs() < 1e-10);
    }
    for (a, b) in y.iter().zip(&y1) {
        assert!((a - b).abs() < 1e-10, "{y:?} vs {y1:?}");
    }
}

#[test]
fn zero_radius_keeps_the_adversary_at_the_center() {
    let inst = random_instance(6, 3, 3, UncertaintySpec::ellipsoidal(0.0));
    let setup = make_step_sizes(&inst, NormPair::L2L2).unwrap();
    let v = [5.0, 1.0, 9.0];
    let mut x = vec![1.0 / 3.0; 3];
    let mut y = inst.nominal_block(0).to_vec();
    for _ in 0..20 {
        let prev = x.clone();
        pda_step(&inst, 0, &setup, &v, &mut x, &mut y, 1e-12).unwrap();
        assert_eq!(y, inst.nominal_block(0));
        // Euclidean projected gradient step on the nominal linear cost
        let g: Vec<f64> = (0..3)
            .map(|a| inst.state_costs(0)[a] + 0.8 * (0..3).map(|k| y[a * 3 + k] * v[k]).sum::<f64>())
            .collect();
        let z: Vec<f64> = prev.iter().zip(&g).map(|(p, gi)| p - setup.tau * gi).collect();
        let expect = robust_mdp::prox::project_simplex_l2(&z).unwrap();
        for (a, b) in x.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}

#[test]
fn global_averages_equal_direct_weighted_means() {
    for (kind, norm) in [
        (UncertaintySpec::ellipsoidal(0.3), NormPair::L2L2),
        (UncertaintySpec::kl(0.3), NormPair::L1L1),
    ] {
        let inst = random_instance(7, 4, 3, kind);
        let setup = make_step_sizes(&inst, norm).unwrap();
        let schedule = Schedule { p: 2, q: 2, ..Schedule::default() };
        let mut state = FomViState::new(&inst, InitMode::Uniform, true);
        for _ in 0..5 {
            state.run_epoch(&inst, &setup, &schedule, 1e-10).unwrap();
            let x_avg = state.average_policy();
            let y_avg = state.average_kernel();
            for s in 0..4 {
                let hist = state.history(s).unwrap();
                assert_eq!(hist.len() as u64, state.iteration());
                let total: f64 = (1..=hist.len()).map(|t| (t as f64).powi(2)).sum();
                let mut xm = vec![0.0; 3];
                let mut ym = vec![0.0; 12];
                for (t, (x, y)) in hist.iter().enumerate() {
                    let w = ((t + 1) as f64).powi(2) / total;
                    xm.iter_mut().zip(x).for_each(|(m, z)| *m += w * z);
                    ym.iter_mut().zip(y).for_each(|(m, z)| *m += w * z);
                }
                for (a, b) in x_avg.row(s).iter().zip(&xm) {
                    assert!((a - b).abs() < 1e-10);
                }
                for (a, b) in y_avg.block(s).iter().zip(&ym) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn value_update_stays_within_the_epoch_gap_of_the_bellman_value() {
    let inst = random_instance(8, 3, 3, UncertaintySpec::ellipsoidal(0.2));
    let (ns, na) = (3, 3);
    let setup = make_step_sizes(&inst, NormPair::L2L2).unwrap();
    let schedule = Schedule::default();
    let mut state = FomViState::new(&inst, InitMode::Uniform, true);
    for _ in 0..8 {
        let v = state.value().to_vec();
        let start = state.iteration() as usize;
        state.run_epoch(&inst, &setup, &schedule, 1e-10).unwrap();
        let end = state.iteration() as usize;
        let new_v = state.value().to_vec();
        for s in 0..ns {
            // epoch averages recomputed from the history
            let hist = &state.history(s).unwrap()[start..end];
            let wsum: f64 = (start + 1..=end).map(|t| (t as f64).powi(2)).sum();
            let mut xb = vec![0.0; na];
            let mut yb = vec![0.0; na * ns];
            for (k, (x, y)) in hist.iter().enumerate() {
                let w = ((start + k + 1) as f64).powi(2) / wsum;
                xb.iter_mut().zip(x).for_each(|(m, z)| *m += w * z);
                yb.iter_mut().zip(y).for_each(|(m, z)| *m += w * z);
            }
            let c = inst.state_costs(s);
            let d: Vec<f64> = (0..na * ns).map(|k| 0.8 * xb[k / ns] * v[k % ns]).collect();
            let lin = linear_max_over_set(&inst.state_uncertainty(s), &d, 1e-12).unwrap();
            let upper = (0..na).map(|a| c[a] * xb[a]).sum::<f64>() + lin.upper_bound;
            let lower = (0..na)
                .map(|a| c[a] + 0.8 * (0..ns).map(|k| yb[a * ns + k] * v[k]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let epoch_gap = upper - lower;

            let bell = robust_bellman(&inst, &v, s, 1e-6).unwrap();
            assert!(bell.converged);
            // F(v)_s lies in the certified interval [lower_value, lower_value + certified_gap]
            let (f_lo, f_hi) = (bell.lower_value, bell.lower_value + bell.certified_gap);
            let off = (f_lo - new_v[s]).max(new_v[s] - f_hi).max(0.0);
            assert!(off <= epoch_gap + 1e-8, "state {s}: off {off}, epoch gap {epoch_gap}");
        }
    }
}

#[test]
fn zero_costs_converge_at_the_first_check() {
    let inst = random_instance(9, 3, 2, UncertaintySpec::ellipsoidal(0.3)).with_costs(vec![0.0; 6]).unwrap();
    let r = run_fom_vi(&inst, &FomViOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.value.iter().all(|&x| x == 0.0));
    assert_eq!(r.final_gap.unwrap().gap, 0.0);
    assert_eq!(r.trace[0].certified_gap, Some(0.0));
}

/// Nominal optimal return by plain value iteration to `tol` in sup norm.
fn nominal_optimal_return(inst: &RobustMdp, tol: f64) -> f64 {
    let (ns, na) = (inst.num_states(), inst.num_actions());
    let y = inst.nominal_kernel();
    let mut v = vec![0.0; ns];
    loop {
        let next: Vec<f64> = (0..ns)
            .map(|s| {
                (0..na)
                    .map(|a| {
                        let row = &y[(s * na + a) * ns..(s * na + a + 1) * ns];
                        inst.costs()[s * na + a] + 0.8 * row.iter().zip(&v).map(|(p, w)| p * w).sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff <= tol * 0.2 / 0.8 {
            break;
        }
    }
    v.iter().zip(inst.initial_distribution()).map(|(a, b)| a * b).sum()
}

#[test]
fn zero_radius_run_matches_nominal_optimum() {
    let mut params = GarnetParams::new(6, 4, 12);
    params.n_branch = 0.5;
    let inst = gen_garnet(&params, UncertaintyKind::Ellipsoidal).unwrap().with_uncertainty(UncertaintySpec::ellipsoidal(0.0));
    let r = run_fom_vi(&inst, &FomViOptions::default()).unwrap();
    assert!(r.converged);
    let vx = policy_value(&inst, &r.policy, &AdversarialKernel::nominal(&inst)).unwrap();
    let got = return_value(&inst, &vx);
    let expect = nominal_optimal_return(&inst, 1e-3);
    assert!((got - expect).abs() <= 0.2, "{got} vs {expect}");
}

#[test]
fn garnet_run_matches_tight_robust_vi() {
    let inst = gen_garnet(&GarnetParams::new(10, 10, 3), UncertaintyKind::Ellipsoidal).unwrap();
    let r = run_fom_vi(&inst, &FomViOptions::default()).unwrap();
    assert!(r.converged);
    let report = r.final_gap.unwrap();
    assert!(report.gap <= 0.05);
    let reference = vi_robust(&inst, 1e-4).unwrap();
    assert!(reference.converged);
    let expect = return_value(&inst, &reference.value);
    assert!((report.worst_case_value - expect).abs() <= 0.2, "{} vs {expect}", report.worst_case_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn values_stay_in_the_discounted_cost_range(seed in any::<u64>(), ns in 2usize..5, na in 2usize..5, kl in any::<bool>(), r in 0.0f64..1.0) {
        let spec = if kl { UncertaintySpec::kl(r) } else { UncertaintySpec::ellipsoidal(r) };
        let inst = random_instance(seed, ns, na, spec);
        let norm = if kl { NormPair::L1L1 } else { NormPair::L2L2 };
        let setup = make_step_sizes(&inst, norm).unwrap();
        let bound = inst.max_cost() / 0.2 + 1e-9;
        let mut state = FomViState::new(&inst, InitMode::Random { seed }, false);
        for _ in 0..6 {
            state.run_epoch(&inst, &setup, &Schedule::default(), 1e-10).unwrap();
            prop_assert!(state.value().iter().all(|&x| (0.0..=bound).contains(&x)));
        }
    }
}
