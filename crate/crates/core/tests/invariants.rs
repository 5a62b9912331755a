//! Property tests for model, grouping and solver invariants.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swipt::bd::build_effective_channels;
use swipt::grouping::{baseline_random, baseline_round_robin, supergroup};
use swipt::linalg::CMat;
use swipt::model::{
    decoding_power, harvested_power, max_rate, pf_update, update_battery_harvest, update_battery_info, ChannelSet,
    PowerModel, TerminalState,
};
use swipt::solver::{solve_wsr_harvest, SolverConfig};

fn model() -> PowerModel {
    PowerModel { p_c_tx: 1.0, p_c_rx: 5.0, c1: 30.0, c2: 0.75, p_max: 11.0 }
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::from_iterator(rows, cols, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
}

fn psd(n: usize) -> impl Strategy<Value = CMat> {
    cmat(n, n).prop_map(|a| &a * a.adjoint())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn battery_stays_in_box(
        capacity in 1.0f64..5000.0,
        fill in 0.0f64..=1.0,
        rate in 0.0f64..20.0,
        harvested in 0.0f64..1e4,
        t_f in 0.01f64..1.0,
    ) {
        let s = TerminalState::new(capacity * fill, capacity, 1.0, 0.0, 2);
        let a = update_battery_info(&s, rate, &model(), t_f);
        let b = update_battery_harvest(&s, harvested, &model(), t_f);
        for x in [a.battery, b.battery] {
            prop_assert!((0.0..=capacity).contains(&x));
        }
    }

    #[test]
    fn max_rate_is_affordable(battery in 0.0f64..1e4, t_f in 0.01f64..1.0) {
        let m = model();
        let r = max_rate(battery, &m, t_f);
        prop_assert!(r >= 0.0);
        if r > 0.0 {
            let cost = t_f * (decoding_power(r, &m) + m.p_c_rx);
            prop_assert!(cost <= battery * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pf_average_converges_to_constant_rate(rate in 0.1f64..10.0, t_c in 2.0f64..50.0, start in 0.01f64..10.0) {
        let mut s = TerminalState::new(1.0, 1.0, 1.0, 0.0, 1);
        s.pf_avg = start;
        for _ in 0..(t_c as usize * 60) {
            s = pf_update(&s, rate, t_c);
        }
        prop_assert!((s.pf_avg - rate).abs() <= 1e-6 * rate.max(start));
        prop_assert!((s.weight * s.pf_avg - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn harvest_is_linear_in_covariance(h in cmat(2, 3), s1 in psd(3), s2 in psd(3), a in 0.0f64..5.0, zeta in 0.1f64..=1.0) {
        let one = harvested_power(&h, std::slice::from_ref(&s1), zeta).unwrap();
        let scaled = harvested_power(&h, &[s1.scale(a)], zeta).unwrap();
        let two = harvested_power(&h, &[s1.clone(), s2.clone()], zeta).unwrap();
        let other = harvested_power(&h, std::slice::from_ref(&s2), zeta).unwrap();
        let tol = 1e-9 * (1.0 + one + other) * (1.0 + a);
        prop_assert!((scaled - a * one).abs() <= tol);
        prop_assert!((two - one - other).abs() <= tol);
    }

    #[test]
    fn supergroups_partition_users(ratios in prop::collection::vec(0.0f64..=1.0, 2..20), alpha in 0.0f64..=1.0) {
        let terminals: Vec<TerminalState> = ratios.iter().map(|&r| TerminalState::new(r * 100.0, 100.0, 1.0, 0.0, 2)).collect();
        let g = supergroup(&terminals, alpha).unwrap();
        let mut all: Vec<usize> = g.super_info.iter().chain(&g.super_harvest).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..terminals.len()).collect::<Vec<_>>());
        let max_harvest = g.super_harvest.iter().map(|&u| ratios[u]).fold(f64::NEG_INFINITY, f64::max);
        let min_info = g.super_info.iter().map(|&u| ratios[u]).fold(f64::INFINITY, f64::min);
        prop_assert!(max_harvest <= min_info);
    }

    #[test]
    fn baseline_groups_are_disjoint(k in 1usize..30, u in 1usize..5, m in 0usize..5, seed in any::<u64>(), start in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pointer = start % k;
        for sets in [baseline_round_robin(k, &mut pointer, u, m), baseline_random(k, &mut rng, u, m)] {
            prop_assert_eq!(sets.info.len(), u.min(k));
            prop_assert_eq!(sets.harvest.len(), m.min(k - u.min(k)));
            prop_assert!(sets.info.iter().all(|x| !sets.harvest.contains(x) && *x < k));
            prop_assert!(sets.harvest.iter().all(|x| *x < k));
        }
    }

    #[test]
    fn block_diagonalization_cancels_interference(h in prop::collection::vec(cmat(2, 4), 2)) {
        let channels = ChannelSet::from_matrices(4, h).unwrap();
        let eff = build_effective_channels(&channels, &[0, 1], &[]).unwrap();
        for i in 0..2 {
            let full = eff.lift(i, &CMat::identity(eff.eff_info[i].ncols(), eff.eff_info[i].ncols()));
            let leak = channels.get(1 - i) * full * channels.get(1 - i).adjoint();
            prop_assert!(leak.norm() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sum_rate_falls_as_target_rises(h in prop::collection::vec(cmat(1, 3), 3), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let channels = ChannelSet::from_matrices(3, h).unwrap();
        let eff = build_effective_channels(&channels, &[0, 1], &[2]).unwrap();
        let cfg = SolverConfig::default();
        let reach = 10.0 * swipt::linalg::lambda_max(&eff.cross_gram[0][0]).max(swipt::linalg::lambda_max(&eff.cross_gram[0][1]));
        let (lo, hi) = (t1.min(t2) * 0.9 * reach, t1.max(t2) * 0.9 * reach);
        let a = solve_wsr_harvest(&eff, &[1.0, 1.0], &[lo], 10.0, &cfg).unwrap();
        let b = solve_wsr_harvest(&eff, &[1.0, 1.0], &[hi], 10.0, &cfg).unwrap();
        prop_assert!(a.feasible && b.feasible);
        prop_assert!(a.objective >= b.objective - 1e-6 * a.objective.abs().max(1.0));
    }
}
