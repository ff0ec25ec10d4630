use proptest::prelude::*;
use qsdist_core::metrics::check_constraints;
use qsdist_core::optimizer::{
    anneal, benchmark_policy, initial_state, simulated_annealing, AnnealTrace, Mode, Problem,
};
use qsdist_core::{default_params, AnnealConfig, Policy, ProblemInstance, SwitchConfig, UserRequest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn short_schedule() -> AnnealConfig {
    AnnealConfig { k_iters: 10, tau_min_ratio: 1e-3, ..AnnealConfig::default() }
}

fn arb_user() -> impl Strategy<Value = UserRequest> {
    (100.0..1500.0f64, 1.0..300.0f64, 0.6..0.93f64).prop_map(|(d, r, f)| UserRequest {
        distance_d: d,
        r_min: r,
        f_min: f,
    })
}

fn arb_instance() -> impl Strategy<Value = ProblemInstance> {
    (prop::collection::vec(arb_user(), 1..=3), 1u32..=2, 1u32..=2).prop_map(|(users, m1, m2)| {
        let m2 = m2.max((users.len() as u32).saturating_sub(m1));
        ProblemInstance::new(default_params(), SwitchConfig { m1, m2 }, users)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_consistent(instance in arb_instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(sol) = simulated_annealing(&instance, &short_schedule(), &mut rng) {
            let max = sol.per_user_metrics.iter().map(|m| m.t_e2e).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(sol.objective, max);
            prop_assert!(sol.allocation.respects(&instance.switch));
            for (i, m) in sol.per_user_metrics.iter().enumerate() {
                prop_assert_eq!(check_constraints(m, &instance.users[i]), sol.per_user_flags[i]);
            }
            let all_ok = sol.per_user_flags.iter().all(|f| f.all_ok());
            prop_assert_eq!(sol.feasible, all_ok);
            prop_assert!(sol.feasible);
        }
    }

    #[test]
    fn annealing_never_loses_its_start(instance in arb_instance(), seed in any::<u64>(), metropolis in any::<bool>()) {
        let problem = Problem::new(&instance).unwrap();
        let cfg = AnnealConfig { metropolis, ..short_schedule() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Ok(start) = initial_state(&problem, Mode::Strict, &cfg, &mut rng) else { return Ok(()) };
        let start_obj = problem.solution(&start).objective;
        let mut trace = AnnealTrace::default();
        let best = anneal(&problem, &cfg, Mode::Strict, start, &mut rng, Some(&mut trace)).unwrap();
        let sol = problem.solution(&best);
        prop_assert!(sol.feasible);
        prop_assert!(sol.objective <= start_obj);
        if !metropolis {
            for w in trace.per_user.windows(2) {
                for (a, b) in w[0].iter().zip(&w[1]) {
                    prop_assert!(b <= a);
                }
            }
        }
    }

    #[test]
    fn policies_respect_their_restrictions(instance in arb_instance(), seed in any::<u64>()) {
        for policy in Policy::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = benchmark_policy(&instance, policy, &short_schedule(), &mut rng).unwrap();
            let users = &out.solution.allocation.users;
            prop_assert_eq!(users.len(), instance.users.len());
            prop_assert!(out.solution.allocation.respects(&instance.switch));
            match policy {
                Policy::Da => prop_assert!(users.iter().all(|u| u.protocol == 1)),
                Policy::Md => prop_assert!(users.iter().all(|u| u.protocol == 2)),
                _ => {}
            }
            if !out.relaxed {
                prop_assert!(out.solution.feasible);
            }
        }
    }
}
