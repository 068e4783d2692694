use heavylight::baselines::{
    brute_force_opt, exhaustive_opt, lst_fallback, matching_baseline_search, optimal_light_completion,
};
use heavylight::instance::{gen_planted, gen_random, makespan, validate_schedule, EligibilitySize, GenParams};
use heavylight::rational::{int, rat};
use proptest::prelude::*;

fn tiny_params() -> impl Strategy<Value = GenParams> {
    (1usize..=4, 0usize..=3, 0usize..=3, 2i64..=4, any::<u64>()).prop_map(|(m, h, l, inv_eps, seed)| GenParams {
        machines: m,
        heavy: h,
        light: l,
        eps: rat(1, inv_eps),
        eligibility: EligibilitySize::Uniform { min: 1, max: m },
        seed,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn brute_force_matches_exhaustive_search(p in tiny_params()) {
        let inst = gen_random(&p).unwrap();
        let (opt, sched) = brute_force_opt(&inst).unwrap();
        validate_schedule(&inst, &sched).unwrap();
        prop_assert_eq!(makespan(&inst, &sched).unwrap(), opt.clone());
        prop_assert_eq!(exhaustive_opt(&inst, 1 << 20).unwrap(), opt);
    }

    #[test]
    fn baselines_never_beat_the_optimum(p in tiny_params()) {
        let inst = gen_random(&p).unwrap();
        let (opt, _) = brute_force_opt(&inst).unwrap();
        if let Some(b) = matching_baseline_search(&inst).unwrap() {
            validate_schedule(&inst, &b.schedule).unwrap();
            prop_assert!(b.makespan >= opt);
            // an optimal schedule fits the slots at T = OPT
            prop_assert!(b.t <= opt);
            prop_assert!(b.makespan <= (int(2) - &inst.eps) * &b.t);
        }
        let fb = lst_fallback(&inst).unwrap();
        validate_schedule(&inst, &fb.schedule).unwrap();
        prop_assert!(fb.lp_bound <= opt);
        prop_assert!(fb.makespan >= opt);
        prop_assert!(fb.makespan <= &fb.lp_bound + int(1));
    }

    #[test]
    fn light_completion_is_optimal_for_the_heavy_part(p in tiny_params()) {
        let inst = gen_random(&p).unwrap();
        let (opt, sched) = brute_force_opt(&inst).unwrap();
        let heavy: Vec<usize> = inst.heavy.iter().map(|j| sched.machine_of(&j.id).unwrap()).collect();
        let (t, completed) = optimal_light_completion(&inst, &heavy).unwrap();
        validate_schedule(&inst, &completed).unwrap();
        prop_assert_eq!(t, opt);
    }

    #[test]
    fn planted_instances_have_unit_optimum(m in 2usize..=5, seed in any::<u64>()) {
        let p = GenParams {
            machines: m,
            heavy: m / 2,
            light: m - m / 2,
            eps: rat(1, 3),
            eligibility: EligibilitySize::Uniform { min: 1, max: 2.min(m) },
            seed,
        };
        let inst = gen_planted(&p).unwrap();
        let (opt, _) = brute_force_opt(&inst).unwrap();
        prop_assert!(opt <= int(1));
    }
}
