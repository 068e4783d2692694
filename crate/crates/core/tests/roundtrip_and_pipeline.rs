use heavylight::canonical::{canonical_to_json, check_canonical, parse_canonical, CanonicalParams};
use heavylight::goodness::is_delta_good;
use heavylight::instance::{
    gen_planted, gen_random, instance_to_json, makespan, parse_instance, parse_schedule, schedule_to_json,
    validate_schedule, EligibilitySize, GenParams,
};
use heavylight::pipeline::{solve, Constants, SolveConfig, SolvePath};
use heavylight::rational::{format_rational, int, parse_rational, rat};
use heavylight::Rational;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GenParams> {
    (2usize..=8, 0usize..=6, 0usize..=10, 2i64..=8, any::<u64>()).prop_map(|(m, h, l, inv, seed)| GenParams {
        machines: m,
        heavy: h,
        light: l,
        eps: rat(1, inv),
        eligibility: EligibilitySize::Uniform { min: 1, max: m.min(3) },
        seed,
    })
}

fn desk(seed: u64) -> SolveConfig {
    SolveConfig { constants: Constants::desk_scale(), seed, ..SolveConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = rat(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }

    #[test]
    fn instances_round_trip(p in params()) {
        let inst = gen_random(&p).unwrap();
        prop_assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn solve_always_returns_a_checked_schedule(p in params()) {
        let inst = gen_random(&p).unwrap();
        let out = solve(&inst, &desk(p.seed)).unwrap();
        validate_schedule(&inst, &out.schedule).unwrap();
        prop_assert_eq!(makespan(&inst, &out.schedule).unwrap(), out.makespan.clone());
        prop_assert!(out.verified());
        let text = schedule_to_json(&inst, &out.schedule);
        prop_assert_eq!(parse_schedule(&inst, &text).unwrap(), out.schedule.clone());
        match out.path {
            SolvePath::Pipeline => {
                let ci = out.canonical.as_ref().unwrap();
                prop_assert!(check_canonical(ci, &CanonicalParams::of(ci)).is_valid());
                prop_assert_eq!(&parse_canonical(&canonical_to_json(ci)).unwrap(), ci);
                let rep = out.pipeline.as_ref().unwrap();
                // ledger arithmetic
                let l = &rep.ledger;
                let q = |s: &str| parse_rational(s).unwrap();
                prop_assert_eq!(
                    q(&l.delta_guaranteed),
                    q(&l.delta_star) - q(&l.theta_surcharge) - q(&l.coarsen_loss)
                );
                prop_assert_eq!(q(&l.makespan_bound), int(2) - q(&l.best_delta) + q(&l.lift_term));
                prop_assert!(q(&l.best_delta) >= q(&l.delta_guaranteed));
                prop_assert!(out.makespan <= q(&l.makespan_bound));
                prop_assert!(q(&rep.polished_makespan) <= out.makespan);
                let heavy = out.heavy.as_ref().unwrap();
                prop_assert!(is_delta_good(ci, heavy, &q(&l.delta_guaranteed)).unwrap().good);
            }
            SolvePath::Fallback => prop_assert!(out.fallback.as_ref().unwrap().within_bound),
        }
    }

    #[test]
    fn solve_is_deterministic_in_the_seed(p in params()) {
        let inst = gen_random(&p).unwrap();
        let a = solve(&inst, &desk(p.seed)).unwrap();
        let b = solve(&inst, &desk(p.seed)).unwrap();
        prop_assert_eq!(a.to_json(&inst), b.to_json(&inst));
    }

    #[test]
    fn planted_instances_stay_below_two(m in 4usize..=12, seed in any::<u64>()) {
        let p = GenParams {
            machines: m,
            heavy: m / 2,
            light: 2 * (m - m / 2),
            eps: rat(1, 4),
            eligibility: EligibilitySize::Uniform { min: 1, max: 3 },
            seed,
        };
        let inst = gen_planted(&p).unwrap();
        let out = solve(&inst, &desk(seed)).unwrap();
        prop_assert_eq!(out.path, SolvePath::Pipeline);
        prop_assert!(out.makespan <= int(2));
    }
}

#[test]
fn negative_delta_and_large_theta_are_rejected() {
    let inst = gen_random(&GenParams {
        machines: 2,
        heavy: 1,
        light: 0,
        eps: rat(1, 2),
        eligibility: EligibilitySize::Fixed { size: 2 },
        seed: 0,
    })
    .unwrap();
    let mut cfg = desk(0);
    cfg.delta = rat(-1, 10);
    assert!(solve(&inst, &cfg).is_err());
    cfg.delta = Rational::from_integer(1.into());
    assert!(solve(&inst, &cfg).is_err());
}
