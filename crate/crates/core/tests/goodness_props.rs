use std::collections::BTreeMap;

use heavylight::canonical::{CanonicalInstance, Group, HeavyAssignment};
use heavylight::goodness::{
    best_goodness, connected_refinement, delta_good_bruteforce, is_connected, is_delta_good, witness_slack,
};
use heavylight::rational::{int, rat};
use heavylight::Rational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Small canonical-shaped instance plus a heavy assignment. Loads are drawn
/// from multiples of 1/8 so that boundary cases (slack exactly zero) occur.
fn instance() -> impl Strategy<Value = (CanonicalInstance, HeavyAssignment)> {
    (2usize..=7)
        .prop_flat_map(|m| {
            (
                Just(m),
                proptest::collection::vec(0usize..=m, m),
                proptest::collection::vec((0..m, 0..m, 1i64..=12), 0..=2 * m),
                proptest::collection::vec(any::<u8>(), m),
            )
        })
        .prop_map(|(m, labels, entries, picks)| {
            // label == m leaves the machine ungrouped
            let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &l) in labels.iter().enumerate() {
                if l < m {
                    members.entry(l).or_default().push(i);
                }
            }
            let groups: Vec<Group> = members
                .into_values()
                .enumerate()
                .map(|(j, machines)| Group { job: format!("h{j}"), machines })
                .collect();
            let machine_of =
                groups.iter().enumerate().map(|(j, g)| g.machines[picks[j] as usize % g.machines.len()]).collect();
            let mut w = BTreeMap::new();
            for (h, k, v) in entries {
                *w.entry((h, k)).or_insert_with(Rational::zero) += rat(v, 8);
            }
            let ci = CanonicalInstance {
                machines: (0..m).map(|i| format!("m{i}")).collect(),
                groups,
                w,
                z: vec![Rational::zero(); m],
                p: int(1),
                q: int(1),
                theta: Rational::zero(),
            };
            (ci, HeavyAssignment { machine_of })
        })
}

fn delta_strategy() -> impl Strategy<Value = Rational> {
    (0i64..=16).prop_map(|n| rat(n, 16))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn flow_test_agrees_with_subset_enumeration((ci, f) in instance(), delta in delta_strategy()) {
        let flow = is_delta_good(&ci, &f, &delta).unwrap();
        let (good, best) = delta_good_bruteforce(&ci, &f, &delta).unwrap();
        prop_assert_eq!(flow.good, good);
        if let Some(w) = flow.witness {
            prop_assert!(w.slack.is_positive());
            prop_assert_eq!(&w.slack, &witness_slack(&ci, &w.s, w.t.len(), &delta));
            prop_assert!(w.slack <= best.unwrap().slack);
        }
    }

    #[test]
    fn goodness_is_monotone_in_delta((ci, f) in instance(), a in delta_strategy(), b in delta_strategy()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if is_delta_good(&ci, &f, &hi).unwrap().good {
            prop_assert!(is_delta_good(&ci, &f, &lo).unwrap().good);
        }
    }

    #[test]
    fn placement_respects_capacities((ci, f) in instance(), delta in delta_strategy()) {
        let r = is_delta_good(&ci, &f, &delta).unwrap();
        if let Some(pl) = r.placement {
            let x = f.image(ci.num_machines());
            let mut load = vec![Rational::zero(); ci.num_machines()];
            for ((h, k), (on_h, on_k)) in &pl {
                prop_assert_eq!(on_h + on_k, ci.w_at(*h, *k));
                prop_assert!(!on_h.is_negative() && !on_k.is_negative());
                if h == k {
                    prop_assert!(on_h.is_zero());
                }
                load[*h] += on_h;
                load[*k] += on_k;
            }
            for (i, l) in load.iter().enumerate() {
                let heavy = if x[i] { int(1) } else { Rational::zero() };
                prop_assert!(l + heavy <= int(2) - &delta);
            }
        }
    }

    #[test]
    fn refined_witness_is_connected_and_violated((ci, f) in instance(), delta in delta_strategy()) {
        if let Some(w) = is_delta_good(&ci, &f, &delta).unwrap().witness {
            let x = f.image(ci.num_machines());
            let r = connected_refinement(&ci, &x, &w);
            prop_assert!(is_connected(&ci, &r.s));
            prop_assert!(r.slack.is_positive());
            prop_assert!(r.s.iter().all(|i| w.s.contains(i)));
        }
    }

    #[test]
    fn best_goodness_is_the_threshold((ci, f) in instance()) {
        let (best, _) = best_goodness(&ci, &f).unwrap().unwrap();
        prop_assert!(is_delta_good(&ci, &f, &best).unwrap().good);
        let above = &best + rat(1, 1000);
        // any positive step past the threshold breaks goodness unless capped by 1
        if above <= Rational::one() {
            prop_assert!(!delta_good_bruteforce(&ci, &f, &above).unwrap().0);
        }
    }
}
