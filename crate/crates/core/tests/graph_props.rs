mod common;

use multreward::graph::{almost_sure_reach_max, bottom_sccs, mecs, sccs};
use multreward::sim::for_each_md_scheduler;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sccs_partition_states(seed in any::<u64>()) {
        let m = common::random_model(&mut common::rng(seed), 7, 3, false);
        let mut seen = vec![0; m.num_states()];
        for c in sccs(&m) {
            for s in c.states {
                seen[s] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn md_bottom_components_lie_in_mecs(seed in any::<u64>()) {
        let m = common::random_model(&mut common::rng(seed), 5, 2, false);
        let ms = mecs(&m);
        let mut owner = vec![None; m.num_states()];
        for (i, c) in ms.iter().enumerate() {
            for &s in &c.states {
                prop_assert!(owner[s].is_none(), "state {} in two MECs", s);
                owner[s] = Some(i);
            }
        }
        for_each_md_scheduler(&m, |sched| {
            for b in bottom_sccs(&m.induced_chain(sched)) {
                let home = owner[b.states[0]];
                assert!(home.is_some() && b.states.iter().all(|&s| owner[s] == home), "{:?}", b.states);
            }
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn almost_sure_reachability_is_a_closed_superset(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let m = common::random_model(&mut rng, 7, 3, false);
        let targets: Vec<bool> = m.states().map(|_| rng.random_bool(0.3)).collect();
        let win = almost_sure_reach_max(&m, &targets);
        prop_assert!(targets.iter().zip(&win).all(|(&t, &w)| !t || w));
        prop_assert_eq!(almost_sure_reach_max(&m, &win), win);
    }
}
