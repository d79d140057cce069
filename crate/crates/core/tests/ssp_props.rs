mod common;

use multreward::graph::reaching;
use multreward::sim::{enumerate_md_best, random_absorbing_mdp, value_iteration_oracle};
use multreward::{mdp_values, mssp, AnalysisMode, Error, ExtendedValue, Model};
use proptest::prelude::*;

fn reaches_almost_surely(chain: &Model, target: usize) -> bool {
    let mut mask = vec![false; chain.num_states()];
    mask[target] = true;
    let hits = reaching(chain, &mask);
    let live = chain.reachable_from(chain.initial());
    chain.states().all(|s| !live[s] || hits[s])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ssp_matches_admissible_enumeration(seed in any::<u64>()) {
        let m = random_absorbing_mdp(&mut common::rng(seed), 5, 2);
        let target = m.state_by_name("win").unwrap();
        let best = enumerate_md_best(&m, AnalysisMode::Sup, |chain, _| reaches_almost_surely(chain, target)).unwrap();
        match mssp(&m, target) {
            Err(Error::NoAdmissibleScheduler) => prop_assert!(best.is_none()),
            Err(e) => prop_assert!(false, "{}", e),
            Ok(r) => {
                let (md, _) = best.expect("an admissible scheduler exists");
                prop_assert!(md <= r.value);
                if r.value != md {
                    prop_assert!(r.value.is_infinite());
                    let vi = value_iteration_oracle(&m, 200).unwrap();
                    prop_assert!(ExtendedValue::Finite(vi[200][m.initial()].clone()) > md);
                }
                if let Some(s) = &r.scheduler {
                    prop_assert!(reaches_almost_surely(&m.induced_chain(s), target));
                }
                let sup = mdp_values(&m, AnalysisMode::Sup).unwrap();
                prop_assert!(r.value <= *sup.initial_value(&m));
            }
        }
    }
}
