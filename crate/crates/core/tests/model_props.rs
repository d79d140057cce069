mod common;

use multreward::{invert_rewards, parse_model, serialize_model, zero_reward_preprocess};
use proptest::prelude::*;

proptest! {
    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let m = common::random_model(&mut common::rng(seed), 6, 3, true);
        prop_assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn zero_preprocessing_is_idempotent(seed in any::<u64>()) {
        let m = common::random_model(&mut common::rng(seed), 6, 3, true);
        let once = zero_reward_preprocess(&m).model;
        let twice = zero_reward_preprocess(&once);
        prop_assert_eq!(&twice.model, &once);
        prop_assert!(twice.removed.is_empty());
    }

    #[test]
    fn inversion_is_an_involution(seed in any::<u64>()) {
        let m = common::random_model(&mut common::rng(seed), 6, 3, false);
        prop_assert_eq!(invert_rewards(&invert_rewards(&m).unwrap()).unwrap(), m);
    }
}
