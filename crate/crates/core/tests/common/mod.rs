#![allow(dead_code)]

use multreward::exactnum::{int, ratio};
use multreward::sim::reward_palette;
use multreward::{Model, ModelBuilder, Rational};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Arbitrary model on `2..=max_states` states, all reachable from state 0
/// through a ring carried by action 0. Rewards from the palette, plus 0
/// when `zeros` is set.
pub fn random_model(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize, zeros: bool) -> Model {
    let palette = reward_palette();
    let n = rng.random_range(2..=max_states);
    let mut b = ModelBuilder::new();
    for s in 0..n {
        let r: Rational = if zeros && rng.random_bool(0.15) {
            int(0)
        } else {
            palette[rng.random_range(0..palette.len())].clone()
        };
        b.add_state(format!("q{s}"), r);
    }
    for s in 0..n {
        for a in 0..rng.random_range(1..=max_actions) {
            let mut targets: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..n)).collect();
            if a == 0 {
                targets.push((s + 1) % n);
            }
            targets.sort_unstable();
            targets.dedup();
            let weights: Vec<i64> = targets.iter().map(|_| rng.random_range(1..=3)).collect();
            let total: i64 = weights.iter().sum();
            b.add_action(s, format!("a{a}"), targets.iter().zip(&weights).map(|(&t, &w)| (t, ratio(w, total))).collect());
        }
    }
    b.build(0).unwrap()
}
