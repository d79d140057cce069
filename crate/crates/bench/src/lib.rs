//! Scalable workloads for the solver benchmarks.

use multreward::exactnum::{int, ratio};
use multreward::{Model, ModelBuilder, SuccinctProduct};

/// `n` choice points in sequence. Each either takes a sure reward of 4 or
/// gambles on a reward-2 loop that continues with probability 2/5.
pub fn ladder(n: usize) -> Model {
    let mut b = ModelBuilder::new();
    let choice: Vec<_> = (0..n).map(|i| b.add_state(format!("c{i}"), int(1))).collect();
    let risky: Vec<_> = (0..n).map(|i| b.add_state(format!("r{i}"), int(2))).collect();
    let sure: Vec<_> = (0..n).map(|i| b.add_state(format!("s{i}"), ratio(1, 2))).collect();
    let goal = b.add_state("goal", int(1));
    let lose = b.add_state("lose", int(0));
    for i in 0..n {
        let next = if i + 1 < n { choice[i + 1] } else { goal };
        b.add_action(choice[i], "risky", vec![(risky[i], int(1))]);
        b.add_action(choice[i], "sure", vec![(sure[i], int(1))]);
        b.add_action(risky[i], "a", vec![(risky[i], ratio(2, 5)), (next, ratio(1, 2)), (lose, ratio(1, 10))]);
        b.add_action(sure[i], "a", vec![(next, int(1))]);
    }
    b.add_action(goal, "loop", vec![(goal, int(1))]);
    b.add_action(lose, "loop", vec![(lose, int(1))]);
    b.build(choice[0]).unwrap()
}

/// Deterministic ring of `n` states whose rewards multiply to 1, each with
/// an exit to a reward-1 sink. Exercises the spider construction.
pub fn exit_ring(n: usize) -> Model {
    let mut b = ModelBuilder::new();
    let rewards: Vec<_> = (0..n).map(|i| if i % 2 == 0 { int(2) } else { ratio(1, 2) }).collect();
    let ring: Vec<_> = (0..n).map(|i| b.add_state(format!("v{i}"), rewards[i].clone())).collect();
    let goal = b.add_state("goal", int(1));
    for i in 0..n {
        b.add_action(ring[i], "next", vec![(ring[(i + 1) % n], int(1))]);
        b.add_action(ring[i], "exit", vec![(goal, int(1))]);
    }
    b.add_action(goal, "loop", vec![(goal, int(1))]);
    b.build(ring[0]).unwrap()
}

/// Lazy random walk of length `n` with growth 3/2 and decline 2/3, closed
/// by reflecting ends.
pub fn walk(n: usize) -> Model {
    let mut b = ModelBuilder::new();
    let s: Vec<_> = (0..n)
        .map(|i| b.add_state(format!("w{i}"), if i % 2 == 0 { ratio(3, 2) } else { ratio(2, 3) }))
        .collect();
    for i in 0..n {
        let l = s[i.saturating_sub(1)];
        let r = s[(i + 1).min(n - 1)];
        let succ = if l == r { vec![(l, int(1))] } else { vec![(l, ratio(1, 2)), (r, ratio(1, 2))] };
        b.add_action(s[i], "a", succ);
    }
    b.build(s[0]).unwrap()
}

/// `2^a * 3^b` against `5^(2^bits)`, with `2^a ~ 5^(0.3 * 2^bits)` and
/// `3^b ~ 5^(0.7 * 2^bits)` so the logarithms differ only by rounding.
pub fn close_products(bits: u32) -> (SuccinctProduct, SuccinctProduct) {
    let scale = 1i64 << bits.min(40);
    let a = (scale as f64 * 5f64.log2() * 0.3) as i64;
    let b = (scale as f64 * 5f64.log(3.0) * 0.7) as i64;
    (SuccinctProduct::from_pairs([(2, a), (3, b)]), SuccinctProduct::from_pairs([(5, scale)]))
}
