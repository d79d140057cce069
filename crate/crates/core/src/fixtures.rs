//! Small reference models used by tests, benches and the CLI examples.

use crate::exactnum::{int, ratio};
use crate::model::{Model, ModelBuilder};

/// Two-state population chain: growth by 13/10 or decline by 3/4, each
/// with probability 1/2.
pub fn plant() -> Model {
    let mut b = ModelBuilder::new();
    let good = b.add_state("good", ratio(13, 10));
    let bad = b.add_state("bad", ratio(3, 4));
    for s in [good, bad] {
        b.add_action(s, "a", vec![(good, ratio(1, 2)), (bad, ratio(1, 2))]);
    }
    b.build(good).unwrap()
}

/// Reward-3 state that loops with probability 1/2, else absorbs at a reward-1 sink.
pub fn divergence() -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(3));
    let s2 = b.add_state("s2", int(1));
    b.add_action(s1, "a", vec![(s1, ratio(1, 2)), (s2, ratio(1, 2))]);
    b.add_action(s2, "loop", vec![(s2, int(1))]);
    b.build(s1).unwrap()
}

/// `s1` chooses between a risky loop through `s2` (action `a`) and a sure
/// reward of 4 through `s3` (action `b`).
pub fn contrast() -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(1));
    let s2 = b.add_state("s2", int(2));
    let s3 = b.add_state("s3", int(4));
    let s4 = b.add_state("s4", int(1));
    b.add_action(s1, "a", vec![(s2, int(1))]);
    b.add_action(s1, "b", vec![(s3, int(1))]);
    b.add_action(s2, "a", vec![(s2, ratio(2, 5)), (s4, ratio(3, 5))]);
    b.add_action(s3, "a", vec![(s4, int(1))]);
    b.add_action(s4, "loop", vec![(s4, int(1))]);
    b.build(s1).unwrap()
}

/// Strongly connected chain whose expected prefix products grow while
/// almost every path has product tending to 0.
pub fn infinite_vs_zero() -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(1));
    let s2 = b.add_state("s2", int(2));
    let s3 = b.add_state("s3", ratio(1, 3));
    b.add_action(s1, "a", vec![(s2, ratio(1, 2)), (s3, ratio(1, 2))]);
    b.add_action(s2, "a", vec![(s1, int(1))]);
    b.add_action(s3, "a", vec![(s1, int(1))]);
    b.build(s1).unwrap()
}

/// Deterministic 2-cycle with rewards 2 and 1/2.
pub fn logzero_left() -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(2));
    let s2 = b.add_state("s2", ratio(1, 2));
    b.add_action(s1, "a", vec![(s2, int(1))]);
    b.add_action(s2, "a", vec![(s1, int(1))]);
    b.build(s1).unwrap()
}

/// Rewards 2 and 1/2 with uniform random moves: a driftless random walk
/// of log-products.
pub fn logzero_right() -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(2));
    let s2 = b.add_state("s2", ratio(1, 2));
    b.add_action(s1, "a", vec![(s1, ratio(1, 2)), (s2, ratio(1, 2))]);
    b.add_action(s2, "a", vec![(s1, ratio(1, 2)), (s2, ratio(1, 2))]);
    b.build(s1).unwrap()
}

/// [`logzero_right`], optionally with an `exit` action from `s2` to an
/// absorbing reward-1 state `s3`.
pub fn inf_special(with_exit: bool) -> Model {
    let mut b = ModelBuilder::new();
    let s1 = b.add_state("s1", int(2));
    let s2 = b.add_state("s2", ratio(1, 2));
    b.add_action(s1, "a", vec![(s1, ratio(1, 2)), (s2, ratio(1, 2))]);
    b.add_action(s2, "a", vec![(s1, ratio(1, 2)), (s2, ratio(1, 2))]);
    if with_exit {
        let s3 = b.add_state("s3", int(1));
        b.add_action(s2, "exit", vec![(s3, int(1))]);
        b.add_action(s3, "loop", vec![(s3, int(1))]);
    }
    b.build(s1).unwrap()
}

/// Deterministic ring `s -> t -> u -> s` with rewards 1/8, 2, 4 (all
/// cycles have product 1) entered from `init`, with an exit at every ring
/// state.
pub fn spider_triangle() -> Model {
    let mut b = ModelBuilder::new();
    let init = b.add_state("init", int(1));
    let s = b.add_state("s", ratio(1, 8));
    let t = b.add_state("t", int(2));
    let u = b.add_state("u", int(4));
    let t1 = b.add_state("t1", int(1));
    let t2 = b.add_state("t2", int(1));
    let t3 = b.add_state("t3", int(3));
    b.add_action(init, "a", vec![(s, int(1))]);
    b.add_action(s, "next", vec![(t, int(1))]);
    b.add_action(s, "exit", vec![(t1, ratio(1, 2)), (t2, ratio(1, 2))]);
    b.add_action(t, "next", vec![(u, int(1))]);
    b.add_action(t, "exit", vec![(t2, int(1))]);
    b.add_action(u, "next", vec![(s, int(1))]);
    b.add_action(u, "exit", vec![(t2, ratio(2, 3)), (t3, ratio(1, 3))]);
    b.add_action(t1, "loop", vec![(t1, int(1))]);
    b.add_action(t2, "loop", vec![(t2, int(1))]);
    b.add_action(t3, "a", vec![(t1, int(1))]);
    b.build(init).unwrap()
}

/// Reward-`reward` state `x` looping with probability 1/2, else moving to
/// an absorbing reward-1 state `t`.
pub fn transient_loop(reward: i64) -> Model {
    let mut b = ModelBuilder::new();
    let x = b.add_state("x", int(reward));
    let t = b.add_state("t", int(1));
    b.add_action(x, "a", vec![(x, ratio(1, 2)), (t, ratio(1, 2))]);
    b.add_action(t, "loop", vec![(t, int(1))]);
    b.build(x).unwrap()
}

/// Transient system with no solution at all.
pub fn no_solution() -> Model {
    transient_loop(2)
}

/// Transient system with exactly one (negative) solution.
pub fn one_solution() -> Model {
    transient_loop(4)
}

/// Transient system whose solutions form a line, none non-negative.
pub fn many_solutions() -> Model {
    let mut b = ModelBuilder::new();
    let x = b.add_state("x", int(4));
    let y = b.add_state("y", int(4));
    let t = b.add_state("t", int(1));
    b.add_action(x, "a", vec![(x, ratio(1, 2)), (y, ratio(1, 4)), (t, ratio(1, 4))]);
    b.add_action(y, "a", vec![(x, ratio(1, 4)), (y, ratio(1, 2)), (t, ratio(1, 4))]);
    b.add_action(t, "loop", vec![(t, int(1))]);
    b.build(x).unwrap()
}

/// A single absorbing state.
pub fn absorbing(reward: i64) -> Model {
    let mut b = ModelBuilder::new();
    let s = b.add_state("s", int(reward));
    b.add_action(s, "loop", vec![(s, int(1))]);
    b.build(s).unwrap()
}
