//! Test oracles: Monte Carlo simulation, simple-cycle enumeration,
//! exhaustive MD-scheduler enumeration, Bellman iteration, and random model
//! generators. None of this is used by the exact pipeline.

use std::cmp::Ordering;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{int, ratio, Rational};
use crate::mc::mc_values;
use crate::model::{AnalysisMode, ExtendedValue, MdScheduler, Model, ModelBuilder, StateId};

/// Episodes per RNG stream. Chunk `c` draws from stream `c` of the seed.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub episodes: u64,
    /// Mean over the episodes that reached a sink.
    pub mean: f64,
    pub std_error: f64,
    /// Episodes that hit the horizon first; excluded from `mean`.
    pub truncated: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
    truncated: u64,
}

struct CompiledChain {
    reward: Vec<f64>,
    /// Cumulative probabilities and targets of the chosen action.
    cumulative: Vec<Vec<(f64, StateId)>>,
    /// Product factor applied once a sink is reached.
    sink: Vec<Option<f64>>,
}

impl CompiledChain {
    fn new(m: &Model, sched: &MdScheduler) -> Self {
        let mut reward = Vec::new();
        let mut cumulative = Vec::new();
        let mut sink = Vec::new();
        for s in m.states() {
            let act = m.action(s, sched.choice(s));
            let r = m.reward(s);
            reward.push(r.to_f64().unwrap_or(f64::INFINITY));
            let mut acc = 0.0;
            cumulative.push(
                act.successors
                    .iter()
                    .map(|(t, p)| {
                        acc += p.to_f64().unwrap_or(0.0);
                        (acc, *t)
                    })
                    .collect(),
            );
            sink.push(if r.is_zero() {
                Some(0.0)
            } else if act.is_self_loop(s) {
                Some(match r.cmp(&Rational::one()) {
                    Ordering::Less => 0.0,
                    Ordering::Equal => 1.0,
                    Ordering::Greater => f64::INFINITY,
                })
            } else {
                None
            });
        }
        Self {
            reward,
            cumulative,
            sink,
        }
    }

    fn episode(&self, rng: &mut ChaCha8Rng, start: StateId, horizon: u64) -> Option<f64> {
        let mut s = start;
        let mut product = 1.0;
        for _ in 0..horizon {
            if let Some(f) = self.sink[s] {
                return Some(if f == 0.0 { 0.0 } else { product * f });
            }
            product *= self.reward[s];
            let u: f64 = rng.random();
            let row = &self.cumulative[s];
            s = row.iter().find(|(c, _)| u < *c).unwrap_or(row.last().unwrap()).1;
        }
        self.sink[s].map(|f| if f == 0.0 { 0.0 } else { product * f })
    }
}

/// Samples the product of rewards collected until a sink of the chain
/// induced by `sched`. Deterministic for a given seed regardless of thread
/// count.
pub fn simulate_absorbing(m: &Model, sched: &MdScheduler, episodes: u64, horizon: u64, seed: u64) -> Result<SimStats> {
    if episodes == 0 {
        return Err(Error::InvalidInput("at least one episode is required".into()));
    }
    let chain = CompiledChain::new(m, sched);
    let chunks = episodes.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(episodes - c * CHUNK);
            let mut mo = Moments::default();
            for _ in 0..n {
                match chain.episode(&mut rng, m.initial(), horizon) {
                    Some(x) => {
                        mo.count += 1;
                        mo.sum += x;
                        mo.sum_sq += x * x;
                    }
                    None => mo.truncated += 1,
                }
            }
            mo
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |a, b| Moments {
        count: a.count + b.count,
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
        truncated: a.truncated + b.truncated,
    });
    if total.truncated * 2 > episodes {
        return Err(Error::UnreliableEstimate {
            truncated: total.truncated,
            episodes,
        });
    }
    let n = total.count as f64;
    let mean = total.sum / n;
    let var = if total.count > 1 {
        ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimStats {
        episodes,
        mean,
        std_error: (var / n).sqrt(),
        truncated: total.truncated,
    })
}

/// Every simple cycle of a single-action model with its reward product,
/// each reported once starting from its smallest state.
pub fn enumerate_simple_cycles(m: &Model) -> Result<Vec<(Vec<StateId>, Rational)>> {
    const CAP: usize = 10;
    if m.num_states() > CAP {
        return Err(Error::InvalidInput(format!("cycle enumeration is capped at {CAP} states")));
    }
    if !m.is_markov_chain() {
        return Err(Error::InvalidInput("cycle enumeration needs a single action per state".into()));
    }
    let succ: Vec<Vec<StateId>> = m.states().map(|s| m.successors(s)).collect();
    let mut out = Vec::new();
    for root in m.states() {
        let mut path = vec![root];
        let mut on_path = vec![false; m.num_states()];
        on_path[root] = true;
        cycles_from(m, &succ, root, &mut path, &mut on_path, &mut out);
    }
    Ok(out)
}

fn cycles_from(
    m: &Model,
    succ: &[Vec<StateId>],
    root: StateId,
    path: &mut Vec<StateId>,
    on_path: &mut [bool],
    out: &mut Vec<(Vec<StateId>, Rational)>,
) {
    let last = *path.last().unwrap();
    for &t in &succ[last] {
        if t == root {
            let product = path.iter().fold(Rational::one(), |acc, &s| acc * m.reward(s));
            out.push((path.clone(), product));
        } else if t > root && !on_path[t] {
            on_path[t] = true;
            path.push(t);
            cycles_from(m, succ, root, path, on_path, out);
            path.pop();
            on_path[t] = false;
        }
    }
}

/// Largest `prod |A(s)|` accepted by the MD enumeration.
pub const MD_ENUMERATION_CAP: u128 = 1 << 16;

/// Calls `f` on every MD-scheduler of `m` in lexicographic order.
pub fn for_each_md_scheduler(m: &Model, mut f: impl FnMut(&MdScheduler) -> Result<()>) -> Result<()> {
    let total = m
        .states()
        .try_fold(1u128, |acc, s| acc.checked_mul(m.actions(s).len() as u128))
        .unwrap_or(u128::MAX);
    if total > MD_ENUMERATION_CAP {
        return Err(Error::SchedulerBudget {
            required: total,
            budget: MD_ENUMERATION_CAP,
        });
    }
    let n = m.num_states();
    let mut idx = vec![0; n];
    loop {
        f(&MdScheduler::new(m, idx.clone())?)?;
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            idx[i] += 1;
            if idx[i] < m.actions(i).len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Best initial-state value over MD-schedulers accepted by `admissible`
/// (given the induced chain), with the first scheduler attaining it.
pub fn enumerate_md_best(
    m: &Model,
    mode: AnalysisMode,
    admissible: impl Fn(&Model, &MdScheduler) -> bool,
) -> Result<Option<(ExtendedValue, MdScheduler)>> {
    let mut best: Option<(ExtendedValue, MdScheduler)> = None;
    for_each_md_scheduler(m, |sched| {
        let chain = m.induced_chain(sched);
        if !admissible(&chain, sched) {
            return Ok(());
        }
        let v = mc_values(&chain, mode)?.values[m.initial()].clone();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, sched.clone()));
        }
        Ok(())
    })?;
    Ok(best)
}

/// Maximum over all MD-schedulers of the induced chain's value at the
/// initial state.
pub fn enumerate_md_values(m: &Model, mode: AnalysisMode) -> Result<ExtendedValue> {
    Ok(enumerate_md_best(m, mode, |_, _| true)?.expect("every model has a scheduler").0)
}

/// Exact iterates `T^0(0), ..., T^n(0)` of the Bellman operator
/// `T(x)_s = max_a r(s) sum_t P(s, a, t) x_t`, with absorbing states held at
/// 1 (reward 1) or 0 (reward below 1).
pub fn value_iteration_oracle(m: &Model, n: usize) -> Result<Vec<Vec<Rational>>> {
    let fixed: Vec<Option<Rational>> = m
        .states()
        .map(|s| {
            if !m.is_absorbing(s) {
                return Ok(None);
            }
            match m.reward(s).cmp(&Rational::one()) {
                Ordering::Less => Ok(Some(Rational::zero())),
                Ordering::Equal => Ok(Some(Rational::one())),
                Ordering::Greater => Err(Error::Precondition(format!(
                    "absorbing state `{}` has reward above 1",
                    m.name(s)
                ))),
            }
        })
        .collect::<Result<_>>()?;
    let mut out = vec![vec![Rational::zero(); m.num_states()]];
    for _ in 0..n {
        let x = out.last().unwrap();
        let next = m
            .states()
            .map(|s| match &fixed[s] {
                Some(v) => v.clone(),
                None => m
                    .actions(s)
                    .iter()
                    .map(|a| m.reward(s) * a.successors.iter().fold(Rational::zero(), |acc, (t, p)| acc + p * &x[*t]))
                    .max()
                    .unwrap(),
            })
            .collect();
        out.push(next);
    }
    Ok(out)
}

/// Rewards drawn by the random generators.
pub fn reward_palette() -> [Rational; 5] {
    [ratio(1, 3), ratio(1, 2), int(1), int(2), int(3)]
}

fn random_distribution<R: Rng>(rng: &mut R, targets: &[StateId]) -> Vec<(StateId, Rational)> {
    let weights: Vec<i64> = targets.iter().map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    targets.iter().zip(weights).map(|(&t, w)| (t, ratio(w, total))).collect()
}

/// Between `lo` and `hi` distinct members of `pool`, sorted.
fn pick_distinct<R: Rng>(rng: &mut R, pool: &[StateId], lo: usize, hi: usize) -> Vec<StateId> {
    let k = rng.random_range(lo..=hi);
    let mut pool = pool.to_vec();
    let mut out = Vec::new();
    while out.len() < k && !pool.is_empty() {
        out.push(pool.swap_remove(rng.random_range(0..pool.len())));
    }
    out.sort_unstable();
    out
}

/// Random MDP in which every scheduler reaches a sink almost surely: each
/// action either moves strictly forward or reaches a sink with positive
/// probability. Two sinks, `win` (reward 1) and `lose` (reward 1/3), count
/// towards `max_states`.
pub fn random_absorbing_mdp<R: Rng>(rng: &mut R, max_states: usize, max_actions: usize) -> Model {
    let palette = reward_palette();
    let n = rng.random_range(1..=max_states.saturating_sub(2).max(1));
    let mut b = ModelBuilder::new();
    for i in 0..n {
        b.add_state(format!("s{i}"), palette[rng.random_range(0..palette.len())].clone());
    }
    let win = b.add_state("win", int(1));
    let lose = b.add_state("lose", ratio(1, 3));
    for s in 0..n {
        let k = rng.random_range(1..=max_actions.max(1));
        for a in 0..k {
            let forward: Vec<StateId> = (s + 1..n).collect();
            let succ = if !forward.is_empty() && rng.random_bool(0.4) {
                let picked = pick_distinct(rng, &forward, 1, 2);
                random_distribution(rng, &picked)
            } else {
                let all: Vec<StateId> = (0..n).collect();
                let mut picked = pick_distinct(rng, &all, 0, 2);
                picked.push(if rng.random_bool(0.7) { win } else { lose });
                random_distribution(rng, &picked)
            };
            b.add_action(s, format!("a{a}"), succ);
        }
    }
    b.add_action(win, "loop", vec![(win, int(1))]);
    b.add_action(lose, "loop", vec![(lose, int(1))]);
    b.build(0).unwrap()
}

/// Level rewards whose product is 1, for `p` levels.
fn unit_level_rewards<R: Rng>(rng: &mut R, p: usize) -> Vec<Rational> {
    let palette = reward_palette();
    let mut g: Vec<Rational> = (0..p - 1).map(|_| palette[rng.random_range(0..palette.len())].clone()).collect();
    let prod = g.iter().fold(Rational::one(), |acc, r| acc * r);
    g.push(Rational::one() / prod);
    g
}

/// Random strongly connected chain on at most `max_states` states. Half
/// of the draws have only cycles of product 1 (rewards constant on levels
/// that every edge advances by one); the other half perturb one reward.
pub fn random_strongly_connected_chain<R: Rng>(rng: &mut R, max_states: usize) -> Model {
    let p = rng.random_range(1..=3.min(max_states));
    let n = p * rng.random_range(1..=(max_states / p));
    let level = |s: StateId| s % p;
    let mut rewards: Vec<Rational> = {
        let g = unit_level_rewards(rng, p);
        (0..n).map(|s| g[level(s)].clone()).collect()
    };
    if rng.random_bool(0.5) {
        let s = rng.random_range(0..n);
        rewards[s] *= int(2);
    }
    let mut b = ModelBuilder::new();
    for (s, r) in rewards.into_iter().enumerate() {
        b.add_state(format!("c{s}"), r);
    }
    for s in 0..n {
        let ring = (s + 1) % n;
        let candidates: Vec<StateId> = (0..n).filter(|&t| level(t) == (level(s) + 1) % p && t != ring).collect();
        let mut picked = pick_distinct(rng, &candidates, 0, 2);
        picked.push(ring);
        picked.sort_unstable();
        b.add_action(s, "a", random_distribution(rng, &picked));
    }
    b.build(0).unwrap()
}

/// Random MDP containing a BSCC whose cycles all have product 1 (states
/// `b0..`) plus transient states and two sinks. BSCC states get extra exit
/// actions; transient actions move forward or leak to a sink, so the BSCC
/// and the sinks are the only end components.
pub fn random_nongambling_instance<R: Rng>(rng: &mut R, max_states: usize) -> Model {
    let palette = reward_palette();
    let k = rng.random_range(2..=3.min(max_states.saturating_sub(2)).max(2));
    // The ring visits every level equally often only if p divides k.
    let divisors: Vec<usize> = (1..=k).filter(|d| k % d == 0).collect();
    let p = divisors[rng.random_range(0..divisors.len())];
    let g = unit_level_rewards(rng, p);
    let transient = rng.random_range(0..=max_states.saturating_sub(k + 2));
    let mut b = ModelBuilder::new();
    for i in 0..k {
        b.add_state(format!("b{i}"), g[i % p].clone());
    }
    for i in 0..transient {
        b.add_state(format!("x{i}"), palette[rng.random_range(0..palette.len())].clone());
    }
    let win = b.add_state("win", int(1));
    let lose = b.add_state("lose", ratio(1, 3));
    let outside: Vec<StateId> = (k..k + transient).chain([win, lose]).collect();
    for s in 0..k {
        let ring = (s + 1) % k;
        let mut succ = vec![ring];
        let extra: Vec<StateId> = (0..k).filter(|&t| t % p == (s % p + 1) % p && t != ring).collect();
        succ.extend(pick_distinct(rng, &extra, 1, 1));
        succ.sort_unstable();
        b.add_action(s, "stay", random_distribution(rng, &succ));
        for e in 0..rng.random_range(0..=1) {
            let picked = pick_distinct(rng, &outside, 1, 2);
            b.add_action(s, format!("exit{e}"), random_distribution(rng, &picked));
        }
    }
    for i in 0..transient {
        let s = k + i;
        for a in 0..rng.random_range(1..=2) {
            let forward: Vec<StateId> = (s + 1..k + transient).collect();
            let succ = if !forward.is_empty() && rng.random_bool(0.4) {
                pick_distinct(rng, &forward, 1, 1)
            } else {
                let any: Vec<StateId> = (0..k + transient).collect();
                let mut picked = pick_distinct(rng, &any, 0, 1);
                picked.push(if rng.random_bool(0.6) { win } else { lose });
                picked
            };
            b.add_action(s, format!("a{a}"), random_distribution(rng, &succ));
        }
    }
    b.add_action(win, "loop", vec![(win, int(1))]);
    b.add_action(lose, "loop", vec![(lose, int(1))]);
    let initial = if transient > 0 && rng.random_bool(0.5) { k } else { 0 };
    b.build(initial).unwrap()
}
