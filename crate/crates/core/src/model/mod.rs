//! Markov decision processes with per-state rational rewards.
//!
//! A [`Model`] with exactly one action per state is a Markov chain. Rewards
//! are collected when a state is left.

mod format;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Rational};

pub use format::{parse_model, serialize_model};

/// Dense 0-based state index.
pub type StateId = usize;
/// Index into a state's action list.
pub type ActionId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub label: String,
    pub successors: Vec<(StateId, Rational)>,
}

impl Action {
    pub fn new(label: impl Into<String>, successors: Vec<(StateId, Rational)>) -> Self {
        Self {
            label: label.into(),
            successors,
        }
    }

    pub fn targets(&self) -> impl Iterator<Item = StateId> + '_ {
        self.successors.iter().map(|(t, _)| *t)
    }

    pub fn is_self_loop(&self, s: StateId) -> bool {
        self.successors.len() == 1 && self.successors[0].0 == s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    names: Vec<String>,
    rewards: Vec<Rational>,
    actions: Vec<Vec<Action>>,
    auxiliary: Vec<bool>,
    initial: StateId,
}

impl Model {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn reward(&self, s: StateId) -> &Rational {
        &self.rewards[s]
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.rewards
    }

    pub fn actions(&self, s: StateId) -> &[Action] {
        &self.actions[s]
    }

    pub fn action(&self, s: StateId, a: ActionId) -> &Action {
        &self.actions[s][a]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// States introduced by transformations rather than present in the input.
    pub fn is_auxiliary(&self, s: StateId) -> bool {
        self.auxiliary[s]
    }

    pub fn is_markov_chain(&self) -> bool {
        self.actions.iter().all(|a| a.len() == 1)
    }

    /// Every enabled action returns to `s` with probability 1.
    pub fn is_absorbing(&self, s: StateId) -> bool {
        self.actions[s].iter().all(|a| a.is_self_loop(s))
    }

    /// `sum_s |A(s)|`.
    pub fn total_actions(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    /// Distinct successors of `s` over all enabled actions.
    pub fn successors(&self, s: StateId) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.actions[s].iter().flat_map(|a| a.targets()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn label_of(&self, s: StateId, a: ActionId) -> &str {
        &self.actions[s][a].label
    }

    pub fn action_by_label(&self, s: StateId, label: &str) -> Option<ActionId> {
        self.actions[s].iter().position(|a| a.label == label)
    }

    /// States reachable from `from` along any action.
    pub fn reachable_from(&self, from: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(s) = queue.pop_front() {
            for a in &self.actions[s] {
                for t in a.targets() {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// Keeps the states flagged in `keep`, dropping every action that can
    /// leave the kept set. Returns the new model and the old-to-new map.
    pub fn restrict(&self, keep: &[bool]) -> Result<(Model, Vec<Option<StateId>>)> {
        if !keep[self.initial] {
            return Err(Error::InvalidModel("restriction drops the initial state".into()));
        }
        let mut map = vec![None; self.num_states()];
        let mut next = 0;
        for s in self.states() {
            if keep[s] {
                map[s] = Some(next);
                next += 1;
            }
        }
        let mut b = ModelBuilder::new();
        for s in self.states().filter(|&s| keep[s]) {
            b.push_state(self.names[s].clone(), self.rewards[s].clone(), self.auxiliary[s]);
        }
        for s in self.states().filter(|&s| keep[s]) {
            let ns = map[s].unwrap();
            for a in &self.actions[s] {
                if a.targets().all(|t| keep[t]) {
                    let succ = a.successors.iter().map(|(t, p)| (map[*t].unwrap(), p.clone())).collect();
                    b.add_action(ns, a.label.clone(), succ);
                }
            }
        }
        let m = b.build(map[self.initial].unwrap())?;
        Ok((m, map))
    }

    /// Removes states not reachable from the initial state.
    pub fn prune_unreachable(&self) -> (Model, Vec<Option<StateId>>) {
        let keep = self.reachable_from(self.initial);
        self.restrict(&keep).expect("reachable part of a valid model is valid")
    }

    /// The Markov chain induced by an MD-scheduler.
    pub fn induced_chain(&self, sched: &MdScheduler) -> Model {
        let mut m = self.clone();
        for s in self.states() {
            m.actions[s] = vec![self.actions[s][sched.choice(s)].clone()];
        }
        m
    }

    pub fn with_initial(&self, initial: StateId) -> Model {
        let mut m = self.clone();
        m.initial = initial;
        m
    }

    pub(crate) fn set_reward(&mut self, s: StateId, r: Rational) {
        self.rewards[s] = r;
    }

    /// Replaces every action of `s` by a single self-loop.
    pub(crate) fn make_absorbing(&mut self, s: StateId) {
        let label = self.actions[s].first().map(|a| a.label.clone()).unwrap_or_else(|| "loop".into());
        self.actions[s] = vec![Action::new(label, vec![(s, Rational::one())])];
    }

    /// Appends a state flagged auxiliary. Its actions must be set before
    /// the model is used.
    pub(crate) fn push_auxiliary(&mut self, name: String, reward: Rational) -> StateId {
        self.names.push(name);
        self.rewards.push(reward);
        self.actions.push(Vec::new());
        self.auxiliary.push(true);
        self.names.len() - 1
    }

    pub(crate) fn set_actions(&mut self, s: StateId, actions: Vec<Action>) {
        self.actions[s] = actions;
    }

    /// `base`, primed until no state carries that name.
    pub(crate) fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.names.contains(&name) {
            name.push('\'');
        }
        name
    }
}

/// Incremental construction of a [`Model`]; [`ModelBuilder::build`] validates.
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    names: Vec<String>,
    rewards: Vec<Rational>,
    actions: Vec<Vec<Action>>,
    auxiliary: Vec<bool>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: impl Into<String>, reward: Rational) -> StateId {
        self.push_state(name.into(), reward, false)
    }

    pub(crate) fn push_state(&mut self, name: String, reward: Rational, auxiliary: bool) -> StateId {
        self.names.push(name);
        self.rewards.push(reward);
        self.actions.push(Vec::new());
        self.auxiliary.push(auxiliary);
        self.names.len() - 1
    }

    pub fn add_action(&mut self, s: StateId, label: impl Into<String>, successors: Vec<(StateId, Rational)>) -> ActionId {
        self.actions[s].push(Action::new(label, successors));
        self.actions[s].len() - 1
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn build(self, initial: StateId) -> Result<Model> {
        let n = self.names.len();
        if initial >= n {
            return Err(Error::InvalidModel("initial state out of range".into()));
        }
        let mut seen = HashMap::new();
        for (i, name) in self.names.iter().enumerate() {
            if let Some(j) = seen.insert(name.as_str(), i) {
                return Err(Error::InvalidModel(format!("duplicate state name `{name}` ({j} and {i})")));
            }
        }
        for s in 0..n {
            let name = &self.names[s];
            if self.rewards[s].is_negative() {
                return Err(Error::InvalidModel(format!("state `{name}` has negative reward")));
            }
            if self.actions[s].is_empty() {
                return Err(Error::InvalidModel(format!("state `{name}` has no enabled action")));
            }
            let mut labels = HashMap::new();
            for a in &self.actions[s] {
                if labels.insert(a.label.as_str(), ()).is_some() {
                    return Err(Error::InvalidModel(format!("state `{name}` has action `{}` twice", a.label)));
                }
                if a.successors.is_empty() {
                    return Err(Error::InvalidModel(format!("action `{}` of `{name}` has no successors", a.label)));
                }
                let mut total = Rational::zero();
                let mut targets: Vec<StateId> = Vec::with_capacity(a.successors.len());
                for (t, p) in &a.successors {
                    if *t >= n {
                        return Err(Error::InvalidModel(format!("action `{}` of `{name}` targets unknown state", a.label)));
                    }
                    if !p.is_positive() {
                        return Err(Error::InvalidModel(format!(
                            "action `{}` of `{name}` has non-positive probability {}",
                            a.label,
                            format_rational(p)
                        )));
                    }
                    targets.push(*t);
                    total += p;
                }
                targets.sort_unstable();
                if targets.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidModel(format!("action `{}` of `{name}` lists a target twice", a.label)));
                }
                if !total.is_one() {
                    return Err(Error::InvalidModel(format!(
                        "probabilities of action `{}` of `{name}` sum to {}",
                        a.label,
                        format_rational(&total)
                    )));
                }
            }
        }
        Ok(Model {
            names: self.names,
            rewards: self.rewards,
            actions: self.actions,
            auxiliary: self.auxiliary,
            initial,
        })
    }
}

/// Memoryless deterministic scheduler: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MdScheduler {
    choice: Vec<ActionId>,
}

impl MdScheduler {
    pub fn new(model: &Model, choice: Vec<ActionId>) -> Result<Self> {
        if choice.len() != model.num_states() {
            return Err(Error::Dimension(format!(
                "scheduler covers {} states, model has {}",
                choice.len(),
                model.num_states()
            )));
        }
        for s in model.states() {
            if choice[s] >= model.actions(s).len() {
                return Err(Error::InvalidInput(format!("action index {} not enabled in `{}`", choice[s], model.name(s))));
            }
        }
        Ok(Self { choice })
    }

    /// The scheduler choosing the first action everywhere.
    pub fn first(model: &Model) -> Self {
        Self {
            choice: vec![0; model.num_states()],
        }
    }

    pub fn choice(&self, s: StateId) -> ActionId {
        self.choice[s]
    }

    pub fn choices(&self) -> &[ActionId] {
        &self.choice
    }

    /// State name to action label.
    pub fn to_named(&self, model: &Model) -> BTreeMap<String, String> {
        model
            .states()
            .map(|s| (model.name(s).to_string(), model.label_of(s, self.choice[s]).to_string()))
            .collect()
    }

    /// Inverse of [`MdScheduler::to_named`]. States missing from the map
    /// must have a single action.
    pub fn from_named(model: &Model, named: &BTreeMap<String, String>) -> Result<Self> {
        for name in named.keys() {
            if model.state_by_name(name).is_none() {
                return Err(Error::InvalidInput(format!("scheduler names unknown state `{name}`")));
            }
        }
        let mut choice = Vec::with_capacity(model.num_states());
        for s in model.states() {
            match named.get(model.name(s)) {
                Some(label) => choice.push(model.action_by_label(s, label).ok_or_else(|| {
                    Error::InvalidInput(format!("action `{label}` not enabled in `{}`", model.name(s)))
                })?),
                None if model.actions(s).len() == 1 => choice.push(0),
                None => return Err(Error::InvalidInput(format!("scheduler has no choice for `{}`", model.name(s)))),
            }
        }
        Ok(Self { choice })
    }
}

/// A non-negative rational or `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtendedValue {
    Finite(Rational),
    Infinite,
}

impl ExtendedValue {
    pub fn zero() -> Self {
        ExtendedValue::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        ExtendedValue::Finite(Rational::one())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedValue::Infinite)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedValue::Finite(r) => Some(r),
            ExtendedValue::Infinite => None,
        }
    }

    /// `1/x` with `1/0 = inf` and `1/inf = 0`.
    pub fn reciprocal(&self) -> Self {
        match self {
            ExtendedValue::Infinite => Self::zero(),
            ExtendedValue::Finite(r) if r.is_zero() => ExtendedValue::Infinite,
            ExtendedValue::Finite(r) => ExtendedValue::Finite(r.recip()),
        }
    }

    /// Textual form used in output documents: `"p/q"` or `"inf"`.
    pub fn to_text(&self) -> String {
        match self {
            ExtendedValue::Finite(r) => format_rational(r),
            ExtendedValue::Infinite => "inf".into(),
        }
    }

    pub fn parse_text(s: &str) -> Result<Self> {
        if s.trim() == "inf" {
            Ok(ExtendedValue::Infinite)
        } else {
            crate::exactnum::parse_rational(s).map(ExtendedValue::Finite)
        }
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedValue::Infinite, ExtendedValue::Infinite) => Ordering::Equal,
            (ExtendedValue::Infinite, _) => Ordering::Greater,
            (_, ExtendedValue::Infinite) => Ordering::Less,
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Which limit of the prefix products is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisMode {
    /// `limsup` of prefix products.
    Sup,
    /// `liminf` of prefix products.
    Inf,
}

impl AnalysisMode {
    pub fn swapped(self) -> Self {
        match self {
            AnalysisMode::Sup => AnalysisMode::Inf,
            AnalysisMode::Inf => AnalysisMode::Sup,
        }
    }
}

impl fmt::Display for AnalysisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisMode::Sup => "sup",
            AnalysisMode::Inf => "inf",
        })
    }
}

/// Result of [`zero_reward_preprocess`].
#[derive(Debug, Clone)]
pub struct ZeroPreprocessed {
    pub model: Model,
    /// Names of reward-0 states, now absorbing value-0 sinks.
    pub zeroed: Vec<String>,
    /// Names of states dropped because they became unreachable.
    pub removed: Vec<String>,
}

/// Makes every reward-0 state absorbing and drops states that are no
/// longer reachable from the initial state.
pub fn zero_reward_preprocess(m: &Model) -> ZeroPreprocessed {
    let (out, zeroed) = absorb_zero_rewards(m);
    let mut zeroed: Vec<String> = zeroed.into_iter().map(|s| m.name(s).to_string()).collect();
    let (pruned, map) = out.prune_unreachable();
    let removed = m
        .states()
        .filter(|&s| map[s].is_none())
        .map(|s| m.name(s).to_string())
        .collect();
    zeroed.retain(|n| pruned.state_by_name(n).is_some());
    ZeroPreprocessed {
        model: pruned,
        zeroed,
        removed,
    }
}

/// Makes reward-0 states absorbing without pruning. Returns the zeroed
/// states.
pub(crate) fn absorb_zero_rewards(m: &Model) -> (Model, Vec<StateId>) {
    let mut out = m.clone();
    let mut zeroed = Vec::new();
    for s in m.states() {
        if m.reward(s).is_zero() {
            zeroed.push(s);
            if !(m.is_absorbing(s) && m.actions(s).len() == 1) {
                out.make_absorbing(s);
            }
        }
    }
    (out, zeroed)
}

/// Replaces every reward by its reciprocal. Minimizing on `m` equals the
/// reciprocal of maximizing on the result with the mode swapped.
pub fn invert_rewards(m: &Model) -> Result<Model> {
    let mut out = m.clone();
    for s in m.states() {
        if m.reward(s).is_zero() {
            return Err(Error::InvalidInput(format!(
                "state `{}` has reward 0; minimization needs positive rewards",
                m.name(s)
            )));
        }
        out.set_reward(s, m.reward(s).recip());
    }
    Ok(out)
}
