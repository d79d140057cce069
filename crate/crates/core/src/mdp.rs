//! Optimal expected multiplicative rewards in MDPs.
//!
//! Reward-0 states become sinks. Every maximal end component is classified
//! by the best logarithmic mean payoff a memoryless scheduler reaches in
//! it. Zero-payoff components are reduced by repeatedly replacing a
//! non-gambling max-BSCC with a spider (a star around a center state that
//! re-homes all exits). What remains either forces an infinite value or
//! satisfies the preconditions of LP1, whose optimum gives the values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, weighted_log_sign_with, CsriConfig, Rational, Sign};
use crate::graph::{self, Component};
use crate::linalg::{lp_solve, solve_square, LinearProgram, LinearSystem, LpOutcome};
use crate::mc::{self, one_cycle_analysis, stationary_under, CycleStructure, InfiniteWitness, WitnessKind};
use crate::model::{
    absorb_zero_rewards, invert_rewards, Action, ActionId, AnalysisMode, ExtendedValue, MdScheduler, Model, StateId,
};

/// Resource caps of the exact pipeline.
#[derive(Debug, Clone)]
pub struct Budgets {
    /// Largest number of MD-schedulers enumerated inside one end component.
    pub max_schedulers: u128,
    pub csri: CsriConfig,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_schedulers: 1 << 20,
            csri: CsriConfig::default(),
        }
    }
}

/// `sum coeff * log reward` kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolicLogValue {
    pub terms: Vec<(Rational, Rational)>,
}

impl SymbolicLogValue {
    pub fn minus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(c, r)| (-c, r.clone())));
        Self { terms }
    }

    pub fn sign(&self, config: &CsriConfig) -> Result<Sign> {
        weighted_log_sign_with(&self.terms, config)
    }
}

/// Mean payoff of an induced BSCC; `None` stands for `-inf` (a reward-0
/// state inside).
type MeanPayoff = Option<SymbolicLogValue>;

fn compare_payoff(a: &MeanPayoff, b: &MeanPayoff, config: &CsriConfig) -> Result<Ordering> {
    Ok(match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => match x.minus(y).sign(config)? {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        },
    })
}

/// A bottom SCC of a chain induced by an MD-scheduler, given by the action
/// played in each of its states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bscc {
    pub actions: BTreeMap<StateId, ActionId>,
}

impl Bscc {
    pub fn states(&self) -> Vec<StateId> {
        self.actions.keys().copied().collect()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.actions.contains_key(&s)
    }
}

#[derive(Debug, Clone)]
pub struct MecClassification {
    /// Sign of the best logarithmic mean payoff over MD-schedulers.
    pub sign: Sign,
    /// Actions lying in a BSCC of some maximizing scheduler.
    pub a_max: BTreeMap<StateId, Vec<ActionId>>,
    /// One maximizing BSCC.
    pub best: Bscc,
    pub gambling_bsccs: Vec<Bscc>,
    pub nongambling_bsccs: Vec<Bscc>,
    /// A single absorbing state, classified by its reward alone.
    pub degenerate: bool,
    pub schedulers: u128,
}

fn mean_payoff(m: &Model, b: &Bscc) -> Result<MeanPayoff> {
    let states = b.states();
    if states.iter().any(|&s| m.reward(s).is_zero()) {
        return Ok(None);
    }
    let theta = stationary_under(m, &states, |s| b.actions[&s])?;
    Ok(Some(SymbolicLogValue {
        terms: theta.into_iter().zip(&states).map(|(w, &s)| (w, m.reward(s).clone())).collect(),
    }))
}

/// Enumerates the MD-schedulers over the internal actions of `mec` and
/// classifies it by the best mean payoff of any induced BSCC.
pub fn mec_log_mp_classify(m: &Model, mec: &Component, budgets: &Budgets) -> Result<MecClassification> {
    if mec.len() == 1 && m.is_absorbing(mec.states[0]) {
        let s = mec.states[0];
        let r = m.reward(s);
        let sign = if r.is_zero() {
            Sign::Negative
        } else {
            Sign::of_ordering(r.cmp(&Rational::one()))
        };
        return Ok(MecClassification {
            sign,
            a_max: BTreeMap::from([(s, (0..m.actions(s).len()).collect())]),
            best: Bscc {
                actions: BTreeMap::from([(s, 0)]),
            },
            gambling_bsccs: Vec::new(),
            nongambling_bsccs: Vec::new(),
            degenerate: true,
            schedulers: 1,
        });
    }

    let states = &mec.states;
    let k = states.len();
    let choices: Vec<&Vec<ActionId>> = states.iter().map(|s| &mec.internal_actions[s]).collect();
    let total = choices
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    if total > budgets.max_schedulers {
        return Err(Error::SchedulerBudget {
            required: total,
            budget: budgets.max_schedulers,
        });
    }
    let local: HashMap<StateId, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let mut seen: HashSet<Bscc> = HashSet::new();
    let mut found: Vec<(Bscc, MeanPayoff)> = Vec::new();
    let mut idx = vec![0usize; k];
    let active = vec![true; k];
    'enumerate: loop {
        let adj: Vec<Vec<usize>> = (0..k)
            .map(|i| m.action(states[i], choices[i][idx[i]]).targets().map(|t| local[&t]).collect())
            .collect();
        for comp in graph::tarjan(&adj, &active) {
            let mut inside = vec![false; k];
            for &i in &comp {
                inside[i] = true;
            }
            if comp.iter().all(|&i| adj[i].iter().all(|&j| inside[j])) {
                let key = Bscc {
                    actions: comp.iter().map(|&i| (states[i], choices[i][idx[i]])).collect(),
                };
                if seen.insert(key.clone()) {
                    let v = mean_payoff(m, &key)?;
                    found.push((key, v));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                break 'enumerate;
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }

    let mut best: Vec<usize> = vec![0];
    for j in 1..found.len() {
        match compare_payoff(&found[j].1, &found[best[0]].1, &budgets.csri)? {
            Ordering::Greater => best = vec![j],
            Ordering::Equal => best.push(j),
            Ordering::Less => {}
        }
    }
    let sign = match &found[best[0]].1 {
        None => Sign::Negative,
        Some(v) => v.sign(&budgets.csri)?,
    };
    let mut a_max: BTreeMap<StateId, BTreeSet<ActionId>> = BTreeMap::new();
    for &j in &best {
        for (&s, &a) in &found[j].0.actions {
            a_max.entry(s).or_default().insert(a);
        }
    }
    let a_max: BTreeMap<StateId, Vec<ActionId>> = a_max.into_iter().map(|(s, a)| (s, a.into_iter().collect())).collect();

    let mut gambling_bsccs = Vec::new();
    let mut nongambling_bsccs = Vec::new();
    if sign == Sign::Zero {
        let mut mask: graph::ActionMask = m.states().map(|s| vec![false; m.actions(s).len()]).collect();
        for (&s, acts) in &a_max {
            for &a in acts {
                mask[s][a] = true;
            }
        }
        let mut astar: BTreeMap<StateId, Vec<ActionId>> = BTreeMap::new();
        for ec in graph::mecs_with_mask(m, &mask) {
            astar.extend(compute_astar(m, &ec, &budgets.csri)?);
        }
        for &j in &best {
            let b = &found[j].0;
            let clean = b
                .actions
                .iter()
                .all(|(s, a)| astar.get(s).is_some_and(|acts| acts.contains(a)));
            if clean {
                nongambling_bsccs.push(b.clone());
            } else {
                gambling_bsccs.push(b.clone());
            }
        }
    }

    Ok(MecClassification {
        sign,
        a_max,
        best: found[best[0]].0.clone(),
        gambling_bsccs,
        nongambling_bsccs,
        degenerate: false,
        schedulers: total,
    })
}

/// Actions all of whose successors share the same expected log-reward sum
/// until the first visit of a fixed state `x`. `ec` must be strongly
/// connected under its internal actions with every scheduler at mean
/// payoff zero.
pub fn compute_astar(m: &Model, ec: &Component, config: &CsriConfig) -> Result<BTreeMap<StateId, Vec<ActionId>>> {
    compute_astar_from(m, ec, ec.states[0], config)
}

/// [`compute_astar`] with an explicit reference state.
pub fn compute_astar_from(
    m: &Model,
    ec: &Component,
    x: StateId,
    config: &CsriConfig,
) -> Result<BTreeMap<StateId, Vec<ActionId>>> {
    if !ec.contains(x) {
        return Err(Error::Precondition(format!("`{}` outside the end component", m.name(x))));
    }
    // Scheduler reaching x almost surely inside the component.
    let mut reached = BTreeMap::from([(x, usize::MAX)]);
    while reached.len() < ec.len() {
        let before = reached.len();
        for &s in &ec.states {
            if reached.contains_key(&s) {
                continue;
            }
            if let Some(&a) = ec.internal_actions[&s]
                .iter()
                .find(|&&a| m.action(s, a).targets().any(|t| reached.contains_key(&t)))
            {
                reached.insert(s, a);
            }
        }
        if reached.len() == before {
            return Err(Error::Precondition("component is not strongly connected".into()));
        }
    }
    let others: Vec<StateId> = ec.states.iter().copied().filter(|&s| s != x).collect();
    let pos: HashMap<StateId, usize> = others.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = others.len();
    let mut matrix = vec![vec![Rational::zero(); k]; k];
    for (i, &s) in others.iter().enumerate() {
        matrix[i][i] += Rational::one();
        for (t, p) in &m.action(s, reached[&s]).successors {
            if let Some(&j) = pos.get(t) {
                matrix[i][j] -= p;
            }
        }
    }
    // Column w of (I - Q)^-1 holds the expected visits of w before x.
    let mut visits = vec![vec![Rational::zero(); k]; k];
    for w in 0..k {
        let mut rhs = vec![Rational::zero(); k];
        rhs[w] = Rational::one();
        let col = solve_square(&LinearSystem {
            matrix: matrix.clone(),
            rhs,
        })?
        .unique()
        .ok_or_else(|| Error::Internal("visit-time system is singular".into()))?;
        for u in 0..k {
            visits[u][w] = col[u].clone();
        }
    }
    let g = |u: StateId| -> SymbolicLogValue {
        match pos.get(&u) {
            None => SymbolicLogValue::default(),
            Some(&i) => SymbolicLogValue {
                terms: (0..k)
                    .filter(|&w| !visits[i][w].is_zero())
                    .map(|w| (visits[i][w].clone(), m.reward(others[w]).clone()))
                    .collect(),
            },
        }
    };
    let mut out = BTreeMap::new();
    for &s in &ec.states {
        let mut keep = Vec::new();
        for &a in &ec.internal_actions[&s] {
            let targets: Vec<StateId> = m.action(s, a).targets().collect();
            let first = g(targets[0]);
            let mut same = true;
            for &t in &targets[1..] {
                if g(t).minus(&first).sign(config)? != Sign::Zero {
                    same = false;
                    break;
                }
            }
            if same {
                keep.push(a);
            }
        }
        out.insert(s, keep);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxBsccKind {
    Gambling,
    NonGambling,
}

/// Non-gambling iff every action of the BSCC is in A*.
pub fn classify_max_bscc(bscc: &Bscc, a_star: &BTreeMap<StateId, Vec<ActionId>>) -> MaxBsccKind {
    let clean = bscc
        .actions
        .iter()
        .all(|(s, a)| a_star.get(s).is_some_and(|acts| acts.contains(a)));
    if clean {
        MaxBsccKind::NonGambling
    } else {
        MaxBsccKind::Gambling
    }
}

/// Meaning of an action of the spider center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpiderChoice {
    /// Stay in the BSCC forever.
    Stay,
    /// An action of the center that leaves the BSCC.
    Own(ActionId),
    /// Walk to `state` inside the BSCC, then play `action`.
    Tau { state: StateId, action: ActionId },
}

#[derive(Debug, Clone)]
pub struct SpiderRecord {
    pub bscc: Bscc,
    pub center: StateId,
    pub center_actions: Vec<SpiderChoice>,
    /// Limit value at the center when staying.
    pub stay_value: Option<Rational>,
    pub states_before: usize,
}

impl SpiderRecord {
    /// Maps a scheduler of the transformed model to the model before it.
    pub fn translate_back(&self, after: &[ActionId]) -> Vec<ActionId> {
        let mut out = after[..self.states_before].to_vec();
        for (&s, &a) in &self.bscc.actions {
            out[s] = a;
        }
        match self.center_actions[after[self.center]] {
            SpiderChoice::Stay => {}
            SpiderChoice::Own(a) => out[self.center] = a,
            SpiderChoice::Tau { state, action } => out[state] = action,
        }
        out
    }
}

fn unique_label(taken: &[Action], base: String) -> String {
    let mut label = base;
    while taken.iter().any(|a| a.label == label) {
        label.push('\'');
    }
    label
}

/// Replaces a BSCC whose cycles all have product 1 by a star around its
/// lowest-index original state. With `stay = Some(mode)` the center gets an
/// extra action realizing the limit of staying forever (max or min of the
/// relative products, by mode) via a shared reward-1 sink.
pub fn spider_remove(m: &Model, bscc: &Bscc, stay: Option<AnalysisMode>) -> Result<(Model, SpiderRecord)> {
    let states = bscc.states();
    let center = states
        .iter()
        .copied()
        .find(|&s| !m.is_auxiliary(s))
        .ok_or_else(|| Error::Precondition("component has no original state".into()))?;
    let mut choice = vec![0; m.num_states()];
    for (&s, &a) in &bscc.actions {
        choice[s] = a;
    }
    let chain = m.induced_chain(&MdScheduler::new(m, choice)?);
    // table[t] = R(center, t)
    let table = match one_cycle_analysis(&chain, &states, center)? {
        CycleStructure::AllOneCycles { table, .. } => table,
        CycleStructure::NCycleWitness(cycle) => {
            let names: Vec<&str> = cycle.iter().map(|&s| m.name(s)).collect();
            return Err(Error::Precondition(format!("cycle {} has product != 1", names.join(" "))));
        }
        CycleStructure::NotApplicable => return Err(Error::Internal("cycle analysis not applicable".into())),
    };
    let rc = m.reward(center).clone();
    let mut out = m.clone();
    let mut actions: Vec<Action> = Vec::new();
    let mut meaning = Vec::new();

    for (a, act) in m.actions(center).iter().enumerate() {
        if a != bscc.actions[&center] {
            actions.push(act.clone());
            meaning.push(SpiderChoice::Own(a));
        }
    }
    for &t in &states {
        if t == center {
            continue;
        }
        for (a, act) in m.actions(t).iter().enumerate() {
            if a == bscc.actions[&t] {
                continue;
            }
            let reward = &table[&t] * m.reward(t) / &rc;
            let name = out.fresh_name(&format!("{}~{}", m.name(t), act.label));
            let mid = out.push_auxiliary(name, reward);
            out.set_actions(mid, vec![Action::new(act.label.clone(), act.successors.clone())]);
            let label = unique_label(&actions, format!("{}:{}", m.name(t), act.label));
            actions.push(Action::new(label, vec![(mid, Rational::one())]));
            meaning.push(SpiderChoice::Tau { state: t, action: a });
        }
    }
    let stay_value = match stay {
        None => None,
        Some(mode) => {
            let v = match mode {
                AnalysisMode::Sup => table.values().max(),
                AnalysisMode::Inf => table.values().min(),
            }
            .unwrap()
            .clone();
            let bottom = match out
                .states()
                .find(|&s| out.is_auxiliary(s) && out.is_absorbing(s) && out.reward(s).is_one())
            {
                Some(b) => b,
                None => {
                    let b = out.push_auxiliary(out.fresh_name("bottom"), Rational::one());
                    out.set_actions(b, vec![Action::new("loop", vec![(b, Rational::one())])]);
                    b
                }
            };
            let name = out.fresh_name(&format!("{}~stay", m.name(center)));
            let mid = out.push_auxiliary(name, &v / &rc);
            out.set_actions(mid, vec![Action::new("stay", vec![(bottom, Rational::one())])]);
            let label = unique_label(&actions, "stay".into());
            actions.push(Action::new(label, vec![(mid, Rational::one())]));
            meaning.push(SpiderChoice::Stay);
            Some(v)
        }
    };
    if actions.is_empty() {
        return Err(Error::Precondition("component has no exit".into()));
    }
    for &t in &states {
        if t == center {
            continue;
        }
        // R(t, center) / r(t)
        let reward = Rational::one() / &table[&t] / m.reward(t);
        let name = out.fresh_name(&format!("{}~center", m.name(t)));
        let mid = out.push_auxiliary(name, reward);
        out.set_actions(mid, vec![Action::new("center", vec![(center, Rational::one())])]);
        out.set_actions(t, vec![Action::new("center", vec![(mid, Rational::one())])]);
    }
    out.set_actions(center, actions);
    Ok((
        out,
        SpiderRecord {
            bscc: bscc.clone(),
            center,
            center_actions: meaning,
            stay_value,
            states_before: m.num_states(),
        },
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct MecVerdict {
    pub states: Vec<String>,
    pub sign: String,
    pub verdict: String,
    pub schedulers: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpiderLogEntry {
    pub center: String,
    pub states: Vec<String>,
    pub stay_value: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    #[default]
    Skipped,
    Optimal,
    RefinedAfterInfeasible,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PipelineReport {
    pub zeroed: Vec<String>,
    pub mec_verdicts: Vec<MecVerdict>,
    pub spider_log: Vec<SpiderLogEntry>,
    pub spider_applications: usize,
    pub spider_bound: usize,
    pub collapsed: Vec<Vec<String>>,
    pub lp: LpStatus,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Values of the input model's states.
    pub values: Vec<ExtendedValue>,
    /// Present when the initial value is finite, and for infinite values
    /// when some MD-scheduler attains them.
    pub scheduler: Option<MdScheduler>,
    pub witness: Option<InfiniteWitness>,
    pub report: PipelineReport,
}

impl PipelineResult {
    pub fn initial_value(&self, m: &Model) -> &ExtendedValue {
        &self.values[m.initial()]
    }
}

fn sign_name(s: Sign) -> &'static str {
    match s {
        Sign::Negative => "negative",
        Sign::Zero => "zero",
        Sign::Positive => "positive",
    }
}

pub(crate) struct Reduction {
    pub work: Model,
    pub records: Vec<SpiderRecord>,
    pub classes: Vec<(Component, MecClassification)>,
}

impl Reduction {
    /// Maps a scheduler of the reduced model back to the model it started from.
    pub fn translate_back(&self, choice: &[ActionId]) -> Vec<ActionId> {
        let mut c = choice.to_vec();
        for rec in self.records.iter().rev() {
            c = rec.translate_back(&c);
        }
        c
    }
}

/// Classifies all MECs and spider-removes non-gambling max-BSCCs until none
/// is left.
pub(crate) fn reduce(
    m: &Model,
    stay: Option<AnalysisMode>,
    budgets: &Budgets,
    report: &mut PipelineReport,
) -> Result<Reduction> {
    let bound = m.total_actions();
    report.spider_bound = bound;
    let mut work = m.clone();
    let mut records: Vec<SpiderRecord> = Vec::new();
    loop {
        let mut classes = Vec::new();
        let mut chosen = None;
        for mec in graph::mecs(&work) {
            let cls = mec_log_mp_classify(&work, &mec, budgets)?;
            if chosen.is_none() && cls.sign == Sign::Zero {
                chosen = cls.nongambling_bsccs.first().cloned();
            }
            classes.push((mec, cls));
        }
        let Some(bscc) = chosen else {
            report.spider_applications = records.len();
            return Ok(Reduction { work, records, classes });
        };
        if records.len() >= bound {
            return Err(Error::Internal(format!("spider applications exceed the bound {bound}")));
        }
        let (next, rec) = spider_remove(&work, &bscc, stay)?;
        report.spider_log.push(SpiderLogEntry {
            center: work.name(rec.center).to_string(),
            states: bscc.states().iter().map(|&s| work.name(s).to_string()).collect(),
            stay_value: rec.stay_value.as_ref().map(format_rational),
        });
        work = next;
        records.push(rec);
    }
}

fn absorbing_value(m: &Model, s: StateId) -> Result<Rational> {
    match m.reward(s).cmp(&Rational::one()) {
        Ordering::Less => Ok(Rational::zero()),
        Ordering::Equal => Ok(Rational::one()),
        Ordering::Greater => Err(Error::Precondition(format!("absorbing state `{}` has reward above 1", m.name(s)))),
    }
}

/// Least solution of the LP1 constraints over `vars`, with every other
/// successor's value fixed by `known` (finite). `None` if infeasible.
fn lp1_over(m: &Model, vars: &[StateId], known: &[Option<ExtendedValue>]) -> Result<Option<Vec<Rational>>> {
    let pos: HashMap<StateId, usize> = vars.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = vars.len();
    let mut lp = LinearProgram::new(vec![Rational::one(); n]);
    for (i, &s) in vars.iter().enumerate() {
        let mut unit = vec![Rational::zero(); n];
        unit[i] = Rational::one();
        if m.is_absorbing(s) {
            lp.add_equality(unit, absorbing_value(m, s)?);
            continue;
        }
        let r = m.reward(s);
        for act in m.actions(s) {
            let mut row = unit.clone();
            let mut rhs = Rational::zero();
            for (t, p) in &act.successors {
                match pos.get(t) {
                    Some(&j) => row[j] -= r * p,
                    None => {
                        let v = known[*t]
                            .as_ref()
                            .and_then(ExtendedValue::finite)
                            .ok_or_else(|| Error::Internal("LP1 row refers to an unresolved value".into()))?;
                        rhs += r * p * v;
                    }
                }
            }
            lp.add_geq(row, rhs);
        }
    }
    match lp_solve(&lp)? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Infeasible => Ok(None),
    }
}

/// Solves LP1 over the unresolved states of `known`; when infeasible,
/// resolves SCCs bottom-up, marking a component infinite when it can move
/// to an infinite state or its own LP is infeasible.
fn lp1_fill(m: &Model, known: &mut [Option<ExtendedValue>]) -> Result<LpStatus> {
    let vars: Vec<StateId> = m.states().filter(|&s| known[s].is_none()).collect();
    if vars.is_empty() {
        return Ok(LpStatus::Skipped);
    }
    if vars.iter().all(|&s| m.successors(s).iter().all(|&t| known[t].as_ref().is_none_or(|v| !v.is_infinite()))) {
        if let Some(x) = lp1_over(m, &vars, known)? {
            for (&s, v) in vars.iter().zip(x) {
                known[s] = Some(ExtendedValue::Finite(v));
            }
            return Ok(LpStatus::Optimal);
        }
    }
    let active: Vec<bool> = m.states().map(|s| known[s].is_none()).collect();
    let adj: Vec<Vec<StateId>> = m.states().map(|s| m.successors(s)).collect();
    for comp in graph::tarjan(&adj, &active) {
        let feeds_infinity = comp
            .iter()
            .any(|&s| adj[s].iter().any(|&t| known[t].as_ref().is_some_and(ExtendedValue::is_infinite)));
        let solved = if feeds_infinity { None } else { lp1_over(m, &comp, known)? };
        match solved {
            Some(x) => {
                for (&s, v) in comp.iter().zip(x) {
                    known[s] = Some(ExtendedValue::Finite(v));
                }
            }
            None => {
                for &s in &comp {
                    known[s] = Some(ExtendedValue::Infinite);
                }
            }
        }
    }
    Ok(LpStatus::RefinedAfterInfeasible)
}

/// LP1 on a model whose non-absorbing end components all have negative
/// mean payoff and whose absorbing states have rewards at most 1.
pub fn solve_lp1(m: &Model) -> Result<Vec<ExtendedValue>> {
    Ok(solve_lp1_status(m)?.0)
}

pub(crate) fn solve_lp1_status(m: &Model) -> Result<(Vec<ExtendedValue>, LpStatus)> {
    let mut known = vec![None; m.num_states()];
    let status = lp1_fill(m, &mut known)?;
    Ok((known.into_iter().map(|v| v.expect("assigned")).collect(), status))
}

fn is_tight(m: &Model, values: &[ExtendedValue], s: StateId, a: ActionId) -> bool {
    let Some(x) = values[s].finite() else { return false };
    let mut sum = Rational::zero();
    for (t, p) in &m.action(s, a).successors {
        match values[*t].finite() {
            Some(v) => sum += p * v,
            None => return false,
        }
    }
    *x == m.reward(s) * sum
}

/// Picks, outward from the reward-1 sinks, the lowest-index tight action
/// that moves closer to a sink. Value-0 and infinite states play action 0.
pub fn extract_md_scheduler(m: &Model, values: &[ExtendedValue]) -> Result<MdScheduler> {
    let n = m.num_states();
    let positive = |s: StateId| values[s].finite().is_some_and(|v| !v.is_zero());
    let mut choice = vec![0; n];
    let mut done: Vec<bool> = (0..n).map(|s| positive(s) && m.is_absorbing(s)).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if done[s] || !positive(s) {
                continue;
            }
            if let Some(a) = (0..m.actions(s).len())
                .find(|&a| is_tight(m, values, s, a) && m.action(s, a).targets().any(|t| done[t]))
            {
                choice[s] = a;
                done[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(s) = (0..n).find(|&s| positive(s) && !done[s]) {
        return Err(Error::Internal(format!("no tight action leads `{}` towards a sink", m.name(s))));
    }
    MdScheduler::new(m, choice)
}

/// Actions of `bscc`, and elsewhere the first action that can move
/// closer to it.
fn attractor_choice(m: &Model, bscc: &Bscc) -> Vec<ActionId> {
    let n = m.num_states();
    let mut choice = vec![0; n];
    let mut done = vec![false; n];
    for (&s, &a) in &bscc.actions {
        choice[s] = a;
        done[s] = true;
    }
    let mut queue: VecDeque<StateId> = bscc.states().into();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in m.states() {
        for t in m.successors(s) {
            preds[t].push(s);
        }
    }
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if done[s] {
                continue;
            }
            if let Some(a) = m.actions(s).iter().position(|act| act.targets().any(|u| done[u])) {
                choice[s] = a;
                done[s] = true;
                queue.push_back(s);
            }
        }
    }
    choice
}

pub fn mdp_values(m: &Model, mode: AnalysisMode) -> Result<PipelineResult> {
    mdp_values_with(m, mode, &Budgets::default())
}

pub fn mdp_values_with(m: &Model, mode: AnalysisMode, budgets: &Budgets) -> Result<PipelineResult> {
    let (absorbed, zeroed) = absorb_zero_rewards(m);
    let mut report = PipelineReport {
        zeroed: zeroed.iter().map(|&s| m.name(s).to_string()).collect(),
        ..Default::default()
    };
    let red = reduce(&absorbed, Some(mode), budgets, &mut report)?;
    let mut work = red.work.clone();
    let n = work.num_states();
    let n0 = m.num_states();
    let init = m.initial();

    let mut sources = vec![false; n];
    let mut source_kind: Vec<Option<(WitnessKind, usize)>> = vec![None; n];
    let mut collapse = Vec::new();
    for (i, (mec, cls)) in red.classes.iter().enumerate() {
        let kind = match (cls.sign, cls.degenerate) {
            (Sign::Positive, _) => Some(WitnessKind::PositiveMec),
            (Sign::Zero, false) => match mode {
                AnalysisMode::Sup => Some(WitnessKind::GamblingBscc),
                AnalysisMode::Inf => {
                    let reach = work.reachable_from(mec.states[0]);
                    let exit = work
                        .states()
                        .any(|t| reach[t] && work.is_absorbing(t) && work.reward(t).is_one());
                    if exit {
                        Some(WitnessKind::GambleAndExit)
                    } else {
                        collapse.push(i);
                        None
                    }
                }
            },
            _ => None,
        };
        let verdict = match (cls.sign, cls.degenerate, kind) {
            (_, true, _) => "absorbing",
            (Sign::Zero, false, None) => "gambling, collapsed to 0",
            (Sign::Zero, false, Some(_)) => "gambling",
            _ => "",
        };
        report.mec_verdicts.push(MecVerdict {
            states: mec.states.iter().map(|&s| work.name(s).to_string()).collect(),
            sign: sign_name(cls.sign).into(),
            verdict: verdict.into(),
            schedulers: cls.schedulers.to_string(),
        });
        if let Some(k) = kind {
            for &s in &mec.states {
                sources[s] = true;
                source_kind[s] = Some((k, i));
            }
        }
    }
    let infinite = graph::reaching(&work, &sources);
    for &i in &collapse {
        let states = &red.classes[i].0.states;
        if states.iter().any(|&s| infinite[s]) {
            continue;
        }
        for &s in states {
            work.make_absorbing(s);
            work.set_reward(s, Rational::zero());
        }
        report.collapsed.push(states.iter().map(|&s| work.name(s).to_string()).collect());
    }

    let mut known: Vec<Option<ExtendedValue>> =
        (0..n).map(|s| infinite[s].then_some(ExtendedValue::Infinite)).collect();
    report.lp = lp1_fill(&work, &mut known)?;
    let work_values: Vec<ExtendedValue> = known.into_iter().map(|v| v.expect("assigned")).collect();
    let values = work_values[..n0].to_vec();

    let mut witness = None;
    let mut scheduler = None;
    if values[init].is_infinite() {
        let reach = work.reachable_from(init);
        let hit = (0..n).find(|&s| reach[s] && sources[s]).and_then(|s| source_kind[s]);
        match hit {
            Some((kind, i)) => {
                let (mec, cls) = &red.classes[i];
                witness = Some(InfiniteWitness {
                    kind,
                    states: mec.states.iter().copied().filter(|&s| s < n0).collect(),
                    detail: match kind {
                        WitnessKind::PositiveMec => "end component with positive logarithmic mean payoff".into(),
                        WitnessKind::GamblingBscc => "zero-drift end component whose max-BSCCs all contain a cycle of product != 1".into(),
                        _ => "gamble inside the zero-drift end component until the product exceeds 4^i, then move to a reward-1 sink; no memoryless scheduler attains this".into(),
                    },
                });
                if kind != WitnessKind::GambleAndExit {
                    let choice = red.translate_back(&attractor_choice(&red.work, &cls.best));
                    let sched = MdScheduler::new(m, choice[..n0].to_vec())?;
                    if mc::mc_values(&m.induced_chain(&sched), mode)?.values[init].is_infinite() {
                        scheduler = Some(sched);
                    }
                }
            }
            None => {
                witness = Some(InfiniteWitness {
                    kind: WitnessKind::TransientDivergence,
                    states: (0..n0).filter(|&s| values[s].is_infinite() && !sources[s]).collect(),
                    detail: "LP1 has no finite solution".into(),
                });
            }
        }
    } else {
        let sched = extract_md_scheduler(&work, &work_values)?;
        let choice = red.translate_back(sched.choices());
        scheduler = Some(MdScheduler::new(m, choice[..n0].to_vec())?);
    }
    Ok(PipelineResult {
        values,
        scheduler,
        witness,
        report,
    })
}

/// Whether the optimal value at the initial state is at least `theta`.
pub fn threshold(m: &Model, mode: AnalysisMode, theta: &Rational) -> Result<bool> {
    threshold_with(m, mode, theta, &Budgets::default())
}

pub fn threshold_with(m: &Model, mode: AnalysisMode, theta: &Rational, budgets: &Budgets) -> Result<bool> {
    let r = mdp_values_with(m, mode, budgets)?;
    Ok(*r.initial_value(m) >= ExtendedValue::Finite(theta.clone()))
}

/// Minimization through reciprocal rewards: the maximal value of the
/// inverted model in the swapped mode, inverted again. Requires positive
/// rewards. The inversion is exact per path; in expectation it gives
/// `1 / max E[1/X]`, which can lie below `min E[X]`.
pub fn mdp_min_values_with(m: &Model, mode: AnalysisMode, budgets: &Budgets) -> Result<PipelineResult> {
    let inverted = invert_rewards(m)?;
    let mut r = mdp_values_with(&inverted, mode.swapped(), budgets)?;
    r.values = r.values.iter().map(ExtendedValue::reciprocal).collect();
    Ok(r)
}
