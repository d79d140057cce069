//! Markov chain analysis: bottom-SCC classification by the sign of the
//! logarithmic mean payoff and by cycle products, then the transient
//! system for everything else.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{weighted_log_sign, Rational, Sign};
use crate::graph;
use crate::linalg::{lp_solve, solve_square, LinearProgram, LinearSystem, LpOutcome, SquareSolution};
use crate::model::{absorb_zero_rewards, ActionId, AnalysisMode, ExtendedValue, Model, StateId};

/// Why a value is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// An end component with positive logarithmic mean payoff.
    PositiveMec,
    /// A zero-drift bottom component containing a cycle of product != 1.
    GamblingBscc,
    /// The transient system has no non-negative solution.
    TransientDivergence,
    /// Gamble in a zero-drift component until the product is large, then
    /// leave towards a reward-1 sink. Needs unbounded memory.
    GambleAndExit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfiniteWitness {
    pub kind: WitnessKind,
    pub states: Vec<StateId>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleStructure {
    /// Every cycle has product 1; holds `R(root, t)` for every state `t`.
    AllOneCycles { root: StateId, table: BTreeMap<StateId, Rational> },
    /// A simple cycle `s0 s1 ... sk` (closing back to `s0`) with product != 1.
    NCycleWitness(Vec<StateId>),
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BsccClassification {
    pub states: Vec<StateId>,
    pub mp_sign: Sign,
    pub cycle_structure: CycleStructure,
    pub sup_value: BTreeMap<StateId, ExtendedValue>,
    pub inf_value: BTreeMap<StateId, ExtendedValue>,
}

impl BsccClassification {
    pub fn value(&self, mode: AnalysisMode, s: StateId) -> &ExtendedValue {
        match mode {
            AnalysisMode::Sup => &self.sup_value[&s],
            AnalysisMode::Inf => &self.inf_value[&s],
        }
    }
}

fn chain_successors(m: &Model, s: StateId) -> &[(StateId, Rational)] {
    &m.action(s, 0).successors
}

fn require_closed_scc(m: &Model, states: &[StateId]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Precondition("empty component".into()));
    }
    let mut inside = vec![false; m.num_states()];
    for &s in states {
        if m.actions(s).len() != 1 {
            return Err(Error::Precondition(format!("state `{}` has several actions", m.name(s))));
        }
        inside[s] = true;
    }
    let adj: Vec<Vec<StateId>> = m
        .states()
        .map(|s| if inside[s] { m.successors(s) } else { Vec::new() })
        .collect();
    for &s in states {
        if adj[s].iter().any(|&t| !inside[t]) {
            return Err(Error::Precondition(format!("component is left from `{}`", m.name(s))));
        }
    }
    if graph::tarjan(&adj, &inside).len() != 1 {
        return Err(Error::Precondition("component is not strongly connected".into()));
    }
    Ok(())
}

/// The unique `theta` with `theta P = theta` and `sum theta = 1` on a closed
/// strongly connected set of single-action states, aligned with `states`.
pub fn stationary_distribution(m: &Model, states: &[StateId]) -> Result<Vec<Rational>> {
    require_closed_scc(m, states)?;
    stationary_under(m, states, |_| 0)
}

/// Stationary distribution of the chain playing `act(s)` in every state of
/// `states`, which must be closed and irreducible under those actions.
pub(crate) fn stationary_under(m: &Model, states: &[StateId], act: impl Fn(StateId) -> ActionId) -> Result<Vec<Rational>> {
    let n = states.len();
    let pos: BTreeMap<StateId, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    // Row j: sum_i theta_i P(i, j) - theta_j = 0.
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    for (i, &s) in states.iter().enumerate() {
        matrix[i][i] -= Rational::one();
        for (t, p) in &m.action(s, act(s)).successors {
            matrix[pos[t]][i] += p;
        }
    }
    matrix[n - 1] = vec![Rational::one(); n];
    let mut rhs = vec![Rational::zero(); n];
    rhs[n - 1] = Rational::one();
    match solve_square(&LinearSystem { matrix, rhs })? {
        SquareSolution::Unique(theta) => Ok(theta),
        SquareSolution::Singular => Err(Error::Internal("stationary system of an irreducible chain is singular".into())),
    }
}

/// Sign of `sum theta_s log r(s)`. A reward-0 state makes it negative.
pub fn scc_log_mp_sign(m: &Model, states: &[StateId]) -> Result<Sign> {
    let theta = stationary_distribution(m, states)?;
    if states.iter().any(|&s| m.reward(s).is_zero()) {
        return Ok(Sign::Negative);
    }
    let terms: Vec<(Rational, Rational)> = states
        .iter()
        .zip(theta)
        .map(|(&s, w)| (w, m.reward(s).clone()))
        .collect();
    weighted_log_sign(&terms)
}

fn product(m: &Model, cycle: &[StateId]) -> Rational {
    cycle.iter().fold(Rational::one(), |acc, &s| acc * m.reward(s))
}

/// Shortest path `from .. to` inside `inside`, both ends included.
fn path_within(m: &Model, inside: &[bool], from: StateId, to: StateId) -> Vec<StateId> {
    let mut parent = vec![usize::MAX; m.num_states()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        if s == to {
            break;
        }
        for (t, _) in chain_successors(m, s) {
            if inside[*t] && parent[*t] == usize::MAX {
                parent[*t] = s;
                queue.push_back(*t);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Splits a closed walk (first state repeated at the end) into simple
/// cycles and returns one whose product differs from 1.
fn non_unit_simple_cycle(m: &Model, walk: &[StateId]) -> Option<Vec<StateId>> {
    let mut stack: Vec<StateId> = Vec::new();
    for &s in walk {
        if let Some(i) = stack.iter().position(|&x| x == s) {
            let cycle = stack[i..].to_vec();
            if !product(m, &cycle).is_one() {
                return Some(cycle);
            }
            stack.truncate(i + 1);
        } else {
            stack.push(s);
        }
    }
    None
}

/// Breadth-first search from `root` storing the product of rewards
/// collected along the tree path to every state. A second path with a
/// different product yields an explicit cycle of product != 1.
pub fn one_cycle_analysis(m: &Model, states: &[StateId], root: StateId) -> Result<CycleStructure> {
    require_closed_scc(m, states)?;
    let mut inside = vec![false; m.num_states()];
    for &s in states {
        inside[s] = true;
    }
    if !inside[root] {
        return Err(Error::Precondition(format!("root `{}` outside the component", m.name(root))));
    }
    let mut prod: Vec<Option<Rational>> = vec![None; m.num_states()];
    let mut parent = vec![usize::MAX; m.num_states()];
    prod[root] = Some(Rational::one());
    parent[root] = root;
    let mut queue = VecDeque::from([root]);
    let tree_path = |parent: &[usize], to: StateId| {
        let mut p = vec![to];
        let mut cur = to;
        while cur != root {
            cur = parent[cur];
            p.push(cur);
        }
        p.reverse();
        p
    };
    while let Some(u) = queue.pop_front() {
        let via = prod[u].clone().unwrap() * m.reward(u);
        for (v, _) in chain_successors(m, u) {
            let v = *v;
            match &prod[v] {
                None => {
                    prod[v] = Some(via.clone());
                    parent[v] = u;
                    queue.push_back(v);
                }
                Some(existing) if *existing != via => {
                    // Two root-to-v walks with different products; close
                    // both through one v-to-root path.
                    let back = path_within(m, &inside, v, root);
                    let mut first = tree_path(&parent, v);
                    first.extend_from_slice(&back[1..]);
                    let mut second = tree_path(&parent, u);
                    second.extend_from_slice(&back);
                    for walk in [first, second] {
                        if let Some(c) = non_unit_simple_cycle(m, &walk) {
                            return Ok(CycleStructure::NCycleWitness(c));
                        }
                    }
                    return Err(Error::Internal("differing path products without a non-unit cycle".into()));
                }
                Some(_) => {}
            }
        }
    }
    let table = states.iter().map(|&s| (s, prod[s].clone().unwrap())).collect();
    Ok(CycleStructure::AllOneCycles { root, table })
}

/// Classifies a bottom SCC and computes both limsup and liminf values at
/// each of its states.
pub fn bscc_values(m: &Model, states: &[StateId]) -> Result<BsccClassification> {
    let mp_sign = scc_log_mp_sign(m, states)?;
    let all = |v: ExtendedValue| states.iter().map(|&s| (s, v.clone())).collect::<BTreeMap<_, _>>();
    let (cycle_structure, sup_value, inf_value) = match mp_sign {
        Sign::Negative => (CycleStructure::NotApplicable, all(ExtendedValue::zero()), all(ExtendedValue::zero())),
        Sign::Positive => (CycleStructure::NotApplicable, all(ExtendedValue::Infinite), all(ExtendedValue::Infinite)),
        Sign::Zero => {
            let cs = one_cycle_analysis(m, states, states[0])?;
            match &cs {
                CycleStructure::AllOneCycles { table, .. } => {
                    let max = table.values().max().unwrap().clone();
                    let min = table.values().min().unwrap().clone();
                    // R(s, t) = R(root, t) / R(root, s)
                    let sup = table.iter().map(|(&s, r)| (s, ExtendedValue::Finite(&max / r))).collect();
                    let inf = table.iter().map(|(&s, r)| (s, ExtendedValue::Finite(&min / r))).collect();
                    (cs, sup, inf)
                }
                _ => (cs, all(ExtendedValue::Infinite), all(ExtendedValue::zero())),
            }
        }
    };
    Ok(BsccClassification {
        states: states.to_vec(),
        mp_sign,
        cycle_structure,
        sup_value,
        inf_value,
    })
}

/// Result of solving the transient equations over all undetermined states
/// at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransientSystem {
    pub states: Vec<StateId>,
    pub solution: SquareSolution,
}

#[derive(Debug, Clone, Default)]
pub struct McReport {
    pub bsccs: Vec<BsccClassification>,
    /// Reward-0 states turned into sinks.
    pub zeroed: Vec<StateId>,
    /// States reaching the value-0 bottom components almost surely.
    pub zero_value: Vec<StateId>,
    /// States whose value comes from the transient system.
    pub transient: Vec<StateId>,
    pub transient_system: Option<TransientSystem>,
    pub witness: Option<InfiniteWitness>,
}

#[derive(Debug, Clone)]
pub struct McAnalysis {
    pub values: Vec<ExtendedValue>,
    pub report: McReport,
}

impl McAnalysis {
    pub fn initial_value(&self, m: &Model) -> &ExtendedValue {
        &self.values[m.initial()]
    }
}

/// Rows `x_s - r(s) sum_{vars} P(s, s') x_s' = r(s) sum_{other} P(s, t) v_t`.
fn transient_rows(m: &Model, vars: &[StateId], known: &[Option<ExtendedValue>]) -> LinearSystem {
    let pos: BTreeMap<StateId, usize> = vars.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let n = vars.len();
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut rhs = vec![Rational::zero(); n];
    for (i, &s) in vars.iter().enumerate() {
        matrix[i][i] += Rational::one();
        let r = m.reward(s);
        for (t, p) in chain_successors(m, s) {
            match pos.get(t) {
                Some(&j) => matrix[i][j] -= r * p,
                None => {
                    let v = known[*t].as_ref().and_then(|v| v.finite()).expect("finite downstream value");
                    rhs[i] += r * p * v;
                }
            }
        }
    }
    LinearSystem { matrix, rhs }
}

/// Least non-negative solution of one system, or `None` if none exists.
fn least_nonnegative(sys: &LinearSystem) -> Result<Option<Vec<Rational>>> {
    match solve_square(sys)? {
        SquareSolution::Unique(x) => Ok(if x.iter().any(|v| v.is_negative()) { None } else { Some(x) }),
        SquareSolution::Singular => {
            let n = sys.rhs.len();
            let mut lp = LinearProgram::new(vec![Rational::one(); n]);
            for (row, b) in sys.matrix.iter().zip(&sys.rhs) {
                lp.add_equality(row.clone(), b.clone());
            }
            match lp_solve(&lp)? {
                LpOutcome::Optimal { x, .. } => Ok(Some(x)),
                LpOutcome::Infeasible => Ok(None),
            }
        }
    }
}

/// Values of every state of a Markov chain.
pub fn mc_values(m: &Model, mode: AnalysisMode) -> Result<McAnalysis> {
    if !m.is_markov_chain() {
        return Err(Error::InvalidInput("model has a state with several actions".into()));
    }
    let (m, zeroed) = absorb_zero_rewards(m);
    let n = m.num_states();
    let bottoms = graph::bottom_sccs(&m);
    let bsccs: Vec<BsccClassification> = bottoms
        .par_iter()
        .map(|c| bscc_values(&m, &c.states))
        .collect::<Result<_>>()?;

    let mut known: Vec<Option<ExtendedValue>> = vec![None; n];
    let mut infinite = vec![false; n];
    let mut positive = vec![false; n];
    for b in &bsccs {
        for &s in &b.states {
            let v = b.value(mode, s).clone();
            infinite[s] = v.is_infinite();
            positive[s] = v > ExtendedValue::zero();
            known[s] = Some(v);
        }
    }
    let reach_inf = graph::reaching(&m, &infinite);
    let reach_pos = graph::reaching(&m, &positive);
    let mut report = McReport {
        zeroed,
        ..Default::default()
    };
    for s in 0..n {
        if reach_inf[s] {
            known[s] = Some(ExtendedValue::Infinite);
        } else if !reach_pos[s] {
            known[s] = Some(ExtendedValue::zero());
            report.zero_value.push(s);
        }
    }
    let transient: Vec<StateId> = (0..n).filter(|&s| known[s].is_none()).collect();

    if !transient.is_empty() {
        let sys = transient_rows(&m, &transient, &known);
        let solution = solve_square(&sys)?;
        let fast = match &solution {
            SquareSolution::Unique(x) if x.iter().all(|v| !v.is_negative()) => Some(x.clone()),
            _ => None,
        };
        report.transient_system = Some(TransientSystem {
            states: transient.clone(),
            solution,
        });
        match fast {
            Some(x) => {
                for (&s, v) in transient.iter().zip(x) {
                    known[s] = Some(ExtendedValue::Finite(v));
                }
            }
            None => solve_by_components(&m, &transient, &mut known)?,
        }
    }
    report.transient = transient;

    let values: Vec<ExtendedValue> = known.into_iter().map(|v| v.expect("every state assigned")).collect();
    let init = m.initial();
    if values[init].is_infinite() {
        let reachable = m.reachable_from(init);
        let culprit = bsccs
            .iter()
            .find(|b| b.states.iter().any(|&s| reachable[s] && infinite[s]));
        report.witness = Some(match culprit {
            Some(b) if b.mp_sign == Sign::Positive => InfiniteWitness {
                kind: WitnessKind::PositiveMec,
                states: b.states.clone(),
                detail: "bottom component with positive logarithmic mean payoff".into(),
            },
            Some(b) => InfiniteWitness {
                kind: WitnessKind::GamblingBscc,
                states: match &b.cycle_structure {
                    CycleStructure::NCycleWitness(c) => c.clone(),
                    _ => b.states.clone(),
                },
                detail: "zero-drift bottom component with a cycle of product != 1".into(),
            },
            None => InfiniteWitness {
                kind: WitnessKind::TransientDivergence,
                states: report.transient.iter().copied().filter(|&s| values[s].is_infinite()).collect(),
                detail: "transient equations have no non-negative solution".into(),
            },
        });
    }
    report.bsccs = bsccs;
    Ok(McAnalysis { values, report })
}

/// Processes the SCCs of the transient part bottom-up with downstream
/// values fixed.
fn solve_by_components(m: &Model, transient: &[StateId], known: &mut [Option<ExtendedValue>]) -> Result<()> {
    let n = m.num_states();
    let mut active = vec![false; n];
    for &s in transient {
        active[s] = true;
    }
    let adj: Vec<Vec<StateId>> = m.states().map(|s| m.successors(s)).collect();
    for comp in graph::tarjan(&adj, &active) {
        let feeds_infinity = comp.iter().any(|&s| {
            adj[s]
                .iter()
                .any(|&t| known[t].as_ref().is_some_and(ExtendedValue::is_infinite))
        });
        let solved = if feeds_infinity {
            None
        } else {
            least_nonnegative(&transient_rows(m, &comp, known))?
        };
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
    Ok(())
}
