//! Multiplicative stochastic shortest path: the best expected product over
//! schedulers that reach an absorbing reward-1 target almost surely.

use num_traits::One;

use crate::error::{Error, Result};
use crate::graph;
use crate::exactnum::Sign;
use crate::mc::{InfiniteWitness, WitnessKind};
use crate::mdp::{extract_md_scheduler, reduce, solve_lp1_status, Budgets, PipelineReport};
use crate::model::{absorb_zero_rewards, ActionId, ExtendedValue, MdScheduler, Model, StateId};

#[derive(Debug, Clone)]
pub struct SspResult {
    pub value: ExtendedValue,
    /// Reaches the target almost surely; absent for infinite values.
    pub scheduler: Option<MdScheduler>,
    pub witness: Option<InfiniteWitness>,
    /// States from which no scheduler reaches the target almost surely.
    pub removed_states: Vec<StateId>,
    pub report: PipelineReport,
}

pub fn mssp(m: &Model, target: StateId) -> Result<SspResult> {
    mssp_with(m, target, &Budgets::default())
}

pub fn mssp_with(m: &Model, target: StateId, budgets: &Budgets) -> Result<SspResult> {
    if target >= m.num_states() {
        return Err(Error::InvalidInput(format!("target index {target} out of range")));
    }
    if !m.is_absorbing(target) || !m.reward(target).is_one() {
        return Err(Error::Precondition(format!(
            "target `{}` must be absorbing with reward 1",
            m.name(target)
        )));
    }
    let (absorbed, zeroed) = absorb_zero_rewards(m);
    let mut mask = vec![false; m.num_states()];
    mask[target] = true;
    let keep = graph::almost_sure_reach_max(&absorbed, &mask);
    if !keep[m.initial()] {
        return Err(Error::NoAdmissibleScheduler);
    }
    let removed_states: Vec<StateId> = m.states().filter(|&s| !keep[s]).collect();
    let (kept, map) = absorbed.restrict(&keep)?;
    // For every kept state, new action index -> old action index.
    let mut action_map: Vec<Vec<ActionId>> = vec![Vec::new(); kept.num_states()];
    for s in m.states() {
        if let Some(ns) = map[s] {
            action_map[ns] = (0..absorbed.actions(s).len())
                .filter(|&a| absorbed.action(s, a).targets().all(|t| keep[t]))
                .collect();
        }
    }

    let mut report = PipelineReport {
        zeroed: zeroed.iter().map(|&s| m.name(s).to_string()).collect(),
        ..Default::default()
    };
    let red = reduce(&kept, None, budgets, &mut report)?;
    let work = &red.work;
    let init = work.initial();
    let reach = work.reachable_from(init);
    for (mec, cls) in &red.classes {
        let kind = match (cls.sign, cls.degenerate) {
            (Sign::Positive, _) => WitnessKind::PositiveMec,
            (Sign::Zero, false) => WitnessKind::GambleAndExit,
            _ => continue,
        };
        if mec.states.iter().any(|&s| reach[s]) {
            let original: Vec<StateId> = m.states().filter(|&s| map[s].is_some_and(|ns| mec.contains(ns))).collect();
            return Ok(SspResult {
                value: ExtendedValue::Infinite,
                scheduler: None,
                witness: Some(InfiniteWitness {
                    kind,
                    states: original,
                    detail: "increase the product inside the end component, then move to the target".into(),
                }),
                removed_states,
                report,
            });
        }
    }

    let (values, status) = solve_lp1_status(work)?;
    report.lp = status;
    if values[init].is_infinite() {
        return Ok(SspResult {
            value: ExtendedValue::Infinite,
            scheduler: None,
            witness: Some(InfiniteWitness {
                kind: WitnessKind::TransientDivergence,
                states: vec![m.initial()],
                detail: "LP1 has no finite solution".into(),
            }),
            removed_states,
            report,
        });
    }
    let sched = extract_md_scheduler(work, &values)?;
    let choice = red.translate_back(sched.choices());
    let mut full = vec![0; m.num_states()];
    for s in m.states() {
        if let Some(ns) = map[s] {
            full[s] = action_map[ns][choice[ns]];
        }
    }
    let scheduler = MdScheduler::new(m, full)?;

    let chain = absorbed.induced_chain(&scheduler);
    let hits = graph::reaching(&chain, &mask);
    let from_init = chain.reachable_from(m.initial());
    if m.states().any(|s| from_init[s] && !hits[s]) {
        return Err(Error::Internal("extracted scheduler does not reach the target almost surely".into()));
    }
    Ok(SspResult {
        value: values[init].clone(),
        scheduler: Some(scheduler),
        witness: None,
        removed_states,
        report,
    })
}
