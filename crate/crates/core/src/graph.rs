//! Qualitative graph analyses over the action graph of a model.

use std::collections::{BTreeMap, VecDeque};

use crate::model::{ActionId, Model, StateId};

/// A set of states with, per state, the actions that stay inside the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub states: Vec<StateId>,
    pub internal_actions: BTreeMap<StateId, Vec<ActionId>>,
}

impl Component {
    pub fn contains(&self, s: StateId) -> bool {
        self.states.binary_search(&s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Membership mask over all model states.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &s in &self.states {
            m[s] = true;
        }
        m
    }

    /// One internal action per state.
    pub fn is_bottom(&self) -> bool {
        self.internal_actions.values().all(|a| a.len() == 1)
    }

    fn from_states(m: &Model, mut states: Vec<StateId>, allowed: &dyn Fn(StateId, ActionId) -> bool) -> Self {
        states.sort_unstable();
        let inside = |t: StateId| states.binary_search(&t).is_ok();
        let internal_actions = states
            .iter()
            .map(|&s| {
                let acts = (0..m.actions(s).len())
                    .filter(|&a| allowed(s, a) && m.action(s, a).targets().all(inside))
                    .collect();
                (s, acts)
            })
            .collect();
        Component {
            states,
            internal_actions,
        }
    }
}

/// Per-state action masks.
pub type ActionMask = Vec<Vec<bool>>;

pub fn full_mask(m: &Model) -> ActionMask {
    m.states().map(|s| vec![true; m.actions(s).len()]).collect()
}

/// Tarjan's algorithm on an explicit adjacency list, restricted to
/// `active` nodes. Components come out in reverse topological order.
pub(crate) fn tarjan(adj: &[Vec<usize>], active: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if !active[root] || index[root] != usize::MAX {
            continue;
        }
        // (node, next edge position)
        let mut call = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if !active[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

fn adjacency(m: &Model, mask: &ActionMask) -> Vec<Vec<usize>> {
    m.states()
        .map(|s| {
            let mut succ: Vec<usize> = m
                .actions(s)
                .iter()
                .enumerate()
                .filter(|(a, _)| mask[s][*a])
                .flat_map(|(_, act)| act.targets())
                .collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect()
}

/// Strongly connected components of the full action graph, in reverse
/// topological order (bottom components first).
pub fn sccs(m: &Model) -> Vec<Component> {
    let mask = full_mask(m);
    let adj = adjacency(m, &mask);
    tarjan(&adj, &vec![true; m.num_states()])
        .into_iter()
        .map(|c| Component::from_states(m, c, &|_, _| true))
        .collect()
}

/// SCCs that no action can leave.
pub fn bottom_sccs(m: &Model) -> Vec<Component> {
    sccs(m)
        .into_iter()
        .filter(|c| c.states.iter().all(|&s| c.internal_actions[&s].len() == m.actions(s).len()))
        .collect()
}

/// Maximal end components.
pub fn mecs(m: &Model) -> Vec<Component> {
    mecs_with_mask(m, &full_mask(m))
}

/// Maximal end components of the sub-MDP using only actions in `mask`.
pub fn mecs_with_mask(m: &Model, mask: &ActionMask) -> Vec<Component> {
    let n = m.num_states();
    let mut mask = mask.clone();
    let mut alive: Vec<bool> = (0..n).map(|s| mask[s].iter().any(|&b| b)).collect();
    loop {
        let adj = adjacency(m, &mask);
        let comps = tarjan(&adj, &alive);
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in comps.iter().enumerate() {
            for &s in c {
                comp_of[s] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for (a, allowed) in mask[s].iter_mut().enumerate() {
                if *allowed && m.action(s, a).targets().any(|t| !alive[t] || comp_of[t] != comp_of[s]) {
                    *allowed = false;
                    changed = true;
                }
            }
            if !mask[s].iter().any(|&b| b) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .map(|c| Component::from_states(m, c, &|s, a| mask[s][a]))
                .collect();
        }
    }
}

/// Whether some path leads from `from` into `targets`.
pub fn can_reach(m: &Model, from: StateId, targets: &[bool]) -> bool {
    m.reachable_from(from).iter().zip(targets).any(|(&r, &t)| r && t)
}

/// States from which `targets` can be reached along actions in `mask`.
pub fn reaching_with_mask(m: &Model, targets: &[bool], mask: &ActionMask) -> Vec<bool> {
    let n = m.num_states();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for s in m.states() {
        for (a, act) in m.actions(s).iter().enumerate() {
            if mask[s][a] {
                for t in act.targets() {
                    preds[t].push(s);
                }
            }
        }
    }
    let mut seen = targets.to_vec();
    let mut queue: VecDeque<StateId> = (0..n).filter(|&s| targets[s]).collect();
    while let Some(t) = queue.pop_front() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// States from which `targets` can be reached.
pub fn reaching(m: &Model, targets: &[bool]) -> Vec<bool> {
    reaching_with_mask(m, targets, &full_mask(m))
}

/// `{s : P^max_s[reach targets] = 1}`.
pub fn almost_sure_reach_max(m: &Model, targets: &[bool]) -> Vec<bool> {
    let n = m.num_states();
    let mut keep = vec![true; n];
    loop {
        let mask: ActionMask = m
            .states()
            .map(|s| m.actions(s).iter().map(|a| keep[s] && a.targets().all(|t| keep[t])).collect())
            .collect();
        let next: Vec<bool> = reaching_with_mask(m, targets, &mask)
            .into_iter()
            .zip(&keep)
            .map(|(r, &k)| r && k)
            .collect();
        // Targets are retained even if all their actions leak.
        let next: Vec<bool> = next.iter().zip(targets).map(|(&a, &t)| a || t).collect();
        if next == keep {
            return keep;
        }
        keep = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;
    use crate::fixtures;
    use crate::model::ModelBuilder;

    fn mask_of(n: usize, states: &[StateId]) -> Vec<bool> {
        let mut m = vec![false; n];
        for &s in states {
            m[s] = true;
        }
        m
    }

    #[test]
    fn plant_is_one_scc() {
        let c = sccs(&fixtures::plant());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].states, vec![0, 1]);
    }

    #[test]
    fn chain_gives_singletons_in_reverse_topological_order() {
        let mut b = ModelBuilder::new();
        let a = b.add_state("a", int(1));
        let bb = b.add_state("b", int(1));
        b.add_action(a, "go", vec![(bb, int(1))]);
        b.add_action(bb, "loop", vec![(bb, int(1))]);
        let c = sccs(&b.build(a).unwrap());
        assert_eq!(c.iter().map(|c| c.states.clone()).collect::<Vec<_>>(), vec![vec![1], vec![0]]);
        assert!(c[1].internal_actions[&0].is_empty());
    }

    #[test]
    fn self_loop_is_singleton_scc_with_loop() {
        let c = sccs(&fixtures::absorbing(1));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].internal_actions[&0], vec![0]);
    }

    #[test]
    fn contrast_mec_is_sink() {
        let m = fixtures::contrast();
        let e = mecs(&m);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].states, vec![3]);
    }

    #[test]
    fn inf_special_mecs() {
        let m = fixtures::inf_special(true);
        let mut e: Vec<_> = mecs(&m).into_iter().map(|c| (c.states.clone(), c.internal_actions)).collect();
        e.sort();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].0, vec![0, 1]);
        assert_eq!(e[0].1[&0], vec![0]);
        assert_eq!(e[0].1[&1], vec![0]);
        assert_eq!(e[1].0, vec![2]);
    }

    #[test]
    fn reachability() {
        let m = fixtures::inf_special(true);
        assert!(can_reach(&m, 0, &mask_of(3, &[0])));
        assert!(can_reach(&m, 0, &mask_of(3, &[2])));
        let without = fixtures::inf_special(false);
        let mut b = ModelBuilder::new();
        let s = b.add_state("s", int(1));
        let t = b.add_state("t", int(1));
        b.add_action(s, "loop", vec![(s, int(1))]);
        b.add_action(t, "loop", vec![(t, int(1))]);
        let pair = b.build(s).unwrap();
        assert!(!can_reach(&pair, s, &mask_of(2, &[t])));
        assert_eq!(without.num_states(), 2);
    }

    #[test]
    fn almost_sure_reachability() {
        let m = fixtures::divergence();
        assert_eq!(almost_sure_reach_max(&m, &mask_of(2, &[1])), vec![true, true]);
        let mut b = ModelBuilder::new();
        let s = b.add_state("s", int(1));
        let stuck = b.add_state("stuck", int(1));
        let t = b.add_state("t", int(1));
        b.add_action(s, "a", vec![(stuck, crate::exactnum::ratio(1, 2)), (t, crate::exactnum::ratio(1, 2))]);
        b.add_action(s, "b", vec![(t, int(1))]);
        b.add_action(stuck, "loop", vec![(stuck, int(1))]);
        b.add_action(t, "loop", vec![(t, int(1))]);
        let m = b.build(s).unwrap();
        let r = almost_sure_reach_max(&m, &mask_of(3, &[t]));
        assert_eq!(r, vec![true, false, true]);
        assert_eq!(almost_sure_reach_max(&m, &mask_of(3, &[t])), r);
        let again = almost_sure_reach_max(&m, &r);
        assert!(r.iter().zip(&again).all(|(&a, &b)| !a || b));
    }
}
