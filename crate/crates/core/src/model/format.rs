//! JSON model files.
//!
//! ```json
//! {
//!   "states": [{"name": "good", "reward": "13/10"}, {"name": "bad", "reward": "3/4"}],
//!   "transitions": [
//!     {"from": "good", "action": "a", "to": [{"target": "good", "prob": "1/2"}, {"target": "bad", "prob": "1/2"}]},
//!     {"from": "bad", "action": "a", "to": [{"target": "good", "prob": "1/2"}, {"target": "bad", "prob": "1/2"}]}
//!   ],
//!   "initial": "good"
//! }
//! ```
//!
//! Rationals are JSON integers or `"p/q"` strings. Unknown fields are
//! rejected, which also rules out rewards attached to transitions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Model, ModelBuilder};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: Vec<StateDoc>,
    transitions: Vec<TransitionDoc>,
    initial: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    name: String,
    reward: Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: String,
    action: String,
    to: Vec<SuccessorDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuccessorDoc {
    target: String,
    prob: Value,
}

fn rational_field(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        _ => Err(Error::InvalidModel(format!("{what}: expected an integer or a \"p/q\" string, got {v}"))),
    }
    .map_err(|e| match e {
        Error::InvalidInput(msg) | Error::InvalidOperand(msg) => Error::InvalidModel(format!("{what}: {msg}")),
        other => other,
    })
}

/// Parses and validates a model, then drops states unreachable from the
/// initial state.
pub fn parse_model(text: &str) -> Result<Model> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut b = ModelBuilder::new();
    let mut ids = HashMap::new();
    for st in &doc.states {
        let reward = rational_field(&st.reward, &format!("reward of `{}`", st.name))?;
        let id = b.add_state(st.name.clone(), reward);
        if ids.insert(st.name.clone(), id).is_some() {
            return Err(Error::InvalidModel(format!("duplicate state name `{}`", st.name)));
        }
    }
    let lookup = |name: &str| {
        ids.get(name)
            .copied()
            .ok_or_else(|| Error::InvalidModel(format!("unknown state `{name}`")))
    };
    for tr in &doc.transitions {
        let from = lookup(&tr.from)?;
        let mut succ = Vec::with_capacity(tr.to.len());
        for s in &tr.to {
            let what = format!("probability of `{}` -[{}]-> `{}`", tr.from, tr.action, s.target);
            succ.push((lookup(&s.target)?, rational_field(&s.prob, &what)?));
        }
        b.add_action(from, tr.action.clone(), succ);
    }
    let initial = lookup(&doc.initial)?;
    let model = b.build(initial)?;
    Ok(model.prune_unreachable().0)
}

/// Pretty-printed JSON with every rational written as a string.
pub fn serialize_model(m: &Model) -> String {
    let doc = ModelDoc {
        states: m
            .states()
            .map(|s| StateDoc {
                name: m.name(s).to_string(),
                reward: Value::String(format_rational(m.reward(s))),
            })
            .collect(),
        transitions: m
            .states()
            .flat_map(|s| {
                m.actions(s).iter().map(move |a| TransitionDoc {
                    from: m.name(s).to_string(),
                    action: a.label.clone(),
                    to: a
                        .successors
                        .iter()
                        .map(|(t, p)| SuccessorDoc {
                            target: m.name(*t).to_string(),
                            prob: Value::String(format_rational(p)),
                        })
                        .collect(),
                })
            })
            .collect(),
        initial: m.name(m.initial()).to_string(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}
