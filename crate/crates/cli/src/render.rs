use serde_json::{json, Map, Value};

use multreward::linalg::SquareSolution;
use multreward::mc::CycleStructure;
use multreward::{ExtendedValue, InfiniteWitness, McReport, Model, StateId};
use multreward::exactnum::format_rational;

pub fn values(m: &Model, vals: &[ExtendedValue]) -> Value {
    let mut out = Map::new();
    for s in m.states() {
        out.insert(m.name(s).to_string(), json!(vals[s].to_text()));
    }
    Value::Object(out)
}

fn names(m: &Model, states: &[StateId]) -> Vec<String> {
    states.iter().map(|&s| m.name(s).to_string()).collect()
}

pub fn witness(m: &Model, w: &InfiniteWitness) -> Value {
    json!({
        "kind": w.kind,
        "states": names(m, &w.states),
        "detail": w.detail,
    })
}

pub fn mc_report(m: &Model, r: &McReport) -> Value {
    let bsccs: Vec<Value> = r
        .bsccs
        .iter()
        .map(|b| {
            let structure = match &b.cycle_structure {
                CycleStructure::AllOneCycles { root, table } => json!({
                    "kind": "all-one-cycles",
                    "root": m.name(*root),
                    "r_table": table
                        .iter()
                        .map(|(&t, q)| (m.name(t).to_string(), json!(format_rational(q))))
                        .collect::<Map<_, _>>(),
                }),
                CycleStructure::NCycleWitness(cycle) => json!({ "kind": "n-cycle", "cycle": names(m, cycle) }),
                CycleStructure::NotApplicable => json!({ "kind": "not-applicable" }),
            };
            json!({
                "states": names(m, &b.states),
                "log_mean_payoff_sign": b.mp_sign.to_string(),
                "cycles": structure,
            })
        })
        .collect();
    let transient_system = r.transient_system.as_ref().map(|t| {
        let solution = match &t.solution {
            SquareSolution::Unique(x) => json!({
                "unique": t.states.iter().zip(x).map(|(&s, q)| (m.name(s).to_string(), json!(format_rational(q)))).collect::<Map<_, _>>(),
            }),
            SquareSolution::Singular => json!("singular"),
        };
        json!({ "states": names(m, &t.states), "solution": solution })
    });
    json!({
        "bsccs": bsccs,
        "zeroed": names(m, &r.zeroed),
        "zero_value": names(m, &r.zero_value),
        "transient": names(m, &r.transient),
        "transient_system": transient_system,
    })
}
