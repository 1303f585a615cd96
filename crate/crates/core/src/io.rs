//! JSON reading and writing for structures, signalings, games and matrices.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::games::BayesianGame;
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::signaling::{DeterministicSignaling, ExperimentMatrix, Garbling, StochasticSignaling};
use crate::types::{Distribution, InformationStructure, Named, Partition, Prior, StateSpace};

fn perr(path: &str, msg: impl Into<String>) -> Error {
    Error::parse(path, msg)
}

fn field<'v>(v: &'v Value, key: &str, path: &str) -> Result<&'v Value> {
    v.get(key).ok_or_else(|| perr(path, format!("missing field {key:?}")))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| perr(path, "expected an array"))
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| perr(path, "expected an object"))
}

fn as_str<'v>(v: &'v Value, path: &str) -> Result<&'v str> {
    v.as_str().ok_or_else(|| perr(path, "expected a string"))
}

/// Rational from a JSON string or number.
pub fn rational_value(v: &Value, path: &str) -> Result<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(perr(path, "expected a rational as string or number")),
    };
    if text.trim().trim_start_matches(['-', '\u{2212}']).eq_ignore_ascii_case("inf") {
        return Err(perr(path, "infinite payoffs are not accepted here"));
    }
    parse_rational(&text).map_err(|e| match e {
        Error::Parse { message, .. } => perr(path, message),
        other => other,
    })
}

pub fn parse_json(text: &str, path: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(path, e.to_string()))
}

pub fn read_json_file(file: &str) -> Result<Value> {
    let text = std::fs::read_to_string(file).map_err(|e| perr(file, e.to_string()))?;
    parse_json(&text, file)
}

/// Partition given as blocks of state labels.
pub fn parse_partition(space: &StateSpace, v: &Value, path: &str) -> Result<Partition> {
    let n = space.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let blocks = as_array(v, path)?;
    for (b, block) in blocks.iter().enumerate() {
        let bpath = format!("{path}[{b}]");
        let items = as_array(block, &bpath)?;
        if items.is_empty() {
            return Err(perr(&bpath, "empty block"));
        }
        for (k, item) in items.iter().enumerate() {
            let ipath = format!("{bpath}[{k}]");
            let label = as_str(item, &ipath)?;
            let w = space.index_of(label).map_err(|e| perr(&ipath, e.to_string()))?;
            if owner[w].is_some() {
                return Err(perr(&ipath, format!("state {label:?} appears in more than one block")));
            }
            owner[w] = Some(b);
        }
    }
    if let Some(w) = owner.iter().position(Option::is_none) {
        return Err(perr(path, format!("state {:?} is not covered by any block", space.label(w))));
    }
    let labels: Vec<usize> = owner.into_iter().map(|o| o.expect("covered")).collect();
    Ok(Partition::from_labels(&labels))
}

fn parse_named(space: &StateSpace, v: &Value, path: &str) -> Result<Vec<Named>> {
    let Some(v) = v.as_array() else {
        return Err(perr(path, "expected an array of named partitions"));
    };
    v.iter()
        .enumerate()
        .map(|(k, item)| {
            let p = format!("{path}[{k}]");
            Ok(Named {
                name: as_str(field(item, "name", &p)?, &format!("{p}.name"))?.to_string(),
                partition: parse_partition(space, field(item, "partition", &p)?, &format!("{p}.partition"))?,
            })
        })
        .collect()
}

/// Structure object. A missing prior means uniform; a missing oracle list
/// means none.
pub fn parse_structure(v: &Value, path: &str) -> Result<InformationStructure> {
    let states = as_array(field(v, "states", path)?, &format!("{path}.states"))?
        .iter()
        .enumerate()
        .map(|(k, s)| as_str(s, &format!("{path}.states[{k}]")).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let space = StateSpace::new(states).map_err(|e| perr(&format!("{path}.states"), e.to_string()))?;
    let prior = match v.get("prior") {
        None => Prior::uniform(space.len()),
        Some(p) => {
            let ppath = format!("{path}.prior");
            let mass = as_array(p, &ppath)?
                .iter()
                .enumerate()
                .map(|(k, x)| rational_value(x, &format!("{ppath}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            if mass.len() != space.len() {
                return Err(perr(&ppath, format!("{} masses for {} states", mass.len(), space.len())));
            }
            Prior::new(mass).map_err(|e| perr(&ppath, e.to_string()))?
        }
    };
    let players = parse_named(&space, field(v, "players", path)?, &format!("{path}.players"))?;
    let oracles = match v.get("oracles") {
        None => Vec::new(),
        Some(o) => parse_named(&space, o, &format!("{path}.oracles"))?,
    };
    InformationStructure::new(space, prior, players, oracles).map_err(|e| perr(path, e.to_string()))
}

/// Stochastic or deterministic signaling; deterministic ones are returned
/// in kernel form along with the original assignment.
pub fn parse_signaling(
    structure: &InformationStructure,
    v: &Value,
    path: &str,
) -> Result<(StochasticSignaling, Option<DeterministicSignaling>)> {
    let oracle_name = as_str(field(v, "oracle", path)?, &format!("{path}.oracle"))?;
    let oracle = structure
        .partition(oracle_name)
        .map_err(|e| perr(&format!("{path}.oracle"), e.to_string()))?
        .clone();
    let kind = v.get("type").and_then(Value::as_str).unwrap_or("stochastic");
    let space = &structure.space;
    match kind {
        "stochastic" => {
            let spath = format!("{path}.signals");
            let signals = as_array(field(v, "signals", path)?, &spath)?
                .iter()
                .enumerate()
                .map(|(k, s)| as_str(s, &format!("{spath}[{k}]")).map(str::to_string))
                .collect::<Result<Vec<_>>>()?;
            let kpath = format!("{path}.kernel");
            let kernel_obj = as_object(field(v, "kernel", path)?, &kpath)?;
            for key in kernel_obj.keys() {
                space.index_of(key).map_err(|e| perr(&kpath, e.to_string()))?;
            }
            let mut kernel = Vec::new();
            for w in 0..space.len() {
                let label = space.label(w);
                let rpath = format!("{kpath}.{label}");
                let row = as_object(
                    kernel_obj
                        .get(label)
                        .ok_or_else(|| perr(&kpath, format!("missing row for state {label:?}")))?,
                    &rpath,
                )?;
                for key in row.keys() {
                    if !signals.contains(key) {
                        return Err(perr(&rpath, format!("unknown signal {key:?}")));
                    }
                }
                kernel.push(
                    signals
                        .iter()
                        .map(|s| match row.get(s) {
                            Some(x) => rational_value(x, &format!("{rpath}.{s}")),
                            None => Ok(Rational::from_integer(0.into())),
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let tau = StochasticSignaling::new(oracle, signals, kernel).map_err(|e| perr(path, e.to_string()))?;
            Ok((tau, None))
        }
        "deterministic" => {
            let apath = format!("{path}.assignment");
            let obj = as_object(field(v, "assignment", path)?, &apath)?;
            let mut assignment: Vec<Option<String>> = vec![None; oracle.num_blocks()];
            for (key, sig) in obj {
                let block = match key.strip_prefix("block").and_then(|d| d.parse::<usize>().ok()) {
                    Some(b) if b < oracle.num_blocks() => b,
                    Some(_) => return Err(perr(&apath, format!("no oracle block {key:?}"))),
                    None => oracle.block_of(space.index_of(key).map_err(|e| perr(&apath, e.to_string()))?),
                };
                let s = as_str(sig, &format!("{apath}.{key}"))?.to_string();
                if assignment[block].as_ref().is_some_and(|prev| *prev != s) {
                    return Err(perr(&apath, format!("oracle block of {key:?} assigned two different signals")));
                }
                assignment[block] = Some(s);
            }
            let assignment = assignment
                .into_iter()
                .enumerate()
                .map(|(b, s)| {
                    s.ok_or_else(|| {
                        let states: Vec<&str> = oracle.block(b).into_iter().map(|w| space.label(w)).collect();
                        perr(&apath, format!("no signal for oracle block {{{}}}", states.join(",")))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let det = DeterministicSignaling::new(oracle, assignment).map_err(|e| perr(path, e.to_string()))?;
            Ok((det.to_stochastic(), Some(det)))
        }
        other => Err(perr(&format!("{path}.type"), format!("unknown signaling type {other:?}"))),
    }
}

/// Game with actions keyed by player name and payoffs keyed by state, then
/// by `|`-joined action labels in player order.
pub fn parse_game(structure: &InformationStructure, v: &Value, path: &str) -> Result<BayesianGame> {
    let apath = format!("{path}.actions");
    let actions_obj = as_object(field(v, "actions", path)?, &apath)?;
    let players: Vec<String> = structure.players.iter().map(|p| p.name.clone()).collect();
    let mut actions = Vec::new();
    for name in &players {
        let list = actions_obj
            .get(name)
            .ok_or_else(|| perr(&apath, format!("no actions for player {name:?}")))?;
        let lpath = format!("{apath}.{name}");
        actions.push(
            as_array(list, &lpath)?
                .iter()
                .enumerate()
                .map(|(k, a)| as_str(a, &format!("{lpath}[{k}]")).map(str::to_string))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let shell = BayesianGame::from_fn(players.clone(), actions.clone(), 0, |_, _| Vec::new())
        .map_err(|e| perr(&apath, e.to_string()))?;
    let ppath = format!("{path}.payoffs");
    let pay = as_object(field(v, "payoffs", path)?, &ppath)?;
    let n = structure.n_states();
    let mut table = Vec::with_capacity(n);
    for w in 0..n {
        let label = structure.space.label(w);
        let spath = format!("{ppath}.{label}");
        let entries = as_object(
            pay.get(label)
                .ok_or_else(|| perr(&ppath, format!("no payoffs for state {label:?}")))?,
            &spath,
        )?;
        let mut row: Vec<Option<Vec<Rational>>> = vec![None; shell.n_profiles()];
        for (key, val) in entries {
            let epath = format!("{spath}.{key}");
            let parts: Vec<&str> = key.split('|').collect();
            if parts.len() != players.len() {
                return Err(perr(&epath, "profile key has the wrong number of actions"));
            }
            let prof = parts
                .iter()
                .enumerate()
                .map(|(i, a)| shell.action_index(i, a).map_err(|e| perr(&epath, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let us = as_array(val, &epath)?
                .iter()
                .enumerate()
                .map(|(k, x)| rational_value(x, &format!("{epath}[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            if us.len() != players.len() {
                return Err(perr(&epath, "payoff vector has the wrong length"));
            }
            row[shell.encode(&prof)] = Some(us);
        }
        let row = row
            .into_iter()
            .enumerate()
            .map(|(k, u)| {
                u.ok_or_else(|| {
                    let prof: Vec<&str> = shell.decode(k).iter().enumerate().map(|(i, &a)| shell.actions(i)[a].as_str()).collect();
                    perr(&spath, format!("missing payoff for profile {:?}", prof.join("|")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    BayesianGame::new(players, actions, table).map_err(|e| perr(path, e.to_string()))
}

fn parse_rows(v: &Value, path: &str) -> Result<Vec<Vec<Rational>>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let rp = format!("{path}[{r}]");
            as_array(row, &rp)?
                .iter()
                .enumerate()
                .map(|(c, x)| rational_value(x, &format!("{rp}[{c}]")))
                .collect()
        })
        .collect()
}

/// Matrix as a bare array of rows or `{"rows": [...]}`.
pub fn parse_matrix(v: &Value, path: &str) -> Result<ExperimentMatrix> {
    let rows = match v.get("rows") {
        Some(r) => parse_rows(r, &format!("{path}.rows"))?,
        None => parse_rows(v, path)?,
    };
    ExperimentMatrix::from_rows(rows).map_err(|e| perr(path, e.to_string()))
}

/// Garbling with target labels `{"targets": [...], "rows": [...]}`.
pub fn parse_garbling(v: &Value, path: &str) -> Result<Garbling> {
    let tpath = format!("{path}.targets");
    let targets = as_array(field(v, "targets", path)?, &tpath)?
        .iter()
        .enumerate()
        .map(|(k, t)| as_str(t, &format!("{tpath}[{k}]")).map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let rows = parse_rows(field(v, "rows", path)?, &format!("{path}.rows"))?;
    Garbling::new(targets, rows).map_err(|e| perr(path, e.to_string()))
}

pub fn partition_json(p: &Partition, space: &StateSpace) -> Value {
    json!(p.to_label_blocks(space))
}

pub fn distribution_json(d: &Distribution) -> Value {
    json!(d.to_strings())
}

pub fn rationals_json(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(fmt_rational(x))).collect())
}

pub fn matrix_json(rows: &[Vec<Rational>]) -> Value {
    Value::Array(rows.iter().map(|r| rationals_json(r)).collect())
}

/// Atlas as a list of weighted profiles keyed by player name.
pub fn atlas_json(structure: &InformationStructure, atlas: &crate::signaling::PosteriorAtlas) -> Value {
    Value::Array(
        atlas
            .weights()
            .iter()
            .map(|(prof, w)| {
                let per: BTreeMap<&str, Value> = structure
                    .players
                    .iter()
                    .zip(prof)
                    .map(|(p, d)| (p.name.as_str(), distribution_json(d)))
                    .collect();
                json!({"weight": fmt_rational(w), "profile": per})
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure() -> InformationStructure {
        let v = json!({
            "states": ["a", "b", "c"],
            "players": [{"name": "P", "partition": [["a", "b"], ["c"]]}],
            "oracles": [{"name": "F", "partition": [["a"], ["b", "c"]]}]
        });
        parse_structure(&v, "$").unwrap()
    }

    #[test]
    fn structure_defaults_to_uniform_prior() {
        let s = structure();
        assert_eq!(s.prior.get(2), &crate::rational::ratio(1, 3));
    }

    #[test]
    fn overlapping_block_names_the_state() {
        let v = json!({
            "states": ["a", "b"],
            "players": [{"name": "P", "partition": [["a", "b"], ["b"]]}]
        });
        let e = parse_structure(&v, "$").unwrap_err().to_string();
        assert!(e.contains("\"b\"") && e.contains("$.players[0].partition[1][0]"), "{e}");
        let v = json!({"states": ["a", "b"], "players": [{"name": "P", "partition": [["a"]]}]});
        assert!(parse_structure(&v, "$").unwrap_err().to_string().contains("\"b\" is not covered"));
    }

    #[test]
    fn signaling_rows_are_validated() {
        let s = structure();
        let bad = json!({"oracle": "F", "signals": ["x", "y"], "kernel": {
            "a": {"x": "1"}, "b": {"x": "1/2", "y": "1/2"}, "c": {"x": "1/3", "y": "2/3"}}});
        assert!(parse_signaling(&s, &bad, "$").unwrap_err().to_string().contains("measurable"));
        let det = json!({"oracle": "F", "type": "deterministic", "assignment": {"block0": "x", "block1": "y"}});
        let (st, d) = parse_signaling(&s, &det, "$").unwrap();
        assert_eq!(st.n_signals(), 2);
        assert_eq!(d.unwrap().induced_partition(), s.oracle("F").unwrap().clone());
    }

    #[test]
    fn game_rejects_infinite_payoffs_and_gaps() {
        let s = structure();
        let mut g = json!({"actions": {"P": ["u", "v"]}, "payoffs": {
            "a": {"u": ["1"], "v": ["0"]}, "b": {"u": ["1"], "v": ["0"]}, "c": {"u": ["1"], "v": ["-inf"]}}});
        assert!(parse_game(&s, &g, "$").unwrap_err().to_string().contains("infinite"));
        g["payoffs"]["c"] = json!({"u": ["1"]});
        assert!(parse_game(&s, &g, "$").unwrap_err().to_string().contains("missing payoff"));
        g["payoffs"]["c"] = json!({"u": ["1"], "v": ["2"]});
        assert_eq!(parse_game(&s, &g, "$").unwrap().n_profiles(), 2);
    }
}
