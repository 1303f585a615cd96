//! Fixture library and the claim runner behind `verify` and `report`.
//!
//! A fixture bundles a structure, named signalings, games, strategy
//! profiles, matrices and garblings with a list of claims. Each claim names
//! an operation, its arguments and the expected result. Rationals compare
//! numerically; `{"lt"|"le"|"gt"|"ge": x}` bounds a number; an object
//! matches when every expected key matches; `{"error": text}` expects a
//! failure whose message contains `text`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dominance::{
    common_objective_condition, det_dominates, garbling_exists, is_imi, restrict_to_ckc, two_sided_imi_equal,
    unique_ckc_dominates,
};
use crate::error::{Error, Result};
use crate::games::{
    build_belief_game, build_combined_game, build_kld_game, build_permutation_game, build_two_stage_game,
    log_score_argmax, BayesianGame, Declaration, DeclarationProfile, GuidedGame, InfoSet, StrategyProfile,
    DEFAULT_PROFILE_CAP,
};
use crate::io::{
    atlas_json, distribution_json, parse_game, parse_garbling, parse_matrix, parse_partition, parse_signaling,
    parse_structure, partition_json, rational_value, rationals_json,
};
use crate::lattice::{ckc_decompose, coarsenings, connect_path, join, join_all, meet, refines, COARSENING_BLOCK_CAP};
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::signaling::{
    atlas_equal, det_posterior, experiment_matrix, garble, joint_posterior, lift_garbled, post_equal, post_included,
    posterior_atlas, proportional_decompose, separating_probabilities, stoch_posterior, DeterministicSignaling,
    ExperimentMatrix, Garbling, StochasticSignaling,
};
use crate::types::{conditional, Distribution, InformationStructure, Partition};

pub const FIXTURES: &[(&str, &str)] = &[
    ("rock-concert", include_str!("../fixtures/rock-concert.json")),
    ("one-dm", include_str!("../fixtures/one-dm.json")),
    ("common-objective", include_str!("../fixtures/common-objective.json")),
    ("imi-vs-refinement", include_str!("../fixtures/imi-vs-refinement.json")),
    ("unique-ckc-3-player", include_str!("../fixtures/unique-ckc-3-player.json")),
    ("refinement-not-imi", include_str!("../fixtures/refinement-not-imi.json")),
    ("stochastic-imi-fail", include_str!("../fixtures/stochastic-imi-fail.json")),
    ("permutation-game", include_str!("../fixtures/permutation-game.json")),
    ("belief-game", include_str!("../fixtures/belief-game.json")),
    ("two-stage-game", include_str!("../fixtures/two-stage-game.json")),
    ("kld-game", include_str!("../fixtures/kld-game.json")),
];

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

pub fn fixture_source(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| *src)
        .ok_or_else(|| Error::Usage(format!("unknown fixture {name:?}; available: {}", fixture_names().join(", "))))
}

#[derive(Clone, Debug)]
pub struct Claim {
    pub id: String,
    pub op: String,
    pub args: Value,
    pub expected: Value,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct Signaling {
    pub stochastic: StochasticSignaling,
    pub deterministic: Option<DeterministicSignaling>,
}

#[derive(Clone, Debug)]
pub struct ProfileSpec {
    pub signaling: String,
    pub game: String,
    pub sigma: StrategyProfile,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub structure: Option<InformationStructure>,
    pub signalings: BTreeMap<String, Signaling>,
    pub games: BTreeMap<String, BayesianGame>,
    pub profiles: BTreeMap<String, ProfileSpec>,
    pub matrices: BTreeMap<String, ExperimentMatrix>,
    pub garblings: BTreeMap<String, Garbling>,
    pub claims: Vec<Claim>,
}

fn perr(path: &str, msg: impl Into<String>) -> Error {
    Error::parse(path, msg)
}

fn str_field<'v>(v: &'v Value, key: &str, path: &str) -> Result<&'v str> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| perr(path, format!("missing string field {key:?}")))
}

fn entries<'v>(v: &'v Value, key: &str) -> impl Iterator<Item = (&'v String, &'v Value)> {
    v.get(key).and_then(Value::as_object).into_iter().flat_map(|m| m.iter())
}

pub fn load_fixture(name: &str) -> Result<Fixture> {
    let src = fixture_source(name)?;
    let v = crate::io::parse_json(src, name)?;
    parse_fixture(&v, name)
}

pub fn parse_fixture(v: &Value, path: &str) -> Result<Fixture> {
    let name = str_field(v, "name", path)?.to_string();
    let description = v.get("description").and_then(Value::as_str).unwrap_or_default().to_string();
    let structure = match v.get("structure") {
        Some(s) => Some(parse_structure(s, &format!("{path}.structure"))?),
        None => None,
    };
    let need = |what: &str| {
        structure
            .as_ref()
            .ok_or_else(|| perr(path, format!("{what} need a \"structure\"")))
    };

    let mut signalings = BTreeMap::new();
    for (k, s) in entries(v, "signalings") {
        let (stochastic, deterministic) = parse_signaling(need("signalings")?, s, &format!("{path}.signalings.{k}"))?;
        signalings.insert(k.clone(), Signaling { stochastic, deterministic });
    }
    let mut games = BTreeMap::new();
    for (k, g) in entries(v, "games") {
        games.insert(k.clone(), parse_game(need("games")?, g, &format!("{path}.games.{k}"))?);
    }
    let mut matrices = BTreeMap::new();
    for (k, m) in entries(v, "matrices") {
        let mpath = format!("{path}.matrices.{k}");
        let matrix = if let Some(sig) = m.get("signaling").and_then(Value::as_str) {
            let s = need("matrices")?;
            let tau = &signalings
                .get(sig)
                .ok_or_else(|| perr(&mpath, format!("unknown signaling {sig:?}")))?
                .stochastic;
            let info = s.partition(str_field(m, "info", &mpath)?).map_err(|e| perr(&mpath, e.to_string()))?;
            experiment_matrix(tau, info).map_err(|e| perr(&mpath, e.to_string()))?
        } else {
            parse_matrix(m, &mpath)?
        };
        matrices.insert(k.clone(), matrix);
    }
    let mut garblings = BTreeMap::new();
    for (k, g) in entries(v, "garblings") {
        garblings.insert(k.clone(), parse_garbling(g, &format!("{path}.garblings.{k}"))?);
    }
    let mut profiles = BTreeMap::new();
    for (k, p) in entries(v, "profiles") {
        let ppath = format!("{path}.profiles.{k}");
        let s = need("profiles")?;
        let sig = str_field(p, "signaling", &ppath)?;
        let game = str_field(p, "game", &ppath)?;
        let tau = &signalings
            .get(sig)
            .ok_or_else(|| perr(&ppath, format!("unknown signaling {sig:?}")))?
            .stochastic;
        let g = games.get(game).ok_or_else(|| perr(&ppath, format!("unknown game {game:?}")))?;
        let sigma = parse_strategies(s, g, tau, p.get("strategies").unwrap_or(&Value::Null), &format!("{ppath}.strategies"))?;
        profiles.insert(
            k.clone(),
            ProfileSpec {
                signaling: sig.to_string(),
                game: game.to_string(),
                sigma,
            },
        );
    }
    let mut claims = Vec::new();
    if let Some(list) = v.get("claims").and_then(Value::as_array) {
        for (k, c) in list.iter().enumerate() {
            let cpath = format!("{path}.claims[{k}]");
            claims.push(Claim {
                id: str_field(c, "id", &cpath)?.to_string(),
                op: str_field(c, "op", &cpath)?.to_string(),
                args: c.get("args").cloned().unwrap_or_else(|| json!({})),
                expected: c.get("expected").cloned().unwrap_or(Value::Null),
                provenance: str_field(c, "provenance", &cpath)?.to_string(),
            });
        }
    }
    Ok(Fixture {
        name,
        description,
        structure,
        signalings,
        games,
        profiles,
        matrices,
        garblings,
        claims,
    })
}

/// Strategies keyed by player name, then by `"state@signal"`; the state
/// stands for the player's block containing it.
fn parse_strategies(
    structure: &InformationStructure,
    game: &BayesianGame,
    tau: &StochasticSignaling,
    v: &Value,
    path: &str,
) -> Result<StrategyProfile> {
    let guided = GuidedGame::new(structure, game, tau).map_err(|e| perr(path, e.to_string()))?;
    let mut strategies = Vec::new();
    for (i, named) in structure.players.iter().enumerate() {
        let ipath = format!("{path}.{}", named.name);
        let obj = v
            .get(&named.name)
            .and_then(Value::as_object)
            .ok_or_else(|| perr(&ipath, "missing strategy object"))?;
        let mut map: BTreeMap<InfoSet, Vec<Rational>> = BTreeMap::new();
        for (key, choice) in obj {
            let kpath = format!("{ipath}.{key}");
            let (state, signal) = key
                .rsplit_once('@')
                .ok_or_else(|| perr(&kpath, "expected \"state@signal\""))?;
            let w = structure.space.index_of(state).map_err(|e| perr(&kpath, e.to_string()))?;
            let s = tau.signal_index(signal).map_err(|e| perr(&kpath, e.to_string()))?;
            let mut mix = vec![Rational::zero(); game.actions(i).len()];
            match choice {
                Value::String(a) => mix[game.action_index(i, a).map_err(|e| perr(&kpath, e.to_string()))?] = Rational::one(),
                Value::Object(m) => {
                    for (a, p) in m {
                        mix[game.action_index(i, a).map_err(|e| perr(&kpath, e.to_string()))?] =
                            rational_value(p, &format!("{kpath}.{a}"))?;
                    }
                }
                _ => return Err(perr(&kpath, "expected an action label or an action-to-probability object")),
            }
            let k = guided.infoset(i, w, s);
            if map.get(&k).is_some_and(|prev| *prev != mix) {
                return Err(perr(&kpath, "conflicts with another entry for the same information set"));
            }
            map.insert(k, mix);
        }
        strategies.push(map);
    }
    Ok(StrategyProfile { strategies })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimResult {
    pub id: String,
    pub op: String,
    pub expected: Value,
    pub actual: Value,
    pub provenance: String,
    pub pass: bool,
    #[serde(skip)]
    pub resource_error: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub fixture: String,
    pub claims: Vec<ClaimResult>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.claims.iter().filter(|c| !c.pass).count()
    }

    pub fn hit_resource_cap(&self) -> bool {
        self.claims.iter().any(|c| c.resource_error)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} ({}/{} claims pass)",
            self.fixture,
            self.claims.len() - self.failures(),
            self.claims.len()
        );
        for c in &self.claims {
            let _ = writeln!(
                out,
                "  [{}] {} ({}, {}): {}",
                if c.pass { "pass" } else { "FAIL" },
                c.id,
                c.op,
                c.provenance,
                compact(&c.actual)
            );
            if !c.pass {
                let _ = writeln!(out, "         expected {}", compact(&c.expected));
            }
        }
        out
    }
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("json value serializes")
}

pub fn run_fixture(name: &str) -> Result<FixtureReport> {
    Ok(run_loaded(&load_fixture(name)?))
}

pub fn run_loaded(fx: &Fixture) -> FixtureReport {
    let claims = fx
        .claims
        .iter()
        .map(|c| {
            let expected = canonical_expected(fx, c);
            let (actual, resource_error) = match evaluate(fx, c) {
                Ok(v) => (v, false),
                Err(e) => (json!({ "error": e.to_string() }), matches!(e, Error::Resource { .. })),
            };
            ClaimResult {
                id: c.id.clone(),
                op: c.op.clone(),
                pass: matches(&expected, &actual),
                expected,
                actual,
                provenance: c.provenance.clone(),
                resource_error,
            }
        })
        .collect();
    FixtureReport {
        fixture: fx.name.clone(),
        claims,
    }
}

const PARTITION_OPS: &[&str] = &["ckc", "join", "meet", "imi_witness"];

/// Partition-valued expectations are re-rendered in canonical block order.
fn canonical_expected(fx: &Fixture, c: &Claim) -> Value {
    if !PARTITION_OPS.contains(&c.op.as_str()) || !c.expected.is_array() {
        return c.expected.clone();
    }
    let Some(s) = &fx.structure else {
        return c.expected.clone();
    };
    match parse_partition(&s.space, &c.expected, "expected") {
        Ok(p) => partition_json(&p, &s.space),
        Err(_) => c.expected.clone(),
    }
}

fn as_rational(v: &Value) -> Option<Rational> {
    match v {
        Value::String(s) => parse_rational(s).ok(),
        Value::Number(n) => parse_rational(&n.to_string()).ok(),
        _ => None,
    }
}

/// Does `actual` satisfy `expected`? See the module docs for the rules.
pub fn matches(expected: &Value, actual: &Value) -> bool {
    if let Some(obj) = expected.as_object() {
        if obj.len() == 1 {
            let (k, bound) = obj.iter().next().expect("one entry");
            if let Some(cmp) = match k.as_str() {
                "lt" => Some(std::cmp::Ordering::is_lt as fn(std::cmp::Ordering) -> bool),
                "le" => Some(std::cmp::Ordering::is_le as fn(std::cmp::Ordering) -> bool),
                "gt" => Some(std::cmp::Ordering::is_gt as fn(std::cmp::Ordering) -> bool),
                "ge" => Some(std::cmp::Ordering::is_ge as fn(std::cmp::Ordering) -> bool),
                _ => None,
            } {
                return match (as_rational(actual), as_rational(bound)) {
                    (Some(a), Some(b)) => cmp(a.cmp(&b)),
                    _ => false,
                };
            }
            if k == "error" {
                return match (actual.get("error").and_then(Value::as_str), bound.as_str()) {
                    (Some(msg), Some(want)) => msg.contains(want),
                    _ => false,
                };
            }
        }
        let Some(act) = actual.as_object() else {
            return false;
        };
        return obj.iter().all(|(k, e)| act.get(k).is_some_and(|a| matches(e, a)));
    }
    match (expected, actual) {
        (Value::Array(e), Value::Array(a)) => e.len() == a.len() && e.iter().zip(a).all(|(x, y)| matches(x, y)),
        (Value::Null, Value::Null) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (e, a) => match (as_rational(e), as_rational(a)) {
            (Some(x), Some(y)) => x == y,
            _ => e.is_string() && e == a,
        },
    }
}

struct Ctx<'f> {
    fx: &'f Fixture,
    args: &'f Value,
}

impl<'f> Ctx<'f> {
    fn structure(&self) -> Result<&'f InformationStructure> {
        self.fx
            .structure
            .as_ref()
            .ok_or_else(|| Error::domain(format!("fixture {} has no structure", self.fx.name)))
    }

    fn arg(&self, key: &str) -> Result<&'f Value> {
        self.args
            .get(key)
            .ok_or_else(|| Error::domain(format!("missing argument {key:?}")))
    }

    fn text(&self, key: &str) -> Result<&'f str> {
        self.arg(key)?
            .as_str()
            .ok_or_else(|| Error::domain(format!("argument {key:?} must be a string")))
    }

    fn partition(&self, key: &str) -> Result<&'f Partition> {
        self.structure()?.partition(self.text(key)?)
    }

    fn state(&self, key: &str) -> Result<usize> {
        self.structure()?.space.index_of(self.text(key)?)
    }

    fn states(&self, key: &str) -> Result<Vec<usize>> {
        let s = self.structure()?;
        self.arg(key)?
            .as_array()
            .ok_or_else(|| Error::domain(format!("argument {key:?} must be a list of states")))?
            .iter()
            .map(|x| s.space.index_of(x.as_str().unwrap_or_default()))
            .collect()
    }

    fn player(&self, key: &str) -> Result<usize> {
        self.structure()?.player_index(self.text(key)?)
    }

    fn signaling(&self, key: &str) -> Result<&'f Signaling> {
        let name = self.text(key)?;
        self.fx
            .signalings
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown signaling {name:?}")))
    }

    fn tau(&self, key: &str) -> Result<&'f StochasticSignaling> {
        Ok(&self.signaling(key)?.stochastic)
    }

    fn det(&self, key: &str) -> Result<&'f DeterministicSignaling> {
        self.signaling(key)?
            .deterministic
            .as_ref()
            .ok_or_else(|| Error::domain(format!("signaling {:?} is not deterministic", self.text(key).unwrap_or(""))))
    }

    fn game(&self, key: &str) -> Result<&'f BayesianGame> {
        let name = self.text(key)?;
        self.fx
            .games
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown game {name:?}")))
    }

    fn profile(&self) -> Result<(GuidedGame<'f>, &'f StrategyProfile)> {
        let name = self.text("profile")?;
        let p = self
            .fx
            .profiles
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown profile {name:?}")))?;
        let tau = &self.fx.signalings[&p.signaling].stochastic;
        let game = &self.fx.games[&p.game];
        Ok((GuidedGame::new(self.structure()?, game, tau)?, &p.sigma))
    }

    fn matrix(&self, key: &str) -> Result<&'f ExperimentMatrix> {
        let name = self.text(key)?;
        self.fx
            .matrices
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown matrix {name:?}")))
    }

    fn garbling(&self, key: &str) -> Result<&'f Garbling> {
        let name = self.text(key)?;
        self.fx
            .garblings
            .get(name)
            .ok_or_else(|| Error::domain(format!("unknown garbling {name:?}")))
    }

    fn rational(&self, key: &str) -> Result<Option<Rational>> {
        self.args.get(key).map(|v| rational_value(v, key)).transpose()
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.arg(key)?
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::domain(format!("argument {key:?} must be a nonnegative integer")))
    }

    /// A structure narrowed to the optional `"ckc"` argument.
    fn scoped(&self) -> Result<std::borrow::Cow<'f, InformationStructure>> {
        match self.args.get("ckc") {
            None => Ok(std::borrow::Cow::Borrowed(self.structure()?)),
            Some(_) => Ok(std::borrow::Cow::Owned(restrict_to_ckc(self.structure()?, &self.states("ckc")?)?)),
        }
    }
}

fn dist_value(v: &Value) -> Result<Distribution> {
    let items = v.as_array().ok_or_else(|| Error::domain("a distribution must be a list"))?;
    Distribution::new(
        items
            .iter()
            .enumerate()
            .map(|(k, x)| rational_value(x, &format!("[{k}]")))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn dists_value(v: &Value) -> Result<Vec<Distribution>> {
    v.as_array()
        .ok_or_else(|| Error::domain("expected a list of distributions"))?
        .iter()
        .map(dist_value)
        .collect()
}

fn r(x: &Rational) -> Value {
    json!(fmt_rational(x))
}

/// Runs one claim's operation and returns its result as JSON.
pub fn evaluate(fx: &Fixture, claim: &Claim) -> Result<Value> {
    let cx = Ctx { fx, args: &claim.args };
    match claim.op.as_str() {
        "ckc" => {
            let s = cx.structure()?;
            Ok(partition_json(&ckc_decompose(&s.player_partitions())?, &s.space))
        }
        "join" | "meet" => {
            let s = cx.structure()?;
            let names = cx.arg("parts")?.as_array().ok_or_else(|| Error::domain("\"parts\" must be a list"))?;
            let parts = names
                .iter()
                .map(|n| s.partition(n.as_str().unwrap_or_default()))
                .collect::<Result<Vec<_>>>()?;
            let p = if claim.op == "join" { join_all(&parts)? } else { meet(&parts)? };
            Ok(partition_json(&p, &s.space))
        }
        "refines" => {
            let (a, b) = (cx.partition("a")?, cx.partition("b")?);
            match cx.args.get("within") {
                None => Ok(json!(refines(a, b)?)),
                Some(_) => {
                    let w = cx.states("within")?;
                    Ok(json!(refines(&a.restrict(&w), &b.restrict(&w))?))
                }
            }
        }
        "connect_path" => {
            let s = cx.structure()?;
            let path = connect_path(&s.player_partitions(), cx.state("from")?, cx.state("to")?)?;
            Ok(path.map_or(Value::Null, |p| json!(p.len())))
        }
        "imi" | "det_dominates" | "imi_witness" => {
            let s = cx.scoped()?;
            let (f1, f2) = (s.partition(cx.text("f1")?)?, s.partition(cx.text("f2")?)?);
            let v = if claim.op == "det_dominates" { det_dominates(&s, f1, f2)? } else { is_imi(&s, f1, f2)? };
            if claim.op == "imi_witness" {
                Ok(v.witness.map_or(Value::Null, |w| partition_json(&w, &s.space)))
            } else {
                Ok(json!(v.holds))
            }
        }
        "imi_matches" => {
            let s = cx.structure()?;
            let f1 = cx.partition("f1")?;
            let f2 = cx.partition("f2")?;
            let target = parse_partition(&s.space, cx.arg("target")?, "target")?;
            if !refines(f2, &target)? {
                return Err(Error::domain("target is not a coarsening of f2"));
            }
            let goal = s.players.iter().map(|p| join(&p.partition, &target)).collect::<Result<Vec<_>>>()?;
            for c in coarsenings(f1, COARSENING_BLOCK_CAP)? {
                let got = s.players.iter().map(|p| join(&p.partition, &c)).collect::<Result<Vec<_>>>()?;
                if got == goal {
                    return Ok(json!(true));
                }
            }
            Ok(json!(false))
        }
        "two_sided_imi" => {
            let s = cx.scoped()?;
            let v = two_sided_imi_equal(&s, s.partition(cx.text("f1")?)?, s.partition(cx.text("f2")?)?)?;
            Ok(json!({"forward": v.forward, "backward": v.backward, "equal": v.equal, "consistent": v.consistent}))
        }
        "unique_ckc_dominates" => {
            let s = cx.scoped()?;
            Ok(json!(unique_ckc_dominates(&s, s.partition(cx.text("f1")?)?, s.partition(cx.text("f2")?)?)?))
        }
        "common_objective" => Ok(json!(common_objective_condition(
            cx.structure()?,
            cx.partition("f1")?,
            cx.partition("f2")?
        )?)),
        "conditional" => Ok(distribution_json(&conditional(&cx.structure()?.prior, &cx.states("event")?)?)),
        "det_posterior" => Ok(distribution_json(&det_posterior(
            cx.structure()?,
            cx.player("player")?,
            cx.det("signaling")?,
            cx.state("state")?,
        )?)),
        "stoch_posterior" => {
            let tau = cx.tau("signaling")?;
            Ok(distribution_json(&stoch_posterior(
                cx.structure()?,
                cx.player("player")?,
                tau,
                cx.state("state")?,
                tau.signal_index(cx.text("signal")?)?,
            )?))
        }
        "joint_posterior" => {
            let tau = cx.tau("signaling")?;
            let p = joint_posterior(cx.structure()?, tau, cx.state("state")?, tau.signal_index(cx.text("signal")?)?)?;
            Ok(Value::Array(p.iter().map(distribution_json).collect()))
        }
        "atlas" => Ok(atlas_json(cx.structure()?, &posterior_atlas(cx.structure()?, cx.tau("signaling")?)?)),
        "atlas_size" => Ok(json!(posterior_atlas(cx.structure()?, cx.tau("signaling")?)?.len())),
        "atlas_contains" | "atlas_weight" => {
            let atlas = posterior_atlas(cx.structure()?, cx.tau("signaling")?)?;
            let profile = dists_value(cx.arg("profile")?)?;
            if claim.op == "atlas_contains" {
                Ok(json!(atlas.contains(&profile)))
            } else {
                Ok(r(&atlas.weight(&profile)))
            }
        }
        "post_included" => Ok(json!(post_included(cx.structure()?, cx.tau("a")?, cx.tau("b")?)?)),
        "post_equal" => Ok(json!(post_equal(cx.structure()?, cx.tau("a")?, cx.tau("b")?)?)),
        "atlas_equal" => Ok(json!(atlas_equal(cx.structure()?, cx.tau("a")?, cx.tau("b")?)?)),
        "measurable" => Ok(json!(cx.tau("signaling")?.with_oracle(cx.partition("oracle")?.clone()).is_ok())),
        "experiment_matrix" | "experiment_row" => {
            let m = experiment_matrix(cx.tau("signaling")?, cx.partition("info")?)?;
            if claim.op == "experiment_row" {
                Ok(rationals_json(&m.rows[cx.state("state")?]))
            } else {
                Ok(json!({"columns": m.columns, "rows": crate::io::matrix_json(&m.rows)}))
            }
        }
        "garbling_exists" => Ok(json!(garbling_exists(cx.matrix("m1")?, cx.matrix("m2")?)?.is_some())),
        "proportional_decompose" => {
            let (t1, t2) = (cx.tau("tau1")?, cx.tau("tau2")?);
            Ok(Value::Array(
                proportional_decompose(t1, t2)?
                    .into_iter()
                    .map(|o| o.map_or(Value::Null, |(s, c)| json!({"signal": t2.signals()[s], "factor": fmt_rational(&c)})))
                    .collect(),
            ))
        }
        "separating_probabilities" => Ok(rationals_json(&separating_probabilities(cx.usize("m")?))),
        "expected_payoffs" => {
            let (g, sigma) = cx.profile()?;
            Ok(rationals_json(&g.expected_payoffs(sigma)?))
        }
        "conditional_payoffs" => {
            let (g, sigma) = cx.profile()?;
            Ok(rationals_json(&g.conditional_payoffs(sigma, &cx.states("event")?)?))
        }
        "ned_mass" => {
            let (g, sigma) = cx.profile()?;
            let labels = cx.arg("actions")?.as_array().ok_or_else(|| Error::domain("\"actions\" must be a list"))?;
            let profile = labels
                .iter()
                .enumerate()
                .map(|(i, a)| g.game.action_index(i, a.as_str().unwrap_or_default()))
                .collect::<Result<Vec<_>>>()?;
            Ok(r(&g.ned_distribution(sigma)?.get(cx.state("state")?, &profile)))
        }
        "ned_state_marginal" => {
            let (g, sigma) = cx.profile()?;
            Ok(rationals_json(&g.ned_distribution(sigma)?.state_marginal(g.structure.n_states())))
        }
        "is_equilibrium" => {
            let (g, sigma) = cx.profile()?;
            Ok(json!(g.is_equilibrium(sigma)?))
        }
        "pure_equilibria_count" => {
            let g = GuidedGame::new(cx.structure()?, cx.game("game")?, cx.tau("signaling")?)?;
            Ok(json!(g.enumerate_pure_equilibria(DEFAULT_PROFILE_CAP)?.len()))
        }
        "best_common_payoff" => {
            let g = GuidedGame::new(cx.structure()?, cx.game("game")?, cx.tau("signaling")?)?;
            Ok(r(&g.best_common_payoff(DEFAULT_PROFILE_CAP)?.0))
        }
        "garbled_best_common_payoff" | "lifted_best_common_payoff" => {
            let m = cx.garbling("garbling")?;
            let tau = cx.tau("signaling")?;
            let garbled = if claim.op == "lifted_best_common_payoff" {
                lift_garbled(tau, m)?.signaling
            } else {
                garble(tau, m)?
            };
            let g = GuidedGame::new(cx.structure()?, cx.game("game")?, &garbled)?;
            Ok(r(&g.best_common_payoff(DEFAULT_PROFILE_CAP)?.0))
        }
        "garble" => Ok(crate::io::matrix_json(garble(cx.tau("signaling")?, cx.garbling("garbling")?)?.kernel())),
        "permutation_actions" | "permutation_row" | "permutation_reference_value" | "permutation_value" => {
            let s = cx.structure()?;
            let pg = build_permutation_game(s, cx.player("player")?, cx.det("signaling")?, DEFAULT_PROFILE_CAP)?;
            match claim.op.as_str() {
                "permutation_actions" => Ok(json!(pg.problem.actions.len())),
                "permutation_row" => {
                    let label = cx.text("action")?;
                    let a = pg
                        .problem
                        .actions
                        .iter()
                        .position(|x| x == label)
                        .ok_or_else(|| Error::domain(format!("no action {label:?}")))?;
                    Ok(rationals_json(&pg.problem.payoff[a]))
                }
                "permutation_reference_value" => Ok(r(&pg.reference_value(&s.prior))),
                _ => Ok(r(&crate::games::decision_value(s, pg.player, cx.det("info")?, &pg.problem)?)),
            }
        }
        "belief_payoffs" => {
            let target = dists_value(cx.arg("target")?)?;
            let g = build_belief_game(&target)?;
            let beliefs = match cx.args.get("beliefs") {
                Some(b) => dists_value(b)?,
                None => target.clone(),
            };
            if beliefs.len() != target.len() {
                return Err(Error::domain("one belief per player is required"));
            }
            let guesses: Vec<usize> = (0..g.n_players()).map(|i| g.best_responses(i, &beliefs[i])[0]).collect();
            Ok(json!({
                "payoffs": rationals_json(&g.interim_payoffs(&beliefs, &guesses)),
                "aggregate": fmt_rational(&g.aggregate(&beliefs, &guesses)),
                "equilibrium": g.find_deviation(&beliefs, &guesses).is_none(),
            }))
        }
        "two_stage_truthful" => {
            let s = cx.structure()?;
            let tau2 = cx.tau("reference")?;
            let g = build_two_stage_game(s, tau2, cx.rational("penalty")?)?;
            let truthful = g.truthful_profile()?;
            Ok(json!({
                "aggregate": fmt_rational(&g.aggregate(tau2, &truthful)?),
                "equilibrium": g.find_deviation(tau2, &truthful)?.is_none(),
                "penalty": fmt_rational(g.penalty()),
            }))
        }
        "two_stage_max_aggregate" => {
            let s = cx.structure()?;
            let g = build_two_stage_game(s, cx.tau("reference")?, cx.rational("penalty")?)?;
            let b = g.max_aggregate(cx.tau("actual")?)?;
            Ok(json!({
                "bound": fmt_rational(&b.bound),
                "best_feasible": b.best_feasible.as_ref().map(|(v, _)| fmt_rational(v)),
                "infeasible_bound": fmt_rational(&b.infeasible_bound),
            }))
        }
        "two_stage_mismatch" => {
            let s = cx.structure()?;
            let tau2 = cx.tau("reference")?;
            if tau2.n_signals() < 2 {
                return Err(Error::domain("a mismatch needs at least two reference signals"));
            }
            let g = build_two_stage_game(s, tau2, cx.rational("penalty")?)?;
            let mut profile: DeclarationProfile = g.truthful_profile()?;
            for (i, slot) in profile.iter_mut().enumerate() {
                for d in slot.values_mut() {
                    *d = Declaration::Report {
                        signal: usize::from(i > 0),
                        posterior: 0,
                    };
                }
            }
            let pay = g.expected_payoffs(tau2, &profile)?;
            Ok(json!(pay.iter().all(|u| *u == -g.penalty().clone())))
        }
        "kld_truthful" => {
            let s = cx.structure()?;
            let tau2 = cx.tau("reference")?;
            let k = build_kld_game(s, tau2)?;
            let reports = k.optimal_reports(tau2)?;
            let truthful = reports.iter().enumerate().all(|(i, rep)| {
                rep.iter().all(|(set, &idx)| {
                    let w = (0..s.n_states())
                        .find(|&w| s.player(i).block_of(w) == set.block && !tau2.prob(w, set.signal).is_zero())
                        .expect("reported sets are reachable");
                    stoch_posterior(s, i, tau2, w, set.signal).is_ok_and(|q| q == k.menu(i)[idx])
                })
            });
            Ok(json!(truthful))
        }
        "kld_menu_size" => {
            let k = build_kld_game(cx.structure()?, cx.tau("reference")?)?;
            Ok(json!(k.menu(cx.player("player")?).len()))
        }
        "kld_support_equal" => {
            let s = cx.structure()?;
            let k = build_kld_game(s, cx.tau("reference")?)?;
            let actual = cx.tau("actual")?;
            let support = k.reported_support(actual, &k.optimal_reports(actual)?)?;
            let reference: BTreeSet<_> = posterior_atlas(s, cx.tau("reference")?)?.post_set();
            Ok(json!(support == reference))
        }
        "log_score_argmax" => {
            let q = dist_value(cx.arg("q")?)?;
            let candidates = dists_value(cx.arg("candidates")?)?;
            Ok(distribution_json(log_score_argmax(&q, &candidates)?))
        }
        "combined" => {
            let s = cx.structure()?;
            let tau2 = cx.tau("reference")?;
            let g = build_combined_game(s, tau2, cx.rational("penalty")?)?;
            let truthful = g.two_stage.truthful_profile()?;
            let reports = g.kld.optimal_reports(tau2)?;
            let base = g.aggregate(tau2, &truthful, &reports)?;
            match cx.args.get("actual") {
                None => Ok(json!({"rational": fmt_rational(&base.rational), "log": base.log.to_string()})),
                Some(_) => {
                    let actual = cx.tau("actual")?;
                    let half = Rational::new(1.into(), 2.into());
                    let bound = g.two_stage.max_aggregate(actual)?.bound * &half;
                    let support = g.kld.reported_support(actual, &g.kld.optimal_reports(actual)?)?;
                    let reference = g.kld.reported_support(tau2, &reports)?;
                    Ok(json!({
                        "two_stage_drop": bound < base.rational,
                        "kld_support_changed": support != reference,
                    }))
                }
            }
        }
        other => Err(Error::domain(format!("unknown claim operation {other:?}"))),
    }
}
