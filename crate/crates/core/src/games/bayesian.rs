use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, sum, Rational};
use crate::signaling::StochasticSignaling;
use crate::types::InformationStructure;

/// Default cap on the number of pure profiles a sweep may visit.
pub const DEFAULT_PROFILE_CAP: u128 = 2_000_000;

/// Finite game with state-dependent payoffs. Profiles are indexed in
/// lexicographic order with player 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BayesianGame {
    players: Vec<String>,
    actions: Vec<Vec<String>>,
    // [state][profile][player]
    payoffs: Vec<Vec<Vec<Rational>>>,
}

impl BayesianGame {
    pub fn new(players: Vec<String>, actions: Vec<Vec<String>>, payoffs: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        if players.len() != actions.len() || players.is_empty() {
            return Err(Error::domain("one nonempty action list per player required"));
        }
        if let Some(i) = actions.iter().position(Vec::is_empty) {
            return Err(Error::domain(format!("player {:?} has no actions", players[i])));
        }
        let g = BayesianGame {
            players,
            actions,
            payoffs: Vec::new(),
        };
        let n_profiles = g.n_profiles();
        for (w, table) in payoffs.iter().enumerate() {
            if table.len() != n_profiles {
                return Err(Error::domain(format!(
                    "state index {w} has {} payoff entries for {n_profiles} profiles",
                    table.len()
                )));
            }
            if table.iter().any(|u| u.len() != g.players.len()) {
                return Err(Error::domain(format!("state index {w} has a payoff vector of the wrong length")));
            }
        }
        Ok(BayesianGame { payoffs, ..g })
    }

    /// Builds payoffs from `f(state, profile)`.
    pub fn from_fn(
        players: Vec<String>,
        actions: Vec<Vec<String>>,
        n_states: usize,
        f: impl Fn(usize, &[usize]) -> Vec<Rational>,
    ) -> Result<Self> {
        let shell = BayesianGame {
            players: players.clone(),
            actions: actions.clone(),
            payoffs: Vec::new(),
        };
        let payoffs = (0..n_states)
            .map(|w| (0..shell.n_profiles()).map(|k| f(w, &shell.decode(k))).collect())
            .collect();
        BayesianGame::new(players, actions, payoffs)
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn n_states(&self) -> usize {
        self.payoffs.len()
    }

    pub fn actions(&self, i: usize) -> &[String] {
        &self.actions[i]
    }

    pub fn action_index(&self, i: usize, label: &str) -> Result<usize> {
        self.actions[i]
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::domain(format!("player {:?} has no action {label:?}", self.players[i])))
    }

    pub fn n_profiles(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    pub fn encode(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, acts)| acc * acts.len() + a)
    }

    pub fn decode(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.actions.len()];
        for i in (0..self.actions.len()).rev() {
            out[i] = k % self.actions[i].len();
            k /= self.actions[i].len();
        }
        out
    }

    pub fn payoff(&self, state: usize, profile: &[usize]) -> &[Rational] {
        &self.payoffs[state][self.encode(profile)]
    }

    /// All players receive the same payoff everywhere.
    pub fn is_common_payoff(&self) -> bool {
        self.payoffs
            .iter()
            .flatten()
            .all(|u| u.iter().all(|x| *x == u[0]))
    }

    /// Multiplies player `i`'s payoffs by `a > 0` and adds `b`.
    pub fn rescaled(&self, i: usize, a: &Rational, b: &Rational) -> BayesianGame {
        let mut g = self.clone();
        for u in g.payoffs.iter_mut().flatten() {
            u[i] = &u[i] * a + b;
        }
        g
    }
}

/// Information set of one player: own block and public signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSet {
    pub block: usize,
    pub signal: usize,
}

/// Per player, a mixed action at every reachable information set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrategyProfile {
    pub strategies: Vec<BTreeMap<InfoSet, Vec<Rational>>>,
}

impl StrategyProfile {
    pub fn pure(game: &BayesianGame, choices: &[BTreeMap<InfoSet, usize>]) -> Self {
        let strategies = choices
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.iter()
                    .map(|(&k, &a)| {
                        let mut v = vec![Rational::zero(); game.actions(i).len()];
                        v[a] = Rational::one();
                        (k, v)
                    })
                    .collect()
            })
            .collect();
        StrategyProfile { strategies }
    }

    /// Pure action at each information set, when the profile is pure.
    pub fn as_pure(&self) -> Option<Vec<BTreeMap<InfoSet, usize>>> {
        self.strategies
            .iter()
            .map(|m| {
                m.iter()
                    .map(|(&k, v)| v.iter().position(One::is_one).map(|a| (k, a)))
                    .collect()
            })
            .collect()
    }
}

/// Per public signal: the `(player, block)` variables, their chosen
/// actions and the signal index.
type SignalChoice = (Vec<(usize, usize)>, Vec<usize>, usize);

/// Probability of each (state, action profile) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub mass: BTreeMap<(usize, Vec<usize>), Rational>,
}

impl OutcomeDistribution {
    pub fn get(&self, state: usize, profile: &[usize]) -> Rational {
        self.mass
            .get(&(state, profile.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn state_marginal(&self, n_states: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n_states];
        for ((w, _), m) in &self.mass {
            v[*w] += m;
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub player: usize,
    pub infoset: InfoSet,
    pub action: usize,
    pub gain: Rational,
}

/// A game together with the structure it is played on and the public
/// signaling that guides it.
#[derive(Clone, Debug)]
pub struct GuidedGame<'a> {
    pub structure: &'a InformationStructure,
    pub game: &'a BayesianGame,
    pub tau: &'a StochasticSignaling,
}

struct Event {
    state: usize,
    signal: usize,
    weight: Rational,
}

impl<'a> GuidedGame<'a> {
    pub fn new(structure: &'a InformationStructure, game: &'a BayesianGame, tau: &'a StochasticSignaling) -> Result<Self> {
        if game.n_players() != structure.n_players() {
            return Err(Error::domain(format!(
                "game has {} players, structure has {}",
                game.n_players(),
                structure.n_players()
            )));
        }
        if game.n_states() != structure.n_states() || tau.n_states() != structure.n_states() {
            return Err(Error::domain("game, signaling and structure disagree on the state count"));
        }
        Ok(GuidedGame { structure, game, tau })
    }

    fn events(&self) -> Vec<Event> {
        let mut out = Vec::new();
        for state in 0..self.tau.n_states() {
            for signal in 0..self.tau.n_signals() {
                let p = self.tau.prob(state, signal);
                if !p.is_zero() {
                    out.push(Event {
                        state,
                        signal,
                        weight: self.structure.prior.get(state) * p,
                    });
                }
            }
        }
        out
    }

    pub fn infoset(&self, i: usize, state: usize, signal: usize) -> InfoSet {
        InfoSet {
            block: self.structure.player(i).block_of(state),
            signal,
        }
    }

    /// Information sets of player `i` reached with positive probability.
    pub fn reachable(&self, i: usize) -> Vec<InfoSet> {
        let mut v: Vec<InfoSet> = self.events().iter().map(|e| self.infoset(i, e.state, e.signal)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Checks totality on reachable sets and that each entry is a
    /// probability vector over the player's actions.
    pub fn validate(&self, sigma: &StrategyProfile) -> Result<()> {
        if sigma.strategies.len() != self.game.n_players() {
            return Err(Error::domain("strategy profile has the wrong number of players"));
        }
        for (i, strat) in sigma.strategies.iter().enumerate() {
            let reach = self.reachable(i);
            for k in &reach {
                let v = strat.get(k).ok_or_else(|| {
                    Error::domain(format!(
                        "player {:?} has no action at block {} with signal {:?}",
                        self.game.players()[i],
                        k.block,
                        self.tau.signals()[k.signal]
                    ))
                })?;
                if v.len() != self.game.actions(i).len() || v.iter().any(|x| x.is_negative()) || !sum(v).is_one() {
                    return Err(Error::domain(format!(
                        "player {:?} has an invalid mixed action at block {}",
                        self.game.players()[i],
                        k.block
                    )));
                }
            }
            if let Some(extra) = strat.keys().find(|k| !reach.contains(k)) {
                return Err(Error::domain(format!(
                    "player {:?} has a strategy entry at unreachable block {} with signal index {}",
                    self.game.players()[i],
                    extra.block,
                    extra.signal
                )));
            }
        }
        Ok(())
    }

    fn mixed<'s>(&self, sigma: &'s StrategyProfile, i: usize, state: usize, signal: usize) -> &'s [Rational] {
        &sigma.strategies[i][&self.infoset(i, state, signal)]
    }

    /// Action profiles with positive probability at an event, optionally with
    /// player `fixed.0` forced to play `fixed.1`.
    fn profile_mass(
        &self,
        sigma: &StrategyProfile,
        state: usize,
        signal: usize,
        fixed: Option<(usize, usize)>,
    ) -> Vec<(Vec<usize>, Rational)> {
        let mut acc: Vec<(Vec<usize>, Rational)> = vec![(Vec::new(), Rational::one())];
        for i in 0..self.game.n_players() {
            let options: Vec<(usize, Rational)> = match fixed {
                Some((j, a)) if j == i => vec![(a, Rational::one())],
                _ => self
                    .mixed(sigma, i, state, signal)
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(a, p)| (a, p.clone()))
                    .collect(),
            };
            acc = acc
                .into_iter()
                .flat_map(|(prof, m)| {
                    options.iter().map(move |(a, p)| {
                        let mut next = prof.clone();
                        next.push(*a);
                        (next, &m * p)
                    })
                })
                .collect();
        }
        acc
    }

    pub fn ned_distribution(&self, sigma: &StrategyProfile) -> Result<OutcomeDistribution> {
        self.validate(sigma)?;
        let mut mass: BTreeMap<(usize, Vec<usize>), Rational> = BTreeMap::new();
        for e in self.events() {
            for (prof, p) in self.profile_mass(sigma, e.state, e.signal, None) {
                *mass.entry((e.state, prof)).or_insert_with(Rational::zero) += &e.weight * p;
            }
        }
        Ok(OutcomeDistribution { mass })
    }

    fn payoff_sum(&self, sigma: &StrategyProfile, keep: impl Fn(usize) -> bool) -> Vec<Rational> {
        let mut total = vec![Rational::zero(); self.game.n_players()];
        for e in self.events().into_iter().filter(|e| keep(e.state)) {
            for (prof, p) in self.profile_mass(sigma, e.state, e.signal, None) {
                let m = &e.weight * p;
                for (t, u) in total.iter_mut().zip(self.game.payoff(e.state, &prof)) {
                    *t += &m * u;
                }
            }
        }
        total
    }

    pub fn expected_payoffs(&self, sigma: &StrategyProfile) -> Result<Vec<Rational>> {
        self.validate(sigma)?;
        Ok(self.payoff_sum(sigma, |_| true))
    }

    /// Expected payoffs conditional on the state lying in `event`.
    pub fn conditional_payoffs(&self, sigma: &StrategyProfile, event: &[usize]) -> Result<Vec<Rational>> {
        self.validate(sigma)?;
        let mass = self.structure.prior.event_mass(event);
        if mass.is_zero() {
            return Err(Error::domain("conditioning on an empty event"));
        }
        let totals = self.payoff_sum(sigma, |w| event.contains(&w));
        Ok(totals.into_iter().map(|t| t / &mass).collect())
    }

    /// Value to player `i` of each action at information set `k`, weighted
    /// by the probability of reaching `k`.
    fn action_values(&self, sigma: &StrategyProfile, i: usize, k: InfoSet) -> Vec<Rational> {
        let block = self.structure.player(i).block(k.block);
        (0..self.game.actions(i).len())
            .map(|a| {
                let mut v = Rational::zero();
                for &w in &block {
                    let t = self.tau.prob(w, k.signal);
                    if t.is_zero() {
                        continue;
                    }
                    let weight = self.structure.prior.get(w) * t;
                    for (prof, p) in self.profile_mass(sigma, w, k.signal, Some((i, a))) {
                        v += &weight * p * &self.game.payoff(w, &prof)[i];
                    }
                }
                v
            })
            .collect()
    }

    /// First profitable pure deviation, scanning players, then information
    /// sets, and proposing the best action there.
    pub fn find_deviation(&self, sigma: &StrategyProfile) -> Result<Option<Deviation>> {
        self.validate(sigma)?;
        for i in 0..self.game.n_players() {
            for k in self.reachable(i) {
                let values = self.action_values(sigma, i, k);
                let current: Rational = values.iter().zip(&sigma.strategies[i][&k]).map(|(v, p)| v * p).sum();
                let (best, val) = values
                    .iter()
                    .enumerate()
                    .fold((0, &values[0]), |acc, (a, v)| if v > acc.1 { (a, v) } else { acc });
                if *val > current {
                    return Ok(Some(Deviation {
                        player: i,
                        infoset: k,
                        action: best,
                        gain: val - current,
                    }));
                }
            }
        }
        Ok(None)
    }

    pub fn is_equilibrium(&self, sigma: &StrategyProfile) -> Result<bool> {
        Ok(self.find_deviation(sigma)?.is_none())
    }

    /// Information sets reached under signal `s`, as (player, block) pairs.
    fn vars_for_signal(&self, s: usize) -> Vec<(usize, usize)> {
        let mut vars = Vec::new();
        for i in 0..self.game.n_players() {
            let mut blocks: Vec<usize> = (0..self.tau.n_states())
                .filter(|&w| !self.tau.prob(w, s).is_zero())
                .map(|w| self.structure.player(i).block_of(w))
                .collect();
            blocks.sort_unstable();
            blocks.dedup();
            vars.extend(blocks.into_iter().map(|b| (i, b)));
        }
        vars
    }

    fn local_count(&self, vars: &[(usize, usize)]) -> u128 {
        vars.iter()
            .map(|&(i, _)| self.game.actions(i).len() as u128)
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// Pure action at each information set for signal `s`, all combinations
    /// in lexicographic order.
    fn local_assignments(&self, vars: &[(usize, usize)]) -> impl Iterator<Item = Vec<usize>> + '_ {
        let radix: Vec<usize> = vars.iter().map(|&(i, _)| self.game.actions(i).len()).collect();
        let total: usize = radix.iter().product();
        (0..total).map(move |mut k| {
            let mut out = vec![0; radix.len()];
            for j in (0..radix.len()).rev() {
                out[j] = k % radix[j];
                k /= radix[j];
            }
            out
        })
    }

    fn pure_action(vars: &[(usize, usize)], assign: &[usize], i: usize, block: usize) -> usize {
        let j = vars
            .iter()
            .position(|&(p, b)| p == i && b == block)
            .expect("variable present for reached block");
        assign[j]
    }

    fn local_profile(&self, vars: &[(usize, usize)], assign: &[usize], state: usize) -> Vec<usize> {
        (0..self.game.n_players())
            .map(|i| Self::pure_action(vars, assign, i, self.structure.player(i).block_of(state)))
            .collect()
    }

    fn local_is_equilibrium(&self, s: usize, vars: &[(usize, usize)], assign: &[usize]) -> bool {
        vars.iter().enumerate().all(|(j, &(i, b))| {
            let block = self.structure.player(i).block(b);
            let value = |a: usize| -> Rational {
                let mut v = Rational::zero();
                for &w in &block {
                    let t = self.tau.prob(w, s);
                    if t.is_zero() {
                        continue;
                    }
                    let mut prof = self.local_profile(vars, assign, w);
                    prof[i] = a;
                    v += self.structure.prior.get(w) * t * &self.game.payoff(w, &prof)[i];
                }
                v
            };
            let current = value(assign[j]);
            (0..self.game.actions(i).len()).all(|a| value(a) <= current)
        })
    }

    fn check_cap(&self, cap: u128) -> Result<Vec<Vec<(usize, usize)>>> {
        let per_signal: Vec<Vec<(usize, usize)>> = (0..self.tau.n_signals()).map(|s| self.vars_for_signal(s)).collect();
        let total = per_signal
            .iter()
            .map(|v| self.local_count(v))
            .fold(0u128, |a, b| a.saturating_add(b));
        if total > cap {
            return Err(Error::resource("pure profile sweep", total, cap));
        }
        Ok(per_signal)
    }

    fn assemble(&self, parts: &[SignalChoice]) -> StrategyProfile {
        let mut choices = vec![BTreeMap::new(); self.game.n_players()];
        for (vars, assign, s) in parts {
            for (&(i, b), &a) in vars.iter().zip(assign) {
                choices[i].insert(InfoSet { block: b, signal: *s }, a);
            }
        }
        StrategyProfile::pure(self.game, &choices)
    }

    /// Every pure equilibrium. Signals are independent subgames, so the set
    /// is the product of the per-signal equilibrium sets.
    pub fn enumerate_pure_equilibria(&self, cap: u128) -> Result<Vec<StrategyProfile>> {
        let per_signal = self.check_cap(cap)?;
        let mut local: Vec<Vec<Vec<usize>>> = Vec::new();
        for (s, vars) in per_signal.iter().enumerate() {
            local.push(
                self.local_assignments(vars)
                    .filter(|a| self.local_is_equilibrium(s, vars, a))
                    .collect(),
            );
        }
        let count = local
            .iter()
            .map(|l| l.len() as u128)
            .fold(1u128, |a, b| a.saturating_mul(b));
        if count > cap {
            return Err(Error::resource("pure equilibrium set", count, cap));
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; local.len()];
        if local.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        loop {
            let parts: Vec<_> = (0..local.len())
                .map(|s| (per_signal[s].clone(), local[s][idx[s]].clone(), s))
                .collect();
            out.push(self.assemble(&parts));
            let mut j = local.len();
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < local[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// Highest expected common payoff over pure profiles, with a profile
    /// attaining it.
    pub fn best_common_payoff(&self, cap: u128) -> Result<(Rational, StrategyProfile)> {
        if !self.game.is_common_payoff() {
            return Err(Error::domain("players do not share a common payoff"));
        }
        let per_signal = self.check_cap(cap)?;
        let mut total = Rational::zero();
        let mut parts = Vec::new();
        for (s, vars) in per_signal.iter().enumerate() {
            let events: Vec<(usize, Rational)> = (0..self.tau.n_states())
                .filter(|&w| !self.tau.prob(w, s).is_zero())
                .map(|w| (w, self.structure.prior.get(w) * self.tau.prob(w, s)))
                .collect();
            let mut best: Option<(Rational, Vec<usize>)> = None;
            for assign in self.local_assignments(vars) {
                let v: Rational = events
                    .iter()
                    .map(|(w, m)| m * &self.game.payoff(*w, &self.local_profile(vars, &assign, *w))[0])
                    .sum();
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, assign));
                }
            }
            let (v, assign) = best.expect("at least one assignment");
            total += v;
            parts.push((vars.clone(), assign, s));
        }
        Ok((total, self.assemble(&parts)))
    }
}

/// Renders a payoff vector as exact strings.
pub fn render_payoffs(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}
