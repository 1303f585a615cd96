use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, int, Rational};
use crate::signaling::{profiles_by_signal, stoch_posterior, StochasticSignaling};
use crate::types::{Distribution, InformationStructure};

use super::bayesian::InfoSet;
use super::beliefs::{build_belief_game, contribution};

/// First-stage move: stay silent, or name a reference signal together with
/// a posterior from the player's menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Declaration {
    Abstain,
    Report { signal: usize, posterior: usize },
}

/// Per player, a declaration at each information set of the actual signaling.
pub type DeclarationProfile = Vec<BTreeMap<InfoSet, Declaration>>;

/// Declaration game followed by the belief game on the declared profile.
/// Declarations not jointly consistent with one reference signal cost every
/// player the penalty `M`.
#[derive(Clone, Debug)]
pub struct TwoStageGame<'a> {
    structure: &'a InformationStructure,
    reference: StochasticSignaling,
    menus: Vec<Vec<Distribution>>,
    // per reference signal, reachable profiles as menu indices
    feasible: Vec<BTreeSet<Vec<usize>>>,
    penalty: Rational,
}

#[derive(Clone, Debug)]
pub struct TwoStageDeviation {
    pub player: usize,
    pub infoset: InfoSet,
    pub declaration: Declaration,
    pub gain: Rational,
}

/// Upper bound on the aggregate expected payoff over all pure declaration
/// profiles with best-responding second stages.
#[derive(Clone, Debug)]
pub struct AggregateBound {
    /// Best aggregate among profiles feasible at every event.
    pub best_feasible: Option<(Rational, DeclarationProfile)>,
    /// Any profile infeasible at some event scores at most this.
    pub infeasible_bound: Rational,
    pub bound: Rational,
}

struct Event {
    state: usize,
    signal: usize,
    weight: Rational,
}

pub fn build_two_stage_game<'a>(
    structure: &'a InformationStructure,
    tau2: &StochasticSignaling,
    penalty: Option<Rational>,
) -> Result<TwoStageGame<'a>> {
    if structure.n_players() < 2 {
        return Err(Error::domain("two-stage game needs at least two players"));
    }
    let by_signal = profiles_by_signal(structure, tau2)?;
    let n = structure.n_players();
    let mut menu_sets: Vec<BTreeSet<Distribution>> = vec![BTreeSet::new(); n];
    for set in &by_signal {
        for prof in set {
            for (i, d) in prof.iter().enumerate() {
                menu_sets[i].insert(d.clone());
            }
        }
    }
    let menus: Vec<Vec<Distribution>> = menu_sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let feasible = by_signal
        .iter()
        .map(|set| {
            set.iter()
                .map(|prof| {
                    prof.iter()
                        .enumerate()
                        .map(|(i, d)| menus[i].binary_search(d).expect("menu holds every marginal"))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut game = TwoStageGame {
        structure,
        reference: tau2.clone(),
        menus,
        feasible,
        penalty: Rational::zero(),
    };
    let bound = game.penalty_bound();
    game.penalty = match penalty {
        Some(m) if m < bound => {
            return Err(Error::domain(format!(
                "penalty {} is below the safety bound {}",
                fmt_rational(&m),
                fmt_rational(&bound)
            )))
        }
        Some(m) => m,
        None => bound,
    };
    Ok(game)
}

impl<'a> TwoStageGame<'a> {
    pub fn penalty(&self) -> &Rational {
        &self.penalty
    }

    pub fn menu(&self, i: usize) -> &[Distribution] {
        &self.menus[i]
    }

    pub fn reference(&self) -> &StochasticSignaling {
        &self.reference
    }

    /// Largest absolute payoff in any continuation belief game.
    pub fn max_continuation_payoff(&self) -> Rational {
        let n = self.structure.n_players();
        let factor = Rational::new(BigInt::from(2), BigInt::from(n - 1));
        let mut best = Rational::zero();
        for set in &self.feasible {
            for prof in set {
                let p: Vec<&Distribution> = prof.iter().enumerate().map(|(i, &k)| &self.menus[i][k]).collect();
                for w in 0..self.structure.n_states() {
                    // range of R_j at w, and of R_j restricted to its support
                    let ranges: Vec<(Rational, Rational, Rational, Rational)> = p
                        .iter()
                        .map(|d| {
                            if d.get(w).is_zero() {
                                (int(-2), int(-2), Rational::zero(), Rational::zero())
                            } else {
                                let hi = d.get(w).recip();
                                let lo = if d.support().len() > 1 { Rational::zero() } else { hi.clone() };
                                (lo.clone(), hi.clone(), lo, hi)
                            }
                        })
                        .collect();
                    for i in 0..n {
                        let others_lo: Rational = (0..n).filter(|&j| j != i).map(|j| ranges[j].2.clone()).sum();
                        let others_hi: Rational = (0..n).filter(|&j| j != i).map(|j| ranges[j].3.clone()).sum();
                        let top = &ranges[i].1 - &factor * others_lo;
                        let bottom = &ranges[i].0 - &factor * others_hi;
                        for v in [top, bottom] {
                            let a = if v < Rational::zero() { -v } else { v };
                            if a > best {
                                best = a;
                            }
                        }
                    }
                }
            }
        }
        best
    }

    /// `2 + n |Ω| (1 + max |continuation payoff|)`.
    pub fn penalty_bound(&self) -> Rational {
        let n = self.structure.n_players() as i64;
        let states = self.structure.n_states() as i64;
        int(2) + int(n * states) * (int(1) + self.max_continuation_payoff())
    }

    fn events(&self, actual: &StochasticSignaling) -> Result<Vec<Event>> {
        if actual.n_states() != self.structure.n_states() {
            return Err(Error::domain("actual signaling covers a different state space"));
        }
        let mut v = Vec::new();
        for state in 0..actual.n_states() {
            for signal in 0..actual.n_signals() {
                if !actual.prob(state, signal).is_zero() {
                    v.push(Event {
                        state,
                        signal,
                        weight: self.structure.prior.get(state) * actual.prob(state, signal),
                    });
                }
            }
        }
        Ok(v)
    }

    fn infoset(&self, i: usize, state: usize, signal: usize) -> InfoSet {
        InfoSet {
            block: self.structure.player(i).block_of(state),
            signal,
        }
    }

    /// Reference signal and menu indices when the declarations are jointly
    /// feasible.
    fn feasible_profile(&self, decls: &[Declaration]) -> Option<(usize, Vec<usize>)> {
        let mut signal = None;
        let mut idx = Vec::with_capacity(decls.len());
        for d in decls {
            match *d {
                Declaration::Abstain => return None,
                Declaration::Report { signal: s, posterior } => {
                    if signal.is_some_and(|t| t != s) || s >= self.feasible.len() {
                        return None;
                    }
                    signal = Some(s);
                    idx.push(posterior);
                }
            }
        }
        let s = signal?;
        self.feasible[s].contains(&idx).then_some((s, idx))
    }

    /// Realized payoffs at one state and actual signal.
    pub fn event_payoffs(&self, actual: &StochasticSignaling, state: usize, signal: usize, decls: &[Declaration]) -> Result<Vec<Rational>> {
        let n = self.structure.n_players();
        let Some((_, idx)) = self.feasible_profile(decls) else {
            return Ok(vec![-self.penalty.clone(); n]);
        };
        let p: Vec<Distribution> = idx.iter().enumerate().map(|(i, &k)| self.menus[i][k].clone()).collect();
        let g = build_belief_game(&p)?;
        let guesses = (0..n)
            .map(|j| {
                let q = stoch_posterior(self.structure, j, actual, state, signal)?;
                Ok(g.best_responses(j, &q)[0])
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok((0..n).map(|i| g.payoff(i, &guesses, state)).collect())
    }

    fn declarations_at(&self, profile: &DeclarationProfile, state: usize, signal: usize) -> Result<Vec<Declaration>> {
        (0..self.structure.n_players())
            .map(|i| {
                let k = self.infoset(i, state, signal);
                profile
                    .get(i)
                    .and_then(|m| m.get(&k))
                    .copied()
                    .ok_or_else(|| Error::domain(format!("player {i} has no declaration at block {} signal {signal}", k.block)))
            })
            .collect()
    }

    /// Ex-ante expected payoffs with the second stage played as the
    /// lowest-indexed best response to each player's true posterior.
    pub fn expected_payoffs(&self, actual: &StochasticSignaling, profile: &DeclarationProfile) -> Result<Vec<Rational>> {
        let mut total = vec![Rational::zero(); self.structure.n_players()];
        for e in self.events(actual)? {
            let decls = self.declarations_at(profile, e.state, e.signal)?;
            for (t, u) in total.iter_mut().zip(self.event_payoffs(actual, e.state, e.signal, &decls)?) {
                *t += &e.weight * u;
            }
        }
        Ok(total)
    }

    pub fn aggregate(&self, actual: &StochasticSignaling, profile: &DeclarationProfile) -> Result<Rational> {
        Ok(self.expected_payoffs(actual, profile)?.into_iter().sum())
    }

    /// Every player reports the reference signal and their own posterior.
    pub fn truthful_profile(&self) -> Result<DeclarationProfile> {
        let n = self.structure.n_players();
        let mut out = vec![BTreeMap::new(); n];
        for e in self.events(&self.reference)? {
            for (i, slot) in out.iter_mut().enumerate() {
                let q = stoch_posterior(self.structure, i, &self.reference, e.state, e.signal)?;
                let k = self.menus[i].binary_search(&q).expect("posterior is on the menu");
                slot.insert(
                    self.infoset(i, e.state, e.signal),
                    Declaration::Report {
                        signal: e.signal,
                        posterior: k,
                    },
                );
            }
        }
        Ok(out)
    }

    fn alternatives(&self, i: usize) -> Vec<Declaration> {
        let mut v = vec![Declaration::Abstain];
        for signal in 0..self.feasible.len() {
            for posterior in 0..self.menus[i].len() {
                v.push(Declaration::Report { signal, posterior });
            }
        }
        v
    }

    /// First strictly profitable unilateral change of one declaration.
    pub fn find_deviation(&self, actual: &StochasticSignaling, profile: &DeclarationProfile) -> Result<Option<TwoStageDeviation>> {
        let events = self.events(actual)?;
        for i in 0..self.structure.n_players() {
            let mut sets: Vec<InfoSet> = events.iter().map(|e| self.infoset(i, e.state, e.signal)).collect();
            sets.sort();
            sets.dedup();
            for k in sets {
                let mine: Vec<&Event> = events.iter().filter(|e| self.infoset(i, e.state, e.signal) == k).collect();
                let value = |d: Declaration| -> Result<Rational> {
                    let mut v = Rational::zero();
                    for e in &mine {
                        let mut decls = self.declarations_at(profile, e.state, e.signal)?;
                        decls[i] = d;
                        v += &e.weight * &self.event_payoffs(actual, e.state, e.signal, &decls)?[i];
                    }
                    Ok(v)
                };
                let current_decl = profile[i][&k];
                let current = value(current_decl)?;
                for d in self.alternatives(i) {
                    let v = value(d)?;
                    if v > current {
                        return Ok(Some(TwoStageDeviation {
                            player: i,
                            infoset: k,
                            declaration: d,
                            gain: v - &current,
                        }));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Exhaustive branch-and-bound over declarations that are feasible at
    /// every event, plus the cap on profiles that are not.
    pub fn max_aggregate(&self, actual: &StochasticSignaling) -> Result<AggregateBound> {
        let events = self.events(actual)?;
        let n = self.structure.n_players();
        let n_big = int(n as i64);
        let w_min = events.iter().map(|e| e.weight.clone()).min().expect("some event");
        let infeasible_bound = -(n_big * &self.penalty * w_min);
        let mut total = Rational::zero();
        let mut profile: DeclarationProfile = vec![BTreeMap::new(); n];
        let mut all_feasible = true;
        for s0 in 0..actual.n_signals() {
            let local: Vec<&Event> = events.iter().filter(|e| e.signal == s0).collect();
            match self.solve_signal(actual, s0, &local)? {
                Some((v, assignment)) => {
                    total += v;
                    for ((i, k), d) in assignment {
                        profile[i].insert(k, d);
                    }
                }
                None => {
                    all_feasible = false;
                    break;
                }
            }
        }
        let best_feasible = all_feasible.then_some((total, profile));
        let bound = match &best_feasible {
            Some((v, _)) if *v > infeasible_bound => v.clone(),
            _ => infeasible_bound.clone(),
        };
        Ok(AggregateBound {
            best_feasible,
            infeasible_bound,
            bound,
        })
    }

    #[allow(clippy::type_complexity)]
    fn solve_signal(
        &self,
        actual: &StochasticSignaling,
        s0: usize,
        events: &[&Event],
    ) -> Result<Option<(Rational, Vec<((usize, InfoSet), Declaration)>)>> {
        let n = self.structure.n_players();
        // variables: (player, infoset) in player-major order
        let mut vars: Vec<(usize, InfoSet)> = Vec::new();
        for i in 0..n {
            for e in events {
                let k = self.infoset(i, e.state, s0);
                if !vars.contains(&(i, k)) {
                    vars.push((i, k));
                }
            }
        }
        let var_of = |i: usize, state: usize| {
            let k = self.infoset(i, state, s0);
            vars.iter().position(|&v| v == (i, k)).expect("variable exists")
        };
        let event_vars: Vec<Vec<usize>> = events.iter().map(|e| (0..n).map(|i| var_of(i, e.state)).collect()).collect();
        let mut events_of_var: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
        for (e, vs) in event_vars.iter().enumerate() {
            for &v in vs {
                events_of_var[v].push(e);
            }
        }
        // domains sorted by value, best first
        let mut domains: Vec<Vec<(Rational, usize, usize)>> = Vec::new();
        for &(i, k) in &vars {
            let first = events
                .iter()
                .find(|e| self.infoset(i, e.state, s0) == k)
                .expect("variable reached");
            let q = stoch_posterior(self.structure, i, actual, first.state, s0)?;
            let weight: Rational = events
                .iter()
                .filter(|e| self.infoset(i, e.state, s0) == k)
                .map(|e| e.weight.clone())
                .sum();
            let mut dom = Vec::new();
            for (s, set) in self.feasible.iter().enumerate() {
                let ks: BTreeSet<usize> = set.iter().map(|p| p[i]).collect();
                for kk in ks {
                    dom.push((&weight * contribution(&self.menus[i][kk], &q), s, kk));
                }
            }
            dom.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            domains.push(dom);
        }
        let max_rest: Vec<Rational> = {
            let mut v = vec![Rational::zero(); vars.len() + 1];
            for j in (0..vars.len()).rev() {
                let best = domains[j].first().map(|d| d.0.clone()).unwrap_or_else(Rational::zero);
                v[j] = &v[j + 1] + best;
            }
            v
        };
        let mut search = Search {
            game: self,
            event_vars: &event_vars,
            events_of_var: &events_of_var,
            domains: &domains,
            max_rest: &max_rest,
            assigned: vec![None; vars.len()],
            best: None,
        };
        if domains.iter().any(Vec::is_empty) {
            return Ok(None);
        }
        search.dfs(0, Rational::zero());
        Ok(search.best.map(|(v, a)| {
            let decls = vars
                .iter()
                .zip(a)
                .map(|(&var, (s, k))| (var, Declaration::Report { signal: s, posterior: k }))
                .collect();
            (v, decls)
        }))
    }
}

struct Search<'s, 'a> {
    game: &'s TwoStageGame<'a>,
    event_vars: &'s [Vec<usize>],
    events_of_var: &'s [Vec<usize>],
    domains: &'s [Vec<(Rational, usize, usize)>],
    max_rest: &'s [Rational],
    assigned: Vec<Option<(usize, usize)>>,
    best: Option<(Rational, Vec<(usize, usize)>)>,
}

impl Search<'_, '_> {
    fn consistent(&self, var: usize) -> bool {
        self.events_of_var[var].iter().all(|&e| {
            let vs = &self.event_vars[e];
            let mut signal = None;
            for &v in vs {
                if let Some((s, _)) = self.assigned[v] {
                    if signal.is_some_and(|t| t != s) {
                        return false;
                    }
                    signal = Some(s);
                }
            }
            let Some(s) = signal else { return true };
            self.game.feasible[s].iter().any(|prof| {
                vs.iter()
                    .enumerate()
                    .all(|(i, &v)| self.assigned[v].is_none_or(|(_, k)| prof[i] == k))
            })
        })
    }

    fn dfs(&mut self, j: usize, value: Rational) {
        if let Some((b, _)) = &self.best {
            if &value + &self.max_rest[j] <= *b {
                return;
            }
        }
        if j == self.assigned.len() {
            let a = self.assigned.iter().map(|x| x.expect("complete")).collect();
            self.best = Some((value, a));
            return;
        }
        let domains = self.domains;
        for (v, s, k) in &domains[j] {
            self.assigned[j] = Some((*s, *k));
            if self.consistent(j) {
                self.dfs(j + 1, &value + v);
            }
        }
        self.assigned[j] = None;
    }
}
