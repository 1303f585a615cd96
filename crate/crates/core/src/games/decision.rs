use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::join;
use crate::rational::Rational;
use crate::signaling::DeterministicSignaling;
use crate::types::{InformationStructure, Partition, Prior};

use super::bayesian::BayesianGame;

/// Single decision maker: `payoff[a][w]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionProblem {
    pub actions: Vec<String>,
    pub payoff: Vec<Vec<Rational>>,
}

impl DecisionProblem {
    /// Blockwise best expected payoff when `info` is known.
    pub fn value(&self, prior: &Prior, info: &Partition) -> Result<Rational> {
        if info.len() != prior.len() || self.payoff.iter().any(|r| r.len() != prior.len()) {
            return Err(Error::domain("decision problem and partition disagree on the state count"));
        }
        if self.actions.is_empty() {
            return Err(Error::domain("decision problem has no actions"));
        }
        let mut total = Rational::zero();
        for block in info.blocks() {
            let best = self
                .payoff
                .iter()
                .map(|row| block.iter().map(|&w| prior.get(w) * &row[w]).sum::<Rational>())
                .max()
                .expect("nonempty action set");
            total += best;
        }
        Ok(total)
    }
}

/// Value to player `i` of the problem after joining private information
/// with the signal partition.
pub fn decision_value(
    structure: &InformationStructure,
    i: usize,
    tau: &DeterministicSignaling,
    problem: &DecisionProblem,
) -> Result<Rational> {
    let info = join(structure.player(i), &tau.induced_partition())?;
    problem.value(&structure.prior, &info)
}

/// Decision problem whose actions rank the states of one block of
/// `Π_i ⋁ τ₂`; guessing the wrong block is ruinous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationGame {
    pub player: usize,
    pub blocks: Vec<Vec<usize>>,
    /// Block index and the position assigned to each state of that block.
    pub moves: Vec<(usize, Vec<usize>)>,
    pub problem: DecisionProblem,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    // lexicographic order over 1..=k
    let mut cur: Vec<usize> = (1..=k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).fold(1u128, |a, b| a.saturating_mul(b))
}

pub fn build_permutation_game(
    structure: &InformationStructure,
    i: usize,
    tau2: &DeterministicSignaling,
    cap: u128,
) -> Result<PermutationGame> {
    if i >= structure.n_players() {
        return Err(Error::domain(format!("no player with index {i}")));
    }
    let info = join(structure.player(i), &tau2.induced_partition())?;
    let blocks = info.blocks();
    let count = blocks
        .iter()
        .map(|b| factorial(b.len()))
        .fold(0u128, |a, b| a.saturating_add(b));
    if count > cap {
        return Err(Error::resource("permutation game actions", count, cap));
    }
    let n = structure.n_states();
    let prior = &structure.prior;
    let min_mass = prior.mass().iter().min().expect("nonempty prior").clone();
    let penalty = -Rational::from_integer(num_traits::pow(BigInt::from(2), 10 * n)) / min_mass;
    let mut moves = Vec::new();
    let mut payoff = Vec::new();
    for (j, block) in blocks.iter().enumerate() {
        let mass = prior.event_mass(block);
        let size = Rational::from_integer(BigInt::from(block.len()));
        for perm in permutations(block.len()) {
            let mut row = vec![penalty.clone(); n];
            for (&w, &pos) in block.iter().zip(&perm) {
                let cond = prior.get(w) / &mass;
                row[w] = Rational::from_integer(BigInt::from(pos)) / (cond * &size);
            }
            payoff.push(row);
            moves.push((j, perm));
        }
    }
    let actions = moves
        .iter()
        .map(|(j, perm)| {
            let p: Vec<String> = perm.iter().map(ToString::to_string).collect();
            format!("B{}:{}", j + 1, p.join(""))
        })
        .collect();
    Ok(PermutationGame {
        player: i,
        blocks,
        moves,
        problem: DecisionProblem { actions, payoff },
    })
}

impl PermutationGame {
    /// Closed-form value `Σ_j μ(B_j)(|B_j|+1)/2` under the building signal.
    pub fn reference_value(&self, prior: &Prior) -> Rational {
        self.blocks
            .iter()
            .map(|b| prior.event_mass(b) * Rational::new(BigInt::from(b.len() + 1), BigInt::from(2)))
            .sum()
    }

    /// The same problem as a game in which every other player has a single
    /// idle action and payoff zero.
    pub fn to_bayesian_game(&self, structure: &InformationStructure) -> Result<BayesianGame> {
        let n = structure.n_players();
        let players = structure.players.iter().map(|p| p.name.clone()).collect();
        let actions = (0..n)
            .map(|j| {
                if j == self.player {
                    self.problem.actions.clone()
                } else {
                    vec!["idle".to_string()]
                }
            })
            .collect();
        let me = self.player;
        BayesianGame::from_fn(players, actions, structure.n_states(), |w, prof| {
            (0..n)
                .map(|j| if j == me { self.problem.payoff[prof[me]][w].clone() } else { Rational::zero() })
                .collect()
        })
    }
}
