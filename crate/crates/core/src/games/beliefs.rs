use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::signaling::JointPosteriorProfile;
use crate::types::Distribution;

/// Game `G(p)` rewarding players for naming states in the support of their
/// target belief `p^i`, scaled so that truthful beliefs are optimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefGame {
    target: JointPosteriorProfile,
    supports: Vec<Vec<usize>>,
}

pub fn build_belief_game(p: &JointPosteriorProfile) -> Result<BeliefGame> {
    if p.len() < 2 {
        return Err(Error::domain("belief game needs at least two players"));
    }
    let n = p[0].len();
    if p.iter().any(|d| d.len() != n) {
        return Err(Error::domain("target beliefs live on different state spaces"));
    }
    Ok(BeliefGame {
        supports: p.iter().map(Distribution::support).collect(),
        target: p.clone(),
    })
}

impl BeliefGame {
    pub fn n_players(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &JointPosteriorProfile {
        &self.target
    }

    /// Actions of player `i`: the states in the support of `p^i`.
    pub fn actions(&self, i: usize) -> &[usize] {
        &self.supports[i]
    }

    fn in_support(&self, i: usize, w: usize) -> bool {
        !self.target[i].get(w).is_zero()
    }

    /// `R_i`: -2 off the support, `1/p^i_w` for a correct guess, else 0.
    pub fn reward(&self, i: usize, guess: usize, w: usize) -> Rational {
        if !self.in_support(i, w) {
            int(-2)
        } else if guess == w {
            self.target[i].get(w).recip()
        } else {
            Rational::zero()
        }
    }

    fn others_factor(&self) -> Rational {
        Rational::new(BigInt::from(2), BigInt::from(self.n_players() - 1))
    }

    /// Realized payoff of player `i` at state `w`.
    pub fn payoff(&self, i: usize, guesses: &[usize], w: usize) -> Rational {
        let others: Rational = (0..self.n_players())
            .filter(|&j| j != i && self.in_support(j, w))
            .map(|j| self.reward(j, guesses[j], w))
            .sum();
        self.reward(i, guesses[i], w) - self.others_factor() * others
    }

    /// `E_q[R_i(guess, ·)]`.
    pub fn expected_reward(&self, i: usize, guess: usize, q: &Distribution) -> Rational {
        (0..q.len())
            .filter(|&w| !q.get(w).is_zero())
            .map(|w| q.get(w) * self.reward(i, guess, w))
            .sum()
    }

    fn expected_indicated_reward(&self, j: usize, guess: usize, q: &Distribution) -> Rational {
        (0..q.len())
            .filter(|&w| !q.get(w).is_zero() && self.in_support(j, w))
            .map(|w| q.get(w) * self.reward(j, guess, w))
            .sum()
    }

    /// Interim payoffs when player `j` holds belief `beliefs[j]`; each
    /// player's reward term is evaluated under that player's own belief.
    pub fn interim_payoffs(&self, beliefs: &[Distribution], guesses: &[usize]) -> Vec<Rational> {
        let n = self.n_players();
        let own: Vec<Rational> = (0..n)
            .map(|j| self.expected_reward(j, guesses[j], &beliefs[j]))
            .collect();
        let indicated: Vec<Rational> = (0..n)
            .map(|j| self.expected_indicated_reward(j, guesses[j], &beliefs[j]))
            .collect();
        let total: Rational = indicated.iter().sum();
        (0..n)
            .map(|i| &own[i] - self.others_factor() * (&total - &indicated[i]))
            .collect()
    }

    pub fn aggregate(&self, beliefs: &[Distribution], guesses: &[usize]) -> Rational {
        self.interim_payoffs(beliefs, guesses).into_iter().sum()
    }

    /// Guesses maximizing `E_q[R_i]`, in state order.
    pub fn best_responses(&self, i: usize, q: &Distribution) -> Vec<usize> {
        let values: Vec<(usize, Rational)> = self.supports[i]
            .iter()
            .map(|&a| (a, self.expected_reward(i, a, q)))
            .collect();
        let best = values.iter().map(|(_, v)| v).max().expect("nonempty support").clone();
        values.into_iter().filter(|(_, v)| *v == best).map(|(a, _)| a).collect()
    }

    /// A player with a strictly better guess, if any. Other players' terms
    /// do not depend on the deviator's guess.
    pub fn find_deviation(&self, beliefs: &[Distribution], guesses: &[usize]) -> Option<(usize, usize)> {
        (0..self.n_players()).find_map(|i| {
            let current = self.expected_reward(i, guesses[i], &beliefs[i]);
            let best = self.best_responses(i, &beliefs[i])[0];
            (self.expected_reward(i, best, &beliefs[i]) > current).then_some((i, best))
        })
    }

    /// Best aggregate contribution `-(d + 2 q_0)` of player `i` with belief
    /// `q`, where `d = max_a q_a / p_a` over the support and `q_0` is the
    /// mass `q` puts off the support.
    pub fn player_contribution(&self, i: usize, q: &Distribution) -> Rational {
        contribution(&self.target[i], q)
    }
}

/// `-(max_{a ∈ supp p} q_a/p_a + 2 q(outside supp p))`.
pub fn contribution(p: &Distribution, q: &Distribution) -> Rational {
    let mut d = Rational::zero();
    let mut off = Rational::zero();
    for w in 0..q.len() {
        if p.get(w).is_zero() {
            off += q.get(w);
        } else {
            let r = q.get(w) / p.get(w);
            if r > d {
                d = r;
            }
        }
    }
    -(d + int(2) * off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn dist(v: &[(i64, i64)]) -> Distribution {
        Distribution::new(v.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    #[test]
    fn truthful_beliefs_pay_minus_one_each() {
        let p = vec![dist(&[(1, 2), (1, 2), (0, 1)]), dist(&[(0, 1), (1, 3), (2, 3)])];
        let g = build_belief_game(&p).unwrap();
        for a in g.actions(0).to_vec() {
            for b in g.actions(1).to_vec() {
                assert_eq!(g.interim_payoffs(&p, &[a, b]), vec![int(-1), int(-1)]);
            }
        }
        assert!(g.find_deviation(&p, &[0, 1]).is_none());
    }

    #[test]
    fn disjoint_belief_costs_four() {
        let p = vec![dist(&[(1, 1), (0, 1)]), dist(&[(1, 2), (1, 2)])];
        let g = build_belief_game(&p).unwrap();
        let q = vec![dist(&[(0, 1), (1, 1)]), p[1].clone()];
        assert_eq!(g.interim_payoffs(&q, &[0, 0])[0], int(-4));
    }

    #[test]
    fn single_player_rejected() {
        assert!(build_belief_game(&vec![Distribution::point(2, 0)]).is_err());
    }
}
