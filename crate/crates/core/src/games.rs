//! Finite Bayesian games guided by an oracle, plus the witness games used to
//! separate oracles.

pub mod beliefs;
pub mod bayesian;
pub mod combined;
pub mod decision;
pub mod kld;
pub mod two_stage;

pub use bayesian::{
    BayesianGame, Deviation, GuidedGame, InfoSet, OutcomeDistribution, StrategyProfile, DEFAULT_PROFILE_CAP,
};
pub use beliefs::{build_belief_game, BeliefGame};
pub use combined::{build_combined_game, CombinedGame, CombinedPayoff};
pub use decision::{build_permutation_game, decision_value, DecisionProblem, PermutationGame};
pub use kld::{build_kld_game, log_score, log_score_argmax, KldGame, LogScore};
pub use two_stage::{build_two_stage_game, AggregateBound, Declaration, DeclarationProfile, TwoStageGame};
