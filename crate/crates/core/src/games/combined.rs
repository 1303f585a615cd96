use num_bigint::BigInt;

use crate::error::Result;
use crate::rational::Rational;
use crate::signaling::StochasticSignaling;
use crate::types::InformationStructure;

use super::kld::{build_kld_game, KldGame, LogScore, Reports};
use super::two_stage::{build_two_stage_game, DeclarationProfile, TwoStageGame};

/// The two-stage game and the log-scoring game, each played with
/// probability one half.
#[derive(Clone, Debug)]
pub struct CombinedGame<'a> {
    pub two_stage: TwoStageGame<'a>,
    pub kld: KldGame<'a>,
}

/// Expected payoff `r + l` split into its rational half `r` and its
/// logarithmic half `l`. Only componentwise comparison is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedPayoff {
    pub rational: Rational,
    pub log: LogScore,
}

impl CombinedPayoff {
    /// True when both halves are at least as large.
    pub fn weakly_dominates(&self, other: &CombinedPayoff) -> bool {
        self.rational >= other.rational && self.log >= other.log
    }
}

pub fn build_combined_game<'a>(
    structure: &'a InformationStructure,
    tau2: &StochasticSignaling,
    penalty: Option<Rational>,
) -> Result<CombinedGame<'a>> {
    Ok(CombinedGame {
        two_stage: build_two_stage_game(structure, tau2, penalty)?,
        kld: build_kld_game(structure, tau2)?,
    })
}

impl CombinedGame<'_> {
    pub fn expected_payoffs(
        &self,
        actual: &StochasticSignaling,
        declarations: &DeclarationProfile,
        reports: &Reports,
    ) -> Result<Vec<CombinedPayoff>> {
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        let first = self.two_stage.expected_payoffs(actual, declarations)?;
        let second = self.kld.expected_scores(actual, reports)?;
        Ok(first
            .into_iter()
            .zip(second)
            .map(|(a, b)| CombinedPayoff {
                rational: &a * &half,
                log: b.scale(&half),
            })
            .collect())
    }

    pub fn aggregate(
        &self,
        actual: &StochasticSignaling,
        declarations: &DeclarationProfile,
        reports: &Reports,
    ) -> Result<CombinedPayoff> {
        let parts = self.expected_payoffs(actual, declarations, reports)?;
        let mut rational = Rational::from_integer(0.into());
        let mut log = LogScore::zero();
        for p in parts {
            rational += p.rational;
            log = log.add(&p.log);
        }
        Ok(CombinedPayoff { rational, log })
    }
}
