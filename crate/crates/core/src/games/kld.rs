use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, Rational};
use crate::signaling::{posterior_atlas, stoch_posterior, JointPosteriorProfile, StochasticSignaling};
use crate::types::{Distribution, InformationStructure};

use super::bayesian::InfoSet;

/// Exact value `Σ c_k ln r_k` with rational `c_k` and positive rational
/// `r_k`, or minus infinity.
#[derive(Clone, Debug)]
pub enum LogScore {
    NegInf,
    Finite(BTreeMap<Rational, Rational>),
}

impl LogScore {
    pub fn zero() -> Self {
        LogScore::Finite(BTreeMap::new())
    }

    /// `ln r`, with `ln 0 = -inf`.
    pub fn ln(r: &Rational) -> Self {
        assert!(!r.is_negative(), "logarithm of a negative number");
        if r.is_zero() {
            LogScore::NegInf
        } else if r.is_one() {
            LogScore::zero()
        } else {
            LogScore::Finite(BTreeMap::from([(r.clone(), Rational::one())]))
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, LogScore::NegInf)
    }

    /// Multiplication by `c >= 0`; `0 * -inf` is taken to be 0.
    pub fn scale(&self, c: &Rational) -> Self {
        assert!(!c.is_negative(), "negative scale");
        if c.is_zero() {
            return LogScore::zero();
        }
        match self {
            LogScore::NegInf => LogScore::NegInf,
            LogScore::Finite(m) => LogScore::Finite(m.iter().map(|(b, k)| (b.clone(), k * c)).collect()),
        }
    }

    pub fn add(&self, other: &LogScore) -> LogScore {
        match (self, other) {
            (LogScore::Finite(a), LogScore::Finite(b)) => {
                let mut m = a.clone();
                for (base, k) in b {
                    let e = m.entry(base.clone()).or_insert_with(Rational::zero);
                    *e += k;
                    if e.is_zero() {
                        m.remove(base);
                    }
                }
                LogScore::Finite(m)
            }
            _ => LogScore::NegInf,
        }
    }

    /// Sign of `Σ c_k ln r_k`, decided by comparing `Π r_k^{c_k D}` with 1
    /// where `D` clears every denominator of the `c_k`.
    fn sign_of(terms: &BTreeMap<Rational, Rational>) -> Ordering {
        let d = terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (base, c) in terms {
            let e = (c * Rational::from_integer(d.clone())).to_integer();
            let k: u32 = e.magnitude().try_into().expect("exponent fits in u32");
            let (bn, bd) = (num_traits::pow(base.numer().clone(), k as usize), num_traits::pow(base.denom().clone(), k as usize));
            if e.is_positive() {
                num *= bn;
                den *= bd;
            } else {
                num *= bd;
                den *= bn;
            }
        }
        num.cmp(&den)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LogScore::NegInf => f64::NEG_INFINITY,
            LogScore::Finite(m) => m
                .iter()
                .map(|(b, c)| crate::rational::to_f64(c) * crate::rational::to_f64(b).ln())
                .sum(),
        }
    }
}

impl PartialEq for LogScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LogScore {}

impl PartialOrd for LogScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogScore {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogScore::NegInf, LogScore::NegInf) => Ordering::Equal,
            (LogScore::NegInf, _) => Ordering::Less,
            (_, LogScore::NegInf) => Ordering::Greater,
            (LogScore::Finite(_), LogScore::Finite(b)) => {
                let neg: BTreeMap<Rational, Rational> = b.iter().map(|(k, c)| (k.clone(), -c.clone())).collect();
                match self.add(&LogScore::Finite(neg)) {
                    LogScore::Finite(diff) => LogScore::sign_of(&diff),
                    LogScore::NegInf => unreachable!("finite difference"),
                }
            }
        }
    }
}

impl fmt::Display for LogScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogScore::NegInf => write!(f, "-inf"),
            LogScore::Finite(m) if m.is_empty() => write!(f, "0"),
            LogScore::Finite(m) => {
                let terms: Vec<String> = m
                    .iter()
                    .map(|(b, c)| format!("{}*ln({})", fmt_rational(c), fmt_rational(b)))
                    .collect();
                write!(f, "{}", terms.join(" + "))
            }
        }
    }
}

/// Expected log score `Σ_w q_w ln p_w`; minus infinity when `p` misses mass
/// that `q` places.
pub fn log_score(q: &Distribution, p: &Distribution) -> LogScore {
    let mut total = LogScore::zero();
    for w in 0..q.len() {
        if q.get(w).is_zero() {
            continue;
        }
        total = total.add(&LogScore::ln(p.get(w)).scale(q.get(w)));
        if total.is_neg_inf() {
            break;
        }
    }
    total
}

/// Candidate with the highest expected log score under `q`; ties go to the
/// first candidate in the given order.
pub fn log_score_argmax<'c>(q: &Distribution, candidates: &'c [Distribution]) -> Result<&'c Distribution> {
    let mut best: Option<(&Distribution, LogScore)> = None;
    for c in candidates {
        if c.len() != q.len() {
            return Err(Error::domain("candidate and belief differ in length"));
        }
        let s = log_score(q, c);
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((c, s));
        }
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| Error::domain("no candidate beliefs"))
}

/// Log-scoring game: each player reports one of the posteriors the
/// reference signaling can induce for them and earns `ln p(w)`.
#[derive(Clone, Debug)]
pub struct KldGame<'a> {
    structure: &'a InformationStructure,
    menus: Vec<Vec<Distribution>>,
}

/// Per player, the menu index reported at each information set.
pub type Reports = Vec<BTreeMap<InfoSet, usize>>;

pub fn build_kld_game<'a>(structure: &'a InformationStructure, tau2: &StochasticSignaling) -> Result<KldGame<'a>> {
    let atlas = posterior_atlas(structure, tau2)?;
    let menus = (0..structure.n_players())
        .map(|i| atlas.marginals(i).into_iter().collect())
        .collect();
    Ok(KldGame { structure, menus })
}

impl<'a> KldGame<'a> {
    pub fn menu(&self, i: usize) -> &[Distribution] {
        &self.menus[i]
    }

    fn events(&self, actual: &StochasticSignaling) -> Vec<(usize, usize, Rational)> {
        let mut v = Vec::new();
        for w in 0..actual.n_states() {
            for s in 0..actual.n_signals() {
                if !actual.prob(w, s).is_zero() {
                    v.push((w, s, self.structure.prior.get(w) * actual.prob(w, s)));
                }
            }
        }
        v
    }

    fn infoset(&self, i: usize, w: usize, s: usize) -> InfoSet {
        InfoSet {
            block: self.structure.player(i).block_of(w),
            signal: s,
        }
    }

    /// Reports maximizing each player's expected score under `actual`.
    pub fn optimal_reports(&self, actual: &StochasticSignaling) -> Result<Reports> {
        let mut out = vec![BTreeMap::new(); self.structure.n_players()];
        for (w, s, _) in self.events(actual) {
            for (i, slot) in out.iter_mut().enumerate() {
                let k = self.infoset(i, w, s);
                if slot.contains_key(&k) {
                    continue;
                }
                let q = stoch_posterior(self.structure, i, actual, w, s)?;
                let best = log_score_argmax(&q, &self.menus[i])?;
                let idx = self.menus[i].iter().position(|c| c == best).expect("chosen from menu");
                slot.insert(k, idx);
            }
        }
        Ok(out)
    }

    fn report(&self, reports: &Reports, i: usize, w: usize, s: usize) -> Result<usize> {
        reports[i]
            .get(&self.infoset(i, w, s))
            .copied()
            .ok_or_else(|| Error::domain(format!("player {i} has no report at block {} signal {s}", self.structure.player(i).block_of(w))))
    }

    /// Exact expected score of every player.
    pub fn expected_scores(&self, actual: &StochasticSignaling, reports: &Reports) -> Result<Vec<LogScore>> {
        let mut totals = vec![LogScore::zero(); self.structure.n_players()];
        for (w, s, m) in self.events(actual) {
            for (i, t) in totals.iter_mut().enumerate() {
                let p = &self.menus[i][self.report(reports, i, w, s)?];
                *t = t.add(&LogScore::ln(p.get(w)).scale(&m));
            }
        }
        Ok(totals)
    }

    /// Distribution of the jointly reported profile.
    pub fn reported_profiles(&self, actual: &StochasticSignaling, reports: &Reports) -> Result<BTreeMap<JointPosteriorProfile, Rational>> {
        let mut out: BTreeMap<JointPosteriorProfile, Rational> = BTreeMap::new();
        for (w, s, m) in self.events(actual) {
            let prof = (0..self.structure.n_players())
                .map(|i| Ok(self.menus[i][self.report(reports, i, w, s)?].clone()))
                .collect::<Result<Vec<_>>>()?;
            *out.entry(prof).or_insert_with(Rational::zero) += m;
        }
        Ok(out)
    }

    pub fn reported_support(&self, actual: &StochasticSignaling, reports: &Reports) -> Result<BTreeSet<JointPosteriorProfile>> {
        Ok(self.reported_profiles(actual, reports)?.into_keys().collect())
    }
}
