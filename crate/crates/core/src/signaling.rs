//! Oracle signaling strategies, posteriors and experiment matrices.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::join;
use crate::rational::{fmt_rational, sum, Rational};
use crate::types::{conditional, Distribution, InformationStructure, Partition};

/// Stochastic map from states to signals, constant on oracle blocks.
/// Signals that occur with probability zero everywhere are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StochasticSignaling {
    oracle: Partition,
    signals: Vec<String>,
    kernel: Vec<Vec<Rational>>,
}

impl StochasticSignaling {
    pub fn new(oracle: Partition, signals: Vec<String>, kernel: Vec<Vec<Rational>>) -> Result<Self> {
        let n = oracle.len();
        if kernel.len() != n {
            return Err(Error::domain(format!("kernel has {} rows for {n} states", kernel.len())));
        }
        let mut seen = BTreeSet::new();
        for s in &signals {
            if !seen.insert(s) {
                return Err(Error::domain(format!("duplicate signal {s:?}")));
            }
        }
        for (w, row) in kernel.iter().enumerate() {
            if row.len() != signals.len() {
                return Err(Error::domain(format!(
                    "kernel row {w} has {} entries for {} signals",
                    row.len(),
                    signals.len()
                )));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::domain(format!("negative probability in kernel row {w}")));
            }
            let total = sum(row);
            if !total.is_one() {
                return Err(Error::domain(format!(
                    "kernel row {w} sums to {}",
                    fmt_rational(&total)
                )));
            }
        }
        for w in 0..n {
            for v in (w + 1)..n {
                if oracle.same_block(w, v) && kernel[w] != kernel[v] {
                    return Err(Error::domain(format!(
                        "signaling is not measurable: state indices {w} and {v} share an oracle block but get different rows"
                    )));
                }
            }
        }
        let keep: Vec<usize> = (0..signals.len())
            .filter(|&s| kernel.iter().any(|row| !row[s].is_zero()))
            .collect();
        let signals = keep.iter().map(|&s| signals[s].clone()).collect();
        let kernel = kernel
            .into_iter()
            .map(|row| keep.iter().map(|&s| row[s].clone()).collect())
            .collect();
        Ok(StochasticSignaling {
            oracle,
            signals,
            kernel,
        })
    }

    /// Single signal sent in every state.
    pub fn uninformative(oracle: Partition) -> Self {
        let n = oracle.len();
        StochasticSignaling {
            oracle,
            signals: vec!["none".into()],
            kernel: vec![vec![Rational::one()]; n],
        }
    }

    pub fn oracle(&self) -> &Partition {
        &self.oracle
    }

    pub fn n_states(&self) -> usize {
        self.oracle.len()
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn signal_index(&self, label: &str) -> Result<usize> {
        self.signals
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::domain(format!("unknown signal {label:?}")))
    }

    pub fn prob(&self, state: usize, signal: usize) -> &Rational {
        &self.kernel[state][signal]
    }

    pub fn kernel(&self) -> &[Vec<Rational>] {
        &self.kernel
    }

    /// Same kernel, checked against a different oracle.
    pub fn with_oracle(&self, oracle: Partition) -> Result<Self> {
        StochasticSignaling::new(oracle, self.signals.clone(), self.kernel.clone())
    }

    /// True when every signal is sent with probability zero or one.
    pub fn is_deterministic(&self) -> bool {
        self.kernel
            .iter()
            .all(|row| row.iter().all(|x| x.is_zero() || x.is_one()))
    }
}

/// Deterministic signaling: one signal label per oracle block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicSignaling {
    oracle: Partition,
    assignment: Vec<String>,
}

impl DeterministicSignaling {
    pub fn new(oracle: Partition, assignment: Vec<String>) -> Result<Self> {
        if assignment.len() != oracle.num_blocks() {
            return Err(Error::domain(format!(
                "{} signals assigned to {} oracle blocks",
                assignment.len(),
                oracle.num_blocks()
            )));
        }
        Ok(DeterministicSignaling { oracle, assignment })
    }

    /// Reveals the oracle block itself.
    pub fn full_reveal(oracle: Partition) -> Self {
        let assignment = (1..=oracle.num_blocks()).map(|b| format!("b{b}")).collect();
        DeterministicSignaling { oracle, assignment }
    }

    /// Reveals which block of `coarser` holds the state.
    pub fn revealing(oracle: Partition, coarser: &Partition) -> Result<Self> {
        if !crate::lattice::refines(&oracle, coarser)? {
            return Err(Error::domain("revealed partition is not coarser than the oracle"));
        }
        let assignment = oracle
            .blocks()
            .iter()
            .map(|b| format!("b{}", coarser.block_of(b[0]) + 1))
            .collect();
        Ok(DeterministicSignaling { oracle, assignment })
    }

    pub fn oracle(&self) -> &Partition {
        &self.oracle
    }

    pub fn assignment(&self) -> &[String] {
        &self.assignment
    }

    pub fn signal_at(&self, state: usize) -> &str {
        &self.assignment[self.oracle.block_of(state)]
    }

    /// Partition of states by the signal they produce.
    pub fn induced_partition(&self) -> Partition {
        let raw: Vec<&str> = (0..self.oracle.len()).map(|w| self.signal_at(w)).collect();
        Partition::from_labels(&raw)
    }

    pub fn to_stochastic(&self) -> StochasticSignaling {
        let mut signals: Vec<String> = Vec::new();
        for s in &self.assignment {
            if !signals.contains(s) {
                signals.push(s.clone());
            }
        }
        let kernel = (0..self.oracle.len())
            .map(|w| {
                signals
                    .iter()
                    .map(|s| if s == self.signal_at(w) { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        StochasticSignaling {
            oracle: self.oracle.clone(),
            signals,
            kernel,
        }
    }
}

/// One posterior per player, in player order.
pub type JointPosteriorProfile = Vec<Distribution>;

fn check_space(structure: &InformationStructure, n: usize) -> Result<()> {
    if structure.n_states() != n {
        return Err(Error::domain(format!(
            "signaling covers {n} states, structure has {}",
            structure.n_states()
        )));
    }
    Ok(())
}

/// Posterior of player `i` at `state` under deterministic signaling: the
/// prior conditioned on the player's block of the join with the induced
/// partition.
pub fn det_posterior(
    structure: &InformationStructure,
    i: usize,
    tau: &DeterministicSignaling,
    state: usize,
) -> Result<Distribution> {
    check_space(structure, tau.oracle().len())?;
    let refined = join(structure.player(i), &tau.induced_partition())?;
    conditional(&structure.prior, &refined.block(refined.block_of(state)))
}

/// Posterior of player `i` after `signal` is observed at `state`.
pub fn stoch_posterior(
    structure: &InformationStructure,
    i: usize,
    tau: &StochasticSignaling,
    state: usize,
    signal: usize,
) -> Result<Distribution> {
    check_space(structure, tau.n_states())?;
    if tau.prob(state, signal).is_zero() {
        return Err(Error::domain(format!(
            "signal {:?} has probability zero at state index {state}",
            tau.signals()[signal]
        )));
    }
    let pi = structure.player(i);
    let block = pi.block(pi.block_of(state));
    let mut v = vec![Rational::zero(); structure.n_states()];
    let mut total = Rational::zero();
    for &w in &block {
        let m = structure.prior.get(w) * tau.prob(w, signal);
        total += &m;
        v[w] = m;
    }
    for x in v.iter_mut() {
        *x /= &total;
    }
    Distribution::new(v)
}

pub fn joint_posterior(
    structure: &InformationStructure,
    tau: &StochasticSignaling,
    state: usize,
    signal: usize,
) -> Result<JointPosteriorProfile> {
    (0..structure.n_players())
        .map(|i| stoch_posterior(structure, i, tau, state, signal))
        .collect()
}

/// Distribution over joint posterior profiles induced by a signaling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorAtlas {
    weights: BTreeMap<JointPosteriorProfile, Rational>,
}

impl PosteriorAtlas {
    pub fn weights(&self) -> &BTreeMap<JointPosteriorProfile, Rational> {
        &self.weights
    }

    pub fn weight(&self, profile: &JointPosteriorProfile) -> Rational {
        self.weights.get(profile).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn contains(&self, profile: &JointPosteriorProfile) -> bool {
        self.weights.contains_key(profile)
    }

    pub fn post_set(&self) -> BTreeSet<JointPosteriorProfile> {
        self.weights.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Distinct posteriors of player `i`.
    pub fn marginals(&self, i: usize) -> BTreeSet<Distribution> {
        self.weights.keys().map(|p| p[i].clone()).collect()
    }
}

pub fn posterior_atlas(structure: &InformationStructure, tau: &StochasticSignaling) -> Result<PosteriorAtlas> {
    check_space(structure, tau.n_states())?;
    let mut weights: BTreeMap<JointPosteriorProfile, Rational> = BTreeMap::new();
    for w in 0..tau.n_states() {
        for s in 0..tau.n_signals() {
            if tau.prob(w, s).is_zero() {
                continue;
            }
            let m = structure.prior.get(w) * tau.prob(w, s);
            *weights
                .entry(joint_posterior(structure, tau, w, s)?)
                .or_insert_with(Rational::zero) += m;
        }
    }
    Ok(PosteriorAtlas { weights })
}

/// Joint posterior profiles reachable under each signal, indexed by signal.
pub fn profiles_by_signal(
    structure: &InformationStructure,
    tau: &StochasticSignaling,
) -> Result<Vec<BTreeSet<JointPosteriorProfile>>> {
    check_space(structure, tau.n_states())?;
    (0..tau.n_signals())
        .map(|s| {
            (0..tau.n_states())
                .filter(|&w| !tau.prob(w, s).is_zero())
                .map(|w| joint_posterior(structure, tau, w, s))
                .collect()
        })
        .collect()
}

/// Support of the atlas of `a` is contained in that of `b`.
pub fn post_included(structure: &InformationStructure, a: &StochasticSignaling, b: &StochasticSignaling) -> Result<bool> {
    let pa = posterior_atlas(structure, a)?.post_set();
    let pb = posterior_atlas(structure, b)?.post_set();
    Ok(pa.is_subset(&pb))
}

pub fn post_equal(structure: &InformationStructure, a: &StochasticSignaling, b: &StochasticSignaling) -> Result<bool> {
    Ok(posterior_atlas(structure, a)?.post_set() == posterior_atlas(structure, b)?.post_set())
}

/// Same profiles with the same weights.
pub fn atlas_equal(structure: &InformationStructure, a: &StochasticSignaling, b: &StochasticSignaling) -> Result<bool> {
    Ok(posterior_atlas(structure, a)? == posterior_atlas(structure, b)?)
}

/// Row-stochastic matrix with labelled columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

impl ExperimentMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::domain(format!("matrix row {r} has {} entries, expected {width}", row.len())));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::domain(format!("negative entry in matrix row {r}")));
            }
            if !sum(row).is_one() {
                return Err(Error::domain(format!("matrix row {r} does not sum to 1")));
            }
        }
        Ok(ExperimentMatrix {
            columns: (1..=width).map(|c| format!("c{c}")).collect(),
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

/// Signal-and-block experiment: entry `(w, (s, B))` is the probability
/// of `s` at `w` when `w` lies in block `B` of `info`, zero otherwise.
/// Columns run over signals, then blocks.
pub fn experiment_matrix(tau: &StochasticSignaling, info: &Partition) -> Result<ExperimentMatrix> {
    if info.len() != tau.n_states() {
        return Err(Error::domain("partition and signaling cover different state spaces"));
    }
    let mut columns = Vec::new();
    for s in tau.signals() {
        for b in 0..info.num_blocks() {
            columns.push(format!("({s},B{})", b + 1));
        }
    }
    let k = info.num_blocks();
    let rows = (0..tau.n_states())
        .map(|w| {
            let mut row = vec![Rational::zero(); tau.n_signals() * k];
            for s in 0..tau.n_signals() {
                row[s * k + info.block_of(w)] = tau.prob(w, s).clone();
            }
            row
        })
        .collect();
    Ok(ExperimentMatrix { columns, rows })
}

/// Row-stochastic post-processing of a signaling's output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Garbling {
    pub targets: Vec<String>,
    pub rows: Vec<Vec<Rational>>,
}

impl Garbling {
    pub fn new(targets: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = ExperimentMatrix::from_rows(rows)?;
        if m.n_cols() != targets.len() && !m.rows.is_empty() {
            return Err(Error::domain("garbling width differs from its target labels"));
        }
        Ok(Garbling { targets, rows: m.rows })
    }

    fn check(&self, tau: &StochasticSignaling) -> Result<()> {
        if self.rows.len() != tau.n_signals() {
            return Err(Error::domain(format!(
                "garbling has {} rows for {} signals",
                self.rows.len(),
                tau.n_signals()
            )));
        }
        Ok(())
    }
}

/// Signaling that sends `t` with probability `sum_s tau(s|w) m(s,t)`.
pub fn garble(tau: &StochasticSignaling, m: &Garbling) -> Result<StochasticSignaling> {
    m.check(tau)?;
    let kernel = (0..tau.n_states())
        .map(|w| {
            (0..m.targets.len())
                .map(|t| (0..tau.n_signals()).map(|s| tau.prob(w, s) * &m.rows[s][t]).sum())
                .collect()
        })
        .collect();
    StochasticSignaling::new(tau.oracle().clone(), m.targets.clone(), kernel)
}

/// Signaling over pairs `(s, t)` that sends the original signal together
/// with its garbled copy. `origin[k]` names the pair behind signal `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifted {
    pub signaling: StochasticSignaling,
    pub origin: Vec<(usize, usize)>,
}

pub fn lift_garbled(tau: &StochasticSignaling, m: &Garbling) -> Result<Lifted> {
    m.check(tau)?;
    let mut pairs = Vec::new();
    for s in 0..tau.n_signals() {
        for t in 0..m.targets.len() {
            if !m.rows[s][t].is_zero() {
                pairs.push((s, t));
            }
        }
    }
    let labels = pairs
        .iter()
        .map(|&(s, t)| format!("({},{})", tau.signals()[s], m.targets[t]))
        .collect();
    let kernel = (0..tau.n_states())
        .map(|w| pairs.iter().map(|&(s, t)| tau.prob(w, s) * &m.rows[s][t]).collect())
        .collect();
    let signaling = StochasticSignaling::new(tau.oracle().clone(), labels, kernel)?;
    let origin = signaling
        .signals()
        .iter()
        .map(|l| {
            let k = pairs
                .iter()
                .position(|&(s, t)| format!("({},{})", tau.signals()[s], m.targets[t]) == *l)
                .expect("kept label comes from a pair");
            pairs[k]
        })
        .collect();
    Ok(Lifted { signaling, origin })
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// True when the values `p_j` and `1 - p_j` are pairwise distinct and all
/// ratios between distinct values are pairwise distinct.
pub fn ratio_condition_holds(ps: &[Rational]) -> bool {
    let mut values: Vec<Rational> = Vec::new();
    for p in ps {
        values.push(p.clone());
        values.push(Rational::one() - p);
    }
    let distinct: BTreeSet<&Rational> = values.iter().collect();
    if distinct.len() != values.len() || values.iter().any(|v| v.is_zero()) {
        return false;
    }
    let mut ratios = BTreeSet::new();
    for (a, x) in values.iter().enumerate() {
        for (b, y) in values.iter().enumerate() {
            if a != b && !ratios.insert(x / y) {
                return false;
            }
        }
    }
    true
}

/// Greedy choice of `m` signal probabilities of the form `1/q`, `q` an odd
/// prime, satisfying [`ratio_condition_holds`].
pub fn separating_probabilities(m: usize) -> Vec<Rational> {
    let mut chosen: Vec<Rational> = Vec::new();
    let mut q = 3u64;
    while chosen.len() < m {
        if is_prime(q) {
            let candidate = Rational::new(BigInt::one(), BigInt::from(q));
            chosen.push(candidate);
            if !ratio_condition_holds(&chosen) {
                chosen.pop();
            }
        }
        q += 2;
    }
    chosen
}

/// Two-signal strategy sending `s1` with probability `p_j` on block `j`.
pub fn separating_strategy(oracle: &Partition) -> StochasticSignaling {
    let ps = separating_probabilities(oracle.num_blocks());
    let kernel = (0..oracle.len())
        .map(|w| {
            let p = ps[oracle.block_of(w)].clone();
            vec![p.clone(), Rational::one() - p]
        })
        .collect();
    StochasticSignaling::new(oracle.clone(), vec!["s1".into(), "s2".into()], kernel)
        .expect("separating strategy is a valid kernel")
}

/// For each signal `t` of `tau1`, a signal `s` of `tau2` and `c > 0` with
/// `tau1(t|w) = c * tau2(s|w)` for all `w`, when one exists.
pub fn proportional_decompose(
    tau1: &StochasticSignaling,
    tau2: &StochasticSignaling,
) -> Result<Vec<Option<(usize, Rational)>>> {
    if tau1.n_states() != tau2.n_states() {
        return Err(Error::domain("signalings cover different state spaces"));
    }
    let n = tau1.n_states();
    Ok((0..tau1.n_signals())
        .map(|t| {
            (0..tau2.n_signals()).find_map(|s| {
                let w0 = (0..n).find(|&w| !tau2.prob(w, s).is_zero())?;
                let c = tau1.prob(w0, t) / tau2.prob(w0, s);
                if c.is_zero() {
                    return None;
                }
                (0..n)
                    .all(|w| *tau1.prob(w, t) == &c * tau2.prob(w, s))
                    .then_some((s, c))
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::types::Prior;

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(n, blocks).unwrap()
    }

    #[test]
    fn rejects_non_measurable_and_non_stochastic_kernels() {
        let f = part(2, &[&[0, 1]]);
        let bad = StochasticSignaling::new(
            f.clone(),
            vec!["a".into(), "b".into()],
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 3), ratio(2, 3)]],
        );
        assert!(bad.unwrap_err().to_string().contains("not measurable"));
        let short = StochasticSignaling::new(f, vec!["a".into()], vec![vec![ratio(1, 2)], vec![ratio(1, 2)]]);
        assert!(short.is_err());
    }

    #[test]
    fn zero_columns_are_dropped() {
        let f = Partition::discrete(2);
        let t = StochasticSignaling::new(
            f,
            vec!["a".into(), "z".into(), "b".into()],
            vec![vec![ratio(1, 1), ratio(0, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(0, 1), ratio(1, 1)]],
        )
        .unwrap();
        assert_eq!(t.signals(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn separating_probabilities_for_small_block_counts() {
        assert_eq!(separating_probabilities(1), vec![ratio(1, 3)]);
        assert_eq!(separating_probabilities(2), vec![ratio(1, 3), ratio(1, 5)]);
        for m in 1..6 {
            assert!(ratio_condition_holds(&separating_probabilities(m)));
        }
        // 1/4 alongside 1/3 would repeat a ratio: 1/4 / 1/3 = 3/4 / 1
        assert!(!ratio_condition_holds(&[ratio(1, 3), ratio(1, 2)]));
    }

    #[test]
    fn deterministic_and_stochastic_posteriors_agree() {
        let s = InformationStructure::simple(
            4,
            vec![part(4, &[&[0, 1], &[2, 3]]), part(4, &[&[0, 2], &[1, 3]])],
            vec![],
        )
        .unwrap();
        let s = s
            .with_prior(Prior::new(vec![ratio(1, 8), ratio(3, 8), ratio(1, 4), ratio(1, 4)]).unwrap())
            .unwrap();
        let tau = DeterministicSignaling::new(part(4, &[&[0], &[1, 2], &[3]]), vec!["x".into(), "y".into(), "x".into()])
            .unwrap();
        let st = tau.to_stochastic();
        for i in 0..2 {
            for w in 0..4 {
                let sig = st.signal_index(tau.signal_at(w)).unwrap();
                assert_eq!(det_posterior(&s, i, &tau, w).unwrap(), stoch_posterior(&s, i, &st, w, sig).unwrap());
            }
        }
    }

    #[test]
    fn lifted_signaling_keeps_pair_origins() {
        let tau = DeterministicSignaling::full_reveal(Partition::discrete(2)).to_stochastic();
        let g = Garbling::new(
            vec!["L".into(), "R".into()],
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(0, 1), ratio(1, 1)]],
        )
        .unwrap();
        let lifted = lift_garbled(&tau, &g).unwrap();
        assert_eq!(lifted.origin, vec![(0, 0), (0, 1), (1, 1)]);
        let g2 = garble(&tau, &g).unwrap();
        assert_eq!(g2.kernel()[0], vec![ratio(1, 2), ratio(1, 2)]);
    }
}
