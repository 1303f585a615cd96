//! States, priors, partitions and information structures.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, sum, Rational};

/// Ordered, labelled finite state space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::domain("state space is empty"));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::domain(format!("duplicate state label {l:?}")));
            }
        }
        Ok(StateSpace { labels, index })
    }

    /// States labelled `"1"`, `"2"`, ...
    pub fn numbered(n: usize) -> Self {
        StateSpace::new((1..=n).map(|i| i.to_string())).expect("n > 0")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::domain(format!("unknown state {label:?}")))
    }
}

/// Probability vector over states. Entries are non-negative and sum to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution(Vec<Rational>);

impl Distribution {
    pub fn new(mass: Vec<Rational>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::domain("distribution over no states"));
        }
        if let Some(i) = mass.iter().position(|m| m.is_negative()) {
            return Err(Error::domain(format!("negative mass at state index {i}")));
        }
        let total = sum(&mass);
        if !total.is_one() {
            return Err(Error::domain(format!(
                "masses sum to {}, not 1",
                fmt_rational(&total)
            )));
        }
        Ok(Distribution(mass))
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut v = vec![Rational::zero(); n];
        v[at] = Rational::one();
        Distribution(v)
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(vec![Rational::new(1.into(), (n as i64).into()); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mass(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(fmt_rational).collect()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// Full-support prior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prior(Distribution);

impl Prior {
    pub fn new(mass: Vec<Rational>) -> Result<Self> {
        let d = Distribution::new(mass)?;
        if let Some(i) = d.0.iter().position(|m| m.is_zero()) {
            return Err(Error::domain(format!("prior has zero mass at state index {i}")));
        }
        Ok(Prior(d))
    }

    pub fn uniform(n: usize) -> Self {
        Prior(Distribution::uniform(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rational {
        self.0.get(i)
    }

    pub fn mass(&self) -> &[Rational] {
        self.0.mass()
    }

    pub fn as_distribution(&self) -> &Distribution {
        &self.0
    }

    pub fn event_mass(&self, event: &[usize]) -> Rational {
        event.iter().map(|&w| self.get(w)).sum()
    }
}

/// Bayesian conditioning of the prior on an event.
pub fn conditional(prior: &Prior, event: &[usize]) -> Result<Distribution> {
    let n = prior.len();
    if let Some(&w) = event.iter().find(|&&w| w >= n) {
        return Err(Error::domain(format!("state index {w} outside the space")));
    }
    let total = prior.event_mass(event);
    if total.is_zero() {
        return Err(Error::domain("conditioning on a null event"));
    }
    let mut v = vec![Rational::zero(); n];
    for &w in event {
        v[w] = prior.get(w) / &total;
    }
    Ok(Distribution(v))
}

/// Partition of `{0..n}` stored as a restricted-growth label vector, so equal
/// partitions have equal representations and blocks are ordered by their
/// least member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Relabels an arbitrary block assignment into canonical form.
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(raw: &[T]) -> Self {
        let mut seen: HashMap<T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|x| {
                let next = seen.len();
                *seen.entry(*x).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            blocks: seen.len(),
        }
    }

    /// Validates that `blocks` cover `0..n` disjointly with no empty block.
    pub fn from_blocks<B: AsRef<[usize]>>(n: usize, blocks: &[B]) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            let block = block.as_ref();
            if block.is_empty() {
                return Err(Error::domain("partition has an empty block"));
            }
            for &w in block {
                if w >= n {
                    return Err(Error::domain(format!("state index {w} outside the space")));
                }
                if owner[w] != usize::MAX {
                    return Err(Error::domain(format!("state index {w} appears in two blocks")));
                }
                owner[w] = b;
            }
        }
        if let Some(w) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::domain(format!("state index {w} is not covered")));
        }
        Ok(Partition::from_labels(&owner))
    }

    pub fn trivial(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    pub fn discrete(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
            blocks: n,
        }
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.labels[state]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn block(&self, b: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&w| self.labels[w] == b)
            .collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (w, &b) in self.labels.iter().enumerate() {
            out[b].push(w);
        }
        out
    }

    /// Restriction to a subset of states, reindexed in the subset's order.
    pub fn restrict(&self, subset: &[usize]) -> Partition {
        let raw: Vec<usize> = subset.iter().map(|&w| self.labels[w]).collect();
        Partition::from_labels(&raw)
    }

    pub fn render(&self, space: &StateSpace) -> String {
        let inner: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&w| space.label(w)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        format!("{{{}}}", inner.join(", "))
    }

    pub fn to_label_blocks(&self, space: &StateSpace) -> Vec<Vec<String>> {
        self.blocks()
            .iter()
            .map(|b| b.iter().map(|&w| space.label(w).to_string()).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Named {
    pub name: String,
    pub partition: Partition,
}

/// State space, prior, player partitions and candidate oracle partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InformationStructure {
    pub space: StateSpace,
    pub prior: Prior,
    pub players: Vec<Named>,
    pub oracles: Vec<Named>,
}

impl InformationStructure {
    pub fn new(space: StateSpace, prior: Prior, players: Vec<Named>, oracles: Vec<Named>) -> Result<Self> {
        if prior.len() != space.len() {
            return Err(Error::domain(format!(
                "prior has {} entries for {} states",
                prior.len(),
                space.len()
            )));
        }
        if players.is_empty() {
            return Err(Error::domain("structure has no players"));
        }
        for p in players.iter().chain(oracles.iter()) {
            if p.partition.len() != space.len() {
                return Err(Error::domain(format!(
                    "partition {:?} covers {} states, expected {}",
                    p.name,
                    p.partition.len(),
                    space.len()
                )));
            }
        }
        Ok(InformationStructure {
            space,
            prior,
            players,
            oracles,
        })
    }

    /// Numbered states, uniform prior, anonymous players `P1..` and oracles.
    pub fn simple(n: usize, players: Vec<Partition>, oracles: Vec<Partition>) -> Result<Self> {
        let named = |prefix: &str, v: Vec<Partition>| {
            v.into_iter()
                .enumerate()
                .map(|(i, partition)| Named {
                    name: format!("{prefix}{}", i + 1),
                    partition,
                })
                .collect::<Vec<_>>()
        };
        InformationStructure::new(
            StateSpace::numbered(n),
            Prior::uniform(n),
            named("P", players),
            named("F", oracles),
        )
    }

    pub fn n_states(&self) -> usize {
        self.space.len()
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn player(&self, i: usize) -> &Partition {
        &self.players[i].partition
    }

    pub fn player_partitions(&self) -> Vec<&Partition> {
        self.players.iter().map(|p| &p.partition).collect()
    }

    pub fn player_index(&self, name: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::domain(format!("unknown player {name:?}")))
    }

    pub fn oracle(&self, name: &str) -> Result<&Partition> {
        self.oracles
            .iter()
            .find(|o| o.name == name)
            .map(|o| &o.partition)
            .ok_or_else(|| Error::domain(format!("unknown oracle {name:?}")))
    }

    /// Player or oracle partition by name.
    pub fn partition(&self, name: &str) -> Result<&Partition> {
        self.players
            .iter()
            .chain(self.oracles.iter())
            .find(|o| o.name == name)
            .map(|o| &o.partition)
            .ok_or_else(|| Error::domain(format!("unknown partition {name:?}")))
    }

    pub fn with_prior(&self, prior: Prior) -> Result<Self> {
        InformationStructure::new(self.space.clone(), prior, self.players.clone(), self.oracles.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_orders_blocks_by_least_member() {
        let p = Partition::from_blocks(4, &[vec![3, 1], vec![2], vec![0]]).unwrap();
        assert_eq!(p.blocks(), vec![vec![0], vec![1, 3], vec![2]]);
        assert_eq!(p.labels(), &[0, 1, 2, 1]);
        let q = Partition::from_labels(&['z', 'a', 'q', 'a']);
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_bad_blocks() {
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::from_blocks(2, &[vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn prior_must_have_full_support() {
        assert!(Prior::new(vec![ratio(1, 2), ratio(1, 2), ratio(0, 1)]).is_err());
        assert!(Prior::new(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Prior::new(vec![ratio(3, 4), ratio(1, 4)]).is_ok());
    }

    #[test]
    fn conditional_on_event() {
        let p = Prior::new(vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap();
        let c = conditional(&p, &[0, 2]).unwrap();
        assert_eq!(c.mass(), &[ratio(2, 3), ratio(0, 1), ratio(1, 3)]);
        assert!(conditional(&p, &[]).is_err());
        assert!(conditional(&p, &[5]).is_err());
    }

    #[test]
    fn duplicate_state_labels_rejected() {
        assert!(StateSpace::new(["a", "b", "a"]).is_err());
    }

    proptest! {
        #[test]
        fn conditional_is_a_distribution_on_the_event(
            weights in proptest::collection::vec(1u32..20, 1..7),
            mask in proptest::collection::vec(any::<bool>(), 7)
        ) {
            let total: u32 = weights.iter().sum();
            let prior = Prior::new(weights.iter().map(|&w| ratio(w as i64, total as i64)).collect()).unwrap();
            let event: Vec<usize> = (0..weights.len()).filter(|&i| mask[i]).collect();
            prop_assume!(!event.is_empty());
            let c = conditional(&prior, &event).unwrap();
            prop_assert!(Distribution::new(c.mass().to_vec()).is_ok());
            for i in 0..weights.len() {
                if !event.contains(&i) {
                    prop_assert!(c.get(i).is_zero());
                } else {
                    // ratios inside the event match the prior
                    prop_assert_eq!(c.get(i) * prior.event_mass(&event), prior.get(i).clone());
                }
            }
        }

        #[test]
        fn from_labels_is_idempotent(raw in proptest::collection::vec(0u8..4, 0..8)) {
            let p = Partition::from_labels(&raw);
            let again = Partition::from_labels(p.labels());
            prop_assert_eq!(&p, &again);
            let rebuilt = Partition::from_blocks(p.len(), &p.blocks()).unwrap();
            prop_assert_eq!(p, rebuilt);
        }
    }
}
