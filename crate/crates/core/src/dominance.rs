//! Decision procedures comparing two oracles on one information structure.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{ckc_decompose, coarsenings, join, refines, COARSENING_BLOCK_CAP};
use crate::lp::feasible_point;
use crate::rational::Rational;
use crate::signaling::ExperimentMatrix;
use crate::types::{conditional, InformationStructure, Named, Partition, Prior, StateSpace};

/// Outcome of an IMI check. `witness` is the first coarsening of the second
/// oracle that no coarsening of the first can match; `matches` pairs each
/// matched coarsening with the first partner found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImiVerdict {
    pub holds: bool,
    pub witness: Option<Partition>,
    pub matches: Vec<(Partition, Partition)>,
}

fn joins_with_players(structure: &InformationStructure, f: &Partition) -> Result<Vec<Partition>> {
    structure.players.iter().map(|p| join(&p.partition, f)).collect()
}

fn check_oracle(structure: &InformationStructure, f: &Partition) -> Result<()> {
    if f.len() != structure.n_states() {
        return Err(Error::domain(format!(
            "oracle covers {} states, structure has {}",
            f.len(),
            structure.n_states()
        )));
    }
    Ok(())
}

/// Every deterministic strategy of `f2` is matched player-by-player by some
/// deterministic strategy of `f1`.
pub fn is_imi_with_cap(structure: &InformationStructure, f1: &Partition, f2: &Partition, cap: usize) -> Result<ImiVerdict> {
    check_oracle(structure, f1)?;
    check_oracle(structure, f2)?;
    let mut table: HashMap<Vec<Partition>, Partition> = HashMap::new();
    for c in coarsenings(f1, cap)? {
        let key = joins_with_players(structure, &c)?;
        table.entry(key).or_insert(c);
    }
    let mut matches = Vec::new();
    for c in coarsenings(f2, cap)? {
        match table.get(&joins_with_players(structure, &c)?) {
            Some(m) => matches.push((c, m.clone())),
            None => {
                return Ok(ImiVerdict {
                    holds: false,
                    witness: Some(c),
                    matches,
                })
            }
        }
    }
    Ok(ImiVerdict {
        holds: true,
        witness: None,
        matches,
    })
}

pub fn is_imi(structure: &InformationStructure, f1: &Partition, f2: &Partition) -> Result<ImiVerdict> {
    is_imi_with_cap(structure, f1, f2, COARSENING_BLOCK_CAP)
}

/// Dominance over deterministic signaling, which coincides with IMI.
pub fn det_dominates(structure: &InformationStructure, f1: &Partition, f2: &Partition) -> Result<ImiVerdict> {
    is_imi(structure, f1, f2)
}

fn require_unique_ckc(structure: &InformationStructure) -> Result<()> {
    let m = ckc_decompose(&structure.player_partitions())?;
    if m.num_blocks() != 1 {
        return Err(Error::domain(format!(
            "structure has {} common knowledge components; restrict to one with restrict_to_ckc first",
            m.num_blocks()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoSidedVerdict {
    pub forward: bool,
    pub backward: bool,
    pub equal: bool,
    /// IMI in both directions holds exactly when the partitions are equal.
    pub consistent: bool,
}

pub fn two_sided_imi_equal(structure: &InformationStructure, f1: &Partition, f2: &Partition) -> Result<TwoSidedVerdict> {
    require_unique_ckc(structure)?;
    let forward = is_imi(structure, f1, f2)?.holds;
    let backward = is_imi(structure, f2, f1)?.holds;
    let equal = f1 == f2;
    Ok(TwoSidedVerdict {
        forward,
        backward,
        equal,
        consistent: (forward && backward) == equal,
    })
}

/// Dominance over stochastic signaling on a single common knowledge
/// component, decided by refinement.
pub fn unique_ckc_dominates(structure: &InformationStructure, f1: &Partition, f2: &Partition) -> Result<bool> {
    require_unique_ckc(structure)?;
    check_oracle(structure, f1)?;
    refines(f1, f2)
}

/// Restriction to one common knowledge component, with the prior
/// conditioned on it.
pub fn restrict_to_ckc(structure: &InformationStructure, block: &[usize]) -> Result<InformationStructure> {
    let meet = ckc_decompose(&structure.player_partitions())?;
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.iter().any(|&w| w >= structure.n_states()) || meet.block(meet.block_of(sorted[0])) != sorted {
        return Err(Error::domain("event is not a common knowledge component"));
    }
    let cond = conditional(&structure.prior, &sorted)?;
    let prior = Prior::new(sorted.iter().map(|&w| cond.get(w).clone()).collect())?;
    let space = StateSpace::new(sorted.iter().map(|&w| structure.space.label(w).to_string()))?;
    let restrict = |v: &[Named]| {
        v.iter()
            .map(|p| Named {
                name: p.name.clone(),
                partition: p.partition.restrict(&sorted),
            })
            .collect()
    };
    InformationStructure::new(space, prior, restrict(&structure.players), restrict(&structure.oracles))
}

/// Searches for a row-stochastic `g` with `m1 g = m2`.
pub fn garbling_exists(m1: &ExperimentMatrix, m2: &ExperimentMatrix) -> Result<Option<Vec<Vec<Rational>>>> {
    if m1.n_rows() != m2.n_rows() {
        return Err(Error::domain(format!(
            "experiments have {} and {} rows",
            m1.n_rows(),
            m2.n_rows()
        )));
    }
    let (r, k, l) = (m1.n_rows(), m1.n_cols(), m2.n_cols());
    // variable g[a][b] sits at index a * l + b
    let mut a = Vec::new();
    let mut b = Vec::new();
    for w in 0..r {
        for c in 0..l {
            let mut row = vec![Rational::zero(); k * l];
            for j in 0..k {
                row[j * l + c] = m1.rows[w][j].clone();
            }
            a.push(row);
            b.push(m2.rows[w][c].clone());
        }
    }
    for j in 0..k {
        let mut row = vec![Rational::zero(); k * l];
        for c in 0..l {
            row[j * l + c] = Rational::one();
        }
        a.push(row);
        b.push(Rational::one());
    }
    Ok(feasible_point(&a, &b).map(|x| x.chunks(l.max(1)).map(<[Rational]>::to_vec).collect()))
}

/// Each player's information joined with `f1` refines the join with `f2`.
pub fn common_objective_condition(structure: &InformationStructure, f1: &Partition, f2: &Partition) -> Result<bool> {
    check_oracle(structure, f1)?;
    check_oracle(structure, f2)?;
    for p in &structure.players {
        if !refines(&join(f1, &p.partition)?, &join(f2, &p.partition)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(n, blocks).unwrap()
    }

    #[test]
    fn imi_is_reflexive_and_full_information_dominates() {
        let s = InformationStructure::simple(3, vec![part(3, &[&[0, 1], &[2]])], vec![]).unwrap();
        let f = part(3, &[&[0], &[1, 2]]);
        assert!(is_imi(&s, &f, &f).unwrap().holds);
        assert!(is_imi(&s, &Partition::discrete(3), &f).unwrap().holds);
        assert!(!is_imi(&s, &Partition::trivial(3), &f).unwrap().holds);
    }

    #[test]
    fn multiple_components_are_refused() {
        let s = InformationStructure::simple(2, vec![Partition::discrete(2)], vec![]).unwrap();
        let f = Partition::trivial(2);
        assert!(unique_ckc_dominates(&s, &f, &f).is_err());
        assert!(two_sided_imi_equal(&s, &f, &f).is_err());
        let r = restrict_to_ckc(&s, &[1]).unwrap();
        assert_eq!(r.n_states(), 1);
        assert!(restrict_to_ckc(&s, &[0, 1]).is_err());
    }

    #[test]
    fn garbling_identity_and_unit_rows() {
        let m = ExperimentMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 4), ratio(3, 4)],
        ])
        .unwrap();
        assert!(garbling_exists(&m, &m).unwrap().is_some());
        let full = ExperimentMatrix::from_rows(vec![
            vec![ratio(1, 1), ratio(0, 1)],
            vec![ratio(0, 1), ratio(1, 1)],
        ])
        .unwrap();
        let g = garbling_exists(&full, &m).unwrap().unwrap();
        assert_eq!(g, m.rows);
        assert!(garbling_exists(&m, &full).unwrap().is_none());
    }
}
