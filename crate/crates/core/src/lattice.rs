//! Lattice operations on partitions of a common state space.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::types::Partition;

/// Default upper bound on the number of blocks whose coarsenings are listed.
pub const COARSENING_BLOCK_CAP: usize = 10;

fn same_space(p: &Partition, q: &Partition) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::domain(format!(
            "partitions cover {} and {} states",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Coarsest common refinement.
pub fn join(p: &Partition, q: &Partition) -> Result<Partition> {
    same_space(p, q)?;
    let pairs: Vec<(usize, usize)> = (0..p.len()).map(|w| (p.block_of(w), q.block_of(w))).collect();
    Ok(Partition::from_labels(&pairs))
}

pub fn join_all(parts: &[&Partition]) -> Result<Partition> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::domain("join of no partitions"))?;
    rest.iter().try_fold((*first).clone(), |acc, p| join(&acc, p))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Finest common coarsening: the components of the graph linking states that
/// share a block in any of the inputs.
pub fn meet(parts: &[&Partition]) -> Result<Partition> {
    let first = parts
        .first()
        .ok_or_else(|| Error::domain("meet of no partitions"))?;
    let n = first.len();
    let mut uf = UnionFind((0..n).collect());
    for p in parts {
        same_space(first, p)?;
        let mut rep: HashMap<usize, usize> = HashMap::new();
        for w in 0..n {
            let r = *rep.entry(p.block_of(w)).or_insert(w);
            uf.union(r, w);
        }
    }
    let roots: Vec<usize> = (0..n).map(|w| uf.find(w)).collect();
    Ok(Partition::from_labels(&roots))
}

/// Common knowledge components of the player partitions.
pub fn ckc_decompose(parts: &[&Partition]) -> Result<Partition> {
    meet(parts)
}

/// True when every block of `p` lies inside a block of `q`.
pub fn refines(p: &Partition, q: &Partition) -> Result<bool> {
    same_space(p, q)?;
    let mut image = vec![usize::MAX; p.num_blocks()];
    for w in 0..p.len() {
        let slot = &mut image[p.block_of(w)];
        if *slot == usize::MAX {
            *slot = q.block_of(w);
        } else if *slot != q.block_of(w) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bell numbers; `bell(k)` counts the partitions of a `k`-set.
pub fn bell(k: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// Restricted growth strings of length `k` in lexicographic order.
#[derive(Clone, Debug)]
pub struct RestrictedGrowth {
    current: Option<Vec<usize>>,
}

impl RestrictedGrowth {
    pub fn new(k: usize) -> Self {
        RestrictedGrowth {
            current: Some(vec![0; k]),
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut s = out.clone();
        let k = s.len();
        // prefix maxima
        let mut maxes = vec![0usize; k];
        for i in 1..k {
            maxes[i] = maxes[i - 1].max(s[i - 1]);
        }
        let mut i = k;
        while i > 1 {
            i -= 1;
            if s[i] <= maxes[i] {
                s[i] += 1;
                for x in s.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                self.current = Some(s);
                break;
            }
        }
        Some(out)
    }
}

/// Every partition of `0..n`, in restricted-growth order.
pub fn all_partitions(n: usize) -> impl Iterator<Item = Partition> {
    RestrictedGrowth::new(n).map(|s| Partition::from_labels(&s))
}

/// All partitions that `p` refines, from the trivial partition up to `p`
/// itself. Fails once `p` has more than `cap` blocks.
pub fn coarsenings(p: &Partition, cap: usize) -> Result<Vec<Partition>> {
    let k = p.num_blocks();
    if k > cap {
        return Err(Error::resource(
            format!("coarsenings of a {k}-block partition"),
            bell(k),
            bell(cap),
        ));
    }
    Ok(RestrictedGrowth::new(k)
        .map(|s| {
            let raw: Vec<usize> = p.labels().iter().map(|&b| s[b]).collect();
            Partition::from_labels(&raw)
        })
        .collect())
}

/// One hop of a connecting path: `player` holds `from` and `to` in one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub player: usize,
    pub from: usize,
    pub to: usize,
}

/// Shortest chain of shared blocks joining `a` to `b`, if any. Ties go to
/// the smaller state, then the smaller player index.
pub fn connect_path(parts: &[&Partition], a: usize, b: usize) -> Result<Option<Vec<PathStep>>> {
    let first = parts
        .first()
        .ok_or_else(|| Error::domain("path over no partitions"))?;
    let n = first.len();
    for p in parts {
        same_space(first, p)?;
    }
    if a >= n || b >= n {
        return Err(Error::domain("path endpoint outside the space"));
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        if x == b {
            break;
        }
        for y in 0..n {
            if seen[y] {
                continue;
            }
            if let Some(i) = parts.iter().position(|p| p.same_block(x, y)) {
                seen[y] = true;
                prev[y] = Some((x, i));
                queue.push_back(y);
            }
        }
    }
    if !seen[b] {
        return Ok(None);
    }
    let mut steps = Vec::new();
    let mut cur = b;
    while let Some((x, i)) = prev[cur] {
        steps.push(PathStep {
            player: i,
            from: x,
            to: cur,
        });
        cur = x;
    }
    steps.reverse();
    Ok(Some(steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(n, blocks).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let expected = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (k, &b) in expected.iter().enumerate() {
            assert_eq!(bell(k), b);
            assert_eq!(RestrictedGrowth::new(k).count() as u128, b);
        }
    }

    #[test]
    fn join_and_meet_small() {
        let p = part(4, &[&[0, 1], &[2, 3]]);
        let q = part(4, &[&[0, 2], &[1], &[3]]);
        assert_eq!(join(&p, &q).unwrap(), Partition::discrete(4));
        assert_eq!(meet(&[&p, &q]).unwrap(), Partition::trivial(4));
        let r = part(4, &[&[0], &[1], &[2, 3]]);
        assert_eq!(meet(&[&p, &r]).unwrap(), p);
        assert!(join(&p, &Partition::trivial(3)).is_err());
    }

    #[test]
    fn coarsenings_listed_in_order() {
        let p = part(3, &[&[0, 2], &[1]]);
        let c = coarsenings(&p, COARSENING_BLOCK_CAP).unwrap();
        assert_eq!(c, vec![Partition::trivial(3), p.clone()]);
        let big = Partition::discrete(11);
        assert!(matches!(coarsenings(&big, COARSENING_BLOCK_CAP), Err(Error::Resource { .. })));
    }

    #[test]
    fn path_prefers_low_states_then_low_players() {
        let p1 = part(4, &[&[0, 1], &[2], &[3]]);
        let p2 = part(4, &[&[0], &[1, 2, 3]]);
        let path = connect_path(&[&p1, &p2], 0, 3).unwrap().unwrap();
        assert_eq!(
            path,
            vec![
                PathStep { player: 0, from: 0, to: 1 },
                PathStep { player: 1, from: 1, to: 3 },
            ]
        );
        let split = part(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(connect_path(&[&split], 0, 2).unwrap(), None);
        assert_eq!(connect_path(&[&split], 2, 2).unwrap(), Some(vec![]));
    }

    fn arb_partition(n: usize) -> impl Strategy<Value = Partition> {
        proptest::collection::vec(0usize..n.max(1), n).prop_map(|v| Partition::from_labels(&v))
    }

    fn arb_pair() -> impl Strategy<Value = (Partition, Partition, Partition)> {
        (1usize..8).prop_flat_map(|n| (arb_partition(n), arb_partition(n), arb_partition(n)))
    }

    proptest! {
        #[test]
        fn lattice_laws((p, q, r) in arb_pair()) {
            let j = join(&p, &q).unwrap();
            let m = meet(&[&p, &q]).unwrap();
            prop_assert!(refines(&j, &p).unwrap() && refines(&j, &q).unwrap());
            prop_assert!(refines(&p, &m).unwrap() && refines(&q, &m).unwrap());
            prop_assert_eq!(&j, &join(&q, &p).unwrap());
            prop_assert_eq!(&m, &meet(&[&q, &p]).unwrap());
            prop_assert_eq!(join(&j, &r).unwrap(), join(&p, &join(&q, &r).unwrap()).unwrap());
            prop_assert_eq!(meet(&[&m, &r]).unwrap(), meet(&[&p, &q, &r]).unwrap());
            // absorption
            prop_assert_eq!(join(&p, &m).unwrap(), p.clone());
            prop_assert_eq!(meet(&[&p, &j]).unwrap(), p.clone());
            // refinement is equivalent to join equality
            prop_assert_eq!(refines(&p, &q).unwrap(), join(&p, &q).unwrap() == p);
        }

        #[test]
        fn coarsenings_are_exactly_the_coarser_partitions(p in (1usize..6).prop_flat_map(arb_partition)) {
            let listed = coarsenings(&p, COARSENING_BLOCK_CAP).unwrap();
            prop_assert_eq!(listed.len() as u128, bell(p.num_blocks()));
            let expected: Vec<Partition> = all_partitions(p.len())
                .filter(|c| refines(&p, c).unwrap())
                .collect();
            let mut a = listed.clone();
            let mut b = expected;
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn path_exists_iff_same_component((p, q, _r) in arb_pair(), a in 0usize..8, b in 0usize..8) {
            let n = p.len();
            let (a, b) = (a % n, b % n);
            let m = meet(&[&p, &q]).unwrap();
            let path = connect_path(&[&p, &q], a, b).unwrap();
            prop_assert_eq!(path.is_some(), m.same_block(a, b));
            if let Some(steps) = path {
                let mut cur = a;
                for s in &steps {
                    prop_assert_eq!(s.from, cur);
                    prop_assert!([&p, &q][s.player].same_block(s.from, s.to));
                    cur = s.to;
                }
                prop_assert_eq!(cur, b);
            }
        }
    }
}
