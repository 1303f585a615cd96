//! Cross-module invariants on small random instances.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;

use oracle_core::dominance::{garbling_exists, is_imi};
use oracle_core::games::{log_score, BayesianGame, GuidedGame, StrategyProfile};
use oracle_core::lattice::refines;
use oracle_core::rational::{int, ratio};
use oracle_core::signaling::{
    experiment_matrix, lift_garbled, posterior_atlas, stoch_posterior, ExperimentMatrix, Garbling, StochasticSignaling,
};
use oracle_core::types::{Distribution, InformationStructure, Partition, Prior};
use oracle_core::Rational;

fn partition(n: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0usize..n, n).prop_map(|v| Partition::from_labels(&v))
}

fn weights(len: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0i64..5, len).prop_filter("some mass", |w| w.iter().any(|&x| x > 0))
}

fn normalize(w: &[i64]) -> Vec<Rational> {
    let t: i64 = w.iter().sum();
    w.iter().map(|&x| ratio(x, t)).collect()
}

/// Structure with two players, a random full-support prior and an oracle
/// carrying a measurable signaling.
#[derive(Debug, Clone)]
struct Instance {
    structure: InformationStructure,
    tau: StochasticSignaling,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                Just(n),
                partition(n),
                partition(n),
                partition(n),
                proptest::collection::vec(1i64..5, n),
                proptest::collection::vec(weights(3), n),
            )
        })
        .prop_map(|(n, p1, p2, f, prior, rows)| {
            let structure = InformationStructure::simple(n, vec![p1, p2], vec![])
                .unwrap()
                .with_prior(Prior::new(normalize(&prior)).unwrap())
                .unwrap();
            // Each block uses the row drawn for its least member.
            let kernel = (0..n).map(|w| normalize(&rows[f.block(f.block_of(w))[0]])).collect();
            let tau = StochasticSignaling::new(f, vec!["a".into(), "b".into(), "c".into()], kernel).unwrap();
            Instance { structure, tau }
        })
}

fn zero_sum(n: usize, table: &[i64]) -> BayesianGame {
    BayesianGame::from_fn(
        vec!["A".into(), "B".into()],
        vec![vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
        n,
        |w, p| {
            let u = int(table[(w * 4 + p[0] * 2 + p[1]) % table.len()]);
            vec![u.clone(), -u]
        },
    )
    .unwrap()
}

fn pure_profile(gg: &GuidedGame, game: &BayesianGame, pick: &[usize]) -> StrategyProfile {
    let choices: Vec<BTreeMap<_, usize>> = (0..2)
        .map(|i| {
            gg.reachable(i)
                .into_iter()
                .enumerate()
                .map(|(k, set)| (set, pick[(k + i) % pick.len()] % 2))
                .collect()
        })
        .collect();
    StrategyProfile::pure(game, &choices)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posteriors_average_back_to_the_prior(inst in instance()) {
        let atlas = posterior_atlas(&inst.structure, &inst.tau).unwrap();
        let total: Rational = atlas.weights().values().sum();
        prop_assert!(total.is_one());
        let n = inst.structure.n_states();
        for i in 0..2 {
            let mut avg = vec![Rational::zero(); n];
            for (profile, m) in atlas.weights() {
                for (w, x) in avg.iter_mut().enumerate() {
                    *x += m * profile[i].get(w);
                }
            }
            prop_assert_eq!(avg.as_slice(), inst.structure.prior.mass());
        }
    }

    #[test]
    fn experiment_rows_are_distributions(inst in instance()) {
        let m = experiment_matrix(&inst.tau, inst.structure.player(0)).unwrap();
        prop_assert_eq!(m.n_rows(), inst.structure.n_states());
        for row in &m.rows {
            prop_assert!(row.iter().sum::<Rational>().is_one());
        }
    }

    #[test]
    fn summing_out_blocks_recovers_the_kernel(inst in instance()) {
        let info = inst.structure.player(1);
        let k = info.num_blocks();
        let m = experiment_matrix(&inst.tau, info).unwrap();
        for w in 0..inst.structure.n_states() {
            for s in 0..inst.tau.n_signals() {
                let total: Rational = m.rows[w][s * k..(s + 1) * k].iter().sum();
                prop_assert_eq!(&total, inst.tau.prob(w, s));
            }
        }
    }

    #[test]
    fn lifted_tags_do_not_move_posteriors(inst in instance(), rows in proptest::collection::vec(weights(2), 3)) {
        let rows: Vec<Vec<Rational>> = rows[..inst.tau.n_signals()].iter().map(|r| normalize(r)).collect();
        let m = Garbling::new(vec!["t1".into(), "t2".into()], rows).unwrap();
        let lifted = lift_garbled(&inst.tau, &m).unwrap();
        let s = &inst.structure;
        for w in 0..s.n_states() {
            for (k, &(orig, _)) in lifted.origin.iter().enumerate() {
                if lifted.signaling.prob(w, k).is_zero() {
                    continue;
                }
                for i in 0..2 {
                    let a = stoch_posterior(s, i, &lifted.signaling, w, k).unwrap();
                    let b = stoch_posterior(s, i, &inst.tau, w, orig).unwrap();
                    prop_assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn outcome_marginal_is_the_prior(inst in instance(), table in proptest::collection::vec(-3i64..4, 16), pick in proptest::collection::vec(0usize..2, 1..6)) {
        let game = zero_sum(inst.structure.n_states(), &table);
        let gg = GuidedGame::new(&inst.structure, &game, &inst.tau).unwrap();
        let sigma = pure_profile(&gg, &game, &pick);
        let ned = gg.ned_distribution(&sigma).unwrap();
        let marginal = ned.state_marginal(inst.structure.n_states());
        prop_assert_eq!(marginal.as_slice(), inst.structure.prior.mass());
        // Zero-sum payoffs stay zero-sum in expectation.
        let pay = gg.expected_payoffs(&sigma).unwrap();
        prop_assert!((&pay[0] + &pay[1]).is_zero());
    }

    #[test]
    fn equilibria_survive_positive_affine_rescaling(inst in instance(), table in proptest::collection::vec(-3i64..4, 16), pick in proptest::collection::vec(0usize..2, 1..6), a in 1i64..5, b in -5i64..5) {
        let game = zero_sum(inst.structure.n_states(), &table);
        let scaled = game.rescaled(1, &int(a), &int(b));
        let gg = GuidedGame::new(&inst.structure, &game, &inst.tau).unwrap();
        let gs = GuidedGame::new(&inst.structure, &scaled, &inst.tau).unwrap();
        let sigma = pure_profile(&gg, &game, &pick);
        prop_assert_eq!(gg.is_equilibrium(&sigma).unwrap(), gs.is_equilibrium(&sigma).unwrap());
    }

    #[test]
    fn finer_oracles_are_individually_more_informative(n in 1usize..=4, seed in any::<u64>()) {
        let parts: Vec<Partition> = oracle_core::lattice::all_partitions(n).collect();
        let pick = |k: u64| parts[(seed.rotate_left(k as u32) % parts.len() as u64) as usize].clone();
        let s = InformationStructure::simple(n, vec![pick(0), pick(7)], vec![]).unwrap();
        let (f1, f2) = (pick(13), pick(29));
        if refines(&f1, &f2).unwrap() {
            prop_assert!(is_imi(&s, &f1, &f2).unwrap().holds);
        }
        prop_assert!(is_imi(&s, &f1, &f1).unwrap().holds);
    }

    #[test]
    fn garbling_composes(m in proptest::collection::vec(weights(3), 3), g in proptest::collection::vec(weights(2), 3), h in proptest::collection::vec(weights(2), 2)) {
        let mul = |a: &[Vec<Rational>], b: &[Vec<Rational>]| -> Vec<Vec<Rational>> {
            a.iter().map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, br)| x * &br[j]).sum()).collect()).collect()
        };
        let m: Vec<Vec<Rational>> = m.iter().map(|r| normalize(r)).collect();
        let g: Vec<Vec<Rational>> = g.iter().map(|r| normalize(r)).collect();
        let h: Vec<Vec<Rational>> = h.iter().map(|r| normalize(r)).collect();
        let mg = mul(&m, &g);
        let mgh = mul(&mg, &h);
        let em = ExperimentMatrix::from_rows(m).unwrap();
        let emg = ExperimentMatrix::from_rows(mg).unwrap();
        let emgh = ExperimentMatrix::from_rows(mgh).unwrap();
        prop_assert!(garbling_exists(&em, &em).unwrap().is_some());
        prop_assert!(garbling_exists(&em, &emg).unwrap().is_some());
        prop_assert!(garbling_exists(&emg, &emgh).unwrap().is_some());
        prop_assert!(garbling_exists(&em, &emgh).unwrap().is_some());
    }

    #[test]
    fn truthful_report_maximizes_log_score(q in weights(4), p in weights(4)) {
        let q = Distribution::new(normalize(&q)).unwrap();
        let p = Distribution::new(normalize(&p)).unwrap();
        let own = log_score(&q, &q);
        let other = log_score(&q, &p);
        prop_assert!(own >= other);
        prop_assert_eq!(own == other, p == q);
    }
}

#[test]
fn uniform_prior_is_the_default() {
    let s = InformationStructure::simple(3, vec![Partition::trivial(3)], vec![]).unwrap();
    assert!(s.prior.mass().iter().all(|x| *x == ratio(1, 3)));
    assert!(Distribution::uniform(3).mass().iter().sum::<Rational>().is_one());
}
