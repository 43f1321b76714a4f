use std::collections::BTreeMap;

use num_traits::Zero;
use pecbound::bounds::{self, BoundOptions, InnerMode, TupleFamily, WeightVector};
use pecbound::erasure::DestSet;
use pecbound::lp::Row;
use pecbound::rational::{int, ratio, to_f64};
use pecbound::relay::{self, CutSpec, EdgeSpec, GraphSpec, NodeKind, NodeSpec, RelayGraph};
use pecbound::{ConstraintSystem, ErasureModel, Mode, MultiInputPEC, Rational, Relation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prob(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.random_range(0..=10), 10)
}

fn random_model(rng: &mut ChaCha8Rng, k: usize) -> ErasureModel {
    match rng.random_range(0..3) {
        0 => ErasureModel::independent((0..k).map(|_| prob(rng)).collect::<Vec<_>>()),
        1 => ErasureModel::identical(prob(rng)),
        _ => {
            let weights: Vec<i64> = DestSet::all_subsets(k).map(|_| rng.random_range(0..4)).collect();
            let total: i64 = weights.iter().sum();
            if total == 0 {
                return ErasureModel::identical(prob(rng));
            }
            ErasureModel::joint(DestSet::all_subsets(k).zip(weights).map(|(s, w)| (s, ratio(w, total))))
        }
    }
}

fn channel(seed: u64, max_k: usize, max_m: usize) -> MultiInputPEC {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=max_k);
    let m = rng.random_range(1..=max_m);
    MultiInputPEC::new(k, (0..m).map(|_| random_model(&mut rng, k)).collect()).unwrap()
}

fn weights(seed: u64, k: usize) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    WeightVector((0..k).map(|_| ratio(rng.random_range(0..=6), rng.random_range(1..=3))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn non_reception_is_monotone(seed in any::<u64>()) {
        let ch = channel(seed, 4, 3);
        let k = ch.destinations();
        for i in 1..=ch.subchannel_count() {
            for a in DestSet::all_subsets(k) {
                for b in DestSet::all_subsets(k).filter(|b| a.is_subset_of(*b)) {
                    prop_assert!(ch.joint_non_reception(i, a).unwrap() >= ch.joint_non_reception(i, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn joint_conversion_round_trips(seed in any::<u64>()) {
        let ch = channel(seed, 4, 3);
        let joint = ch.to_joint();
        for i in 1..=ch.subchannel_count() {
            for a in DestSet::all_subsets(ch.destinations()) {
                prop_assert_eq!(ch.joint_non_reception(i, a).unwrap(), joint.joint_non_reception(i, a).unwrap());
            }
        }
        prop_assert_eq!(MultiInputPEC::from_json(&ch.to_json()).unwrap().to_json(), ch.to_json());
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let ch = channel(seed, 4, 3);
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| ch.sample_slot(&mut rng)).collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(), draw());
    }

    #[test]
    fn optima_are_relabeling_invariant(seed in any::<u64>(), shift in 0usize..3) {
        let ch = channel(seed, 3, 2);
        let k = ch.destinations();
        let mu = weights(seed, k);
        let perm: Vec<usize> = (0..k).map(|j| (j + shift) % k + 1).collect();
        let relabeled = ch.relabel(&perm).unwrap();
        let mu2 = WeightVector(perm.iter().map(|&old| mu.0[old - 1].clone()).collect());
        let opts = BoundOptions::default();
        prop_assert_eq!(
            bounds::outer_max_weighted(&ch, &mu, &opts).unwrap().value,
            bounds::outer_max_weighted(&relabeled, &mu2, &opts).unwrap().value
        );
        prop_assert_eq!(
            bounds::timesharing_functional(&ch, &mu).unwrap(),
            bounds::timesharing_functional(&relabeled, &mu2).unwrap()
        );
        prop_assert_eq!(
            bounds::inner_max_weighted(&ch, &mu, InnerMode::CapacitySum, Mode::Exact).unwrap().value,
            bounds::inner_max_weighted(&relabeled, &mu2, InnerMode::CapacitySum, Mode::Exact).unwrap().value
        );
    }

    #[test]
    fn regions_are_ordered(seed in any::<u64>()) {
        let ch = channel(seed, 3, 2);
        let mu = weights(seed, ch.destinations());
        let opts = BoundOptions::default();
        let shared = BoundOptions { family: TupleFamily::Shared, ..opts };
        let ts = bounds::timesharing_functional(&ch, &mu).unwrap();
        let inner = bounds::inner_max_weighted(&ch, &mu, InnerMode::CapacitySum, Mode::Exact).unwrap().value;
        let outer = bounds::outer_max_weighted(&ch, &mu, &opts).unwrap().value;
        let single = bounds::outer_max_weighted(&ch, &mu, &shared).unwrap().value;
        prop_assert!(ts <= inner);
        prop_assert!(inner <= outer);
        prop_assert!(outer <= single);
    }

    #[test]
    fn lazy_optimum_matches_full_joint_lp(seed in any::<u64>()) {
        let ch = channel(seed, 3, 2);
        let mu = weights(seed, ch.destinations());
        let opts = BoundOptions::default();
        let lazy = bounds::outer_max_weighted(&ch, &mu, &opts).unwrap();
        let full = bounds::outer_joint_system(&ch, &opts).unwrap();
        let mut obj = vec![Rational::zero(); full.variables().len()];
        obj[..mu.0.len()].clone_from_slice(&mu.0);
        let sol = full.maximize(&obj, Mode::Exact).unwrap();
        prop_assert_eq!(Some(lazy.value.clone()), sol.objective);
        prop_assert!(full.feasible_dense(&sol.assignment));
        prop_assert!(bounds::outer_membership(&ch, &lazy.rates, &opts).unwrap());
    }

    #[test]
    fn float_mode_tracks_exact(seed in any::<u64>()) {
        let ch = channel(seed, 3, 2);
        let mu = weights(seed, ch.destinations());
        let exact = bounds::outer_max_weighted(&ch, &mu, &BoundOptions::default()).unwrap().value;
        let float = bounds::outer_max_weighted(&ch, &mu, &BoundOptions { mode: Mode::Float, ..Default::default() }).unwrap().value;
        prop_assert!((to_f64(&exact) - to_f64(&float)).abs() < 1e-6);
    }

    #[test]
    fn inner_points_are_outer_members(seed in any::<u64>()) {
        let ch = channel(seed, 2, 2);
        let k = ch.destinations();
        let inner = bounds::inner_bound_system(&ch, InnerMode::CapacitySum).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..6 {
            let point: Vec<Rational> = (0..k).map(|_| ratio(rng.random_range(0..=20), 10)).collect();
            let mut fixed = inner.clone();
            for (j, r) in point.iter().enumerate() {
                fixed.add_row(Row::new([(j, int(1))], Relation::Eq, r.clone())).unwrap();
            }
            if fixed.is_feasible(Mode::Exact).unwrap() {
                prop_assert!(bounds::outer_membership(&ch, &point, &BoundOptions::default()).unwrap());
            }
        }
    }

    #[test]
    fn relay_bound_is_monotone_in_erasures(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = ["s", "a", "b", "t1", "t2"];
        let mut edges = Vec::new();
        for (f, from) in ids.iter().enumerate() {
            for (t, to) in ids.iter().enumerate() {
                if f < t && rng.random_bool(0.6) {
                    edges.push((from.to_string(), to.to_string(), ratio(rng.random_range(1..=9), 10)));
                }
            }
        }
        let build = |edges: &[(String, String, Rational)]| {
            RelayGraph::from_spec(&GraphSpec {
                nodes: vec![
                    NodeSpec { id: "s".into(), kind: NodeKind::Source, dest_index: None },
                    NodeSpec { id: "a".into(), kind: NodeKind::Relay, dest_index: None },
                    NodeSpec { id: "b".into(), kind: NodeKind::Relay, dest_index: None },
                    NodeSpec { id: "t1".into(), kind: NodeKind::Dest, dest_index: Some(1) },
                    NodeSpec { id: "t2".into(), kind: NodeKind::Dest, dest_index: Some(2) },
                ],
                edges: edges
                    .iter()
                    .map(|(f, t, e)| EdgeSpec { from: f.clone(), to: t.clone(), eps: pecbound::erasure::ProbText(e.clone()) })
                    .collect(),
            })
            .unwrap()
        };
        let g = build(&edges);
        let a_set: Vec<&str> = ["b", "t1", "t2"].into_iter().filter(|_| true).collect();
        let Ok(cut) = CutSpec::new(&g, &a_set, &[]) else { return Ok(()) };
        let Ok(before) = relay::reduce(&g, &cut) else { return Ok(()) };
        let mut better = edges.clone();
        let pick = rng.random_range(0..better.len().max(1));
        if let Some(e) = better.get_mut(pick) {
            e.2 = &e.2 * ratio(1, 2);
        }
        let g2 = build(&better);
        let cut2 = CutSpec::new(&g2, &a_set, &[]).unwrap();
        let after = relay::reduce(&g2, &cut2).unwrap();
        let mu = BTreeMap::from([(1, int(1)), (2, int(1))]);
        let opts = BoundOptions::default();
        let v1 = relay::network_max_weighted(&before, &mu, &opts).unwrap().value;
        let v2 = relay::network_max_weighted(&after, &mu, &opts).unwrap().value;
        prop_assert!(v2 >= v1, "lowering an erasure shrank the bound: {} -> {}", v1, v2);
    }

    #[test]
    fn constraint_systems_round_trip(seed in any::<u64>()) {
        let ch = channel(seed, 3, 2);
        let sys = bounds::outer_joint_system(&ch, &BoundOptions::default()).unwrap();
        let back = ConstraintSystem::from_json(&sys.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), sys.to_json());
    }
}
