use opengame_core::enumeration::{canonical_form, canonicalize, homeomorphic};
use opengame_core::game::{evaluate_policy, solve_game, GameVariant};
use opengame_core::invariants::{self, InvariantReport};
use opengame_core::metric::{greedy_dense_sequence, random_pseudometric, topology_from_pseudometric, Rational};
use opengame_core::products::product;
use opengame_core::space::{default_labels, FiniteSpace, PointSet};
use opengame_core::strategies::{pi_base_strategy, product_strategy, OrderedPiBase, OwnedTablePolicy};
use proptest::prelude::*;
use rand::rngs::SmallRng;
use rand::SeedableRng;

/// A random topology: the reflexive-transitive closure of a random relation.
fn space(max_n: usize) -> impl Strategy<Value = FiniteSpace> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<u64>(), n).prop_map(move |rows| {
            let full = PointSet::full(n);
            let mut u: Vec<PointSet> = rows.iter().enumerate().map(|(i, &r)| (PointSet(r) & full) | PointSet::singleton(i)).collect();
            loop {
                let next: Vec<PointSet> = u.iter().map(|&ux| ux.iter().fold(ux, |acc, y| acc | u[y])).collect();
                if next == u {
                    break;
                }
                u = next;
            }
            FiniteSpace::from_neighbourhoods("rand", default_labels(n), u).unwrap()
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Closure as the complement of the union of opens missing `s`.
fn closure_by_scan(x: &FiniteSpace, s: PointSet) -> PointSet {
    let missing = x.opens().unwrap().iter().filter(|o| !o.meets(s)).fold(PointSet::EMPTY, |acc, &o| acc | o);
    missing.complement(x.len())
}

proptest! {
    #[test]
    fn closure_matches_lattice_scan(x in space(6), bits in any::<u64>()) {
        let s = PointSet(bits) & x.full();
        let cl = x.closure(s);
        prop_assert_eq!(cl, closure_by_scan(&x, s));
        prop_assert!(s.is_subset(cl));
        prop_assert_eq!(x.closure(cl), cl);
        prop_assert_eq!(x.interior(s), x.closure(s.complement(x.len())).complement(x.len()));
    }

    #[test]
    fn minimal_opens_are_disjoint_and_meet_every_open(x in space(6)) {
        let mins = x.minimal_opens();
        for (i, a) in mins.iter().enumerate() {
            prop_assert!(x.is_open(*a));
            for b in &mins[i + 1..] {
                prop_assert!(!a.meets(*b));
            }
        }
        for &o in x.opens().unwrap().iter().filter(|o| !o.is_empty()) {
            prop_assert!(mins.iter().any(|m| m.is_subset(o)));
        }
    }

    #[test]
    fn canonical_form_is_permutation_invariant(
        (x, perm) in space(5).prop_flat_map(|x| { let n = x.len(); (Just(x), permutation(n)) })
    ) {
        let y = x.permuted(&perm);
        prop_assert_eq!(canonical_form(&x).0, canonical_form(&y).0);
        let c = canonicalize(&x);
        prop_assert_eq!(canonical_form(&c).0, canonical_form(&canonicalize(&c)).0);
        prop_assert!(homeomorphic(&c, &y));
        prop_assert_eq!(InvariantReport::compute(&x).unwrap(), InvariantReport::compute(&y).unwrap());
    }

    #[test]
    fn invariant_chain(x in space(5)) {
        let r = InvariantReport::compute(&x).unwrap();
        prop_assert!(r.chain_holds(), "{:?}", r);
        prop_assert_eq!(r.t, 1);
        prop_assert_eq!(r.w, invariants::brute::weight(&x).unwrap());
        prop_assert_eq!(r.delta, invariants::brute::delta(&x).unwrap());
    }

    #[test]
    fn solver_values_are_monotone(x in space(5)) {
        let t = solve_game(&x, GameVariant::Restricted).unwrap();
        let entries: Vec<_> = t.entries().map(|(c, e)| (c, e.value)).collect();
        for &(c, v) in &entries {
            for &(c2, v2) in &entries {
                if c2.is_subset(c) {
                    prop_assert!(v <= v2);
                }
            }
        }
    }

    #[test]
    fn pi_base_worst_case_is_pi(x in space(5)) {
        let p = pi_base_strategy(OrderedPiBase::minimal(&x));
        prop_assert_eq!(evaluate_policy(&x, &p, GameVariant::Restricted).unwrap(), invariants::pi_weight(&x));
    }

    #[test]
    fn product_bounds(x in space(3), y in space(3)) {
        let prod = product(&[x.clone(), y.clone()]).unwrap();
        let p = prod.space();
        prop_assert_eq!(invariants::pi_weight(p), invariants::pi_weight(&x) * invariants::pi_weight(&y));
        let gd_y = solve_game(&y, GameVariant::Restricted).unwrap().gd();
        let gd_p = solve_game(p, GameVariant::Restricted).unwrap().gd();
        let table = OwnedTablePolicy(solve_game(&y, GameVariant::Restricted).unwrap());
        let ps = product_strategy(&x, &y, OrderedPiBase::minimal(&x), Box::new(table), GameVariant::Restricted).unwrap();
        let e = evaluate_policy(p, &ps, GameVariant::Restricted).unwrap();
        prop_assert!(gd_p <= e && e <= invariants::pi_weight(&x) * gd_y);
        for pt in 0..p.len() {
            prop_assert_eq!(prod.point(&prod.coords(pt)), pt);
        }
    }

    #[test]
    fn greedy_runs(seed in any::<u64>(), n in 1usize..=12) {
        let m = random_pseudometric(&mut SmallRng::seed_from_u64(seed), n);
        let start = (seed % n as u64) as usize;
        let run = greedy_dense_sequence(&m, start).unwrap();
        prop_assert_eq!(run.order[0], start);
        prop_assert!(run.radii.windows(2).all(|w| w[1] <= w[0]));
        let two = Rational::from_integer(2);
        for b in 1..run.order.len() {
            for a in 0..b {
                prop_assert!(m.dist(run.order[b], run.order[a]) >= run.radii[b - 1] / two);
            }
        }
        let t = topology_from_pseudometric(&m).unwrap();
        prop_assert!(t.is_dense(PointSet::from_points(run.order.iter().copied())));
        prop_assert_eq!(run.order.len(), m.class_count());
        prop_assert_eq!(invariants::weight(&t), invariants::pi_weight(&t));
    }
}
