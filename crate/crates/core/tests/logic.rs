use std::collections::{BTreeMap, BTreeSet};

use glp_core::jtree::{JFrame, RootedTree};
use glp_core::logic::{
    check_axioms, condense, eval_kripke, eval_topo, gamma_fragment, parse, print, refute, tree_formula,
    BandValuation, Formula as F, NodeValuation, PolySpace,
};
use glp_core::ordinal::Ordinal;
use glp_core::topology::{Band, BandSet, Interval};
use proptest::prelude::*;

fn ord(s: &str) -> Ordinal {
    s.parse().unwrap()
}

#[test]
fn parse_examples() {
    assert_eq!(parse("<0> p0").unwrap(), F::dia(0, F::var(0)));
    assert_eq!(
        parse("[w] (p0 -> p1)").unwrap(),
        F::Box(ord("w"), Box::new(F::implies(F::var(0), F::var(1))))
    );
    assert_eq!(
        parse("<w^2> ~<1> T").unwrap(),
        F::Dia(ord("w^2"), Box::new(F::not(F::dia(1, F::Top))))
    );
    assert!(parse("<0> p").is_err());
    assert!(parse("p0 &").is_err());
}

#[test]
fn condense_examples() {
    let (c, s) = condense(&parse("<w>p0").unwrap());
    assert_eq!(c, parse("<0>p0").unwrap());
    assert_eq!(s, vec![ord("w")]);
    let (c, s) = condense(&parse("<0><w>p0").unwrap());
    assert_eq!(c, parse("<0><1>p0").unwrap());
    assert_eq!(s, vec![ord("0"), ord("w")]);
    let phi = parse("p0 & ~p1").unwrap();
    assert_eq!(condense(&phi), (phi, vec![]));
}

#[test]
fn topo_examples() {
    let sp = PolySpace::new(ord("w"), &[1]);
    let v = BandValuation::new();
    assert!(eval_topo(&F::Bot, &sp, &v).unwrap().is_empty());
    let got = eval_topo(&parse("<0>T").unwrap(), &sp, &v).unwrap();
    assert!(got.set_eq(&BandSet::point(ord("w"))));
    assert!(eval_topo(&F::Top, &sp, &v).unwrap().set_eq(&BandSet::interval(ord("1"), ord("w"))));

    let sp = PolySpace::new(ord("w^2"), &[1]);
    let succ = BandSet::from_band(Band::all().with(1, Interval::point(ord("0"))));
    let v: BandValuation = BTreeMap::from([(0, succ)]);
    let got = eval_topo(&parse("~p0").unwrap(), &sp, &v).unwrap();
    let lim = BandSet::from_band(Band::closed(ord("1"), ord("w^2")).with(1, Interval::half_open(ord("1"), None)));
    assert!(got.set_eq(&lim));
}

#[test]
fn kripke_examples() {
    let chain = JFrame::from_edges(2, &[vec![(0, 1)]]);
    let v = NodeValuation::new();
    assert_eq!(eval_kripke(&parse("<0>T").unwrap(), &chain, &v).unwrap(), vec![true, false]);
    assert_eq!(eval_kripke(&parse("[0]F").unwrap(), &chain, &v).unwrap(), vec![false, true]);
    let f = JFrame::from_edges(3, &[vec![(0, 1)], vec![(1, 2)]]).j_closure();
    assert_eq!(eval_kripke(&parse("<0><1>T").unwrap(), &f, &v).unwrap(), vec![true, false, false]);
}

#[test]
fn axioms_on_icard_space() {
    let sp = PolySpace::new(ord("w^w"), &[1, 2]);
    let r = check_axioms(&sp, 100, 3).unwrap();
    assert!(r.all_valid(), "{:?}", r.failures);
    assert!(r.instances.iter().all(|&n| n > 0));
    let probe = parse("<0>p0 -> <1>p0").unwrap();
    assert!(refute(&probe, &sp, 200, 1).unwrap().is_some());
}

#[test]
fn tree_formula_holds_at_root() {
    let single = tree_formula(&RootedTree::single());
    assert_eq!(single.vars(), BTreeSet::from([0]));
    for n in 1..=5 {
        for t in RootedTree::all_of_size(n) {
            let phi = tree_formula(&t);
            let v: NodeValuation = (0..n).map(|i| (i as u32, BTreeSet::from([i]))).collect();
            assert!(eval_kripke(&phi, &t.to_frame(), &v).unwrap()[0]);
        }
    }
}

#[test]
fn gamma_fragments() {
    assert_eq!(gamma_fragment(0), vec![parse("<0>p0").unwrap()]);
    assert_eq!(gamma_fragment(1), vec![parse("<0>p0").unwrap(), parse("[0](p0 -> <0>p1)").unwrap()]);
    assert_eq!(gamma_fragment(2)[2], parse("[0](p1 -> <0>p2)").unwrap());
}

fn formula() -> impl Strategy<Value = F> {
    let leaf = prop_oneof![(0u32..3).prop_map(F::var), Just(F::Top), Just(F::Bot)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(F::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| F::implies(a, b)),
            (0u64..3, inner.clone()).prop_map(|(k, a)| F::dia(k, a)),
            (0u64..3, inner).prop_map(|(k, a)| F::boxed(k, a)),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(phi in formula()) {
        prop_assert_eq!(parse(&print(&phi)).unwrap(), phi);
    }

    #[test]
    fn condense_is_idempotent(phi in formula()) {
        let (c, s) = condense(&phi);
        let (c2, s2) = condense(&c);
        prop_assert_eq!(&c2, &c);
        prop_assert_eq!(s2.len(), s.len());
    }
}
