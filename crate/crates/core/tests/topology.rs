use glp_core::ordinal::Ordinal;
use glp_core::topology::*;

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn bs(s: &str) -> BandSet {
    s.parse().unwrap()
}

fn dom(s: &str) -> Domain {
    Domain::upto(o(s))
}

#[test]
fn membership() {
    let s = bs("[1,w^2] & l^1 in (-1,0]");
    assert!(s.member(&o("5")));
    assert!(!s.member(&o("w")));
    assert!(bs("[1,w^2]").member(&o("w")));
}

#[test]
fn boolean_ops() {
    let succ = bs("[1,w^2] & l^1 in (-1,0]");
    let c = succ.complement_within(&o("1"), &o("w^2"));
    assert!(c.set_eq(&bs("[1,w^2] & l^1 in (0,inf)")));
    assert!(succ.intersect(&BandSet::empty()).is_empty());
    assert!(succ.union(&c).set_eq(&bs("[1,w^2]")));
}

#[test]
fn emptiness_and_witnesses() {
    assert!(bs("[1,w] & l^1 in (1,2]").is_empty());
    assert!(!bs("[1,w^2] & l^1 in (0,1]").is_empty());
    assert!(bs("[5,3]").is_empty());
    assert_eq!(bs("[1,w^w] & l^1 in (0,1]").min_witness(), Some(o("w")));
    assert_eq!(bs("[1,w^w] & l^2 in (0,1]").min_witness(), Some(o("w^w")));
    assert_eq!(BandSet::empty().min_witness(), None);
}

#[test]
fn ranks() {
    assert_eq!(rank(&o("w^3*2"), &1.into()), o("3"));
    assert_eq!(rank(&o("5"), &1.into()), o("0"));
    assert_eq!(rank(&o("w^w"), &2.into()), o("1"));
}

#[test]
fn openness() {
    assert!(is_open(&bs("[w+1,w*2]"), &1.into(), &dom("w^2")).unwrap());
    assert!(!is_open(&bs("[w,w]"), &1.into(), &dom("w^2")).unwrap());
    assert!(is_open(&bs("[w,w] & l^1 in (0,1]"), &2.into(), &dom("w^2")).unwrap());
}

#[test]
fn derived_examples() {
    let succ = bs("[1,w^2] & l^1 in (-1,0]");
    let d = derived_set(&succ, &1.into(), &dom("w^2")).unwrap();
    assert!(d.set_eq(&bs("[1,w^2] & l^1 in (0,inf)")));
    assert!(derived_set(&BandSet::empty(), &1.into(), &dom("w^2")).unwrap().is_empty());
    let b = bs("[1,w^w] & l^1 in (0,1]");
    assert!(derived_set(&b, &2.into(), &dom("w^w")).unwrap().is_empty());
}

#[test]
fn derived_iterates() {
    let d2 = derived_iter(&bs("[1,w^2]"), &1.into(), &o("2"), &dom("w^2")).unwrap();
    assert!(d2.set_eq(&BandSet::point(o("w^2"))));
    let s = bs("[1,w^2] & l^1 in (0,1]");
    assert!(derived_iter(&s, &1.into(), &o("0"), &dom("w^2")).unwrap().set_eq(&s));
    let dw = derived_iter(&bs("[1,w^w]"), &1.into(), &o("w"), &dom("w^w")).unwrap();
    assert!(dw.set_eq(&bs("[1,w^w] & l^1 in [w,inf)")));
}

#[test]
fn separating() {
    let u = separating_nbhd(&o("w"), &1.into(), &dom("w^2")).unwrap();
    assert!(u.set_eq(&bs("[1,w]")));
    let u = separating_nbhd(&o("5"), &1.into(), &dom("w^2")).unwrap();
    assert!(u.set_eq(&BandSet::point(o("5"))));
    let u = separating_nbhd(&o("w^w"), &2.into(), &dom("w^w")).unwrap();
    assert!(u.member(&o("w^w")));
    assert!(is_open(&u, &2.into(), &dom("w^w")).unwrap());
    for y in ["w^5", "w^3*2", "w+1", "w^4+w^2"] {
        assert!(!u.member(&o(y)) || rank(&o(y), &2.into()) < o("1"));
    }
}

#[test]
fn band_text_round_trip() {
    for s in ["[1,w^2] & l^1 in (0,1]", "[1,w) & l^2 in [w,inf)", "empty", "[3,5]; [w,w*2]"] {
        let b = bs(s);
        assert!(bs(&b.to_string()).set_eq(&b));
    }
}

#[test]
fn digit_sets_match_bands() {
    let theta = o("w^3");
    let corpus = ["[1,w^3] & l^1 in (0,2]", "[w+3,w^2*2+w]", "[1,w^3] & l^1 in (-1,0]", "[w^2,w^3]"];
    let n = 3;
    for a in corpus {
        let b = bs(a);
        let d = DigitIn::new(DigitSet::from_bandset(n, &b).unwrap(), &theta).unwrap();
        for lambda in 0..3 {
            let db = derived_set(&b, &(lambda as u64).into(), &Domain::upto(theta.clone())).unwrap();
            let dd = d.derived(lambda).unwrap();
            let conv = DigitSet::from_bandset(n, &db).unwrap();
            assert!(conv.set_eq(&dd.set), "{a} at {lambda}: {db} vs {}", dd.set);
        }
    }
}

mod props {
    use super::*;
    use glp_core::logic::{random_bandset, sample_pool};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_set(seed: u64) -> BandSet {
        let theta = o("w^3");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_bandset(&mut rng, &sample_pool(&theta), 3).intersect(&BandSet::interval(o("1"), theta))
    }

    fn probes() -> Vec<Ordinal> {
        let mut v = sample_pool(&o("w^3"));
        v.extend(glp_core::ordinal::below_samples(&o("w^3"), 5, 2));
        v.retain(|x| !x.is_zero());
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn derived_distributes_over_union(a in any::<u64>(), b in any::<u64>(), lambda in 1u64..4) {
            let (a, b) = (random_set(a), random_set(b));
            let d = dom("w^3");
            let l = lambda.into();
            let lhs = derived_set(&a.union(&b), &l, &d).unwrap();
            let rhs = derived_set(&a, &l, &d).unwrap().union(&derived_set(&b, &l, &d).unwrap());
            prop_assert!(lhs.set_eq(&rhs));
        }

        #[test]
        fn derived_sets_shrink(a in any::<u64>(), lambda in 1u64..4) {
            let a = random_set(a);
            let d = dom("w^3");
            let l = lambda.into();
            let da = derived_set(&a, &l, &d).unwrap();
            prop_assert!(derived_set(&da, &l, &d).unwrap().is_subset(&da));
        }

        #[test]
        fn pointwise_membership_agrees(a in any::<u64>(), lambda in 1u64..4) {
            let a = random_set(a);
            let l = lambda.into();
            let da = derived_set(&a, &l, &dom("w^3")).unwrap();
            for x in probes() {
                prop_assert_eq!(member_of_derived(&x, &a, &l).unwrap(), da.member(&x), "{}", x);
            }
        }

        #[test]
        fn digit_and_band_derived_agree(a in any::<u64>(), lambda in 0usize..3) {
            let theta = o("w^3");
            let a = random_set(a);
            let dig = DigitIn::new(DigitSet::from_bandset(3, &a).unwrap(), &theta).unwrap();
            let db = derived_set(&a, &(lambda as u64).into(), &Domain::upto(theta.clone())).unwrap();
            let dd = dig.derived(lambda).unwrap();
            for x in probes() {
                prop_assert_eq!(db.member(&x), dd.set.contains(&x), "{}", x);
            }
        }

        #[test]
        fn digit_to_band_round_trip(a in any::<u64>()) {
            let a = random_set(a);
            let dig = DigitSet::from_bandset(3, &a).unwrap();
            if let Some(back) = dig.to_bandset() {
                prop_assert!(back.intersect(&BandSet::interval(o("1"), o("w^3"))).set_eq(&a), "{} -> {}", a, back);
            }
        }
    }
}
