use std::cmp::Ordering;

use glp_core::ordinal::{e_iter, ell_iter, ell_iter_n, parse, pounds, print, Ordinal};
use proptest::prelude::*;

fn ord_strategy() -> impl Strategy<Value = Ordinal> {
    let leaf = (0u64..6).prop_map(Ordinal::from_u64);
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop::collection::vec((inner, 1u64..5), 1..4).prop_map(|ts| {
            ts.into_iter()
                .fold(Ordinal::zero(), |acc, (e, c)| acc.add(&Ordinal::term(e, c)))
        })
    })
}

// Ordinals below ω^ω as coefficient vectors, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<u64>);

impl Poly {
    fn trim(mut self) -> Poly {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }
    fn deg(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0)
    }
    fn add(&self, b: &Poly) -> Poly {
        let Some(d) = b.deg() else { return self.clone() };
        let n = self.0.len().max(b.0.len());
        let mut out = vec![0; n];
        out[..d].copy_from_slice(&b.0[..d]);
        out[d] = b.0[d] + self.0.get(d).copied().unwrap_or(0);
        if self.0.len() > d + 1 {
            out[d + 1..self.0.len()].copy_from_slice(&self.0[d + 1..]);
        }
        Poly(out).trim()
    }
    fn mul(&self, b: &Poly) -> Poly {
        let Some(da) = self.deg() else { return Poly(vec![]) };
        let mut acc = Poly(vec![]);
        for j in (0..b.0.len()).rev() {
            let c = b.0[j];
            if c == 0 {
                continue;
            }
            let term = if j == 0 {
                let mut v = self.0.clone();
                v[da] *= c;
                Poly(v)
            } else {
                let mut v = vec![0; da + j + 1];
                v[da + j] = c;
                Poly(v)
            };
            acc = acc.add(&term);
        }
        acc
    }
    fn to_ord(&self) -> Ordinal {
        self.0
            .iter()
            .enumerate()
            .rev()
            .fold(Ordinal::zero(), |acc, (i, &c)| if c == 0 { acc } else { acc.add(&Ordinal::term(Ordinal::from_u64(i as u64), c)) })
    }
}

fn nonzero(depth: u32) -> impl Strategy<Value = Ordinal> {
    let leaf = (1u64..6).prop_map(Ordinal::from_u64);
    leaf.prop_recursive(depth, 16, 3, |inner| {
        prop::collection::vec((inner, 1u64..5), 1..4).prop_map(|ts| {
            ts.into_iter()
                .fold(Ordinal::zero(), |acc, (e, c)| acc.add(&Ordinal::term(e, c)))
        })
    })
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec(0u64..4, 0..5).prop_map(|v| Poly(v).trim())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn add_matches_polynomial_oracle(a in poly_strategy(), b in poly_strategy()) {
        prop_assert_eq!(a.to_ord().add(&b.to_ord()), a.add(&b).to_ord());
    }

    #[test]
    fn mul_matches_polynomial_oracle(a in poly_strategy(), b in poly_strategy()) {
        prop_assert_eq!(a.to_ord().multiply(&b.to_ord()), a.mul(&b).to_ord());
    }

    #[test]
    fn associativity(a in ord_strategy(), b in ord_strategy(), c in ord_strategy()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
        prop_assert_eq!(a.multiply(&b.add(&c)), a.multiply(&b).add(&a.multiply(&c)));
    }

    #[test]
    fn text_round_trip(a in ord_strategy()) {
        prop_assert_eq!(parse(&print(&a)).unwrap(), a);
    }

    #[test]
    fn order_is_total_and_monotone(a in ord_strategy(), b in ord_strategy(), c in ord_strategy()) {
        let ab = a.cmp(&b);
        prop_assert_eq!(ab.reverse(), b.cmp(&a));
        prop_assert_eq!(ab == Ordering::Equal, a == b);
        if b < c {
            prop_assert!(a.add(&b) < a.add(&c));
        }
        prop_assert!(a.add(&b) >= b);
    }

    #[test]
    fn left_subtraction_inverts_addition(a in ord_strategy(), b in ord_strategy()) {
        prop_assert_eq!(a.left_subtract(&a.add(&b)).unwrap(), b);
    }

    #[test]
    fn end_logarithm_ignores_prefixes(g in ord_strategy(), d in ord_strategy(), xi in 1u64..4) {
        prop_assume!(!d.is_zero());
        prop_assert_eq!(ell_iter_n(xi, &g.add(&d)), ell_iter_n(xi, &d));
        if xi > 1 && !g.is_zero() && d.is_limit() {
            prop_assert_eq!(ell_iter_n(xi, &g.multiply(&d)), ell_iter_n(xi, &d));
        }
    }

    #[test]
    fn hyperlog_inverts_hyperexp(a in nonzero(1), x in 0u64..3, extra in 0u64..2) {
        let z = x + extra;
        let up = e_iter(z, &a).unwrap();
        prop_assert_eq!(ell_iter_n(x, &up), e_iter(z - x, &a).unwrap());
    }

    #[test]
    fn below_hyperexp_bounds_hyperlog(a in nonzero(3), b in nonzero(1), n in 1u64..3) {
        if a < e_iter(n, &b).unwrap() {
            prop_assert!(ell_iter_n(n, &a) < b);
        }
    }

    #[test]
    fn ell_iter_agrees_with_finite_iteration(a in ord_strategy(), n in 0u64..4) {
        prop_assert_eq!(ell_iter(&Ordinal::from_u64(n), &a), ell_iter_n(n, &a));
    }
}

// Counts limits below `a` directly for small `a`.
fn pounds_oracle(a: &Ordinal) -> u64 {
    let mut count = 0;
    for k in 0..=60u64 {
        let x = Ordinal::term(Ordinal::one(), k);
        if x < *a && k > 0 {
            count += 1;
        }
    }
    count
}

#[test]
fn pounds_small_cases() {
    for (src, want) in [("w*5+3", "4"), ("w", "0"), ("7", "0"), ("w^2", "w")] {
        assert_eq!(pounds(&parse(src).unwrap()), parse(want).unwrap(), "{src}");
    }
    for k in 1..8u64 {
        let a = Ordinal::term(Ordinal::one(), k).add(&Ordinal::from_u64(2));
        assert_eq!(pounds(&a), Ordinal::from_u64(pounds_oracle(&a) - 1));
    }
}
