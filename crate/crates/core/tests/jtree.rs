use std::collections::BTreeSet;

use glp_core::jtree::{
    all_jtrees, find_jtree_model, hereditary_roots, is_jtree, planes, root, validate_jframe, JFrame, RootedTree,
    Violation,
};
use glp_core::logic::{axiom_instances, eval_kripke, parse, Formula, NodeValuation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn validation_examples() {
    assert!(validate_jframe(&JFrame::new(1, 1)).is_valid());

    let i = JFrame::from_edges(3, &[vec![(0, 2)], vec![(0, 1)]]);
    let r = validate_jframe(&i);
    assert!(r.violations.iter().any(|v| matches!(v, Violation::ConditionI { .. })));

    let j = JFrame::from_edges(3, &[vec![(0, 1)], vec![(1, 2)]]);
    let r = validate_jframe(&j);
    assert!(r.violations.iter().any(|v| matches!(v, Violation::ConditionJ { .. })));

    assert!(validate_jframe(&j.j_closure()).is_valid());
}

#[test]
fn plane_examples() {
    let chain = RootedTree::chain(3).to_frame();
    let d = planes(&chain, 0).unwrap();
    assert_eq!(d.planes, vec![vec![0, 1, 2]]);
    assert_eq!(d.subplanes.len(), 3);

    let two = JFrame::from_edges(2, &[vec![(0, 1)], vec![]]);
    let d = planes(&two, 1).unwrap();
    assert_eq!(d.planes.len(), 2);
}

// Brute-force oracle: n-planes are components of the symmetric closure of
// relations n, n+1, ...
fn plane_oracle(f: &JFrame, n: usize) -> BTreeSet<Vec<usize>> {
    let len = f.len();
    let mut adj = vec![vec![false; len]; len];
    for (x, row) in adj.iter_mut().enumerate() {
        row[x] = true;
    }
    for k in n..f.rels() {
        for (x, y) in f.edges()[k].clone() {
            adj[x][y] = true;
            adj[y][x] = true;
        }
    }
    for m in 0..len {
        for x in 0..len {
            for y in 0..len {
                if adj[x][m] && adj[m][y] {
                    adj[x][y] = true;
                }
            }
        }
    }
    (0..len)
        .map(|x| (0..len).filter(|&y| adj[x][y]).collect())
        .collect()
}

#[test]
fn planes_match_closure_oracle() {
    for size in 1..=4 {
        for f in all_jtrees(size, 3) {
            for n in 0..3 {
                let got: BTreeSet<Vec<usize>> = planes(&f, n).unwrap().planes.into_iter().collect();
                assert_eq!(got, plane_oracle(&f, n));
            }
        }
    }
}

#[test]
fn jtree_recognition() {
    for n in 1..=4 {
        for t in RootedTree::all_of_size(n) {
            assert!(is_jtree(&t.to_frame()).unwrap());
        }
    }
    // two incomparable planes {0,1} and {2,3}? no: 0 and 2 are separate
    // roots sharing the plane of 3
    let bad = JFrame::from_edges(3, &[vec![(0, 2), (1, 2)], vec![]]);
    assert!(!is_jtree(&bad).unwrap());
    for f in all_jtrees(4, 2) {
        assert!(is_jtree(&f).unwrap());
        assert!(validate_jframe(&f).is_valid());
        assert_eq!(root(&f), Some(0));
    }
}

fn permute(f: &JFrame, p: &[usize]) -> Vec<Vec<(usize, usize)>> {
    f.edges()
        .into_iter()
        .map(|es| {
            let mut v: Vec<(usize, usize)> = es.into_iter().map(|(x, y)| (p[x], p[y])).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn canon(f: &JFrame) -> Vec<Vec<(usize, usize)>> {
    perms(f.len()).iter().map(|p| permute(f, p)).min().unwrap()
}

// Every frame on `n` nodes with `k` relations, filtered and counted up to
// isomorphism.
fn count_oracle(n: usize, k: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|(x, y)| x != y).collect();
    let bits = pairs.len() * k;
    let mut seen = BTreeSet::new();
    for mask in 0u64..(1 << bits) {
        let edges: Vec<Vec<(usize, usize)>> = (0..k)
            .map(|r| (0..pairs.len()).filter(|i| mask >> (r * pairs.len() + i) & 1 == 1).map(|i| pairs[i]).collect())
            .collect();
        let f = JFrame::from_edges(n, &edges);
        if validate_jframe(&f).is_valid() && is_jtree(&f).unwrap() {
            seen.insert(canon(&f));
        }
    }
    seen.len()
}

#[test]
fn jtree_counts() {
    for (n, k) in [(1, 1), (2, 1), (3, 1), (4, 1), (1, 2), (2, 2), (3, 2), (3, 3)] {
        let got: BTreeSet<_> = all_jtrees(n, k).iter().map(canon).collect();
        assert_eq!(got.len(), all_jtrees(n, k).len(), "duplicates at {n},{k}");
        assert_eq!(got.len(), count_oracle(n, k), "size {n}, {k} relations");
    }
}

#[test]
fn hereditary_root_examples() {
    let t = RootedTree::chain(3).to_frame();
    assert_eq!(hereditary_roots(&t, 0).unwrap(), BTreeSet::from([0, 1, 2]));

    let f = JFrame::from_edges(3, &[vec![(1, 2)], vec![(0, 1)]]).j_closure();
    assert!(is_jtree(&f).unwrap());
    assert_eq!(hereditary_roots(&f, 0).unwrap(), BTreeSet::from([0, 2]));

    let one = JFrame::new(1, 3);
    for k in 0..3 {
        assert_eq!(hereditary_roots(&one, k).unwrap(), BTreeSet::from([0]));
    }
}

#[test]
fn model_search_examples() {
    let m = find_jtree_model(&parse("<0>T").unwrap(), 4, 100, 0).unwrap();
    assert_eq!(m.frame.len(), 2);

    let m = find_jtree_model(&parse("<0>p0 & <0>~p0").unwrap(), 4, 100, 0).unwrap();
    assert_eq!(m.frame.len(), 3);
    assert_eq!(m.frame.successors(0, 0).count(), 2);

    assert!(find_jtree_model(&parse("[0]F & <0>T").unwrap(), 4, 100, 0).is_none());
}

fn random_val(rng: &mut ChaCha8Rng, n: usize, vars: u32) -> NodeValuation {
    (0..vars)
        .map(|p| (p, (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect()
}

#[test]
fn jtrees_validate_k_lob_and_schema_iv() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = Formula::var(0);
    let q = Formula::var(1);
    let mut iii_fails = 0;
    for size in 1..=4 {
        for f in all_jtrees(size, 2) {
            for _ in 0..8 {
                let v = random_val(&mut rng, f.len(), 2);
                for (xi, zeta) in [(0, 1), (0, 0), (1, 1)] {
                    let inst = axiom_instances(&p, &q, xi, zeta);
                    for (s, phi) in inst.iter().enumerate() {
                        let sat = eval_kripke(phi, &f, &v).unwrap();
                        if s == 2 {
                            iii_fails += sat.iter().filter(|b| !**b).count();
                        } else if !(s == 3 && xi == zeta) {
                            assert!(sat.iter().all(|b| *b), "schema {s} on {:?}", f.edges());
                        }
                    }
                }
            }
        }
    }
    assert!(iii_fails > 0);
}
