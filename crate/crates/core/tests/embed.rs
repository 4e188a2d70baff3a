use glp_core::embed::{embed, gl_embed, jmap_check, product, verify_countermodel, Fibre, MapExpr, Mode};
use glp_core::jtree::{find_jtree_model, JFrame, RootedTree};
use glp_core::logic::{parse, PolySpace};
use glp_core::ordinal::Ordinal;

fn ord(s: &str) -> Ordinal {
    s.parse().unwrap()
}

#[test]
fn gl_embed_goldens() {
    let (th, f) = gl_embed(&RootedTree::single());
    assert_eq!(th, ord("1"));
    assert_eq!(f.node_at(&ord("1")).unwrap(), 0);

    let (th, f) = gl_embed(&RootedTree::chain(2));
    assert_eq!(th, ord("w"));
    assert_eq!(f.node_at(&ord("w")).unwrap(), 0);
    assert_eq!(f.node_at(&ord("5")).unwrap(), 1);

    let fan = RootedTree::new(vec![vec![1, 2], vec![], vec![]]).unwrap();
    let (th, f) = gl_embed(&fan);
    assert_eq!(th, ord("w"));
    let got: Vec<usize> = (1..=4).map(|n| f.node_at(&Ordinal::from_u64(n)).unwrap()).collect();
    assert_eq!(got, vec![1, 2, 1, 2]);
}

#[test]
fn gl_embed_is_a_dmap() {
    for n in 1..=4 {
        for t in RootedTree::all_of_size(n) {
            let (th, f) = gl_embed(&t);
            let space = PolySpace::new(th.clone(), &[1]);
            let rep = jmap_check(&f, &space, &t.to_frame(), 200).unwrap();
            assert!(rep.passed(), "{t:?}: {:?}", rep.failures());
            assert!(rep.checks.iter().filter(|c| c.name.starts_with('j')).all(|c| c.mode == Mode::Exact));
        }
    }
}

fn tree_01() -> JFrame {
    JFrame::from_edges(3, &[vec![(0, 1), (0, 2)], vec![(1, 2)]])
}

#[test]
fn dia0_dia1_top_pipeline() {
    let t = tree_01();
    let cm = embed(&t, &[1, 2]).unwrap();
    assert_eq!(cm.theta, ord("w^(w+1)"));
    assert_eq!(cm.fmap.node_at(&cm.theta).unwrap(), 0);
    assert_eq!(cm.fmap.node_at(&ord("w^w")).unwrap(), 1);
    assert_eq!(cm.fmap.node_at(&ord("w^3")).unwrap(), 2);
    for (k, w) in cm.witnesses.iter().enumerate() {
        assert_eq!(cm.fmap.node_at(w).unwrap(), k);
    }
    for (name, f) in &cm.algebra {
        assert!(matches!(f, Fibre::Band(_)), "{name}: {f}");
    }
    let phi = parse("<0><1>T").unwrap();
    let rep = verify_countermodel(&cm, &phi, 200).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures());
}

#[test]
fn product_shape() {
    let ps = product(&[ord("w")], &ord("1"), &[0]).unwrap();
    assert_eq!(ps.cells.xi, ord("2"));
    assert_eq!(ps.theta, ord("w^2"));
    assert!(ps.s_set.is_empty());
    assert_eq!(ps.project0(&ord("w")).unwrap(), ord("w"));
    assert_eq!(ps.project0(&ord("w+3")).unwrap(), ord("3"));
    assert_eq!(ps.project0(&ord("w*2")).unwrap(), ord("w"));
}

#[test]
fn broken_map_is_rejected() {
    let t = tree_01();
    let cm = embed(&t, &[1, 2]).unwrap();
    let bad = MapExpr::Dispatch(vec![(
        glp_core::topology::BandSet::all(),
        MapExpr::Const(0),
    )]);
    let space = PolySpace::new(cm.theta.clone(), &[1, 2]);
    let rep = jmap_check(&bad, &space, &t, 100).unwrap();
    assert!(!rep.passed());
}

#[test]
fn search_then_embed() {
    for src in ["<0>T", "<0>p0 & <0>~p0", "<0><1>T", "<1>T & [0]~<1>T", "<0>(p0 & <1>T) & <0>~p0"] {
        let phi = parse(src).unwrap();
        let m = find_jtree_model(&phi, 5, 2000, 1).unwrap_or_else(|| panic!("{src}"));
        let k = m.frame.rels();
        let sigma: Vec<u64> = (1..=k as u64).collect();
        let mut cm = embed(&m.frame, &sigma).unwrap();
        cm.valuation = Some(m.valuation.clone());
        let rep = verify_countermodel(&cm, &phi, 200).unwrap();
        assert!(rep.passed(), "{src}: {:?}", rep.failures());
    }
}

#[test]
fn every_small_jtree_embeds() {
    use glp_core::jtree::all_jtrees;
    for k in 1..=2usize {
        for size in 1..=4 {
            for t in all_jtrees(size, k) {
                let sigma: Vec<u64> = (1..=k as u64).collect();
                let cm = embed(&t, &sigma).unwrap();
                let space = PolySpace::new(cm.theta.clone(), &sigma);
                let rep = jmap_check(&cm.fmap, &space, &t, 150).unwrap();
                assert!(rep.passed(), "{:?} theta {}: {:?}", t.edges(), cm.theta, rep.failures());
                for (n, w) in cm.witnesses.iter().enumerate() {
                    assert_eq!(cm.fmap.node_at(w).unwrap(), n);
                }
            }
        }
    }
}
