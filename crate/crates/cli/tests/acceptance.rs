//! Acceptance criteria, one PASS/FAIL line each.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::Instant;

use glp_cli::{refute_pipeline, root_fibre_is_top, Config};
use glp_core::embed::{self, product, Mode};
use glp_core::jtree::RootedTree;
use glp_core::logic::{
    check_axioms, gamma_fragment, parse, random_bandset, refute, sample_pool, tree_formula, NodeValuation, PolySpace,
};
use glp_core::ordinal::{below_samples, e_iter, ell_iter_n, parse as oparse, Ordinal};
use glp_core::topology::{derived_iter, derived_set, member_of_derived, Band, BandSet, Domain, LevelSpec};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn o(s: &str) -> Ordinal {
    oparse(s).unwrap()
}

fn random_ordinal(rng: &mut ChaCha8Rng, depth: u32) -> Ordinal {
    if depth == 0 || rng.gen_bool(0.3) {
        return Ordinal::from_u64(rng.gen_range(0..8));
    }
    let n = rng.gen_range(1..=3);
    (0..n).fold(Ordinal::zero(), |acc, _| {
        let e = random_ordinal(rng, depth - 1);
        acc.add(&Ordinal::term(e, rng.gen_range(1..5)))
    })
}

fn nonzero(rng: &mut ChaCha8Rng, depth: u32) -> Ordinal {
    let a = random_ordinal(rng, depth);
    if a.is_zero() {
        Ordinal::one()
    } else {
        a
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ordinal_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 10_000;
    for _ in 0..n {
        let (a, b, c) = (random_ordinal(&mut rng, 3), random_ordinal(&mut rng, 3), random_ordinal(&mut rng, 3));
        ensure(a.add(&b).add(&c) == a.add(&b.add(&c)), || format!("add assoc {a} {b} {c}"))?;
        ensure(a.multiply(&b).multiply(&c) == a.multiply(&b.multiply(&c)), || format!("mul assoc {a} {b} {c}"))?;
        ensure(oparse(&a.to_string()).as_ref() == Ok(&a), || format!("round trip {a}"))?;
        let ab = a.cmp(&b);
        let total = [a < b, a == b, a > b].iter().filter(|t| **t).count() == 1;
        ensure(total && ab.reverse() == b.cmp(&a), || format!("compare {a} {b}"))?;
        if ab == Ordering::Less && b < c {
            ensure(a < c, || format!("transitivity {a} {b} {c}"))?;
        }
    }
    Ok(format!("{n} cases x 4 laws"))
}

fn hyper_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 5_000;
    for _ in 0..n {
        let g = random_ordinal(&mut rng, 3);
        let d = nonzero(&mut rng, 3);
        let xi = rng.gen_range(1..4);
        ensure(ell_iter_n(xi, &g.add(&d)) == ell_iter_n(xi, &d), || format!("sum {g} {d} {xi}"))?;
        if xi > 1 && !g.is_zero() && d.is_limit() {
            ensure(ell_iter_n(xi, &g.multiply(&d)) == ell_iter_n(xi, &d), || format!("product {g} {d} {xi}"))?;
        }
        let z = rng.gen_range(0..=4);
        let x = rng.gen_range(0..=z);
        let a = nonzero(&mut rng, 1);
        let up = e_iter(z, &a).map_err(|e| e.to_string())?;
        ensure(ell_iter_n(x, &up) == e_iter(z - x, &a).unwrap(), || format!("cancel {x} {z} {a}"))?;
        let k = rng.gen_range(1..=3);
        let b = nonzero(&mut rng, 1);
        let alpha = nonzero(&mut rng, 3);
        if alpha < e_iter(k, &b).unwrap() {
            ensure(ell_iter_n(k, &alpha) < b, || format!("bound {alpha} {k} {b}"))?;
        }
    }
    Ok(format!("{n} cases"))
}

fn universe() -> Vec<Ordinal> {
    let mut v = vec![o("w^3")];
    for a in 0..=4u64 {
        for b in 0..=4u64 {
            for c in 0..=4u64 {
                let x = Ordinal::term(Ordinal::from_u64(2), a)
                    .add(&Ordinal::term(Ordinal::one(), b))
                    .add(&Ordinal::from_u64(c));
                if !x.is_zero() {
                    v.push(x);
                }
            }
        }
    }
    v
}

fn rank_agreement() -> Outcome {
    let dom = Domain::upto(o("w^3"));
    let full = dom.to_bandset();
    let pts = universe();
    let mut checked = 0;
    for lambda in 1..=3u64 {
        for alpha in 0..=5u64 {
            let d = derived_iter(&full, &LevelSpec::new(lambda), &Ordinal::from_u64(alpha), &dom).map_err(|e| e.to_string())?;
            for x in &pts {
                let want = ell_iter_n(lambda, x) >= Ordinal::from_u64(alpha);
                ensure(d.member(x) == want, || format!("x={x} lambda={lambda} alpha={alpha}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} memberships"))
}

// Points of `(x', x)` for `x = x' + ω^γ` far enough below `x` to lie in
// every neighbourhood that a band with small endpoints can separate.
fn far_below(x: &Ordinal, level: u64) -> Vec<Ordinal> {
    let g = x.ell_or_zero();
    if x.is_zero() || g.is_zero() || level == 0 {
        return Vec::new();
    }
    let p = x.prefix();
    let exps: Vec<Ordinal> = match (level, g.pred()) {
        (1, Some(b)) => vec![b],
        (1, None) => far_below(&g, 1),
        _ => far_below(&g, level - 1),
    };
    let mut out = Vec::new();
    for eta in exps {
        let mut tails = vec![Ordinal::zero()];
        for t in below_samples(&Ordinal::term(eta.clone(), 1), 4, 2) {
            tails.push(t);
        }
        for k in [40u64, 41, 42] {
            for t in &tails {
                out.push(p.add(&Ordinal::term(eta.clone(), k)).add(t));
            }
        }
    }
    out
}

fn accumulation_oracle(x: &Ordinal, a: &BandSet, level: u64) -> bool {
    far_below(x, level).iter().any(|z| a.member(z))
}

fn oracle_equivalence() -> Outcome {
    let theta = o("w^3");
    let dom = BandSet::interval(Ordinal::one(), theta.clone());
    let pool = sample_pool(&theta);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts = universe();
    let mut positives = 0;
    for _ in 0..500 {
        let a = random_bandset(&mut rng, &pool, 3).intersect(&dom);
        let lambda = rng.gen_range(1..=3u64);
        for x in &pts {
            let got = member_of_derived(x, &a, &LevelSpec::new(lambda)).map_err(|e| e.to_string())?;
            let want = accumulation_oracle(x, &a, lambda);
            ensure(got == want, || format!("x={x} A={a} lambda={lambda}: {got} vs {want}"))?;
            positives += got as usize;
        }
    }
    Ok(format!("500 sets, {positives} accumulation points"))
}

fn axiom_validity() -> Outcome {
    let space = PolySpace::new(o("w^w*2"), &[1, 2]);
    let r = check_axioms(&space, 200, 5).map_err(|e| e.to_string())?;
    ensure(r.all_valid(), || format!("{:?}", r.failures.first()))?;
    let probe = parse("<0>p0 -> <1>p0").unwrap();
    let cex = refute(&probe, &space, 200, 5).map_err(|e| e.to_string())?;
    ensure(cex.is_some(), || "probe not refuted".into())?;
    Ok(format!("instances {:?}, probe refuted", r.instances))
}

fn pull_back_along_ell(a: &BandSet, theta: &Ordinal) -> BandSet {
    let mut out = Vec::new();
    for b in a.bands() {
        let mut nb = Band::closed(Ordinal::one(), theta.clone());
        for (k, iv) in b.levels().iter().enumerate() {
            nb = nb.with(k + 1, iv.clone());
        }
        out.push(nb);
    }
    BandSet::from_bands(out)
}

fn dmap_law() -> Outcome {
    let src = o("w^w");
    let src_dom = Domain::upto(src.clone());
    let dst_dom = Domain::new(Ordinal::zero(), o("w"));
    let mut pool: Vec<Ordinal> = sample_pool(&o("w"));
    pool.push(Ordinal::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let a = random_bandset(&mut rng, &pool, 3).intersect(&dst_dom.to_bandset());
        let da = derived_set(&a, &LevelSpec::new(1), &dst_dom).map_err(|e| e.to_string())?;
        let lhs = pull_back_along_ell(&da, &src);
        let rhs = derived_set(&pull_back_along_ell(&a, &src), &LevelSpec::new(2), &src_dom).map_err(|e| e.to_string())?;
        ensure(lhs.set_eq(&rhs), || format!("A={a}: {lhs} vs {rhs}"))?;
    }
    Ok("200 sets".into())
}

fn product_suite() -> Outcome {
    let lists: [&[u64]; 4] = [&[1], &[2], &[1, 2], &[2, 2, 3]];
    let mut runs = 0;
    for ks in lists {
        let kappas: Vec<Ordinal> = ks.iter().map(|&k| Ordinal::from_u64(k)).collect();
        for lam in ["1", "2", "w"] {
            let lambda = o(lam);
            let ps = product(&kappas, &lambda, &(0..ks.len()).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
            let tag = format!("kappa={ks:?} lambda={lam}");
            let full = BandSet::interval(Ordinal::one(), ps.theta.clone());
            ensure(ps.x_up.intersect(&ps.x_down).is_empty() && ps.x_up.union(&ps.x_down).set_eq(&full), || format!("{tag}: partition"))?;
            let kappa = kappas.iter().fold(Ordinal::zero(), |a, k| a.add(k));
            ensure(ps.theta == kappa.multiply(&Ordinal::omega()).multiply(&lambda), || format!("{tag}: theta"))?;
            let m = ks.len();
            for i in 0..50u64 {
                let idx = BigUint::from(i);
                let beta = ps.cells.beta(&idx);
                let class = (i as usize) % m;
                let want = ps.marker_point(ps.cells.component(class));
                let got = ps.project0(&beta).map_err(|e| e.to_string())?;
                ensure(got == want, || format!("{tag}: pi0(beta_{i}) = {got}, want {want}"))?;
            }
            let ups: Vec<Ordinal> = sample_pool(&lambda)
                .into_iter()
                .map(|a| Ordinal::term(ps.cells.xi.clone(), 1).multiply(&a))
                .filter(|u| ps.x_up.member(u))
                .take(20)
                .collect();
            ensure(!ups.is_empty(), || format!("{tag}: no x_up samples"))?;
            for u in &ups {
                let mut lows = below_samples(u, 3, 2);
                lows.sort();
                lows.reverse();
                lows.truncate(4);
                for c in &lows {
                    for j in 0..m {
                        let w = ps.density_witness(j, c, u).map_err(|e| e.to_string())?;
                        let ok = w.as_ref().is_some_and(|w| {
                            c < w && w < u && ps.project0(w).ok() == Some(ps.marker_point(j))
                        });
                        ensure(ok, || format!("{tag}: no witness for marker {j} in ({c},{u})"))?;
                    }
                }
            }
            let ds = derived_set(&ps.s_set, &LevelSpec::new(1), &Domain::upto(ps.theta.clone())).map_err(|e| e.to_string())?;
            ensure(ds.is_empty(), || format!("{tag}: dS nonempty"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} structures"))
}

fn catalog() -> Vec<String> {
    let mut v = Vec::new();
    for n in 1..=4 {
        for t in RootedTree::all_of_size(n) {
            v.push(tree_formula(&t).to_string());
        }
    }
    v.push("<0><1>T".into());
    v.push("<1>T & [0]~<1>T".into());
    v
}

fn end_to_end() -> Outcome {
    let cfg = Config::default();
    let cat = catalog();
    let mut exact_c = 0;
    for src in &cat {
        let Some((cm, r)) = refute_pipeline(src, 5, &cfg).map_err(|e| e.to_string())? else {
            return Err(format!("no J-tree for {src}"));
        };
        ensure(root_fibre_is_top(&cm).map_err(|e| e.to_string())?, || format!("root fibre for {src}"))?;
        ensure(r.passed(), || format!("{src}: {:?}", r.failures()))?;
        let c = &r.checks[2];
        if cm.theta <= o("w^3") {
            ensure(c.mode == Mode::Exact, || format!("{src}: stage c sampled at theta {}", cm.theta))?;
        }
        exact_c += (c.mode == Mode::Exact) as usize;
    }
    Ok(format!("{} formulas, stage c exact on {exact_c}", cat.len()))
}

fn gamma_demo() -> Outcome {
    for n in 0..=4u32 {
        let chain = RootedTree::chain(n as usize + 2).to_frame();
        let mut cm = embed::embed(&chain, &[1]).map_err(|e| e.to_string())?;
        let val: NodeValuation = (0..=n).map(|i| (i, BTreeSet::from([i as usize + 1]))).collect();
        cm.valuation = Some(val);
        ensure(cm.theta == Ordinal::term(Ordinal::from_u64(n as u64 + 1), 1), || format!("n={n}: theta {}", cm.theta))?;
        for phi in gamma_fragment(n) {
            let r = embed::verify_countermodel(&cm, &phi, 100).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("n={n} {phi}: {:?}", r.failures()))?;
            ensure(r.checks[0].mode == Mode::Exact && r.checks[2].mode == Mode::Exact, || format!("n={n} {phi}: not exact"))?;
        }
    }
    Ok("n = 0..4".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("ordinal laws", ordinal_laws),
        ("hyper-identities", hyper_identities),
        ("rank / derived-set agreement", rank_agreement),
        ("derived membership vs accumulation oracle", oracle_equivalence),
        ("axiom validity and probe", axiom_validity),
        ("d-map law for l", dmap_law),
        ("product structure", product_suite),
        ("end-to-end countermodels", end_to_end),
        ("gamma demo", gamma_demo),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS {} {name}: {msg} ({secs:.1}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} ({secs:.1}s)", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
