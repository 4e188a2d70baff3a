//! GLP formulas, topological and Kripke semantics, axiom testing.

use alloc::boxed::Box as Heap;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jtree::{JFrame, RootedTree};
use crate::ordinal::{Ordinal, OrdinalError, Parser};
use crate::topology::{Band, BandIn, BandSet, Domain, Interval, SetAlgebra, TopologyError};

/// Errors raised by the logic module.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    /// Malformed formula text.
    #[error("syntax error at {pos}: {msg}")]
    Syntax {
        /// Byte offset.
        pos: usize,
        /// Description.
        msg: &'static str,
    },
    /// A variable without a value.
    #[error("unbound variable p{0}")]
    UnboundVariable(u32),
    /// A modality index with no matching level or relation.
    #[error("modality index {0} out of range")]
    IndexOutOfRange(Ordinal),
    /// Failure in the set algebra.
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// A GLP formula with ordinal modality indices.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Formula {
    /// `p_i`.
    Var(u32),
    /// ⊤.
    Top,
    /// ⊥.
    Bot,
    /// ¬φ.
    Not(Heap<Formula>),
    /// φ ∧ ψ.
    And(Heap<Formula>, Heap<Formula>),
    /// φ ∨ ψ.
    Or(Heap<Formula>, Heap<Formula>),
    /// φ → ψ.
    Implies(Heap<Formula>, Heap<Formula>),
    /// `[ξ]φ`.
    Box(Ordinal, Heap<Formula>),
    /// `⟨ξ⟩φ`.
    Dia(Ordinal, Heap<Formula>),
}

use Formula as F;

impl Formula {
    /// `p_i`.
    pub fn var(i: u32) -> Self {
        F::Var(i)
    }
    /// ¬φ.
    pub fn not(a: Formula) -> Self {
        F::Not(Heap::new(a))
    }
    /// φ ∧ ψ.
    pub fn and(a: Formula, b: Formula) -> Self {
        F::And(Heap::new(a), Heap::new(b))
    }
    /// φ ∨ ψ.
    pub fn or(a: Formula, b: Formula) -> Self {
        F::Or(Heap::new(a), Heap::new(b))
    }
    /// φ → ψ.
    pub fn implies(a: Formula, b: Formula) -> Self {
        F::Implies(Heap::new(a), Heap::new(b))
    }
    /// `[k]φ` for a natural index.
    pub fn boxed(k: u64, a: Formula) -> Self {
        F::Box(Ordinal::from_u64(k), Heap::new(a))
    }
    /// `⟨k⟩φ` for a natural index.
    pub fn dia(k: u64, a: Formula) -> Self {
        F::Dia(Ordinal::from_u64(k), Heap::new(a))
    }

    /// Conjunction of a list; ⊤ when empty.
    pub fn conj(items: Vec<Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => F::Top,
            Some(first) => it.fold(first, F::and),
        }
    }

    /// Disjunction of a list; ⊥ when empty.
    pub fn disj(items: Vec<Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => F::Bot,
            Some(first) => it.fold(first, F::or),
        }
    }

    /// Distinct modality indices, increasing.
    pub fn indices(&self) -> BTreeSet<Ordinal> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let F::Box(k, _) | F::Dia(k, _) = f {
                out.insert(k.clone());
            }
        });
        out
    }

    /// Variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let F::Var(i) = f {
                out.insert(*i);
            }
        });
        out
    }

    /// Maximal nesting of modalities.
    pub fn modal_depth(&self) -> usize {
        match self {
            F::Var(_) | F::Top | F::Bot => 0,
            F::Not(a) => a.modal_depth(),
            F::And(a, b) | F::Or(a, b) | F::Implies(a, b) => a.modal_depth().max(b.modal_depth()),
            F::Box(_, a) | F::Dia(_, a) => 1 + a.modal_depth(),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            F::Var(_) | F::Top | F::Bot => {}
            F::Not(a) | F::Box(_, a) | F::Dia(_, a) => a.visit(f),
            F::And(a, b) | F::Or(a, b) | F::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replaces every modality index through `m`.
    pub fn map_indices(&self, m: &impl Fn(&Ordinal) -> Ordinal) -> Formula {
        match self {
            F::Var(_) | F::Top | F::Bot => self.clone(),
            F::Not(a) => F::not(a.map_indices(m)),
            F::And(a, b) => F::and(a.map_indices(m), b.map_indices(m)),
            F::Or(a, b) => F::or(a.map_indices(m), b.map_indices(m)),
            F::Implies(a, b) => F::implies(a.map_indices(m), b.map_indices(m)),
            F::Box(k, a) => F::Box(m(k), Heap::new(a.map_indices(m))),
            F::Dia(k, a) => F::Dia(m(k), Heap::new(a.map_indices(m))),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            F::Implies(..) => 1,
            F::Or(..) => 2,
            F::And(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, a: &Formula, min: u8) -> fmt::Result {
            if a.prec() < min {
                write!(f, "({a})")
            } else {
                write!(f, "{a}")
            }
        }
        match self {
            F::Var(i) => write!(f, "p{i}"),
            F::Top => f.write_str("T"),
            F::Bot => f.write_str("F"),
            F::Not(a) => {
                f.write_str("~")?;
                side(f, a, 4)
            }
            F::Box(k, a) => {
                write!(f, "[{k}]")?;
                side(f, a, 4)
            }
            F::Dia(k, a) => {
                write!(f, "<{k}>")?;
                side(f, a, 4)
            }
            F::And(a, b) => {
                side(f, a, 3)?;
                f.write_str(" & ")?;
                side(f, b, 4)
            }
            F::Or(a, b) => {
                side(f, a, 2)?;
                f.write_str(" | ")?;
                side(f, b, 3)
            }
            F::Implies(a, b) => {
                side(f, a, 2)?;
                f.write_str(" -> ")?;
                side(f, b, 1)
            }
        }
    }
}

struct FormulaParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> FormulaParser<'a> {
    fn err(&self, msg: &'static str) -> LogicError {
        LogicError::Syntax { pos: self.pos, msg }
    }

    fn ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let a = self.disjunction()?;
        if self.eat("->") {
            let b = self.implication()?;
            return Ok(F::implies(a, b));
        }
        Ok(a)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut a = self.conjunction()?;
        while self.eat("|") {
            a = F::or(a, self.conjunction()?);
        }
        Ok(a)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut a = self.unary()?;
        while self.eat("&") {
            a = F::and(a, self.unary()?);
        }
        Ok(a)
    }

    fn index(&mut self, close: char) -> Result<Ordinal, LogicError> {
        let mut p = Parser::at(self.src, self.pos);
        let k = p.expr().map_err(|e| match e {
            OrdinalError::Syntax { pos, msg } => LogicError::Syntax { pos, msg },
            _ => self.err("bad modality index"),
        })?;
        self.pos = p.pos;
        self.ws();
        if !self.src[self.pos..].starts_with(close) {
            return Err(self.err("unclosed modality"));
        }
        self.pos += 1;
        Ok(k)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        self.ws();
        let rest = &self.src[self.pos..];
        if rest.starts_with('~') {
            self.pos += 1;
            return Ok(F::not(self.unary()?));
        }
        if rest.starts_with('[') {
            self.pos += 1;
            let k = self.index(']')?;
            return Ok(F::Box(k, Heap::new(self.unary()?)));
        }
        if rest.starts_with('<') {
            self.pos += 1;
            let k = self.index('>')?;
            return Ok(F::Dia(k, Heap::new(self.unary()?)));
        }
        if rest.starts_with('(') {
            self.pos += 1;
            let a = self.implication()?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(a);
        }
        if rest.starts_with('T') {
            self.pos += 1;
            return Ok(F::Top);
        }
        if rest.starts_with('F') {
            self.pos += 1;
            return Ok(F::Bot);
        }
        if let Some(digits) = rest.strip_prefix('p') {
            let n = digits.bytes().take_while(u8::is_ascii_digit).count();
            if n == 0 {
                return Err(self.err("expected variable index"));
            }
            let v = digits[..n].parse().map_err(|_| self.err("variable index too large"))?;
            self.pos += 1 + n;
            return Ok(F::Var(v));
        }
        if rest.is_empty() {
            return Err(self.err("unexpected end of input"));
        }
        Err(self.err("expected formula"))
    }
}

/// Parses formula text such as `[w](p0 -> <1>p1)`.
pub fn parse(src: &str) -> Result<Formula, LogicError> {
    let mut p = FormulaParser { src, pos: 0 };
    let f = p.implication()?;
    p.ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

impl core::str::FromStr for Formula {
    type Err = LogicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Renders a formula in the parseable syntax.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

/// Replaces the `k`-th smallest modality index by `k`; returns the formula
/// and the original indices in increasing order.
pub fn condense(phi: &Formula) -> (Formula, Vec<Ordinal>) {
    let sigma: Vec<Ordinal> = phi.indices().into_iter().collect();
    let pos = |k: &Ordinal| {
        Ordinal::from_u64(sigma.iter().position(|s| s == k).expect("index present") as u64)
    };
    (phi.map_indices(&pos), sigma)
}

/// A polytopological space `[1, theta]` whose modality `k` is read in the
/// Icard topology `I_{levels[k]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolySpace {
    /// Greatest point.
    pub theta: Ordinal,
    /// Icard levels, strictly increasing.
    pub levels: Vec<Ordinal>,
}

impl PolySpace {
    /// A space with natural levels.
    pub fn new(theta: Ordinal, levels: &[u64]) -> Self {
        PolySpace {
            theta,
            levels: levels.iter().map(|&l| Ordinal::from_u64(l)).collect(),
        }
    }

    /// The domain `[1, theta]`.
    pub fn domain(&self) -> Domain {
        Domain::upto(self.theta.clone())
    }

    /// Levels as machine integers.
    pub fn finite_levels(&self) -> Result<Vec<usize>, TopologyError> {
        self.levels
            .iter()
            .map(|l| {
                l.to_u64()
                    .and_then(|v| usize::try_from(v).ok())
                    .ok_or(TopologyError::UnsupportedLevel)
            })
            .collect()
    }
}

/// Variable assignment into a set algebra.
pub type Valuation<A> = BTreeMap<u32, A>;

/// Band-set valuation.
pub type BandValuation = BTreeMap<u32, BandSet>;

fn level_of(levels: &[usize], k: &Ordinal) -> Result<usize, LogicError> {
    k.to_u64()
        .and_then(|i| levels.get(i as usize).copied())
        .ok_or_else(|| LogicError::IndexOutOfRange(k.clone()))
}

/// Evaluates `phi` in any set algebra; `proto` fixes the domain.
pub fn eval_in<A: SetAlgebra>(
    phi: &Formula,
    levels: &[usize],
    v: &Valuation<A>,
    proto: &A,
) -> Result<A, LogicError> {
    let ev = |a: &Formula| eval_in(a, levels, v, proto);
    Ok(match phi {
        F::Var(i) => v.get(i).cloned().ok_or(LogicError::UnboundVariable(*i))?.intersect(&proto.full()),
        F::Top => proto.full(),
        F::Bot => proto.empty_like(),
        F::Not(a) => ev(a)?.complement(),
        F::And(a, b) => ev(a)?.intersect(&ev(b)?),
        F::Or(a, b) => ev(a)?.union(&ev(b)?),
        F::Implies(a, b) => ev(a)?.complement().union(&ev(b)?),
        F::Dia(k, a) => ev(a)?.derived(level_of(levels, k)?)?,
        F::Box(k, a) => ev(a)?.complement().derived(level_of(levels, k)?)?.complement(),
    })
}

/// `⟦phi⟧` over `space` under a band-set valuation.
pub fn eval_topo(phi: &Formula, space: &PolySpace, v: &BandValuation) -> Result<BandSet, LogicError> {
    let levels = space.finite_levels()?;
    let dom = space.domain();
    let proto = BandIn::new(BandSet::empty(), dom.clone());
    let val: Valuation<BandIn> = v
        .iter()
        .map(|(k, s)| (*k, BandIn::new(s.clone(), dom.clone())))
        .collect();
    Ok(eval_in(phi, &levels, &val, &proto)?.set)
}

/// Kripke valuation: variable to node set.
pub type NodeValuation = BTreeMap<u32, BTreeSet<usize>>;

/// `⟦phi⟧` in a finite frame, as a membership vector over nodes.
pub fn eval_kripke(phi: &Formula, frame: &JFrame, v: &NodeValuation) -> Result<Vec<bool>, LogicError> {
    let n = frame.len();
    let ev = |a: &Formula| eval_kripke(a, frame, v);
    Ok(match phi {
        F::Var(i) => {
            let s = v.get(i).ok_or(LogicError::UnboundVariable(*i))?;
            (0..n).map(|x| s.contains(&x)).collect()
        }
        F::Top => vec![true; n],
        F::Bot => vec![false; n],
        F::Not(a) => ev(a)?.into_iter().map(|b| !b).collect(),
        F::And(a, b) => zip(ev(a)?, ev(b)?, |x, y| x && y),
        F::Or(a, b) => zip(ev(a)?, ev(b)?, |x, y| x || y),
        F::Implies(a, b) => zip(ev(a)?, ev(b)?, |x, y| !x || y),
        F::Dia(k, a) | F::Box(k, a) => {
            let r = k
                .to_u64()
                .filter(|&i| (i as usize) < frame.rels())
                .ok_or_else(|| LogicError::IndexOutOfRange(k.clone()))? as usize;
            let inner = ev(a)?;
            let dia = matches!(phi, F::Dia(..));
            (0..n)
                .map(|x| {
                    let mut succ = frame.successors(r, x);
                    if dia {
                        succ.any(|y| inner[y])
                    } else {
                        succ.all(|y| inner[y])
                    }
                })
                .collect()
        }
    })
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// The formula characterising a finite tree at its root, with `p_t` for
/// node `t` and modality `⟨0⟩`.
pub fn tree_formula(t: &RootedTree) -> Formula {
    let n = t.len();
    let r = t.root();
    let lt = t.strict_order();
    let p = |i: usize| F::var(i as u32);
    let dia = |a| F::dia(0, a);
    let bx = |a| F::boxed(0, a);
    let mut parts = vec![p(r)];
    parts.extend((0..n).filter(|&s| s != r).map(|s| F::not(p(s))));
    parts.extend((0..n).filter(|&s| s != r).map(|s| dia(p(s))));
    parts.push(bx(F::disj((0..n).map(p).collect())));
    parts.push(bx(F::not(p(r))));
    for s in 0..n {
        for u in 0..n {
            if s != u {
                parts.push(bx(F::implies(p(s), F::not(p(u)))));
            }
        }
    }
    for s in 0..n {
        for u in 0..n {
            if lt[s][u] {
                parts.push(bx(F::implies(p(s), dia(p(u)))));
            } else {
                parts.push(bx(F::implies(p(s), F::not(dia(p(u))))));
            }
        }
    }
    for u in 0..n {
        let above = (0..n).filter(|&s| lt[u][s]).map(p).collect();
        parts.push(bx(F::implies(p(u), bx(F::disj(above)))));
    }
    F::conj(parts)
}

/// `◇p₀` followed by `□(p_i → ◇p_{i+1})` for `i < n`.
pub fn gamma_fragment(n: u32) -> Vec<Formula> {
    let mut out = vec![F::dia(0, F::var(0))];
    for i in 0..n {
        out.push(F::boxed(0, F::implies(F::var(i), F::dia(0, F::var(i + 1)))));
    }
    out
}

/// Outcome of [`check_axioms`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    /// Instances tested per schema (i)–(iv).
    pub instances: [usize; 4],
    /// Counterexamples: schema number, instance text, valuation text.
    pub failures: Vec<(usize, String, String)>,
}

impl AxiomReport {
    /// True if no instance failed.
    pub fn all_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A stratified pool of points of `[1, theta]`: successors and limits of
/// each end-logarithm up to 3, near-`ω^ω` points and `theta` itself.
pub fn sample_pool(theta: &Ordinal) -> Vec<Ordinal> {
    let exps: Vec<Ordinal> = ["0", "1", "2", "3", "w", "w+1"]
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect();
    let mut out = vec![theta.clone()];
    for a in &exps {
        for b in &exps {
            if b > a {
                continue;
            }
            for c in 1..=2u64 {
                for k in 0..=1u64 {
                    let x = Ordinal::term(a.clone(), c)
                        .add(&Ordinal::term(b.clone(), 1))
                        .add(&Ordinal::from_u64(k));
                    out.push(x);
                }
            }
        }
        out.push(Ordinal::term(a.clone(), 1));
    }
    out.retain(|x| !x.is_zero() && x <= theta);
    out.sort();
    out.dedup();
    out
}

/// A random band set inside `[1, theta]` with endpoints from [`sample_pool`]
/// and occasional rank constraints.
pub fn random_bandset(rng: &mut impl Rng, pool: &[Ordinal], max_bands: usize) -> BandSet {
    let nb = rng.gen_range(1..=max_bands.max(1));
    let mut bands = Vec::new();
    let ranks: Vec<Ordinal> = ["0", "1", "2", "3", "w"]
        .iter()
        .map(|s| s.parse().expect("literal"))
        .collect();
    for _ in 0..nb {
        let mut a = pool.choose(rng).expect("pool").clone();
        let mut b = pool.choose(rng).expect("pool").clone();
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        let mut band = Band::closed(a, b);
        for lvl in 1..=2usize {
            if rng.gen_bool(if lvl == 1 { 0.5 } else { 0.2 }) {
                let mut c = ranks.choose(rng).expect("ranks").clone();
                let mut d = ranks.choose(rng).expect("ranks").clone();
                if c > d {
                    core::mem::swap(&mut c, &mut d);
                }
                let lo = if rng.gen_bool(0.3) { None } else { c.pred() };
                let hi = if rng.gen_bool(0.3) { None } else { Some(d) };
                band = band.with(lvl, Interval::open_closed(lo, hi));
            }
        }
        bands.push(band);
    }
    BandSet::from_bands(bands)
}

fn random_subformula(rng: &mut impl Rng, nvars: u32, nmod: u64) -> Formula {
    let p = F::var(rng.gen_range(0..nvars));
    match rng.gen_range(0..6) {
        0 => p,
        1 => F::not(p),
        2 => F::and(p, F::var(rng.gen_range(0..nvars))),
        3 => F::or(p, F::not(F::var(rng.gen_range(0..nvars)))),
        4 => F::dia(rng.gen_range(0..nmod), p),
        _ => F::boxed(rng.gen_range(0..nmod), p),
    }
}

/// Instances of the GLP schemata (i)–(iv) for indices `xi < zeta`.
pub fn axiom_instances(phi: &Formula, psi: &Formula, xi: u64, zeta: u64) -> [Formula; 4] {
    let bx = |k, a| F::boxed(k, a);
    [
        F::implies(
            bx(xi, F::implies(phi.clone(), psi.clone())),
            F::implies(bx(xi, phi.clone()), bx(xi, psi.clone())),
        ),
        F::implies(bx(xi, F::implies(bx(xi, phi.clone()), phi.clone())), bx(xi, phi.clone())),
        F::implies(bx(xi, phi.clone()), bx(zeta, phi.clone())),
        F::implies(F::dia(xi, phi.clone()), bx(zeta, F::dia(xi, phi.clone()))),
    ]
}

fn fmt_valuation(v: &BandValuation) -> String {
    v.iter()
        .map(|(k, s)| format!("p{k} = {s}"))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Tests the GLP schemata on `trials` random band valuations over `space`.
pub fn check_axioms(space: &PolySpace, trials: usize, seed: u64) -> Result<AxiomReport, LogicError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = sample_pool(&space.theta);
    let nmod = space.levels.len() as u64;
    let full = space.domain().to_bandset();
    let mut report = AxiomReport::default();
    for _ in 0..trials {
        let v: BandValuation = (0..3).map(|i| (i, random_bandset(&mut rng, &pool, 2))).collect();
        let phi = random_subformula(&mut rng, 3, nmod);
        let psi = random_subformula(&mut rng, 3, nmod);
        let (xi, zeta) = if nmod >= 2 {
            let a = rng.gen_range(0..nmod - 1);
            (a, rng.gen_range(a + 1..nmod))
        } else {
            (0, 0)
        };
        for (s, inst) in axiom_instances(&phi, &psi, xi, zeta).iter().enumerate() {
            if s >= 2 && nmod < 2 {
                continue;
            }
            report.instances[s] += 1;
            let val = eval_topo(inst, space, &v)?;
            if !val.set_eq(&full) {
                report.failures.push((s + 1, inst.to_string(), fmt_valuation(&v)));
            }
        }
    }
    Ok(report)
}

/// Searches for a valuation refuting `probe` on `space`: first the rank
/// bands `{ℓx = k}` for small `k`, then random band sets.
pub fn refute(
    probe: &Formula,
    space: &PolySpace,
    trials: usize,
    seed: u64,
) -> Result<Option<BandValuation>, LogicError> {
    let full = space.domain().to_bandset();
    let vars: Vec<u32> = probe.vars().into_iter().collect();
    let mut candidates: Vec<BandSet> = Vec::new();
    for lvl in 1..=2usize {
        for k in 0..=2u64 {
            let b = Band::all().with(lvl, Interval::point(Ordinal::from_u64(k)));
            candidates.push(BandSet::from_band(b));
        }
    }
    let try_v = |v: &BandValuation| -> Result<bool, LogicError> {
        Ok(!eval_topo(probe, space, v)?.set_eq(&full))
    };
    for c in &candidates {
        let v: BandValuation = vars.iter().map(|&i| (i, c.clone())).collect();
        if try_v(&v)? {
            return Ok(Some(v));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = sample_pool(&space.theta);
    for _ in 0..trials {
        let v: BandValuation = vars
            .iter()
            .map(|&i| (i, random_bandset(&mut rng, &pool, 2)))
            .collect();
        if try_v(&v)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}
