//! Countermodels on ordinal spaces: the tree embedding onto finite trees,
//! the product structure, and the recursive construction of maps from
//! `[1, Θ]` onto J-trees, with verification.

use alloc::boxed::Box as Heap;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jtree::{hereditary_roots, is_jtree, root, FrameError, JFrame, RootedTree};
use crate::logic::{eval_in, eval_kripke, sample_pool, Formula, LogicError, NodeValuation, PolySpace, Valuation};
use crate::ordinal::{below_samples, big_l, e_iter, ell_iter_n, Ordinal, OrdinalError};
use crate::topology::{
    derived_set, Band, BandIn, BandSet, DigitIn, DigitSet, Domain, Interval, LevelSpec, SetAlgebra,
    TopologyError,
};

/// Errors raised while building or checking countermodels.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    /// A tree without nodes.
    #[error("empty tree")]
    EmptyTree,
    /// The frame is not a J-tree.
    #[error("not a J-tree")]
    NotAJTree,
    /// The level sequence is not usable.
    #[error("unsupported level sequence: {0}")]
    UnsupportedSigma(&'static str),
    /// A map applied outside its domain.
    #[error("map undefined at {0}")]
    OutOfDomain(Ordinal),
    /// A preimage that has no symbolic form.
    #[error("preimage of node {0} is not representable")]
    NotRepresentable(usize),
    /// Ordinal arithmetic failure.
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    /// Set algebra failure.
    #[error(transparent)]
    Topology(#[from] TopologyError),
    /// Formula evaluation failure.
    #[error(transparent)]
    Logic(#[from] LogicError),
    /// Frame failure.
    #[error(transparent)]
    Frame(#[from] FrameError),
}

type Res<T> = Result<T, EmbedError>;

fn o(n: u64) -> Ordinal {
    Ordinal::from_u64(n)
}

fn omega_to(e: &Ordinal) -> Ordinal {
    Ordinal::term(e.clone(), 1)
}

/// The `α` with `x = ω^ξ·α + r`, `r < ω^ξ`.
pub fn div_omega_pow(x: &Ordinal, xi: &Ordinal) -> Ordinal {
    Ordinal::normalize(
        x.terms()
            .iter()
            .filter(|(e, _)| e >= xi)
            .map(|(e, c)| (xi.left_subtract(e).expect("e >= xi"), c.clone()))
            .collect(),
    )
}

/// A node of the tree embedding: the node, its height, the children of
/// height one less (cycled along blocks) and the lower children (laid out
/// at the start of each block, tallest first).
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GlNode {
    /// Tree node.
    pub node: usize,
    /// Height of the subtree.
    pub rank: u32,
    /// Children of height `rank - 1`.
    pub high: Vec<GlNode>,
    /// Shorter children, tallest first.
    pub low: Vec<GlNode>,
}

impl GlNode {
    fn build(children: &dyn Fn(usize) -> Vec<usize>, x: usize) -> GlNode {
        let kids: Vec<GlNode> = children(x).into_iter().map(|c| GlNode::build(children, c)).collect();
        let rank = kids.iter().map(|k| k.rank + 1).max().unwrap_or(0);
        let (high, mut low): (Vec<GlNode>, Vec<GlNode>) = kids.into_iter().partition(|k| k.rank + 1 == rank);
        low.sort_by_key(|k| core::cmp::Reverse(k.rank));
        GlNode { node: x, rank, high, low }
    }

    /// `ω^rank`, the top point.
    pub fn theta(&self) -> Ordinal {
        omega_to(&o(self.rank as u64))
    }

    fn layout(&self) -> (Vec<Ordinal>, Ordinal) {
        let mut q = Vec::with_capacity(self.low.len());
        let mut acc = Ordinal::zero();
        for c in &self.low {
            q.push(acc.clone());
            acc = acc.add(&c.theta());
        }
        (q, acc)
    }

    /// The node at `x ∈ [1, ω^rank]`.
    pub fn apply(&self, x: &Ordinal) -> Res<usize> {
        let th = self.theta();
        if x.is_zero() || *x > th {
            return Err(EmbedError::OutOfDomain(x.clone()));
        }
        if *x == th {
            return Ok(self.node);
        }
        let r1 = o(self.rank as u64 - 1);
        let block = omega_to(&r1);
        let c = x.coef_at(&r1);
        let rest = x.mod_omega_pow(&r1);
        let (i, v) = if rest.is_zero() {
            (c - 1u32, block.clone())
        } else {
            (c, rest)
        };
        let (q, p) = self.layout();
        if v <= p {
            for (k, child) in self.low.iter().enumerate().rev() {
                if v > q[k] {
                    return child.apply(&q[k].left_subtract(&v)?);
                }
            }
        }
        let m1 = BigUint::from(self.high.len());
        let j = (i % m1).to_usize().expect("small");
        self.high[j].apply(&p.left_subtract(&v)?)
    }

    /// Preimage of `target` as a digit set over positions `0..=rank`.
    pub fn fibre(&self, target: usize) -> Res<DigitSet> {
        let n = self.rank as usize;
        if self.node == target {
            return Ok(DigitSet::point(n, &self.theta())?);
        }
        let mut acc = DigitSet::empty(n);
        if n == 0 {
            return Ok(acc);
        }
        let r1 = n - 1;
        let (q, p) = self.layout();
        let m1 = self.high.len();
        for (j, c) in self.high.iter().enumerate() {
            let f = c.fibre(target)?;
            if f.is_empty() {
                continue;
            }
            let f = f
                .translate(&p)?
                .map_position(r1, |s| s.plus_progression(j, m1))
                .widen(n);
            acc = acc.union(&f);
        }
        for (k, c) in self.low.iter().enumerate() {
            let f = c.fibre(target)?;
            if f.is_empty() {
                continue;
            }
            let f = f
                .widen(r1)
                .translate(&q[k])?
                .map_position(r1, |_| crate::topology::NatSet::all())
                .widen(n);
            acc = acc.union(&f);
        }
        Ok(acc)
    }

    /// A point of the preimage of `target`.
    pub fn witness(&self, target: usize) -> Option<Ordinal> {
        if self.node == target {
            return Some(self.theta());
        }
        let (q, p) = self.layout();
        for (j, c) in self.high.iter().enumerate() {
            if let Some(w) = c.witness(target) {
                let r1 = o(self.rank as u64 - 1);
                return Some(Ordinal::term(r1, j as u64).add(&p).add(&w));
            }
        }
        for (k, c) in self.low.iter().enumerate() {
            if let Some(w) = c.witness(target) {
                return Some(q[k].add(&w));
            }
        }
        None
    }

    fn nodes(&self, out: &mut Vec<usize>) {
        out.push(self.node);
        for c in self.high.iter().chain(self.low.iter()) {
            c.nodes(out);
        }
    }
}

/// A map expression over ordinals, ending in tree nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MapExpr {
    /// `x ↦ x`.
    Identity,
    /// `x ↦ -γ + x`.
    SubLeft(Ordinal),
    /// `x ↦ ℓ^δ x`, raised to 1 where it vanishes.
    EllIter(u64),
    /// `ω^ξ·α ↦ α`.
    OtypUp(Ordinal),
    /// The cell-relative projection onto `[1, κ₁+…+κ_m]`; the list is
    /// ascending.
    CellProject(Vec<Ordinal>),
    /// First matching band predicate selects the branch.
    Dispatch(Vec<(BandSet, MapExpr)>),
    /// A constant node.
    Const(usize),
    /// `outer ∘ inner`.
    Compose(Heap<MapExpr>, Heap<MapExpr>),
    /// The tree embedding rooted at this node.
    TreeLabel(GlNode),
}

/// Result of applying a [`MapExpr`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    /// An ordinal.
    Ord(Ordinal),
    /// A tree node.
    Node(usize),
}

/// A symbolic preimage: a band set, a digit set, or not representable.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Fibre {
    /// Band-set form.
    Band(BandSet),
    /// Digit-set form.
    Digits(DigitSet),
    /// No symbolic form.
    Unknown,
}

impl Fibre {
    fn empty() -> Fibre {
        Fibre::Band(BandSet::empty())
    }

    /// The fibre as a band set, if possible.
    pub fn to_band(&self) -> Option<BandSet> {
        match self {
            Fibre::Band(b) => Some(b.clone()),
            Fibre::Digits(d) => d.to_bandset(),
            Fibre::Unknown => None,
        }
    }

    /// The fibre as a digit set over at least `n` positions, if possible.
    pub fn to_digits(&self, n: usize) -> Option<DigitSet> {
        match self {
            Fibre::Band(b) => DigitSet::from_bandset(n, b).ok(),
            Fibre::Digits(d) if d.top() <= n => Some(d.widen(n)),
            _ => None,
        }
    }

    fn combine(&self, o: &Fibre, band: impl Fn(&BandSet, &BandSet) -> BandSet, dig: impl Fn(&DigitSet, &DigitSet) -> DigitSet) -> Fibre {
        match (self, o) {
            (Fibre::Band(a), Fibre::Band(b)) => Fibre::Band(band(a, b)),
            (Fibre::Unknown, _) | (_, Fibre::Unknown) => Fibre::Unknown,
            _ => {
                let n = [self, o]
                    .iter()
                    .filter_map(|f| match f {
                        Fibre::Digits(d) => Some(d.top()),
                        _ => None,
                    })
                    .max()
                    .unwrap_or(0);
                if let (Some(a), Some(b)) = (self.to_digits(n), o.to_digits(n)) {
                    return Fibre::Digits(dig(&a, &b));
                }
                match (self.to_band(), o.to_band()) {
                    (Some(a), Some(b)) => Fibre::Band(band(&a, &b)),
                    _ => Fibre::Unknown,
                }
            }
        }
    }

    /// Union.
    pub fn union(&self, o: &Fibre) -> Fibre {
        self.combine(o, BandSet::union, DigitSet::union)
    }

    /// Intersection.
    pub fn intersect(&self, o: &Fibre) -> Fibre {
        self.combine(o, BandSet::intersect, DigitSet::intersect)
    }

    /// True if the fibre has a symbolic form.
    pub fn is_known(&self) -> bool {
        !matches!(self, Fibre::Unknown)
    }
}

impl core::fmt::Display for Fibre {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Fibre::Band(b) => write!(f, "{b}"),
            Fibre::Digits(d) => write!(f, "{d}"),
            Fibre::Unknown => f.write_str("unknown"),
        }
    }
}

fn band_iv(b: &Band, k: usize) -> Interval {
    b.level(k)
}

fn lift_bandset(s: &BandSet, delta: usize) -> BandSet {
    let mut out = Vec::new();
    for b in s.bands() {
        let mut nb = Band::all();
        for (k, iv) in b.levels().iter().enumerate() {
            let iv = if k == 0 {
                iv.meet(&Interval::half_open(o(1), None))
            } else {
                iv.clone()
            };
            nb = nb.with(k + delta, iv);
        }
        out.push(nb);
    }
    let mut r = BandSet::from_bands(out);
    if s.member(&o(1)) {
        r = r.union(&BandSet::from_band(Band::all().with(delta, Interval::point(Ordinal::zero()))));
    }
    r
}

impl MapExpr {
    /// `outer ∘ inner`.
    pub fn compose(outer: MapExpr, inner: MapExpr) -> MapExpr {
        match inner {
            MapExpr::Identity => outer,
            _ => MapExpr::Compose(Heap::new(outer), Heap::new(inner)),
        }
    }

    /// Evaluates the map at `x`.
    pub fn apply(&self, x: &Ordinal) -> Res<Value> {
        Ok(match self {
            MapExpr::Identity => Value::Ord(x.clone()),
            MapExpr::SubLeft(g) => Value::Ord(g.left_subtract(x).map_err(|_| EmbedError::OutOfDomain(x.clone()))?),
            MapExpr::EllIter(d) => {
                let v = ell_iter_n(*d, x);
                Value::Ord(if v.is_zero() { o(1) } else { v })
            }
            MapExpr::OtypUp(xi) => {
                if x.ell_or_zero() < *xi || x.is_zero() {
                    return Err(EmbedError::OutOfDomain(x.clone()));
                }
                Value::Ord(div_omega_pow(x, xi))
            }
            MapExpr::CellProject(k) => Value::Ord(Cells::new(k)?.pi0(x)?),
            MapExpr::Dispatch(table) => {
                for (pred, branch) in table {
                    if pred.member(x) {
                        return branch.apply(x);
                    }
                }
                return Err(EmbedError::OutOfDomain(x.clone()));
            }
            MapExpr::Const(n) => Value::Node(*n),
            MapExpr::Compose(outer, inner) => match inner.apply(x)? {
                Value::Ord(y) => outer.apply(&y)?,
                Value::Node(_) => return Err(EmbedError::OutOfDomain(x.clone())),
            },
            MapExpr::TreeLabel(g) => Value::Node(g.apply(x)?),
        })
    }

    /// The node at `x`.
    pub fn node_at(&self, x: &Ordinal) -> Res<usize> {
        match self.apply(x)? {
            Value::Node(n) => Ok(n),
            Value::Ord(_) => Err(EmbedError::OutOfDomain(x.clone())),
        }
    }

    /// Symbolic preimage of a node (not yet restricted to a domain).
    pub fn node_preimage(&self, node: usize) -> Fibre {
        match self {
            MapExpr::Const(n) => {
                if *n == node {
                    Fibre::Band(BandSet::all())
                } else {
                    Fibre::empty()
                }
            }
            MapExpr::Dispatch(table) => table.iter().fold(Fibre::empty(), |acc, (pred, br)| {
                acc.union(&Fibre::Band(pred.clone()).intersect(&br.node_preimage(node)))
            }),
            MapExpr::Compose(outer, inner) => inner.set_preimage(&outer.node_preimage(node)),
            MapExpr::TreeLabel(g) => g.fibre(node).map(Fibre::Digits).unwrap_or(Fibre::Unknown),
            _ => Fibre::Unknown,
        }
    }

    /// Symbolic preimage of a set under an ordinal-valued map.
    pub fn set_preimage(&self, s: &Fibre) -> Fibre {
        if let Fibre::Band(b) = s {
            if b.is_empty() {
                return Fibre::empty();
            }
        }
        match self {
            MapExpr::Identity => s.clone(),
            MapExpr::SubLeft(g) => match s.to_band() {
                Some(b) => Fibre::Band(BandSet::from_bands(
                    b.bands()
                        .iter()
                        .map(|band| {
                            let l0 = band_iv(band, 0);
                            let lo = g.add(&if l0.lo.is_zero() { o(1) } else { l0.lo.clone() });
                            let hi = l0.hi.as_ref().map(|h| g.add(h));
                            let mut nb = Band::half_open(lo, hi);
                            for (k, iv) in band.levels().iter().enumerate().skip(1) {
                                nb = nb.with(k, iv.clone());
                            }
                            nb
                        })
                        .collect(),
                )),
                None => Fibre::Unknown,
            },
            MapExpr::EllIter(d) => match s.to_band() {
                Some(b) => Fibre::Band(lift_bandset(&b, *d as usize)),
                None => Fibre::Unknown,
            },
            MapExpr::OtypUp(xi) => match s.to_band() {
                Some(b) => otyp_preimage(&b, xi),
                None => Fibre::Unknown,
            },
            MapExpr::CellProject(k) => match (Cells::new(k), s.to_band()) {
                (Ok(c), Some(b)) => c.preimage(&b),
                _ => Fibre::Unknown,
            },
            MapExpr::Dispatch(table) => table.iter().fold(Fibre::empty(), |acc, (pred, br)| {
                acc.union(&Fibre::Band(pred.clone()).intersect(&br.set_preimage(s)))
            }),
            MapExpr::Compose(outer, inner) => inner.set_preimage(&outer.set_preimage(s)),
            MapExpr::Const(_) | MapExpr::TreeLabel(_) => Fibre::Unknown,
        }
    }

    /// Pairs of overlapping predicates in any dispatch table.
    pub fn dispatch_overlaps(&self) -> usize {
        match self {
            MapExpr::Dispatch(t) => {
                let mut n = 0;
                for i in 0..t.len() {
                    for j in i + 1..t.len() {
                        if !t[i].0.intersect(&t[j].0).is_empty() {
                            n += 1;
                        }
                    }
                }
                n + t.iter().map(|(_, b)| b.dispatch_overlaps()).sum::<usize>()
            }
            MapExpr::Compose(a, b) => a.dispatch_overlaps() + b.dispatch_overlaps(),
            _ => 0,
        }
    }
}

fn otyp_preimage(b: &BandSet, xi: &Ordinal) -> Fibre {
    let unit = omega_to(xi);
    let mut out = Vec::new();
    for band in b.bands() {
        if band.levels().len() > 2 {
            return Fibre::Unknown;
        }
        let l0 = band_iv(band, 0);
        let lo = unit.multiply(&if l0.lo.is_zero() { o(1) } else { l0.lo.clone() });
        let hi = l0.hi.as_ref().map(|h| unit.multiply(h));
        let l1 = band_iv(band, 1);
        let l1 = Interval::half_open(xi.add(&l1.lo), l1.hi.as_ref().map(|h| xi.add(h)));
        out.push(Band::half_open(lo, hi).with(1, l1));
    }
    Fibre::Band(BandSet::from_bands(out))
}

/// The cell layout of the product construction for `κ₁ ≤ … ≤ κ_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cells {
    /// `κ₁, …, κ_m`, ascending.
    pub kappas: Vec<Ordinal>,
    /// `ξ = L(κ_m) + 1`.
    pub xi: Ordinal,
    /// Start offsets `S_j = κ₁ + … + κ_j` for `j = 0..=m`.
    pub starts: Vec<Ordinal>,
    /// Cell lengths `κ_0 + κ_ι` for `ι = 0..m` (with `κ_0 = κ_m`).
    pub cycle: Vec<Ordinal>,
    /// Sum of one cycle.
    pub period: Ordinal,
}

impl Cells {
    /// Validates and lays out the cells.
    pub fn new(kappas: &[Ordinal]) -> Res<Cells> {
        if kappas.is_empty() || kappas.iter().any(Ordinal::is_zero) {
            return Err(EmbedError::UnsupportedSigma("product needs nonzero kappas"));
        }
        if kappas.windows(2).any(|w| w[0] > w[1]) {
            return Err(EmbedError::UnsupportedSigma("kappas must be ascending"));
        }
        let m = kappas.len();
        let k0 = kappas[m - 1].clone();
        let xi = big_l(&k0)?.succ();
        let mut starts = vec![Ordinal::zero()];
        for k in kappas {
            let last = starts.last().expect("nonempty").add(k);
            starts.push(last);
        }
        let cycle: Vec<Ordinal> = (0..m).map(|i| k0.add(&kappas[Self::comp_of(m, i)])).collect();
        let period = cycle.iter().fold(Ordinal::zero(), |a, c| a.add(c));
        Ok(Cells {
            kappas: kappas.to_vec(),
            xi,
            starts,
            cycle,
            period,
        })
    }

    fn comp_of(m: usize, class: usize) -> usize {
        if class == 0 {
            m - 1
        } else {
            class - 1
        }
    }

    /// Component (0-based) whose summand a cell of class `class` covers in
    /// its second half.
    pub fn component(&self, class: usize) -> usize {
        Self::comp_of(self.kappas.len(), class)
    }

    /// Class of the cells whose end projects to the top of component `j`.
    pub fn class_for(&self, j: usize) -> usize {
        if j + 1 == self.kappas.len() {
            0
        } else {
            j + 1
        }
    }

    /// Start `c_ι` of cell `ι` inside a block of length `ω^ξ`.
    pub fn cell_start(&self, iota: &BigUint) -> Ordinal {
        let m = BigUint::from(self.kappas.len());
        let q = iota / &m;
        let r = (iota % &m).to_usize().expect("small");
        let mut acc = mul_big(&self.period, &q);
        for c in &self.cycle[..r] {
            acc = acc.add(c);
        }
        acc
    }

    /// `β_ι`, the last point of cell `ι`.
    pub fn beta(&self, iota: &BigUint) -> Ordinal {
        let m = self.kappas.len();
        let r = (iota % BigUint::from(m)).to_usize().expect("small");
        self.cell_start(iota).add(&self.cycle[r])
    }

    /// Cell index and offset `v ∈ [1, len]` of `y ∈ [1, ω^ξ)`.
    pub fn locate(&self, y: &Ordinal) -> Res<(BigUint, Ordinal)> {
        if y.is_zero() || y.ell_or_zero() >= self.xi {
            return Err(EmbedError::OutOfDomain(y.clone()));
        }
        let m = self.kappas.len();
        let lead = big_l(&self.period)?;
        let pc = self.period.coef_at(&lead);
        let d = y.coef_at(&lead);
        let q = &d / &pc;
        let q0 = if q.is_zero() { q } else { q - 1u32 };
        let mut rest = mul_big(&self.period, &q0).left_subtract(y)?;
        let mut idx = &q0 * BigUint::from(m);
        loop {
            let r = (&idx % BigUint::from(m)).to_usize().expect("small");
            let len = &self.cycle[r];
            if rest <= *len {
                return Ok((idx, rest));
            }
            rest = len.left_subtract(&rest)?;
            idx += 1u32;
        }
    }

    /// `π₀(x)` for `x` with `ℓx < ξ`.
    pub fn pi0(&self, x: &Ordinal) -> Res<Ordinal> {
        let y = x.mod_omega_pow(&self.xi);
        let (idx, v) = self.locate(&y)?;
        let m = self.kappas.len();
        let class = (idx % BigUint::from(m)).to_usize().expect("small");
        let k0 = &self.kappas[m - 1];
        if v <= *k0 {
            Ok(self.starts[m - 1].add(&v))
        } else {
            let u = k0.left_subtract(&v)?;
            Ok(self.starts[self.component(class)].add(&u))
        }
    }

    fn preimage(&self, a: &BandSet) -> Fibre {
        if self.kappas.len() != 1 {
            return Fibre::Unknown;
        }
        let k = &self.kappas[0];
        let terms = k.terms();
        if terms.len() != 1 || terms[0].1 != BigUint::from(1u32) {
            return Fibre::Unknown;
        }
        let gamma = terms[0].0.clone();
        let down = Band::all().with(1, Interval::half_open(Ordinal::zero(), Some(self.xi.clone())));
        let top = BandSet::from_band(down.clone().with(1, Interval::point(gamma)));
        let mut acc = BandSet::empty();
        for b in a.bands() {
            let l0 = band_iv(b, 0);
            let mut rest = Band::all();
            for (i, iv) in b.levels().iter().enumerate().skip(1) {
                rest = rest.with(i, iv.clone());
            }
            let rest = BandSet::from_band(rest.meet(&down));
            let starts_low = l0.lo <= o(1);
            if starts_low && l0.hi.as_ref().is_none_or(|h| h > k) {
                acc = acc.union(&rest);
            } else if starts_low && l0.hi.as_ref() == Some(k) {
                acc = acc.union(&rest.minus(&top));
            } else if l0.lo == *k {
                if b.contains(k) {
                    acc = acc.union(&top);
                }
            } else {
                return Fibre::Unknown;
            }
        }
        Fibre::Band(acc)
    }
}

fn mul_big(a: &Ordinal, q: &BigUint) -> Ordinal {
    if q.is_zero() || a.is_zero() {
        return Ordinal::zero();
    }
    let lead = a.terms()[0].0.clone();
    let mut raw: Vec<(Ordinal, BigUint)> = a.terms().to_vec();
    raw[0].1 = &raw[0].1 * q;
    let _ = lead;
    Ordinal::normalize(raw)
}

/// The product structure at `ς = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStructure {
    /// Cell layout.
    pub cells: Cells,
    /// `λ`.
    pub lambda: Ordinal,
    /// `Θ = ω^ξ·λ`.
    pub theta: Ordinal,
    /// `{x ≤ Θ : ℓx ≥ ξ}`.
    pub x_up: BandSet,
    /// `{x ≤ Θ : ℓx < ξ}`.
    pub x_down: BandSet,
    /// `π₀` on `x_down`.
    pub pi0: MapExpr,
    /// `π₁` on `x_up`.
    pub pi1: MapExpr,
    /// `(X_↑ \ dX_↑) ∩ π₁⁻¹ d[1, λ]`.
    pub s_set: BandSet,
    /// Marker components (0-based).
    pub markers: Vec<usize>,
}

/// Builds the product structure for ascending `kappas` and `lambda`.
pub fn product(kappas: &[Ordinal], lambda: &Ordinal, markers: &[usize]) -> Res<ProductStructure> {
    if lambda.is_zero() {
        return Err(EmbedError::UnsupportedSigma("lambda must be nonzero"));
    }
    let cells = Cells::new(kappas)?;
    let xi = cells.xi.clone();
    let theta = omega_to(&xi).multiply(lambda);
    let dom = Band::closed(o(1), theta.clone());
    let x_down = BandSet::from_band(dom.clone().with(1, Interval::half_open(Ordinal::zero(), Some(xi.clone()))));
    let x_up = BandSet::from_band(dom.with(1, Interval::half_open(xi.clone(), None)));
    let domain = Domain::upto(theta.clone());
    let lvl = LevelSpec::new(1);
    let d_up = derived_set(&x_up, &lvl, &domain)?;
    let d_lambda = derived_set(&BandSet::interval(o(1), lambda.clone()), &lvl, &Domain::upto(lambda.clone()))?;
    let pulled = match otyp_preimage(&d_lambda, &xi) {
        Fibre::Band(b) => b,
        _ => BandSet::empty(),
    };
    let s_set = x_up.minus(&d_up).intersect(&pulled);
    Ok(ProductStructure {
        pi0: MapExpr::CellProject(kappas.to_vec()),
        pi1: MapExpr::OtypUp(xi),
        cells,
        lambda: lambda.clone(),
        theta,
        x_up,
        x_down,
        s_set,
        markers: markers.to_vec(),
    })
}

impl ProductStructure {
    /// `π₀(x)`.
    pub fn project0(&self, x: &Ordinal) -> Res<Ordinal> {
        if !self.x_down.member(x) {
            return Err(EmbedError::OutOfDomain(x.clone()));
        }
        self.cells.pi0(x)
    }

    /// `π₁(x)`.
    pub fn project1(&self, x: &Ordinal) -> Res<Ordinal> {
        if !self.x_up.member(x) {
            return Err(EmbedError::OutOfDomain(x.clone()));
        }
        Ok(div_omega_pow(x, &self.cells.xi))
    }

    /// The top of component `j` inside `[1, κ]`.
    pub fn marker_point(&self, j: usize) -> Ordinal {
        self.cells.starts[j + 1].clone()
    }

    /// A point of `(c, u)` projecting to the top of component `j`, for `u`
    /// in `x_up` and `c < u`.
    pub fn density_witness(&self, j: usize, c: &Ordinal, u: &Ordinal) -> Res<Option<Ordinal>> {
        let xi = &self.cells.xi;
        let base = c.div_part(xi);
        let r = c.mod_omega_pow(xi);
        let m = self.cells.kappas.len();
        let mut idx = if r.is_zero() {
            BigUint::zero()
        } else {
            self.cells.locate(&r)?.0
        };
        let want = self.cells.class_for(j);
        for _ in 0..=2 * m + 1 {
            let class = (&idx % BigUint::from(m)).to_usize().expect("small");
            let beta = self.cells.beta(&idx);
            if class == want && beta > r {
                let w = base.add(&beta);
                return Ok((w > *c && w < *u).then_some(w));
            }
            idx += 1u32;
        }
        Ok(None)
    }
}

/// A countermodel: `[1, Θ]` with Icard levels and a map onto a J-tree.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Countermodel {
    /// Greatest point.
    pub theta: Ordinal,
    /// The consecutive Icard levels `1..=max σ` of the ambient polytopology.
    pub levels: Vec<u64>,
    /// Icard level read by each relation of the tree.
    pub sigma: Vec<u64>,
    /// The map onto the tree.
    pub fmap: MapExpr,
    /// The J-tree.
    pub tree: JFrame,
    /// One preimage per node.
    pub witnesses: Vec<Ordinal>,
    /// Named sets of the algebra: node preimages and product sets.
    pub algebra: Vec<(String, Fibre)>,
    /// Node valuation carried from the model search, if any.
    pub valuation: Option<NodeValuation>,
}

struct Built {
    theta: Ordinal,
    fmap: MapExpr,
    witness: BTreeMap<usize, Ordinal>,
    product: Option<ProductStructure>,
}

fn lift(b: Built, delta: u64) -> Res<Built> {
    if delta == 0 {
        return Ok(b);
    }
    let witness = b
        .witness
        .into_iter()
        .map(|(k, w)| Ok((k, e_iter(delta, &w)?)))
        .collect::<Res<_>>()?;
    Ok(Built {
        theta: e_iter(delta, &b.theta)?,
        fmap: MapExpr::compose(b.fmap, MapExpr::EllIter(delta)),
        witness,
        product: None,
    })
}

fn reach(f: &JFrame, nodes: &[usize], from: usize, rels: core::ops::Range<usize>) -> Vec<usize> {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let mut seen = BTreeSet::from([from]);
    let mut out = vec![from];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for k in rels.clone() {
            for y in f.successors(k, x) {
                if inside.contains(&y) && seen.insert(y) {
                    out.push(y);
                }
            }
        }
        i += 1;
    }
    out
}

fn gl_from_frame(f: &JFrame, nodes: &[usize], k: usize) -> GlNode {
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let children = |x: usize| -> Vec<usize> {
        nodes
            .iter()
            .copied()
            .filter(|&y| f.r(k, x, y) && !inside.iter().any(|&z| f.r(k, x, z) && f.r(k, z, y)))
            .collect()
    };
    GlNode::build(&children, nodes[0])
}

fn gl_built(g: GlNode) -> Built {
    let mut ns = Vec::new();
    g.nodes(&mut ns);
    let witness = ns
        .iter()
        .map(|&n| (n, g.witness(n).expect("node in tree")))
        .collect();
    Built {
        theta: g.theta(),
        fmap: MapExpr::TreeLabel(g),
        witness,
        product: None,
    }
}

/// The tree embedding: `Θ = ω^{height}` and a d-map `([1, Θ], I₁) → t`
/// with `f⁻¹(root) = {Θ}`.
pub fn gl_embed(t: &RootedTree) -> (Ordinal, MapExpr) {
    let f = t.to_frame();
    let nodes: Vec<usize> = (0..t.len()).collect();
    let g = gl_from_frame(&f, &nodes, 0);
    (g.theta(), MapExpr::TreeLabel(g))
}

fn embed_rec(f: &JFrame, nodes: &[usize], off: usize, sigma: &[u64]) -> Res<Built> {
    let r = nodes[0];
    if nodes.len() == 1 {
        return Ok(Built {
            theta: o(1),
            fmap: MapExpr::Const(r),
            witness: BTreeMap::from([(r, o(1))]),
            product: None,
        });
    }
    if off >= f.rels() {
        return Err(EmbedError::NotAJTree);
    }
    let has = nodes.iter().any(|&x| nodes.iter().any(|&y| f.r(off, x, y)));
    if !has {
        let s0 = sigma[0];
        let inner: Vec<u64> = sigma[1..].iter().map(|s| s - s0).collect();
        let b = embed_rec(f, nodes, off + 1, &inner)?;
        return lift(b, s0);
    }
    if off + 1 == f.rels() {
        return lift(gl_built(gl_from_frame(f, nodes, off)), sigma[0] - 1);
    }
    let shift = sigma[0] - 1;
    let local: Vec<u64> = sigma.iter().map(|s| s - shift).collect();
    let b = case_two(f, nodes, off, &local)?;
    lift(b, shift)
}

fn case_two(f: &JFrame, nodes: &[usize], off: usize, sigma: &[u64]) -> Res<Built> {
    let r = nodes[0];
    let plane = reach(f, nodes, r, off + 1..f.rels());
    let inside: BTreeSet<usize> = nodes.iter().copied().collect();
    let heads: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&b| {
            f.r(off, r, b)
                && !(off + 1..f.rels()).any(|k| inside.iter().any(|&z| f.r(k, z, b)))
                && !inside.iter().any(|&z| f.r(off, r, z) && f.r(off, z, b))
        })
        .collect();
    let mut kids = Vec::new();
    for &b in &heads {
        let sub = reach(f, nodes, b, off..f.rels());
        kids.push(embed_rec(f, &sub, off, sigma)?);
    }
    kids.sort_by(|a, b| a.theta.cmp(&b.theta));
    let base = embed_rec(f, &plane, off, sigma)?;
    let kappas: Vec<Ordinal> = kids.iter().map(|k| k.theta.clone()).collect();
    let ps = product(&kappas, &base.theta, &(0..kappas.len()).collect::<Vec<_>>())?;
    let cells = &ps.cells;
    let table: Vec<(BandSet, MapExpr)> = kids
        .iter()
        .enumerate()
        .map(|(j, k)| {
            let lo = cells.starts[j].succ();
            let hi = cells.starts[j + 1].succ();
            let branch = MapExpr::compose(k.fmap.clone(), MapExpr::SubLeft(cells.starts[j].clone()));
            (BandSet::from_band(Band::half_open(lo, Some(hi))), branch)
        })
        .collect();
    let fstar = MapExpr::Dispatch(table);
    let fmap = MapExpr::Dispatch(vec![
        (ps.x_down.clone(), MapExpr::compose(fstar, ps.pi0.clone())),
        (ps.x_up.clone(), MapExpr::compose(base.fmap.clone(), ps.pi1.clone())),
    ]);
    let k0 = cells.kappas.last().expect("children").clone();
    let mut witness = BTreeMap::new();
    for (j, k) in kids.iter().enumerate() {
        let idx = BigUint::from(cells.class_for(j));
        let start = cells.cell_start(&idx).add(&k0);
        for (&n, w) in &k.witness {
            witness.insert(n, start.add(w));
        }
    }
    let unit = omega_to(&cells.xi);
    for (&n, w) in &base.witness {
        witness.insert(n, unit.multiply(w));
    }
    Ok(Built {
        theta: ps.theta.clone(),
        fmap,
        witness,
        product: Some(ps),
    })
}

fn fibres_of(fmap: &MapExpr, n: usize, theta: &Ordinal) -> Vec<Fibre> {
    let dom = Fibre::Band(BandSet::interval(o(1), theta.clone()));
    (0..n).map(|k| fmap.node_preimage(k).intersect(&dom)).collect()
}

/// Builds a countermodel for the J-tree `t` whose relation `k` is read in
/// the Icard topology `I_{sigma[k]}`.
pub fn embed(t: &JFrame, sigma: &[u64]) -> Res<Countermodel> {
    if t.is_empty() {
        return Err(EmbedError::EmptyTree);
    }
    if !is_jtree(t)? {
        return Err(EmbedError::NotAJTree);
    }
    if sigma.len() != t.rels() {
        return Err(EmbedError::UnsupportedSigma("one level per relation"));
    }
    if sigma.first() == Some(&0) || sigma.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EmbedError::UnsupportedSigma("levels must be nonzero and increasing"));
    }
    let r = root(t).ok_or(EmbedError::NotAJTree)?;
    let mut nodes: Vec<usize> = (0..t.len()).collect();
    nodes.retain(|&x| x != r);
    nodes.insert(0, r);
    let b = embed_rec(t, &nodes, 0, sigma)?;
    let fibres = fibres_of(&b.fmap, t.len(), &b.theta);
    let mut algebra: Vec<(String, Fibre)> = fibres
        .into_iter()
        .enumerate()
        .map(|(k, f)| (format!("f^-1({k})"), f))
        .collect();
    if let Some(ps) = &b.product {
        algebra.push(("x_up".into(), Fibre::Band(ps.x_up.clone())));
        algebra.push(("x_down".into(), Fibre::Band(ps.x_down.clone())));
        algebra.push(("s_set".into(), Fibre::Band(ps.s_set.clone())));
    }
    let witnesses = (0..t.len())
        .map(|k| b.witness.get(&k).cloned().ok_or(EmbedError::NotAJTree))
        .collect::<Res<_>>()?;
    Ok(Countermodel {
        theta: b.theta,
        levels: (1..=*sigma.last().unwrap_or(&1)).collect(),
        sigma: sigma.to_vec(),
        fmap: b.fmap,
        tree: t.clone(),
        witnesses,
        algebra,
        valuation: None,
    })
}

/// Pulls a node valuation back along the countermodel map.
pub fn countermodel_valuation(cm: &Countermodel, t_val: &NodeValuation) -> Res<BTreeMap<u32, Fibre>> {
    let fibres = fibres_of(&cm.fmap, cm.tree.len(), &cm.theta);
    let mut out = BTreeMap::new();
    for (&p, nodes) in t_val {
        let mut acc = Fibre::empty();
        for &n in nodes {
            let f = fibres.get(n).ok_or(EmbedError::NotRepresentable(n))?;
            if !f.is_known() {
                return Err(EmbedError::NotRepresentable(n));
            }
            acc = acc.union(f);
        }
        out.insert(p, acc);
    }
    Ok(out)
}

/// Whether a check was decided symbolically or on samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Mode {
    /// Decided on the symbolic algebra.
    Exact,
    /// Decided on sampled points.
    Sampled,
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "EXACT",
            Mode::Sampled => "SAMPLED",
        })
    }
}

/// One verification item.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    /// Short name.
    pub name: String,
    /// How it was decided.
    pub mode: Mode,
    /// Outcome.
    pub passed: bool,
    /// Diagnostics.
    pub detail: String,
}

impl Check {
    fn new(name: &str, mode: Mode, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            mode,
            passed,
            detail: detail.into(),
        }
    }
}

/// Result of [`jmap_check`] or [`verify_countermodel`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Report {
    /// All checks in order.
    pub checks: Vec<Check>,
}

impl Report {
    /// True if every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `Exact` if every check was exact.
    pub fn mode(&self) -> Mode {
        if self.checks.iter().all(|c| c.mode == Mode::Exact) {
            Mode::Exact
        } else {
            Mode::Sampled
        }
    }

    /// Failed checks.
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Points below `x` in a small `I_level` neighbourhood of `x`, `level ≥ 1`.
/// Empty when `x` is isolated.
pub fn approach_points(x: &Ordinal, level: usize, width: u64) -> Vec<Ordinal> {
    let g = x.ell_or_zero();
    if x.is_zero() || g.is_zero() || level == 0 {
        return Vec::new();
    }
    let p = x.prefix();
    let far = 6u64;
    let mut exps: Vec<Ordinal> = match (level, g.pred()) {
        (1, Some(b)) => vec![b],
        (1, None) => approach_points(&g, 1, width),
        (_, _) => approach_points(&g, level - 1, width),
    };
    exps.sort();
    exps.reverse();
    exps.truncate(4 * width as usize);
    let span = if exps.len() == 1 { 12 } else { width };
    let mut out = Vec::new();
    for eta in &exps {
        let tails: Vec<Ordinal> = if level == 1 {
            let mut t = below_samples(&omega_to(eta), 9, 2);
            t.push(Ordinal::zero());
            t
        } else {
            let mut t = vec![Ordinal::zero()];
            t.extend(exps.iter().filter(|e2| *e2 <= eta).map(omega_to));
            t
        };
        for k in far..far + span {
            let head = p.add(&Ordinal::term(eta.clone(), k));
            for t in &tails {
                let z = head.add(t);
                if z < *x {
                    out.push(z);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

fn set_desc(nodes: &[usize]) -> String {
    let v: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn subset<A: SetAlgebra>(a: &A, b: &A) -> bool {
    a.intersect(&b.complement()).is_empty()
}

fn union_of<A: SetAlgebra>(fib: &[A], nodes: impl Iterator<Item = usize>, proto: &A) -> A {
    nodes.fold(proto.empty_like(), |acc, n| acc.union(&fib[n]))
}

fn ll(t: &JFrame, x: usize, k: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..t.len()).collect();
    let mut v = reach(t, &all, x, k..t.rels());
    v.remove(0);
    v.sort_unstable();
    v
}

fn exact_checks<A: SetAlgebra>(fib: &[A], top: &A, t: &JFrame, sigma: &[usize], out: &mut Vec<Check>) -> Res<()> {
    let n = t.len();
    let proto = &fib[0];
    let full = proto.full();
    let mut overlap = false;
    for i in 0..n {
        for j in i + 1..n {
            overlap |= !fib[i].intersect(&fib[j]).is_empty();
        }
    }
    let cover = union_of(fib, 0..n, proto);
    out.push(Check::new(
        "fibres partition [1,theta]",
        Mode::Exact,
        !overlap && subset(&full, &cover),
        if overlap { "overlap" } else { "" },
    ));
    let r = root(t).ok_or(EmbedError::NotAJTree)?;
    let ok = subset(&fib[r], top) && subset(top, &fib[r]);
    out.push(Check::new("root fibre = {theta}", Mode::Exact, ok, ""));
    let empty: Vec<usize> = (0..n).filter(|&k| fib[k].is_empty()).collect();
    out.push(Check::new("surjective", Mode::Exact, empty.is_empty(), set_desc(&empty)));
    let kk = t.rels();
    for k in 0..kk {
        let lvl = sigma[k];
        let mut bad = Vec::new();
        for y in 0..n {
            let pre = union_of(fib, (0..n).filter(|&x| t.r(k, x, y)), proto);
            let d = fib[y].derived(lvl)?;
            let good = if k + 1 == kk {
                subset(&pre, &d) && subset(&d, &pre)
            } else {
                subset(&pre, &d)
            };
            if !good {
                bad.push(y);
            }
        }
        let name = if k + 1 == kk {
            format!("j1 d-map at relation {k}")
        } else {
            format!("j2 open at relation {k}")
        };
        out.push(Check::new(&name, Mode::Exact, bad.is_empty(), format!("bad nodes {}", set_desc(&bad))));
    }
    for k in 0..kk.saturating_sub(1) {
        let lvl = sigma[k];
        let roots = hereditary_roots(t, k)?;
        let mut bad3 = Vec::new();
        let mut bad4 = Vec::new();
        for &h in &roots {
            let up = ll(t, h, k);
            let s1 = union_of(fib, up.iter().copied(), proto);
            let s2 = s1.union(&fib[h]);
            for s in [&s1, &s2] {
                if !s.intersect(&s.complement().derived(lvl)?).is_empty() {
                    bad3.push(h);
                }
            }
            if !fib[h].intersect(&fib[h].derived(lvl)?).is_empty() {
                bad4.push(h);
            }
        }
        bad3.dedup();
        out.push(Check::new(&format!("j3 open cones at relation {k}"), Mode::Exact, bad3.is_empty(), set_desc(&bad3)));
        out.push(Check::new(&format!("j4 discrete fibres at relation {k}"), Mode::Exact, bad4.is_empty(), set_desc(&bad4)));
    }
    Ok(())
}

enum Algebra {
    Band(Vec<BandIn>, BandIn),
    Digits(Vec<DigitIn>, DigitIn),
}

fn algebra_for(fibres: &[Fibre], theta: &Ordinal) -> Res<Option<Algebra>> {
    if fibres.iter().any(|f| !f.is_known()) {
        return Ok(None);
    }
    let dom = Domain::upto(theta.clone());
    if fibres.iter().all(|f| matches!(f, Fibre::Band(_))) {
        let v = fibres
            .iter()
            .map(|f| BandIn::new(f.to_band().expect("band"), dom.clone()))
            .collect();
        return Ok(Some(Algebra::Band(v, BandIn::new(BandSet::point(theta.clone()), dom))));
    }
    let Some(deg) = big_l(theta).ok().and_then(|l| l.to_u64()) else {
        return Ok(fibres_as_bands(fibres, &dom));
    };
    let n = fibres
        .iter()
        .filter_map(|f| match f {
            Fibre::Digits(d) => Some(d.top()),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .max(deg as usize);
    let mut v = Vec::new();
    for f in fibres {
        match f.to_digits(n) {
            Some(d) => v.push(DigitIn::new(d, theta)?),
            None => return Ok(fibres_as_bands(fibres, &dom)),
        }
    }
    let top = DigitIn::new(DigitSet::point(n, theta)?, theta)?;
    Ok(Some(Algebra::Digits(v, top)))
}

fn fibres_as_bands(fibres: &[Fibre], dom: &Domain) -> Option<Algebra> {
    let v: Option<Vec<BandIn>> = fibres
        .iter()
        .map(|f| f.to_band().map(|b| BandIn::new(b, dom.clone())))
        .collect();
    let top = BandIn::new(BandSet::point(dom.hi.clone()), dom.clone());
    v.map(|v| Algebra::Band(v, top))
}

fn sample_points(theta: &Ordinal, extra: &[Ordinal], budget: usize) -> Vec<Ordinal> {
    let mut pts: Vec<Ordinal> = sample_pool(theta);
    pts.extend(extra.iter().cloned());
    pts.extend(approach_points(theta, 1, 3));
    pts.retain(|x| !x.is_zero() && x <= theta);
    pts.sort();
    pts.dedup();
    if pts.len() > budget {
        let step = pts.len() as f64 / budget as f64;
        let mut keep: Vec<Ordinal> = (0..budget).map(|i| pts[(i as f64 * step) as usize].clone()).collect();
        keep.extend(extra.iter().cloned());
        keep.push(theta.clone());
        keep.sort();
        keep.dedup();
        pts = keep;
    }
    pts
}

fn sampled_checks(fmap: &MapExpr, theta: &Ordinal, t: &JFrame, sigma: &[usize], budget: usize, out: &mut Vec<Check>) -> Res<()> {
    let n = t.len();
    let kk = t.rels();
    let mut wit: Vec<Option<Ordinal>> = vec![None; n];
    let pts = sample_points(theta, &[], budget);
    let mut images = Vec::new();
    for x in &pts {
        let y = fmap.node_at(x)?;
        if wit[y].is_none() {
            wit[y] = Some(x.clone());
        }
        images.push(y);
    }
    let _ = images;
    let width = 3;
    let mut bad = Vec::new();
    for k in 0..kk {
        let lvl = sigma[k];
        let mut cnt = 0usize;
        for x in &pts {
            let fx = fmap.node_at(x)?;
            let near = approach_points(x, lvl, width);
            let imgs: BTreeSet<usize> = near.iter().map(|z| fmap.node_at(z)).collect::<Res<_>>()?;
            for y in t.successors(k, fx) {
                if !imgs.contains(&y) {
                    bad.push(format!("open@{k}: {x} misses node {y}"));
                }
            }
            if k + 1 == kk {
                for &y in &imgs {
                    if !t.r(k, fx, y) {
                        bad.push(format!("cont@{k}: {x} near node {y}"));
                    }
                }
            }
            cnt += 1;
            if cnt >= budget {
                break;
            }
        }
    }
    out.push(Check::new("j1/j2 on sampled points", Mode::Sampled, bad.is_empty(), bad.join("; ")));
    let mut bad = Vec::new();
    for k in 0..kk.saturating_sub(1) {
        let lvl = sigma[k];
        let roots = hereditary_roots(t, k)?;
        for x in &pts {
            let fx = fmap.node_at(x)?;
            for &h in &roots {
                let up: BTreeSet<usize> = ll(t, h, k).into_iter().collect();
                if fx != h && !up.contains(&fx) {
                    continue;
                }
                for z in approach_points(x, lvl, width) {
                    let fz = fmap.node_at(&z)?;
                    if !up.contains(&fz) {
                        bad.push(format!("j3/j4@{k}: {x} near node {fz} outside cone of {h}"));
                    }
                }
            }
        }
    }
    out.push(Check::new("j3/j4 on sampled points", Mode::Sampled, bad.is_empty(), bad.join("; ")));
    Ok(())
}

/// Checks the J-map conditions for `fmap : [1, space.theta] → t`, where
/// relation `k` is read at Icard level `space.levels[k]`. Symbolic fibres
/// give exact checks; otherwise conditions are tested on sampled points.
pub fn jmap_check(fmap: &MapExpr, space: &PolySpace, t: &JFrame, budget: usize) -> Res<Report> {
    if !is_jtree(t)? {
        return Err(EmbedError::NotAJTree);
    }
    let sigma = space.finite_levels()?;
    if sigma.len() != t.rels() {
        return Err(EmbedError::UnsupportedSigma("one level per relation"));
    }
    let theta = &space.theta;
    let r = root(t).ok_or(EmbedError::NotAJTree)?;
    let mut out = Vec::new();
    let at_top = fmap.node_at(theta)?;
    out.push(Check::new("f(theta) = root", Mode::Exact, at_top == r, format!("f(theta) = {at_top}")));
    out.push(Check::new("dispatch predicates disjoint", Mode::Exact, fmap.dispatch_overlaps() == 0, ""));
    let fibres = fibres_of(fmap, t.len(), theta);
    match algebra_for(&fibres, theta)? {
        Some(Algebra::Band(v, top)) => exact_checks(&v, &top, t, &sigma, &mut out)?,
        Some(Algebra::Digits(v, top)) => exact_checks(&v, &top, t, &sigma, &mut out)?,
        None => sampled_checks(fmap, theta, t, &sigma, budget, &mut out)?,
    }
    let mut bad = Vec::new();
    for (k, f) in fibres.iter().enumerate() {
        let samples: Vec<Ordinal> = match f {
            Fibre::Band(b) => b.bands().iter().filter_map(|band| band.least_ge(&o(1))).collect(),
            Fibre::Digits(d) => d.samples(2),
            Fibre::Unknown => Vec::new(),
        };
        for x in samples.into_iter().filter(|x| !x.is_zero() && x <= theta) {
            let y = fmap.node_at(&x)?;
            if y != k {
                bad.push(format!("{x} in fibre of {k} but maps to {y}"));
            }
        }
    }
    out.push(Check::new(CONSISTENCY, Mode::Sampled, bad.is_empty(), bad.join("; ")));
    Ok(Report { checks: out })
}

const CONSISTENCY: &str = "fibres agree with map";

fn eval_point(
    phi: &Formula,
    x: &Ordinal,
    fmap: &MapExpr,
    sigma: &[usize],
    val: &NodeValuation,
    width: u64,
) -> Res<bool> {
    use Formula as F;
    let ev = |a: &Formula, y: &Ordinal| eval_point(a, y, fmap, sigma, val, width);
    Ok(match phi {
        F::Var(i) => {
            let node = fmap.node_at(x)?;
            val.get(i).is_some_and(|s| s.contains(&node))
        }
        F::Top => true,
        F::Bot => false,
        F::Not(a) => !ev(a, x)?,
        F::And(a, b) => ev(a, x)? && ev(b, x)?,
        F::Or(a, b) => ev(a, x)? || ev(b, x)?,
        F::Implies(a, b) => !ev(a, x)? || ev(b, x)?,
        F::Dia(k, a) | F::Box(k, a) => {
            let lvl = k
                .to_u64()
                .and_then(|i| sigma.get(i as usize).copied())
                .ok_or_else(|| LogicError::IndexOutOfRange(k.clone()))?;
            let dia = matches!(phi, F::Dia(..));
            let mut any = false;
            let mut all = true;
            for z in approach_points(x, lvl, width) {
                let v = ev(a, &z)?;
                any |= v;
                all &= v;
            }
            if dia {
                any
            } else {
                all
            }
        }
    })
}

/// Finds a valuation of `phi`'s variables on `t` that makes `phi` true at
/// the root: exhaustive for small spaces, random otherwise.
pub fn find_valuation(phi: &Formula, t: &JFrame, budget: usize, seed: u64) -> Res<Option<NodeValuation>> {
    let r = root(t).ok_or(EmbedError::NotAJTree)?;
    let vars: Vec<u32> = phi.vars().into_iter().collect();
    let n = t.len();
    let bits = n * vars.len();
    let make = |mask: u64| -> NodeValuation {
        vars.iter()
            .enumerate()
            .map(|(i, &p)| (p, (0..n).filter(|&x| mask >> (i * n + x) & 1 == 1).collect()))
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = if bits <= 20 { 1u64 << bits } else { budget as u64 };
    for i in 0..total {
        let mask = if bits <= 20 { i } else { rng.gen::<u64>() & ((1u64 << bits.min(63)) - 1) };
        let v = make(mask);
        if eval_kripke(phi, t, &v)?[r] {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Verifies a countermodel against `phi` (indices already condensed to the
/// tree's relations): (a) Kripke truth at the root, (b) the J-map checks,
/// (c) topological truth at `Θ` under the pulled-back valuation.
pub fn verify_countermodel(cm: &Countermodel, phi: &Formula, budget: usize) -> Res<Report> {
    let t = &cm.tree;
    let r = root(t).ok_or(EmbedError::NotAJTree)?;
    let mut checks = Vec::new();
    let val = match &cm.valuation {
        Some(v) if eval_kripke(phi, t, v).map(|s| s[r]).unwrap_or(false) => Some(v.clone()),
        _ => find_valuation(phi, t, budget.max(1) * 64, 0)?,
    };
    let Some(val) = val else {
        checks.push(Check::new("a: Kripke truth at root", Mode::Exact, false, "no satisfying valuation"));
        return Ok(Report { checks });
    };
    checks.push(Check::new("a: Kripke truth at root", Mode::Exact, true, ""));
    let space = PolySpace::new(cm.theta.clone(), &cm.sigma);
    let jm = jmap_check(&cm.fmap, &space, t, budget)?;
    let failed: Vec<String> = jm.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    let mode = if jm.checks.iter().filter(|c| c.name != CONSISTENCY).all(|c| c.mode == Mode::Exact) {
        Mode::Exact
    } else {
        Mode::Sampled
    };
    checks.push(Check::new("b: J-map conditions", mode, jm.passed(), failed.join("; ")));
    let sigma = space.finite_levels()?;
    let needed: BTreeSet<usize> = phi
        .vars()
        .iter()
        .filter_map(|p| val.get(p))
        .flat_map(|s| s.iter().copied())
        .collect();
    let fibres = fibres_of(&cm.fmap, t.len(), &cm.theta);
    let exact = needed.iter().all(|&k| fibres[k].is_known());
    let c = if exact {
        let used: Vec<Fibre> = (0..t.len())
            .map(|k| if needed.contains(&k) { fibres[k].clone() } else { Fibre::empty() })
            .collect();
        let holds = match algebra_for(&used, &cm.theta)? {
            Some(Algebra::Band(v, top)) => topo_holds(phi, &val, &v, &top, &sigma, &cm.theta)?,
            Some(Algebra::Digits(v, top)) => topo_holds(phi, &val, &v, &top, &sigma, &cm.theta)?,
            None => None,
        };
        holds.map(|h| Check::new("c: theta in [[phi]]", Mode::Exact, h, ""))
    } else {
        None
    };
    let c = match c {
        Some(c) => c,
        None => {
            let h = eval_point(phi, &cm.theta, &cm.fmap, &sigma, &val, 3)?;
            Check::new("c: theta in [[phi]]", Mode::Sampled, h, "")
        }
    };
    checks.push(c);
    Ok(Report { checks })
}

fn topo_holds<A: SetAlgebra>(
    phi: &Formula,
    val: &NodeValuation,
    fib: &[A],
    top: &A,
    sigma: &[usize],
    theta: &Ordinal,
) -> Res<Option<bool>> {
    let proto = top.full();
    let v: Valuation<A> = val
        .iter()
        .map(|(&p, nodes)| (p, union_of(fib, nodes.iter().copied(), &proto)))
        .collect();
    let mut v = v;
    for p in phi.vars() {
        v.entry(p).or_insert_with(|| proto.empty_like());
    }
    let s = eval_in(phi, sigma, &v, &proto)?;
    Ok(Some(s.contains(theta)))
}
