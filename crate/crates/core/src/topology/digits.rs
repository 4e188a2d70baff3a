//! Digit-vector sets below `ω^{N+1}`.
//!
//! A point `x = ω^N·d_N + … + ω·d_1 + d_0` is its digit vector. A [`DigitBox`]
//! constrains each digit to an eventually periodic [`NatSet`]; a [`DigitSet`]
//! is a finite union of boxes. On these spaces `ℓx ≤ N`, so only `I_0` and
//! `I_1` have nonempty derived sets.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::ordinal::Ordinal;

use super::band::{Band, BandSet, Interval};
use super::{SetAlgebra, TopologyError};

/// An eventually periodic set of naturals: membership of `n ≥ start` depends
/// only on `(n - start) mod period`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NatSet {
    start: usize,
    period: usize,
    bits: Vec<bool>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl NatSet {
    /// ∅.
    pub fn empty() -> Self {
        NatSet {
            start: 0,
            period: 1,
            bits: vec![false],
        }
    }

    /// ℕ.
    pub fn all() -> Self {
        NatSet {
            start: 0,
            period: 1,
            bits: vec![true],
        }
    }

    /// `{k}`.
    pub fn single(k: usize) -> Self {
        let mut bits = vec![false; k + 2];
        bits[k] = true;
        NatSet {
            start: k + 1,
            period: 1,
            bits,
        }
    }

    /// `{n : n ≥ k}`.
    pub fn from_min(k: usize) -> Self {
        let mut bits = vec![false; k + 1];
        bits[k] = true;
        NatSet {
            start: k,
            period: 1,
            bits,
        }
    }

    /// `{n : n < k}`.
    pub fn below(k: usize) -> Self {
        NatSet::from_min(k).complement()
    }

    /// `{a + m·i : i ∈ ℕ}`.
    pub fn progression(a: usize, m: usize) -> Self {
        let m = m.max(1);
        let mut bits = vec![false; a + m];
        bits[a] = true;
        NatSet {
            start: a,
            period: m,
            bits,
        }
        .normalized()
    }

    fn get(&self, n: usize) -> bool {
        if n < self.bits.len() {
            self.bits[n]
        } else {
            self.bits[self.start + (n - self.start) % self.period]
        }
    }

    /// Membership.
    pub fn contains(&self, n: &BigUint) -> bool {
        match n.to_usize() {
            Some(n) => self.get(n),
            None => {
                let r = (n - self.start) % self.period;
                self.bits[self.start + r.to_usize().expect("small remainder")]
            }
        }
    }

    fn expand(&self, start: usize, period: usize) -> Vec<bool> {
        (0..start + period).map(|n| self.get(n)).collect()
    }

    fn zip(&self, o: &NatSet, f: impl Fn(bool, bool) -> bool) -> NatSet {
        let start = self.start.max(o.start);
        let period = self.period / gcd(self.period, o.period) * o.period;
        let a = self.expand(start, period);
        let b = o.expand(start, period);
        NatSet {
            start,
            period,
            bits: a.iter().zip(b.iter()).map(|(x, y)| f(*x, *y)).collect(),
        }
        .normalized()
    }

    fn normalized(mut self) -> NatSet {
        let cycle: Vec<bool> = self.bits[self.start..].to_vec();
        let p = self.period;
        for d in 1..=p {
            if p.is_multiple_of(d) && (0..p).all(|i| cycle[i] == cycle[i % d]) {
                self.period = d;
                self.bits.truncate(self.start + d);
                break;
            }
        }
        while self.start > 0 && self.bits[self.start - 1] == self.bits[self.start - 1 + self.period] {
            self.start -= 1;
            self.bits.pop();
        }
        self
    }

    /// Union.
    pub fn union(&self, o: &NatSet) -> NatSet {
        self.zip(o, |a, b| a || b)
    }

    /// Intersection.
    pub fn intersect(&self, o: &NatSet) -> NatSet {
        self.zip(o, |a, b| a && b)
    }

    /// Complement in ℕ.
    pub fn complement(&self) -> NatSet {
        NatSet {
            start: self.start,
            period: self.period,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// `{n + s : n ∈ self}`.
    pub fn shift(&self, s: usize) -> NatSet {
        let mut bits = vec![false; s];
        bits.extend(self.bits.iter().copied());
        NatSet {
            start: self.start + s,
            period: self.period,
            bits,
        }
        .normalized()
    }

    /// `{s + a + m·i : s ∈ self, i ∈ ℕ}`.
    pub fn plus_progression(&self, a: usize, m: usize) -> NatSet {
        let bound = self.start + self.period * m.max(1);
        (0..bound)
            .filter(|&s| self.get(s))
            .fold(NatSet::empty(), |acc, s| acc.union(&NatSet::progression(s + a, m)))
    }

    /// True if empty.
    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// True if infinite.
    pub fn is_infinite(&self) -> bool {
        self.bits[self.start..].iter().any(|b| *b)
    }

    /// The set as `[a, b)` (`b = None` for unbounded), if it is contiguous
    /// and nonempty.
    pub fn as_range(&self) -> Option<(usize, Option<usize>)> {
        let a = self.min()?;
        if self.is_infinite() {
            let gaps = self.complement().intersect(&NatSet::from_min(a));
            return gaps.is_empty().then_some((a, None));
        }
        let b = (0..self.start).rev().find(|&n| self.bits[n])? + 1;
        (a..b).all(|n| self.bits[n]).then_some((a, Some(b)))
    }

    /// Least member.
    pub fn min(&self) -> Option<usize> {
        self.bits.iter().position(|b| *b)
    }

    /// Some member, preferring the largest one below `cap`.
    pub fn sample_below(&self, cap: usize) -> Option<usize> {
        (0..cap.max(self.bits.len())).rev().find(|&n| self.get(n))
    }
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for n in 0..self.start {
            if self.bits[n] {
                parts.push(alloc::format!("{n}"));
            }
        }
        for r in self.start..self.start + self.period {
            if self.bits[r] {
                if self.period == 1 {
                    parts.push(alloc::format!("{r}.."));
                } else {
                    parts.push(alloc::format!("{r}+{}k", self.period));
                }
            }
        }
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A product of digit constraints; `pos[e]` constrains the coefficient of
/// `ω^e`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitBox {
    pos: Vec<NatSet>,
}

impl DigitBox {
    /// A box from per-position sets.
    pub fn new(pos: Vec<NatSet>) -> Self {
        DigitBox { pos }
    }

    /// Per-position sets, lowest position first.
    pub fn positions(&self) -> &[NatSet] {
        &self.pos
    }

    fn is_empty(&self) -> bool {
        self.pos.iter().any(NatSet::is_empty)
    }

    fn meet(&self, o: &DigitBox) -> DigitBox {
        DigitBox {
            pos: self.pos.iter().zip(o.pos.iter()).map(|(a, b)| a.intersect(b)).collect(),
        }
    }

    fn within(&self, o: &DigitBox) -> bool {
        self.pos
            .iter()
            .zip(o.pos.iter())
            .all(|(a, b)| a.intersect(&b.complement()).is_empty())
    }

    fn contains(&self, d: &[BigUint]) -> bool {
        self.pos.iter().zip(d.iter()).all(|(s, v)| s.contains(v))
    }

    fn min(&self) -> Ordinal {
        digits_to_ordinal(self.pos.iter().map(|s| s.min().expect("nonempty box")))
    }
}

/// Digits of `x` at positions `0..=n`, or `None` if `x ≥ ω^{n+1}`.
pub fn digits(x: &Ordinal, n: usize) -> Option<Vec<BigUint>> {
    let mut out = vec![BigUint::default(); n + 1];
    for (e, c) in x.terms() {
        let e = e.to_u64().and_then(|e| usize::try_from(e).ok()).filter(|&e| e <= n)?;
        out[e] = c.clone();
    }
    Some(out)
}

fn digits_to_ordinal(d: impl Iterator<Item = usize>) -> Ordinal {
    let v: Vec<usize> = d.collect();
    v.iter()
        .enumerate()
        .rev()
        .fold(Ordinal::zero(), |acc, (e, &c)| {
            acc.add(&Ordinal::term(Ordinal::from_u64(e as u64), c as u64))
        })
}

/// A finite union of digit boxes over positions `0..=n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DigitSet {
    n: usize,
    boxes: Vec<DigitBox>,
}

impl DigitSet {
    /// ∅ over positions `0..=n`.
    pub fn empty(n: usize) -> Self {
        DigitSet { n, boxes: Vec::new() }
    }

    /// All ordinals below `ω^{n+1}`.
    pub fn universe(n: usize) -> Self {
        DigitSet {
            n,
            boxes: vec![DigitBox::new(vec![NatSet::all(); n + 1])],
        }
    }

    /// Highest position.
    pub fn top(&self) -> usize {
        self.n
    }

    /// The constituent boxes.
    pub fn boxes(&self) -> &[DigitBox] {
        &self.boxes
    }

    /// Union of boxes with empty and subsumed boxes removed.
    pub fn from_boxes(n: usize, boxes: Vec<DigitBox>) -> Self {
        let mut keep: Vec<DigitBox> = Vec::with_capacity(boxes.len());
        for b in boxes {
            debug_assert_eq!(b.pos.len(), n + 1);
            if b.is_empty() || keep.iter().any(|k| b.within(k)) {
                continue;
            }
            keep.retain(|k| !k.within(&b));
            keep.push(b);
        }
        DigitSet { n, boxes: keep }
    }

    /// `{x}`.
    pub fn point(n: usize, x: &Ordinal) -> Result<Self, TopologyError> {
        let d = digits(x, n).ok_or(TopologyError::OutOfCarrier)?;
        let pos = d
            .iter()
            .map(|v| v.to_usize().map(NatSet::single).ok_or(TopologyError::OutOfCarrier))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DigitSet::from_boxes(n, vec![DigitBox::new(pos)]))
    }

    /// `{x : x < h}`; `h = None` means `ω^{n+1}`.
    pub fn below(n: usize, h: Option<&Ordinal>) -> Result<Self, TopologyError> {
        let Some(h) = h else {
            return Ok(DigitSet::universe(n));
        };
        let Some(d) = digits(h, n) else {
            return Ok(DigitSet::universe(n));
        };
        let d: Vec<usize> = d
            .iter()
            .map(|v| v.to_usize().ok_or(TopologyError::OutOfCarrier))
            .collect::<Result<_, _>>()?;
        let mut boxes = Vec::new();
        for e in 0..=n {
            let mut pos = vec![NatSet::all(); n + 1];
            for (f, p) in pos.iter_mut().enumerate().skip(e + 1) {
                *p = NatSet::single(d[f]);
            }
            pos[e] = NatSet::below(d[e]);
            boxes.push(DigitBox::new(pos));
        }
        Ok(DigitSet::from_boxes(n, boxes))
    }

    /// `[lo, hi)` with `hi = None` meaning `ω^{n+1}`.
    pub fn interval(n: usize, lo: &Ordinal, hi: Option<&Ordinal>) -> Result<Self, TopologyError> {
        Ok(DigitSet::below(n, hi)?.minus(&DigitSet::below(n, Some(lo))?))
    }

    /// `[1, theta]`.
    pub fn domain(n: usize, theta: &Ordinal) -> Result<Self, TopologyError> {
        DigitSet::interval(n, &Ordinal::one(), Some(&theta.succ()))
    }

    /// `{x : ℓx = μ}` with `ℓ(0) = 0`.
    fn ell_eq(n: usize, mu: usize) -> DigitSet {
        let mut pos = vec![NatSet::all(); n + 1];
        for p in pos.iter_mut().take(mu) {
            *p = NatSet::single(0);
        }
        pos[mu] = NatSet::from_min(1);
        let mut boxes = vec![DigitBox::new(pos)];
        if mu == 0 {
            boxes.push(DigitBox::new(vec![NatSet::single(0); n + 1]));
        }
        DigitSet::from_boxes(n, boxes)
    }

    /// Converts a band to digit form; fails if its endpoints leave the
    /// carrier.
    pub fn from_band(n: usize, b: &Band) -> Result<Self, TopologyError> {
        let l0 = b.level(0);
        let mut acc = DigitSet::interval(n, &l0.lo, l0.hi.as_ref())?;
        let l1 = b.level(1);
        if !l1.is_full() {
            let mut s = DigitSet::empty(n);
            for mu in 0..=n {
                if l1.contains(&Ordinal::from_u64(mu as u64)) {
                    s = s.union(&DigitSet::ell_eq(n, mu));
                }
            }
            acc = acc.intersect(&s);
        }
        if b.levels().iter().skip(2).any(|iv| !iv.contains(&Ordinal::zero())) {
            return Ok(DigitSet::empty(n));
        }
        Ok(acc)
    }

    /// Converts a band set to digit form.
    pub fn from_bandset(n: usize, s: &BandSet) -> Result<Self, TopologyError> {
        s.bands().iter().try_fold(DigitSet::empty(n), |acc, b| {
            Ok(acc.union(&DigitSet::from_band(n, b)?))
        })
    }

    /// Membership; points at or above `ω^{n+1}` are never members.
    pub fn contains(&self, x: &Ordinal) -> bool {
        match digits(x, self.n) {
            Some(d) => self.boxes.iter().any(|b| b.contains(&d)),
            None => false,
        }
    }

    /// True if empty.
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Least member.
    pub fn min(&self) -> Option<Ordinal> {
        self.boxes.iter().map(DigitBox::min).min()
    }

    /// Union.
    pub fn union(&self, o: &DigitSet) -> DigitSet {
        let mut v = self.boxes.clone();
        v.extend(o.boxes.iter().cloned());
        DigitSet::from_boxes(self.n, v)
    }

    /// Intersection.
    pub fn intersect(&self, o: &DigitSet) -> DigitSet {
        let mut v = Vec::new();
        for a in &self.boxes {
            for b in &o.boxes {
                v.push(a.meet(b));
            }
        }
        DigitSet::from_boxes(self.n, v)
    }

    /// Complement below `ω^{n+1}`.
    pub fn complement(&self) -> DigitSet {
        let mut acc = DigitSet::universe(self.n);
        for b in &self.boxes {
            let mut pieces = Vec::new();
            for e in 0..=self.n {
                let mut pos = vec![NatSet::all(); self.n + 1];
                for (f, p) in pos.iter_mut().enumerate().take(e) {
                    *p = b.pos[f].clone();
                }
                pos[e] = b.pos[e].complement();
                pieces.push(DigitBox::new(pos));
            }
            acc = acc.intersect(&DigitSet::from_boxes(self.n, pieces));
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// `self \ o`.
    pub fn minus(&self, o: &DigitSet) -> DigitSet {
        self.intersect(&o.complement())
    }

    /// Extensional equality.
    pub fn set_eq(&self, o: &DigitSet) -> bool {
        self.minus(o).is_empty() && o.minus(self).is_empty()
    }

    /// `d_{I_λ}` in the space of all ordinals below `ω^{n+1}`.
    pub fn derived(&self, lambda: usize) -> DigitSet {
        match lambda {
            0 => match self.min() {
                None => DigitSet::empty(self.n),
                Some(m) => DigitSet::below(self.n, Some(&m.succ()))
                    .expect("min is in the carrier")
                    .complement(),
            },
            1 => {
                let mut out = Vec::new();
                for b in &self.boxes {
                    for mu in 1..=self.n {
                        if !b.pos[mu - 1].is_infinite() {
                            continue;
                        }
                        let mut pos = b.pos.clone();
                        pos[mu] = b.pos[mu].shift(1);
                        for p in pos.iter_mut().take(mu) {
                            *p = NatSet::single(0);
                        }
                        out.push(DigitBox::new(pos));
                    }
                }
                DigitSet::from_boxes(self.n, out)
            }
            _ => DigitSet::empty(self.n),
        }
    }

    /// `{q + z : z ∈ self}`.
    pub fn translate(&self, q: &Ordinal) -> Result<DigitSet, TopologyError> {
        let qd: Vec<usize> = digits(q, self.n)
            .ok_or(TopologyError::OutOfCarrier)?
            .iter()
            .map(|v| v.to_usize().ok_or(TopologyError::OutOfCarrier))
            .collect::<Result<_, _>>()?;
        let zero = BigUint::default();
        let mut out = Vec::new();
        for b in &self.boxes {
            for e in 0..=self.n {
                if !b.pos[e + 1..].iter().all(|s| s.contains(&zero)) {
                    continue;
                }
                let mut pos = b.pos.clone();
                pos[e] = b.pos[e].intersect(&NatSet::from_min(1)).shift(qd[e]);
                for (f, p) in pos.iter_mut().enumerate().skip(e + 1) {
                    *p = NatSet::single(qd[f]);
                }
                out.push(DigitBox::new(pos));
            }
            if b.pos.iter().all(|s| s.contains(&zero)) {
                out.push(DigitBox::new(qd.iter().map(|&d| NatSet::single(d)).collect()));
            }
        }
        Ok(DigitSet::from_boxes(self.n, out))
    }

    /// Applies `f` to the set at position `e` of every box.
    pub fn map_position(&self, e: usize, f: impl Fn(&NatSet) -> NatSet) -> DigitSet {
        DigitSet::from_boxes(
            self.n,
            self.boxes
                .iter()
                .map(|b| {
                    let mut pos = b.pos.clone();
                    pos[e] = f(&pos[e]);
                    DigitBox::new(pos)
                })
                .collect(),
        )
    }

    /// Re-expresses the set over positions `0..=m`, `m ≥ n`.
    pub fn widen(&self, m: usize) -> DigitSet {
        assert!(m >= self.n);
        DigitSet::from_boxes(
            m,
            self.boxes
                .iter()
                .map(|b| {
                    let mut pos = b.pos.clone();
                    pos.resize(m + 1, NatSet::single(0));
                    DigitBox::new(pos)
                })
                .collect(),
        )
    }

    /// The set as a band set, when every box is an interval or a run of
    /// points `c + ω^e·k` with all lower digits zero.
    pub fn to_bandset(&self) -> Option<BandSet> {
        let mut bands = Vec::new();
        for b in &self.boxes {
            let mut prefix = Ordinal::zero();
            let mut e = self.n;
            loop {
                match b.pos[e].as_range() {
                    Some((a, Some(z))) if z == a + 1 => {
                        prefix = prefix.add(&Ordinal::term(Ordinal::from_u64(e as u64), a as u64));
                        if e == 0 {
                            bands.push(Band::half_open(prefix.clone(), Some(prefix.succ())));
                            break;
                        }
                        e -= 1;
                    }
                    Some((a, z)) => {
                        let pe = Ordinal::from_u64(e as u64);
                        let at = |k: usize| prefix.add(&Ordinal::term(pe.clone(), k as u64));
                        let hi = match z {
                            Some(z) => Some(at(z)),
                            None if e == self.n => None,
                            None => Some(prefix.add(&Ordinal::term(pe.succ(), 1))),
                        };
                        let lower = &b.pos[..e];
                        if lower.iter().all(|s| s.as_range() == Some((0, None))) {
                            bands.push(Band::half_open(at(a), hi));
                        } else if lower.iter().all(|s| s.as_range() == Some((0, Some(1)))) {
                            let lo = at(a.max(1));
                            bands.push(Band::half_open(lo, hi).with(1, Interval::point(pe)));
                            if a == 0 {
                                bands.push(Band::half_open(prefix.clone(), Some(prefix.succ())));
                            }
                        } else {
                            return None;
                        }
                        break;
                    }
                    None => return None,
                }
            }
        }
        Some(BandSet::from_bands(bands))
    }

    /// A few members of each box, for diagnostics and sampling.
    pub fn samples(&self, per_box: usize) -> Vec<Ordinal> {
        let mut out = Vec::new();
        for b in &self.boxes {
            for k in 0..per_box {
                let d = b.pos.iter().map(|s| {
                    let m = s.min().expect("nonempty box");
                    if k == 0 || !s.is_infinite() {
                        m
                    } else {
                        s.sample_below(m + 2 + 3 * k).unwrap_or(m)
                    }
                });
                out.push(digits_to_ordinal(d));
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boxes.is_empty() {
            return f.write_str("empty");
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str("<")?;
            for (k, e) in (0..=self.n).rev().enumerate() {
                if k > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "d{e} in {}", b.pos[e])?;
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}

/// A [`DigitSet`] bound to the domain `[1, theta]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitIn {
    /// The set, always inside the domain.
    pub set: DigitSet,
    /// The domain as a digit set.
    pub domain: DigitSet,
}

impl DigitIn {
    /// Restricts `set` to `[1, theta]`.
    pub fn new(set: DigitSet, theta: &Ordinal) -> Result<Self, TopologyError> {
        let domain = DigitSet::domain(set.top(), theta)?;
        Ok(DigitIn {
            set: set.intersect(&domain),
            domain,
        })
    }

    fn with(&self, set: DigitSet) -> Self {
        DigitIn {
            set,
            domain: self.domain.clone(),
        }
    }
}

impl SetAlgebra for DigitIn {
    fn empty_like(&self) -> Self {
        self.with(DigitSet::empty(self.set.top()))
    }
    fn full(&self) -> Self {
        self.with(self.domain.clone())
    }
    fn union(&self, o: &Self) -> Self {
        self.with(self.set.union(&o.set))
    }
    fn intersect(&self, o: &Self) -> Self {
        self.with(self.set.intersect(&o.set))
    }
    fn complement(&self) -> Self {
        self.with(self.domain.minus(&self.set))
    }
    fn derived(&self, lambda: usize) -> Result<Self, TopologyError> {
        Ok(self.with(self.set.derived(lambda).intersect(&self.domain)))
    }
    fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
    fn contains(&self, x: &Ordinal) -> bool {
        self.set.contains(x)
    }
}
