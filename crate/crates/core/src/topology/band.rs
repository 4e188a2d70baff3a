//! Bands: ordinal intervals refined by hyperlogarithm range constraints.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ordinal::{ell_iter_n, Ordinal, Parser};

use super::solver::{holds, least_ge};
use super::TopologyError;

/// Half-open ordinal interval `[lo, hi)`; `hi = None` means unbounded.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    /// Inclusive lower end.
    pub lo: Ordinal,
    /// Exclusive upper end.
    pub hi: Option<Ordinal>,
}

impl Interval {
    /// `[0, ∞)`.
    pub fn full() -> Self {
        Interval::default()
    }

    /// `[lo, hi)`.
    pub fn half_open(lo: Ordinal, hi: Option<Ordinal>) -> Self {
        Interval { lo, hi }
    }

    /// `[lo, hi]`.
    pub fn closed(lo: Ordinal, hi: Ordinal) -> Self {
        Interval {
            lo,
            hi: Some(hi.succ()),
        }
    }

    /// `(c, d]` with `c = None` for −1 and `d = None` for ∞.
    pub fn open_closed(c: Option<Ordinal>, d: Option<Ordinal>) -> Self {
        Interval {
            lo: c.map(|c| c.succ()).unwrap_or_default(),
            hi: d.map(|d| d.succ()),
        }
    }

    /// The single point `{v}`.
    pub fn point(v: Ordinal) -> Self {
        Interval::closed(v.clone(), v)
    }

    /// True for `[0, ∞)`.
    pub fn is_full(&self) -> bool {
        self.lo.is_zero() && self.hi.is_none()
    }

    /// True if no ordinal lies in the interval.
    pub fn is_void(&self) -> bool {
        matches!(&self.hi, Some(h) if *h <= self.lo)
    }

    /// Membership.
    pub fn contains(&self, v: &Ordinal) -> bool {
        *v >= self.lo && self.hi.as_ref().is_none_or(|h| v < h)
    }

    /// Intersection.
    pub fn meet(&self, o: &Interval) -> Interval {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = match (&self.hi, &o.hi) {
            (None, h) | (h, None) => h.clone(),
            (Some(a), Some(b)) => Some(a.clone().min(b.clone())),
        };
        Interval { lo, hi }
    }

    /// True if `self ⊆ o` as intervals.
    pub fn within(&self, o: &Interval) -> bool {
        if self.is_void() {
            return true;
        }
        self.lo >= o.lo
            && match (&self.hi, &o.hi) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            }
    }

    /// The complement in the ordinals, as at most two intervals.
    pub fn complement(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        if !self.lo.is_zero() {
            out.push(Interval::half_open(Ordinal::zero(), Some(self.lo.clone())));
        }
        if let Some(h) = &self.hi {
            out.push(Interval::half_open(h.clone(), None));
        }
        out
    }

    /// `{v + 1 : v ∈ self}` closed upward to the next interval shape.
    pub(crate) fn shift_succ(&self) -> Interval {
        Interval {
            lo: self.lo.succ(),
            hi: self.hi.as_ref().map(|h| h.succ()),
        }
    }
}

/// A band: constraints `ℓ^k x ∈ levels[k]`; level 0 constrains `x` itself.
/// Missing levels are unconstrained.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    levels: Vec<Interval>,
}

impl Band {
    /// The unconstrained band (all ordinals).
    pub fn all() -> Self {
        Band::default()
    }

    /// The band `[lo, hi]` with no level constraints.
    pub fn closed(lo: Ordinal, hi: Ordinal) -> Self {
        Band::from_levels(vec![Interval::closed(lo, hi)])
    }

    /// The band `[lo, hi)`.
    pub fn half_open(lo: Ordinal, hi: Option<Ordinal>) -> Self {
        Band::from_levels(vec![Interval::half_open(lo, hi)])
    }

    /// Builds a band from per-level intervals.
    pub fn from_levels(mut levels: Vec<Interval>) -> Self {
        while levels.last().is_some_and(Interval::is_full) {
            levels.pop();
        }
        Band { levels }
    }

    /// Adds the constraint `ℓ^k x ∈ iv`.
    pub fn with(mut self, k: usize, iv: Interval) -> Self {
        if self.levels.len() <= k {
            self.levels.resize(k + 1, Interval::full());
        }
        self.levels[k] = self.levels[k].meet(&iv);
        Band::from_levels(self.levels)
    }

    /// Per-level intervals, trailing unconstrained levels omitted.
    pub fn levels(&self) -> &[Interval] {
        &self.levels
    }

    /// The interval at level `k`.
    pub fn level(&self, k: usize) -> Interval {
        self.levels.get(k).cloned().unwrap_or_default()
    }

    /// Levels `1..` reinterpreted as constraints on `ℓx`.
    pub(crate) fn shift_down(&self) -> Band {
        Band::from_levels(self.levels.iter().skip(1).cloned().collect())
    }

    /// Intersection.
    pub fn meet(&self, o: &Band) -> Band {
        let n = self.levels.len().max(o.levels.len());
        Band::from_levels((0..n).map(|k| self.level(k).meet(&o.level(k))).collect())
    }

    /// Membership.
    pub fn contains(&self, x: &Ordinal) -> bool {
        holds(x, &self.levels)
    }

    /// Least member at or above `s`.
    pub fn least_ge(&self, s: &Ordinal) -> Option<Ordinal> {
        least_ge(s, &self.levels)
    }

    /// True if the band has no member.
    pub fn is_empty(&self) -> bool {
        self.levels.iter().any(Interval::is_void) || self.least_ge(&Ordinal::zero()).is_none()
    }

    /// Sufficient test for `self ⊆ o`.
    pub fn within(&self, o: &Band) -> bool {
        let n = self.levels.len().max(o.levels.len());
        (0..n).all(|k| self.level(k).within(&o.level(k)))
    }

    /// The complement in the ordinals as disjoint bands.
    pub fn complement(&self) -> Vec<Band> {
        let mut out = Vec::new();
        let mut prefix: Vec<Interval> = Vec::new();
        for iv in &self.levels {
            for c in iv.complement() {
                let mut lv = prefix.clone();
                lv.push(c);
                out.push(Band::from_levels(lv));
            }
            prefix.push(iv.clone());
        }
        out
    }
}

/// A finite union of bands.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandSet {
    bands: Vec<Band>,
}

impl BandSet {
    /// The empty set.
    pub fn empty() -> Self {
        BandSet::default()
    }

    /// All ordinals.
    pub fn all() -> Self {
        BandSet::from_band(Band::all())
    }

    /// The closed interval `[lo, hi]`.
    pub fn interval(lo: Ordinal, hi: Ordinal) -> Self {
        BandSet::from_band(Band::closed(lo, hi))
    }

    /// The singleton `{x}`.
    pub fn point(x: Ordinal) -> Self {
        BandSet::interval(x.clone(), x)
    }

    /// A one-band set; empty bands are dropped.
    pub fn from_band(b: Band) -> Self {
        BandSet::from_bands(vec![b])
    }

    /// Union of the given bands, with empty and subsumed bands removed.
    pub fn from_bands(bands: Vec<Band>) -> Self {
        let mut keep: Vec<Band> = Vec::with_capacity(bands.len());
        for b in bands {
            if b.is_empty() || keep.iter().any(|k| b.within(k)) {
                continue;
            }
            keep.retain(|k| !k.within(&b));
            keep.push(b);
        }
        BandSet { bands: keep }
    }

    /// The constituent bands.
    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Membership.
    pub fn member(&self, x: &Ordinal) -> bool {
        self.bands.iter().any(|b| b.contains(x))
    }

    /// True if the set has no member.
    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// Least member, if any.
    pub fn min_witness(&self) -> Option<Ordinal> {
        self.bands
            .iter()
            .filter_map(|b| b.least_ge(&Ordinal::zero()))
            .min()
    }

    /// Least member at or above `s`.
    pub fn least_ge(&self, s: &Ordinal) -> Option<Ordinal> {
        self.bands.iter().filter_map(|b| b.least_ge(s)).min()
    }

    /// Union.
    pub fn union(&self, o: &BandSet) -> BandSet {
        let mut v = self.bands.clone();
        v.extend(o.bands.iter().cloned());
        BandSet::from_bands(v)
    }

    /// Intersection.
    pub fn intersect(&self, o: &BandSet) -> BandSet {
        let mut v = Vec::new();
        for a in &self.bands {
            for b in &o.bands {
                v.push(a.meet(b));
            }
        }
        BandSet::from_bands(v)
    }

    /// Complement in the class of all ordinals.
    pub fn complement(&self) -> BandSet {
        let mut acc = BandSet::all();
        for b in &self.bands {
            acc = acc.intersect(&BandSet::from_bands(b.complement()));
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Complement within the closed interval `[lo, hi]`.
    pub fn complement_within(&self, lo: &Ordinal, hi: &Ordinal) -> BandSet {
        BandSet::interval(lo.clone(), hi.clone()).intersect(&self.complement())
    }

    /// `self \ o`.
    pub fn minus(&self, o: &BandSet) -> BandSet {
        self.intersect(&o.complement())
    }

    /// Extensional inclusion.
    pub fn is_subset(&self, o: &BandSet) -> bool {
        self.minus(o).is_empty()
    }

    /// Extensional equality.
    pub fn set_eq(&self, o: &BandSet) -> bool {
        self.is_subset(o) && o.is_subset(self)
    }

    /// Maps each band through `f` and collects the union.
    pub(crate) fn map_bands(&self, f: impl Fn(&Band) -> Option<Band>) -> BandSet {
        BandSet::from_bands(self.bands.iter().filter_map(f).collect())
    }
}

/// Value of `ℓ^k x` with `ℓ(0) = 0`.
pub fn ell_level(k: usize, x: &Ordinal) -> Ordinal {
    ell_iter_n(k as u64, x)
}

fn fmt_interval(f: &mut fmt::Formatter<'_>, iv: &Interval) -> fmt::Result {
    match iv.lo.pred() {
        Some(p) => write!(f, "({p},")?,
        None if iv.lo.is_zero() => f.write_str("(-1,")?,
        None => write!(f, "[{},", iv.lo)?,
    }
    match &iv.hi {
        None => f.write_str("inf)"),
        Some(h) => match h.pred() {
            Some(p) => write!(f, "{p}]"),
            None => write!(f, "{h})"),
        },
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l0 = self.level(0);
        write!(f, "[{},", l0.lo)?;
        match &l0.hi {
            None => f.write_str("inf)")?,
            Some(h) => match h.pred() {
                Some(p) => write!(f, "{p}]")?,
                None => write!(f, "{h})")?,
            },
        }
        for (k, iv) in self.levels.iter().enumerate().skip(1) {
            if iv.is_full() {
                continue;
            }
            write!(f, " & l^{k} in ")?;
            fmt_interval(f, iv)?;
        }
        Ok(())
    }
}

impl fmt::Display for BandSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bands.is_empty() {
            return f.write_str("empty");
        }
        for (i, b) in self.bands.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

struct BandParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> BandParser<'a> {
    fn err(&self, msg: &'static str) -> TopologyError {
        TopologyError::Syntax { pos: self.pos, msg }
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

    fn ordinal(&mut self) -> Result<Ordinal, TopologyError> {
        let mut p = Parser::at(self.src, self.pos);
        let v = p.expr().map_err(|e| match e {
            crate::ordinal::OrdinalError::Syntax { pos, msg } => TopologyError::Syntax { pos, msg },
            e => TopologyError::Ordinal(e),
        })?;
        self.pos = p.pos;
        Ok(v)
    }

    // Lower end: `[a` means a ≤ v, `(c` means c < v; `-1` allowed after `(`.
    fn lower(&mut self) -> Result<Ordinal, TopologyError> {
        if self.eat("[") {
            return self.ordinal();
        }
        if !self.eat("(") {
            return Err(self.err("expected '[' or '('"));
        }
        if self.eat("-1") {
            return Ok(Ordinal::zero());
        }
        Ok(self.ordinal()?.succ())
    }

    fn upper(&mut self) -> Result<Option<Ordinal>, TopologyError> {
        if !self.eat(",") {
            return Err(self.err("expected ','"));
        }
        let v = if self.eat("inf") {
            None
        } else {
            Some(self.ordinal()?)
        };
        if self.eat("]") {
            Ok(v.map(|v| v.succ()))
        } else if self.eat(")") {
            Ok(v)
        } else {
            Err(self.err("expected ']' or ')'"))
        }
    }

    fn interval(&mut self) -> Result<Interval, TopologyError> {
        let lo = self.lower()?;
        let hi = self.upper()?;
        Ok(Interval { lo, hi })
    }

    fn band(&mut self) -> Result<Band, TopologyError> {
        let mut b = Band::from_levels(vec![self.interval()?]);
        while self.eat("&") {
            if !self.eat("l^") {
                return Err(self.err("expected 'l^'"));
            }
            let start = self.pos;
            let k = self.ordinal()?;
            let Some(k) = k.to_u64() else {
                self.pos = start;
                return Err(TopologyError::UnsupportedLevel);
            };
            if !self.eat("in") {
                return Err(self.err("expected 'in'"));
            }
            let iv = self.interval()?;
            b = b.with(k as usize, iv);
        }
        Ok(b)
    }
}

/// Parses `;`-separated bands such as `[1,w^2] & l^1 in (0,1]`; `empty`
/// denotes the empty set.
pub fn parse_bandset(src: &str) -> Result<BandSet, TopologyError> {
    let mut p = BandParser { src, pos: 0 };
    if p.eat("empty") {
        p.ws();
        if p.pos != src.len() {
            return Err(p.err("trailing input"));
        }
        return Ok(BandSet::empty());
    }
    let mut bands = vec![p.band()?];
    while p.eat(";") {
        bands.push(p.band()?);
    }
    p.ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(BandSet::from_bands(bands))
}

impl core::str::FromStr for BandSet {
    type Err = TopologyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bandset(s)
    }
}
