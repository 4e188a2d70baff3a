//! Derived sets, openness and ranks for the Icard topologies `I_λ`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::ordinal::{ell_iter, Ordinal};

use super::band::{ell_level, Band, BandSet, Interval};
use super::{Domain, LevelSpec, TopologyError};

/// `ℓ^λ x`, the rank of `x` in `I_λ` for `λ ≥ 1`.
pub fn rank(x: &Ordinal, level: &LevelSpec) -> Ordinal {
    ell_iter(&level.lambda, x)
}

/// `d_{I_λ}` of a single band, as a single band.
pub(crate) fn derived_band(b: &Band, lambda: usize) -> Option<Band> {
    if lambda == 0 {
        let m = b.least_ge(&Ordinal::zero())?;
        return Some(Band::half_open(m.succ(), None));
    }
    let inner = derived_band(&b.shift_down(), lambda - 1)?;
    let mut levels = Vec::with_capacity(inner.levels().len() + 1);
    levels.push(b.level(0).shift_succ());
    levels.extend(inner.levels().iter().cloned());
    Some(Band::from_levels(levels))
}

/// `⋂_{n ≥ 1} d^n` of a single band.
pub(crate) fn omega_stage_band(b: &Band, lambda: usize) -> Option<Band> {
    derived_band(b, lambda)?;
    if lambda == 0 {
        let m = b.least_ge(&Ordinal::zero())?;
        return Some(Band::half_open(omega_sup(&m), None));
    }
    let mut levels = Vec::with_capacity(lambda + 1);
    for k in 0..lambda {
        let iv = b.level(k);
        levels.push(Interval::half_open(
            omega_sup(&iv.lo),
            iv.hi.as_ref().map(|h| h.succ()),
        ));
    }
    let deep = Band::from_levels(b.levels().iter().skip(lambda).cloned().collect());
    let m = deep.least_ge(&Ordinal::zero())?;
    levels.push(Interval::half_open(omega_sup(&m), None));
    Some(Band::from_levels(levels))
}

/// `sup_n (a + n)`.
fn omega_sup(a: &Ordinal) -> Ordinal {
    a.div_part(&Ordinal::one()).add(&Ordinal::omega())
}

/// The derived set `d_{I_λ}(s)` within `domain`.
pub fn derived_set(s: &BandSet, level: &LevelSpec, domain: &Domain) -> Result<BandSet, TopologyError> {
    let lambda = level.finite()?;
    let s = s.intersect(&domain.to_bandset());
    Ok(s
        .map_bands(|b| derived_band(b, lambda))
        .intersect(&domain.to_bandset()))
}

/// `d^α_{I_λ}(s)` within `domain`. Limit stages use the closed form of
/// `⋂_n d^n` on each band; for `α ≥ ω²` the iteration must reach ∅ within
/// a bounded number of limit stages.
pub fn derived_iter(
    s: &BandSet,
    level: &LevelSpec,
    alpha: &Ordinal,
    domain: &Domain,
) -> Result<BandSet, TopologyError> {
    const MAX_LIMIT_STAGES: u64 = 64;
    let lambda = level.finite()?;
    let dom = domain.to_bandset();
    let mut cur = s.intersect(&dom);
    let stages = alpha.div_omega().to_u64();
    let mut done = 0u64;
    while stages.is_none_or(|q| done < q) && !cur.is_empty() {
        if stages.is_none() && done >= MAX_LIMIT_STAGES {
            return Err(TopologyError::NonStabilizing);
        }
        cur = cur
            .intersect(&cur.map_bands(|b| omega_stage_band(b, lambda)))
            .intersect(&dom);
        done += 1;
    }
    let mut n = alpha.finite_part();
    while !n.is_zero() && !cur.is_empty() {
        cur = cur.map_bands(|b| derived_band(b, lambda)).intersect(&dom);
        n -= 1u32;
    }
    Ok(cur)
}

/// True if every member of `s` is `I_λ`-interior to `s` within `domain`.
pub fn is_open(s: &BandSet, level: &LevelSpec, domain: &Domain) -> Result<bool, TopologyError> {
    let dom = domain.to_bandset();
    let s = s.intersect(&dom);
    let rest = dom.minus(&s);
    Ok(derived_set(&rest, level, domain)?.intersect(&s).is_empty())
}

/// The largest threshold below `v` among `-1`, the band endpoints, their
/// predecessors and the CNF prefix of `v`.
fn best_threshold(v: &Ordinal, iv: &Interval) -> Option<Ordinal> {
    let mut best: Option<Ordinal> = None;
    let mut offer = |c: Ordinal| {
        if c < *v && best.as_ref().is_none_or(|b| c > *b) {
            best = Some(c);
        }
    };
    if !v.is_zero() {
        offer(v.prefix());
    }
    for e in [Some(iv.lo.clone()), iv.hi.clone()].into_iter().flatten() {
        if let Some(p) = e.pred() {
            offer(p);
        }
        offer(e);
    }
    best
}

/// Pointwise decision of `x ∈ d_{I_λ}(s)`, independent of [`derived_set`].
pub fn member_of_derived(x: &Ordinal, s: &BandSet, level: &LevelSpec) -> Result<bool, TopologyError> {
    let lambda = level.finite()?;
    if x.is_zero() {
        return Ok(false);
    }
    for b in s.bands() {
        if lambda == 0 {
            if b.least_ge(&Ordinal::zero()).is_some_and(|m| m < *x) {
                return Ok(true);
            }
            continue;
        }
        let mut levels = Vec::with_capacity(lambda.max(b.levels().len()));
        for j in 0..lambda.max(b.levels().len()) {
            let iv = b.level(j);
            if j >= lambda {
                levels.push(iv);
                continue;
            }
            let v = ell_level(j, x);
            let lo = match best_threshold(&v, &iv) {
                Some(c) => c.succ(),
                None => Ordinal::zero(),
            };
            let top = if j == 0 { v } else { v.succ() };
            levels.push(iv.meet(&Interval::half_open(lo, Some(top))));
        }
        if Band::from_levels(levels).least_ge(&Ordinal::zero()).is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// An `I_λ`-open band around `x` whose other points all have smaller rank.
pub fn separating_nbhd(x: &Ordinal, level: &LevelSpec, domain: &Domain) -> Result<BandSet, TopologyError> {
    let lambda = level.finite()?;
    let mut levels = Vec::with_capacity(lambda.max(1));
    if lambda == 0 {
        levels.push(Interval::closed(Ordinal::zero(), x.clone()));
    }
    for j in 0..lambda {
        let v = ell_level(j, x);
        let lo = if v.is_zero() { Ordinal::zero() } else { v.prefix().succ() };
        levels.push(Interval::half_open(lo, Some(v.succ())));
    }
    Ok(BandSet::from_band(Band::from_levels(levels)).intersect(&domain.to_bandset()))
}
