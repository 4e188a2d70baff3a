//! Least-element solver for chains of hyperlogarithm constraints.

use crate::ordinal::{omega_pow_capped, Ordinal};

use super::band::Interval;

/// True if `ℓ^k x ∈ levels[k]` for every `k`.
pub fn holds(x: &Ordinal, levels: &[Interval]) -> bool {
    let mut v = x.clone();
    for (k, iv) in levels.iter().enumerate() {
        if k > 0 {
            v = v.ell_or_zero();
        }
        if !iv.contains(&v) {
            return false;
        }
    }
    true
}

/// Least `x ≥ s` with `ℓ^k x ∈ levels[k]` for all `k`.
///
/// If `s` itself fails, the least candidate above it has the least admissible
/// end-logarithm `m`, and is `s + ω^m`.
pub fn least_ge(s: &Ordinal, levels: &[Interval]) -> Option<Ordinal> {
    let Some((first, rest)) = levels.split_first() else {
        return Some(s.clone());
    };
    if first.is_void() {
        return None;
    }
    let s1 = if *s < first.lo { first.lo.clone() } else { s.clone() };
    if first.hi.as_ref().is_some_and(|h| s1 >= *h) {
        return None;
    }
    if holds(&s1, levels) {
        return Some(s1);
    }
    let m = least_ge(&Ordinal::zero(), rest)?;
    let x = s1.add(&omega_pow_capped(&m, usize::MAX).ok()?);
    match &first.hi {
        Some(h) if x >= *h => None,
        _ => Some(x),
    }
}
