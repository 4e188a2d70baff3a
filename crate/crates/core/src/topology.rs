//! Definable subsets of ordinal intervals and the Icard topologies on them.
//!
//! [`BandSet`] is the general algebra: finite unions of bands, each a chain of
//! interval constraints on `x, ℓx, ℓ²x, …`. [`DigitSet`] is a finer algebra
//! for spaces below `ω^{N+1}` with `N` finite, where points are digit vectors.

mod band;
mod derived;
mod digits;
mod solver;

pub use band::{ell_level, parse_bandset, Band, BandSet, Interval};
pub use derived::{
    derived_iter, derived_set, is_open, member_of_derived, rank, separating_nbhd,
};
pub use digits::{digits, DigitBox, DigitIn, DigitSet, NatSet};
pub use solver::least_ge;

use crate::ordinal::{Ordinal, OrdinalError};

/// Errors raised by topology operations.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    /// An infinite Icard level or constraint level.
    #[error("unsupported (infinite) level")]
    UnsupportedLevel,
    /// A transfinite derived-set iteration did not reach a fixed point.
    #[error("derived-set iteration does not stabilize")]
    NonStabilizing,
    /// Malformed band text.
    #[error("syntax error at {pos}: {msg}")]
    Syntax {
        /// Byte offset.
        pos: usize,
        /// Description.
        msg: &'static str,
    },
    /// A point outside the algebra's carrier.
    #[error("ordinal outside the carrier")]
    OutOfCarrier,
    /// Ordinal arithmetic failure.
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
}

/// An Icard level `λ`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LevelSpec {
    /// The level.
    pub lambda: Ordinal,
}

impl LevelSpec {
    /// A finite level.
    pub fn new(lambda: u64) -> Self {
        LevelSpec {
            lambda: Ordinal::from_u64(lambda),
        }
    }

    /// The level as a machine integer.
    pub fn finite(&self) -> Result<usize, TopologyError> {
        self.lambda
            .to_u64()
            .and_then(|v| usize::try_from(v).ok())
            .ok_or(TopologyError::UnsupportedLevel)
    }
}

impl From<u64> for LevelSpec {
    fn from(v: u64) -> Self {
        LevelSpec::new(v)
    }
}

/// A closed ordinal interval `[lo, hi]` serving as the ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Domain {
    /// Least point.
    pub lo: Ordinal,
    /// Greatest point.
    pub hi: Ordinal,
}

impl Domain {
    /// `[lo, hi]`.
    pub fn new(lo: Ordinal, hi: Ordinal) -> Self {
        Domain { lo, hi }
    }

    /// `[1, theta]`.
    pub fn upto(theta: Ordinal) -> Self {
        Domain::new(Ordinal::one(), theta)
    }

    /// The domain as a band set.
    pub fn to_bandset(&self) -> BandSet {
        BandSet::interval(self.lo.clone(), self.hi.clone())
    }

    /// Membership.
    pub fn contains(&self, x: &Ordinal) -> bool {
        *x >= self.lo && *x <= self.hi
    }
}

/// A Boolean algebra of subsets of a fixed domain, closed under the derived
/// set operators of the Icard topologies.
pub trait SetAlgebra: Clone {
    /// The empty set.
    fn empty_like(&self) -> Self;
    /// The whole domain.
    fn full(&self) -> Self;
    /// Union.
    fn union(&self, o: &Self) -> Self;
    /// Intersection.
    fn intersect(&self, o: &Self) -> Self;
    /// Complement within the domain.
    fn complement(&self) -> Self;
    /// `d_{I_λ}` within the domain.
    fn derived(&self, lambda: usize) -> Result<Self, TopologyError>;
    /// Emptiness.
    fn is_empty(&self) -> bool;
    /// Membership.
    fn contains(&self, x: &Ordinal) -> bool;
}

/// A [`BandSet`] bound to a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandIn {
    /// The set, always inside `domain`.
    pub set: BandSet,
    /// The ambient domain.
    pub domain: Domain,
}

impl BandIn {
    /// Restricts `set` to `domain`.
    pub fn new(set: BandSet, domain: Domain) -> Self {
        let set = set.intersect(&domain.to_bandset());
        BandIn { set, domain }
    }

    fn with(&self, set: BandSet) -> Self {
        BandIn {
            set,
            domain: self.domain.clone(),
        }
    }
}

impl SetAlgebra for BandIn {
    fn empty_like(&self) -> Self {
        self.with(BandSet::empty())
    }
    fn full(&self) -> Self {
        self.with(self.domain.to_bandset())
    }
    fn union(&self, o: &Self) -> Self {
        self.with(self.set.union(&o.set))
    }
    fn intersect(&self, o: &Self) -> Self {
        self.with(self.set.intersect(&o.set))
    }
    fn complement(&self) -> Self {
        self.with(self.set.complement_within(&self.domain.lo, &self.domain.hi))
    }
    fn derived(&self, lambda: usize) -> Result<Self, TopologyError> {
        Ok(self.with(derived_set(&self.set, &LevelSpec::new(lambda as u64), &self.domain)?))
    }
    fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
    fn contains(&self, x: &Ordinal) -> bool {
        self.set.member(x)
    }
}
