//! Ordinal arithmetic, Icard topologies on ordinals and countermodel
//! construction for the polymodal provability logic GLP.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]
#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

extern crate alloc;

pub mod ordinal;
pub mod topology;
pub mod logic;
pub mod jtree;
pub mod embed;
