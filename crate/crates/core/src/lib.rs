//! Query computation for sequential model-based diagnosis.
//!
//! Given a set of leading diagnoses, the engine searches canonical
//! q-partitions for one that optimizes a query selection measure, reduces
//! its canonical query to a cost-optimal minimal hitting set of traits, and
//! can optionally expand and re-minimize the query with a reasoner. The
//! first two phases never call the reasoner.
#![no_std]
extern crate alloc;

pub mod bits;
pub mod logic;
pub mod diagnosis;
pub mod dpi;
pub mod minimize;
pub mod measures;
pub mod p1;
pub mod p2;
pub mod p3;
pub mod qspace;
pub mod random;
pub mod session;
