//! Finite miniature models for experimenting with standard systems of
//! nonstandard models of arithmetic.
//!
//! The domain `{0, …, 2^a − 1}` stands in for a nonstandard model, bit
//! extraction `(c)_i` for coding subsets of ω, and exact realization counts
//! for the density certificates that make conditions of the forcing poset.
//! On top of that sit the type-building loop over finite trees
//! ([`ehrenfeucht`]) and the descending-sequence builder for the condition
//! poset ([`generic`]).

pub mod binary;
pub mod count;
pub mod density;
pub mod ehrenfeucht;
pub mod error;
pub mod formula;
pub mod generic;
pub mod model;
pub mod poset;

pub use binary::BinaryString;
pub use count::{Counter, CounterRegistry};
pub use density::Density;
pub use error::{Error, Result, SyntaxError};
pub use formula::{Assignment, Formula, Rel, Term};
pub use model::{CodedPrefix, MiniModel};
pub use poset::{Condition, Lab, RefinementCertificate};
