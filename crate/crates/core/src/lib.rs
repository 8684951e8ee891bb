//! Combinatorics of twin buildings over finite Coxeter-indexed chamber sets.
//!
//! The crate is organized bottom-up: Coxeter word arithmetic (`coxeter`),
//! Weyl-distance buildings (`building`), abstract chamber systems and
//! galleries (`chamsys`), twin structures with codistance (`twin`),
//! retractions onto twin apartments (`retract`), and local isometries with
//! gallery transport and the extension pipeline (`isom`).
//!
//! Everything is exact integer combinatorics over `alloc` collections; the
//! crate is `no_std` and keeps all constructions deterministic so that
//! independently built objects are bit-for-bit reproducible.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod building;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod chamsys;
pub mod coxeter;
pub mod isom;
pub mod retract;
pub mod twin;
