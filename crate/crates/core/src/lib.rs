//! Computational checks for the five-dimensional MD Lie algebras: coadjoint
//! orbits, the foliations they generate, and the K-theoretic index invariants
//! of the associated leaf-space algebras.

pub mod abk;
pub mod chern;
pub mod coadjoint;
pub mod expm;
pub mod foliation;
pub mod lie;
pub mod linalg;
