//! Exact arithmetic for level-1 modular forms: q-expansions, Hecke operators,
//! Ramanujan-type congruences, subgroup counts in rank-two abelian groups, and
//! certificates for irreducibility and symmetric Galois groups of Hecke
//! characteristic polynomials.

pub mod arith;
pub mod galois;
pub mod hecke;
pub mod maeda;
pub mod modforms;
pub mod qseries;
pub mod subgroups;
