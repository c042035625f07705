//! Exact-arithmetic workbench for twisted quantum double lattice models on
//! closed and open surfaces.

pub mod cohomology;
pub mod group;
pub mod lattice;
pub mod phase;
pub mod snf;
pub mod spec;
pub mod region;
pub mod operators;
pub mod groundstate;
pub mod lto;
