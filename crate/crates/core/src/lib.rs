//! A workbench for relative interpretations between first-order theories:
//! syntax-directed formula translation under multi-dimensional quotient
//! schemes, the induced model functors on finite structures, orbit-based
//! definability oracles, a bounded tableau prover with countermodel search,
//! and the finite combinatorics of a pair-of-Cohen-sets forcing poset.

pub mod forcing;
pub mod interp;
pub mod io;
pub mod logic;
pub mod orbits;
pub mod prover;
pub mod report;
pub mod structures;
pub mod toys;
