//! Quantum receivers for coherent-state communication.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fock;
pub mod linalg;
pub mod numerics;
pub mod gaussian;
pub mod povm;
pub mod qubit_disc;
pub mod receivers;
pub mod info;
pub mod hadamard;
