//! Rotated-surface-code algebra.

mod bits;
mod lattice;
mod pauli;
mod pure_error;

pub use bits::BitRow;
pub use lattice::{Check, CheckGraph, CheckType, HomologyLabel, RscCode, ShortestPaths};
pub use pauli::{Pauli, PauliOperator};
pub use pure_error::{PureErrorTable, PureErrorTables};
