//! Truncated multicomponent free fermions and tau-functions as vacuum
//! expectation values `<p + e_a - e_b| exp(J(t)) g |p>`.

mod clifford;
mod state;
mod tau;

pub use clifford::{apply_clifford, CliffordFactor, CliffordSpec};
pub use state::{apply_current, apply_exp_j, apply_fermion, FermionKind, FockState, FockVector, ModeWindow};
pub use tau::{window_stability_check, ChargeVector, FockSpace, TauTable};
