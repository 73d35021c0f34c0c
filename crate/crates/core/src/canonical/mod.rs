//! The canonical Datalog program for the complement of `CSP(B)`: evaluated
//! by (l,k)-consistency propagation, or materialized as a rule set.

mod eval;
mod soundness;
mod synth;

pub use eval::{canonical_eval, consistency_state, ConsistencyState};
pub use soundness::soundness_check;
pub use synth::{idb_name, synthesize_canonical, CanonicalProgram, DEFAULT_SYNTHESIS_BUDGET};
