//! Datalog fixed points, existential pebble games, canonical programs and
//! MSO/GSO model checking on small finite structures.

pub mod canonical;
pub mod datalog;
pub mod error;
pub mod lab;
pub mod logic;
pub mod pebble;
pub mod structure;

pub use canonical::{canonical_eval, synthesize_canonical, CanonicalProgram};
pub use datalog::{derives_goal, least_fixed_point, DatalogProgram, Evaluator, Width};
pub use error::{Budget, Error, Position, Result};
pub use logic::{eval_formula, Formula, SemanticsMode};
pub use pebble::{spoiler_wins, PartialHom, StrategyFamily};
pub use structure::{
    Elem, Homomorphism, Signature, Structure, StructureBuilder, Tuple, DEFAULT_ENUMERATION_BUDGET,
};
