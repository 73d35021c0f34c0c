//! Worked examples, class oracles and closure checks on bounded universes.

mod closure;
mod experiments;
mod gallery;
mod joint;
mod oracle;
mod sim;

pub use closure::{hom_closure_check, one_step_images, ClosureReport, Direction};
pub use experiments::{
    is_acyclic, run_experiment, tournaments, used_relations, ExperimentReport, ReportRow, EXPERIMENTS,
};
pub use gallery::{
    acyclicity_sentence, complement_example_program, crb_program, digraph, digraph_signature,
    edge_program, gallery, loop_program, path, path_signature, template, unary_csp_oracle, unary_point,
    unary_signature, Artifact, GALLERY_NAMES,
};
pub use joint::{joint_hom_check, JointReport};
pub use oracle::ClassOracle;
pub use sim::{sim_partition, SimPartition};
