//! The metatheory as executable checks: N-freeness, enumeration of small
//! well-typed programs, and a harness that runs each property on a program
//! and reports a verdict.

pub mod consistency;
pub mod enumerate;
pub mod freeness;
pub mod harness;
pub mod suite;

pub use enumerate::{enumerate_welltyped, type_menu, Enumerated};
pub use freeness::{n_free_econ_judgment, n_free_econ_type, n_free_impartial_judgment, n_free_impartial_type, n_free_target};
pub use consistency::{inversion_holds, run_consistency, ConsistencyReport, MatchedStep, SimulationStep, DEFAULT_DEPTH};
pub use harness::{
    check_econ_n_freeness, check_elab_n_freeness, check_elaboration_soundness, check_economizing, check_endpoint,
    check_target_safety, CheckRecord, Verdict,
};
pub use suite::{check_enumeration, check_subject, consistency_record, with_deep_stack, Limits, Subject, DEEP_STACK};
