//! Evaluation-order polymorphism: the impartial and economical source type
//! systems, elaboration into an explicit call-by-value target language, both
//! operational semantics, and a harness that checks their metatheory.

pub mod concrete;
pub mod context;
pub mod derivation;
pub mod error;
pub mod expr;
pub mod names;
pub mod machine;
pub mod target;
pub mod types;
pub mod wellformed;
pub mod impartial;
pub mod econ;
pub mod economize;
pub mod typed;
pub mod target_check;
pub mod elaborate;
pub mod check_elab;
pub mod source_semantics;
pub mod verify;
