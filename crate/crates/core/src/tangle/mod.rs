//! Tangle diagrams and their `R`-matrix evaluation.
//!
//! A link is cut open into a (1,1)-tangle, sliced into elementary events and
//! contracted with the `N`-dimensional `R`-matrix. After removing the framing
//! dependence the result is the Kashaev invariant `⟨L⟩_N`, which serves as
//! the independent oracle for every closed-form state sum in
//! [`crate::statesum`].

mod builtin;
mod diagram;
mod eval;

pub use builtin::{braid_closure, braid_word, builtin_diagram};
pub use diagram::{CrossingSign, DiagramProfile, Event, Orientation, TangleDiagram};
pub use eval::{
    evaluate_tangle, evaluate_tangle_raw, evaluate_tangle_split, r_matrix_entry,
    DEFAULT_COST_BUDGET,
};
