//! Regular and coherent theories: parsing and normalization, diagrams with
//! equality as a congruence, the chase, dynamical-cover proof search with
//! checkable certificates, Morleyization, fallible forcing, and a
//! brute-force finite-model oracle.

pub mod chase;
pub mod cover;
pub mod diagram;
pub mod morley;
pub mod oracle;
pub mod semantics;
pub mod syntax;

pub use chase::{chase_regular, chase_with, ChaseResult, ChaseStatus, Program};
pub use cover::{check_certificates, prove, Verdict};
pub use diagram::{Diagram, ElementId};
pub use morley::{morleyize, MorleyTheory, Target};
pub use syntax::{parse_formula_in_context, parse_sequent, parse_theory, Context, Formula, Sequent, Signature, Sym, Theory};
