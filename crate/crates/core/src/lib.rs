//! Rank of appearance in Lucas sequences.
//!
//! Exact and modular evaluation of `U_n(a, b)` and `V_n(a, b)`, p-adic
//! valuation formulas, gcd identities, several independent routes to
//! `tau(m)`, closed forms for the rank of products of Lucas terms, and a
//! verifier that sweeps the closed forms against brute-force oracles.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod gcd_identities;
pub mod lucas;
pub mod rank;
mod serde_big;
pub mod valuation;
pub mod verifier;

pub use closed_form::{ClosedFormResult, FormulaCase, Theorem};
pub use error::{Error, Result};
pub use lucas::{make_params, u_exact, uv_mod, v_exact, LucasParams, SequenceValue};
pub use rank::{tau, tau_min_divisor_oracle, tau_scan, TauMethod, TauResult};
