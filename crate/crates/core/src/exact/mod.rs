//! Exact evaluation of the percolation probability and its bounds.
//!
//! The percolation probability is `(1 + sum_{n>=1} S_n)^{-1}` with
//! `S_n = E prod_{i<n} alpha_i^{xi_{i+1}}`, which is also the survival function
//! `P(T_Y > n)` of the inter-arrival time of the dual (reverse firework)
//! renewal process. Everything here evaluates `S_n` or bounds it from either
//! side.

mod bounds;
mod bracket;
mod classify;
mod connectivity;
mod gf;

pub use bounds::{
    bounds_report, concentration_terms, fkg_terms, fkg_upper, iid_terms, jensen_terms,
    BoundsReport, ConcentrationTerms,
};
pub use bracket::{
    extrapolate_tail, iid_closed_form, percolation_probability, percolation_probability_with,
    BracketOptions, PercolationBracket, TailMethod, SECONDARY_HORIZON_FACTOR,
};
pub use classify::{classify, Diagnosis, Verdict};
pub use connectivity::forward_connectivity;
pub use gf::{dual_law, dual_law_to, gf_partial, DualLaw, GfTable};
