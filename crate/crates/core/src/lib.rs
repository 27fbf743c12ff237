//! Oriented interval percolation on the half-line driven by a renewal
//! sequence of marks.
//!
//! Site `i` is marked when `xi_i = 1`, where `xi` is the zero set of a
//! house-of-cards chain with continuation probabilities `q_i`. A marked site
//! opens the interval `{i + 1, ..., i + R_i}` with i.i.d. radii of law
//! `alpha_n = P(R <= n)`. The crate evaluates
//! `P(A) = (1 + sum_{n>=1} E prod_{i<n} alpha_i^{xi_{i+1}})^{-1}` with a
//! certified bracket, closed-form bounds, finite-horizon phase diagnostics,
//! exhaustive oracles and seeded Monte Carlo.
//!
//! All numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the precision.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exact;
pub mod oracle;
pub mod radius;
pub mod renewal;
mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use exact::{
    bounds_report, classify, dual_law, dual_law_to, forward_connectivity, gf_partial,
    iid_closed_form, percolation_probability, percolation_probability_with, BoundsReport,
    BracketOptions, Diagnosis, DualLaw, GfTable, PercolationBracket, TailMethod, Verdict,
};
pub use oracle::{enumerate_connectivity, enumerate_dual, enumerate_gf, TinyConfig};
pub use radius::{
    criterion_ratio, tail_sum, Radius, RadiusFamily, RadiusModel, TailDiagnosis, TailSum,
};
pub use renewal::{
    ck_sequence, interarrival, markov_renewal_closed, mean_interarrival, renewal_probabilities,
    sample_path, BinaryPath, CkSequence, InterArrivalSummary, QFamily, QSequence, RenewalProbTable,
};
pub use scalar::Scalar;
pub use sim::{simulate_connectivity, simulate_coupling, simulate_dual, CouplingReport, SimReport};

pub type QSequence64 = QSequence<f64>;
pub type QSequence32 = QSequence<f32>;
pub type RadiusModel64 = RadiusModel<f64>;
pub type RadiusModel32 = RadiusModel<f32>;
pub type GfTable64 = GfTable<f64>;
pub type GfTable32 = GfTable<f32>;
pub type DualLaw64 = DualLaw<f64>;
pub type DualLaw32 = DualLaw<f32>;
pub type PercolationBracket64 = PercolationBracket<f64>;
pub type PercolationBracket32 = PercolationBracket<f32>;
pub type BoundsReport64 = BoundsReport<f64>;
pub type BoundsReport32 = BoundsReport<f32>;
pub type Diagnosis64 = Diagnosis<f64>;
pub type Diagnosis32 = Diagnosis<f32>;
pub type TinyConfig64 = TinyConfig<f64>;
pub type TinyConfig32 = TinyConfig<f32>;
