//! Random coding error exponents, in bits.
//!
//! * [`er_mismatch_dual`]: the exponent of a linear code whose encoder only
//!   uses a constant-composition subcode while the decoder ranks the whole
//!   code with an additive metric `U`.
//! * [`er_cc_dual`] / [`er_cc_primal`]: the constant-composition exponent in
//!   its output-distribution form and its conditional-distribution form.
//! * [`er_mismatch_primal_oracle`]: nested grid search of the type-class
//!   expression behind the mismatched exponent, for tiny alphabets.
//! * [`map_capacity_gap`]: the divergence that decides whether a metric
//!   achieves `I(X;Y)`.

mod bfgs;
mod cc;
mod mismatch;
mod oracle;
mod rate;

use serde::Serialize;

pub use cc::{cc_dual_objective, cc_min_over_v, er_cc_dual, er_cc_primal, CcInner};
pub use mismatch::{
    er_mismatch_dual, map_capacity_gap, MismatchObjective, ThetaOptimum, THETA_GRID_MAX, THETA_GRID_MIN,
    THETA_GRID_POINTS,
};
pub use oracle::{er_mismatch_primal_oracle, ORACLE_WORK_CAP};
pub use rate::RatePoint;

/// Seed grid size for every search over `rho` in `[0, 1]`.
pub const RHO_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub iterations: usize,
    /// Solver-specific certificate: the final bracket width for dual searches,
    /// the max-min duality gap for [`er_cc_dual`], the restart spread for
    /// [`er_cc_primal`], the grid step for the oracle.
    pub objective_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentResult {
    pub value_bits: f64,
    pub rho_star: f64,
    pub theta_star: Option<f64>,
    /// The supremum over `theta` was approached at the top of the search range.
    pub theta_at_boundary: bool,
    /// Minimizing output distribution `V` (dual constant-composition form).
    pub output_dist: Option<Vec<f64>>,
    /// Minimizing `Q_{Y|X}`, x-major (primal forms).
    pub conditional: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl ExponentResult {
    pub(crate) fn scalar(value_bits: f64, rho_star: f64) -> Self {
        Self {
            value_bits,
            rho_star,
            theta_star: None,
            theta_at_boundary: false,
            output_dist: None,
            conditional: None,
            diagnostics: Diagnostics::default(),
        }
    }
}

pub(crate) const LN2: f64 = std::f64::consts::LN_2;

/// `ln sum_i exp(v_i)` skipping `-inf` terms.
#[inline]
pub(crate) fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top == f64::INFINITY {
        return top;
    }
    top + v.map(|t| (t - top).exp()).sum::<f64>().ln()
}
