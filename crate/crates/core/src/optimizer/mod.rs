//! The decoding metric that lets a linear code decoded over the full code
//! reach the constant-composition exponent: the fixed point `Z_rho`, the
//! metric `U(x|y, rho)` built on it, the choice of `rho`, and a check of
//! the conditions under which the bound chain is tight.

mod fixed_point;
mod saturation;

use serde::Serialize;

pub use fixed_point::{build_metric, solve_fixed_point, solve_fixed_point_with, FixedPoint, FixedPointOptions};
pub use saturation::{verify_saturation, SaturationReport, JENSEN_SPREAD_LIMIT, POSTERIOR_FORM_LIMIT, ZETA_V_LIMIT};

use crate::dmc::{map_metric, DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::exponent::{er_cc_dual, er_mismatch_dual, MismatchObjective, RatePoint};
use crate::search::{grid_then_golden, linspace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub rho_grid_points: usize,
    /// Final golden-section bracket width for `rho_*`.
    pub rho_width: f64,
    /// Largest tolerated `|achieved - E_cc|` before reporting failure.
    pub saturation_limit: f64,
    pub fixed_point: FixedPointOptions,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            rho_grid_points: 21,
            rho_width: 1e-4,
            saturation_limit: 1e-4,
            fixed_point: FixedPointOptions::default(),
        }
    }
}

/// One evaluation of the `rho` search: `sup_theta` of the exponent objective
/// at `rho` for the metric `U(.|., rho)`. `None` when the fixed point failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchPoint {
    pub rho: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalMetric {
    pub rho_star: f64,
    pub metric: DecodingMetric,
    /// `E_r(R, U_*)` in bits.
    pub achieved_exponent: f64,
    /// `E_r^cc(R)` in bits.
    pub cc_exponent: f64,
    pub saturation_gap: f64,
    pub z: Vec<f64>,
    pub residual: f64,
    pub search_path: Vec<SearchPoint>,
}

/// [`optimize_metric_with`] under the default options.
pub fn optimize_metric(ch: &Dmc, p: &InputDist, rate: &RatePoint) -> Result<OptimalMetric> {
    optimize_metric_with(ch, p, rate, &OptimizerOptions::default())
}

/// Picks `rho_*` maximizing `sup_theta f(rho, theta; U(.|., rho))` by a
/// coarse grid plus golden-section refinement, solving a fresh fixed point
/// at each candidate, then checks the resulting exponent against
/// `E_r^cc(R)`.
///
/// A candidate whose fixed point does not converge is skipped with a
/// warning; the search fails only when every candidate fails.
pub fn optimize_metric_with(
    ch: &Dmc,
    p: &InputDist,
    rate: &RatePoint,
    opts: &OptimizerOptions,
) -> Result<OptimalMetric> {
    if rate.rate_bits >= p.entropy_bits() {
        let fp = solve_fixed_point_with(ch, p, 0.0, &opts.fixed_point)?;
        let mut metric = map_metric(p, ch)?;
        metric.name = "optimal".into();
        return Ok(OptimalMetric {
            rho_star: 0.0,
            metric,
            achieved_exponent: 0.0,
            cc_exponent: 0.0,
            saturation_gap: 0.0,
            z: fp.z,
            residual: 0.0,
            search_path: Vec::new(),
        });
    }

    let mut path = Vec::new();
    let mut first_error = None;
    let mut evaluate = |rho: f64| -> f64 {
        let value = candidate_value(ch, p, rate, rho, &opts.fixed_point);
        let value = match value {
            Ok(v) => Some(v),
            Err(e) if e.is_numerical() => {
                log::warn!("skipping rho = {rho}: {e}");
                first_error.get_or_insert(e);
                None
            }
            Err(e) => {
                first_error.get_or_insert(e);
                None
            }
        };
        path.push(SearchPoint { rho, value });
        value.unwrap_or(f64::NEG_INFINITY)
    };
    let grid = linspace(0.0, 1.0, opts.rho_grid_points.max(2));
    let best = grid_then_golden(&mut evaluate, &grid, opts.rho_width);
    if best.value == f64::NEG_INFINITY {
        return Err(first_error.unwrap_or(Error::IncompatibleMetric));
    }
    if let Some(e) = first_error.filter(|e| !e.is_numerical()) {
        return Err(e);
    }

    let fp = solve_fixed_point_with(ch, p, best.arg, &opts.fixed_point)?;
    let mut metric = build_metric(&fp, p, ch)?;
    metric.name = "optimal".into();
    let achieved = er_mismatch_dual(ch, p, &metric, rate)?.value_bits;
    let cc = er_cc_dual(ch, p, rate)?.value_bits;
    let gap = (achieved - cc).abs();
    if gap > opts.saturation_limit {
        return Err(Error::SaturationFailure { gap });
    }
    Ok(OptimalMetric {
        rho_star: best.arg,
        metric,
        achieved_exponent: achieved,
        cc_exponent: cc,
        saturation_gap: gap,
        z: fp.z,
        residual: fp.residual,
        search_path: path,
    })
}

fn candidate_value(ch: &Dmc, p: &InputDist, rate: &RatePoint, rho: f64, opts: &FixedPointOptions) -> Result<f64> {
    let fp = solve_fixed_point_with(ch, p, rho, opts)?;
    let u = build_metric(&fp, p, ch)?;
    Ok(MismatchObjective::new(ch, p, &u, rate)?.sup_theta(rho).value)
}
