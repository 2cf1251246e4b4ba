use super::{log_sum_exp, Diagnostics, ExponentResult, RatePoint, LN2, RHO_GRID_POINTS};
use crate::dmc::{output_distribution, DecodingMetric, Dmc, InputDist, TiltedMetric};
use crate::error::{Error, Result};
use crate::search::{golden_max, grid_then_golden, linspace};

pub const THETA_GRID_POINTS: usize = 64;
pub const THETA_GRID_MIN: f64 = 1e-4;
pub const THETA_GRID_MAX: f64 = 1e4;

const SEARCH_TOL: f64 = 1e-10;

/// The best `theta` for one value of `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOptimum {
    pub theta: f64,
    pub value: f64,
    pub at_boundary: bool,
    pub evaluations: usize,
}

/// `f(rho, theta) = -sum_x P(x) log2 sum_y W(y|x) / U_theta(x|y)^rho + rho [H(P_X) - R]`,
/// the objective whose `max_rho sup_theta` is the mismatched exponent.
///
/// The objective is jointly concave in `(rho, rho * theta)`, so the nested
/// one-dimensional searches find the global optimum.
#[derive(Debug, Clone)]
pub struct MismatchObjective {
    nx: usize,
    ny: usize,
    support: Vec<(usize, f64)>,
    ln_w: Vec<f64>,
    ln_u: Vec<f64>,
    h_minus_r: f64,
    log_grid: Vec<f64>,
}

impl MismatchObjective {
    pub fn new(ch: &Dmc, p: &InputDist, u: &DecodingMetric, rate: &RatePoint) -> Result<Self> {
        if p.len() != ch.input_size() {
            return Err(Error::DimensionMismatch("P_X and channel disagree".into()));
        }
        u.check_channel(ch)?;
        let (lo, hi) = (THETA_GRID_MIN.ln(), THETA_GRID_MAX.ln());
        Ok(Self {
            nx: ch.input_size(),
            ny: ch.output_size(),
            support: p.support().map(|x| (x, p.p(x))).collect(),
            ln_w: ch.table().iter().map(|w| w.ln()).collect(),
            ln_u: u.ln_table(),
            h_minus_r: p.entropy_bits() - rate.rate_bits,
            log_grid: linspace(lo, hi, THETA_GRID_POINTS),
        })
    }

    /// Objective value in bits; `-inf` where the metric vanishes on a channel
    /// transition of positive probability.
    pub fn value(&self, rho: f64, theta: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let mut ln_ut = vec![0.0; self.nx * self.ny];
        crate::dmc::ln_tilted(&self.ln_u, self.nx, self.ny, theta, &mut ln_ut);
        self.value_tilted(rho, &ln_ut)
    }

    fn value_tilted(&self, rho: f64, ln_ut: &[f64]) -> f64 {
        let ny = self.ny;
        let mut acc = 0.0;
        for &(x, px) in &self.support {
            let row_w = &self.ln_w[x * ny..(x + 1) * ny];
            let row_u = &ln_ut[x * ny..(x + 1) * ny];
            let terms = row_w
                .iter()
                .zip(row_u)
                .filter(|(lw, _)| **lw > f64::NEG_INFINITY)
                .map(|(lw, lu)| lw - rho * lu);
            let lse = log_sum_exp(terms);
            if lse == f64::INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += px * lse;
        }
        -acc / LN2 + rho * self.h_minus_r
    }

    /// `sup_{theta >= 0} f(rho, theta)`: a 64-point log grid on
    /// `[1e-4, 1e4]` plus `theta = 0`, refined by golden-section search in
    /// `ln theta` (or in `theta` next to zero).
    pub fn sup_theta(&self, rho: f64) -> ThetaOptimum {
        if rho == 0.0 {
            return ThetaOptimum {
                theta: 0.0,
                value: 0.0,
                at_boundary: false,
                evaluations: 0,
            };
        }
        let at_theta = |theta: f64| self.value(rho, theta);
        let v0 = at_theta(0.0);
        let m = grid_then_golden(|t| at_theta(t.exp()), &self.log_grid, SEARCH_TOL);
        let mut best = ThetaOptimum {
            theta: m.arg.exp(),
            value: m.value,
            at_boundary: false,
            evaluations: m.evaluations + 1,
        };
        if m.grid_index == 0 || v0 >= m.value {
            let (arg, value, evals, _) = golden_max(at_theta, 0.0, THETA_GRID_MIN, 1e-14);
            best.evaluations += evals;
            if value > best.value {
                best.theta = arg;
                best.value = value;
            }
            if v0 >= best.value {
                best.theta = 0.0;
                best.value = v0;
            }
        }
        if m.grid_index + 1 == self.log_grid.len() && best.theta >= THETA_GRID_MAX * (1.0 - 1e-6) {
            best.at_boundary = true;
        }
        best
    }

    /// `max_{rho in [0,1]} sup_theta f(rho, theta)`.
    pub fn maximize(&self) -> Result<ExponentResult> {
        let grid = linspace(0.0, 1.0, RHO_GRID_POINTS);
        let mut evaluations = 0;
        let mut any_finite = false;
        let m = grid_then_golden(
            |rho| {
                let t = self.sup_theta(rho);
                evaluations += t.evaluations;
                if rho > 0.0 && t.value > f64::NEG_INFINITY {
                    any_finite = true;
                }
                t.value
            },
            &grid,
            SEARCH_TOL,
        );
        if !any_finite {
            return Err(Error::IncompatibleMetric);
        }
        let theta = self.sup_theta(m.arg);
        Ok(ExponentResult {
            value_bits: m.value.max(0.0),
            rho_star: m.arg,
            theta_star: Some(theta.theta),
            theta_at_boundary: theta.at_boundary,
            output_dist: None,
            conditional: None,
            diagnostics: Diagnostics {
                evaluations: evaluations + theta.evaluations,
                iterations: m.evaluations,
                objective_gap: m.width,
            },
        })
    }
}

/// The error exponent `E_r(R, U)` of the linear-code ensemble restricted to a
/// constant-composition subcode, decoded over the full code with metric `U`.
pub fn er_mismatch_dual(ch: &Dmc, p: &InputDist, u: &DecodingMetric, rate: &RatePoint) -> Result<ExponentResult> {
    MismatchObjective::new(ch, p, u, rate)?.maximize()
}

/// `D(P_{X|Y} || U_theta | P_Y)` in bits. Zero exactly when the tilted metric
/// is the posterior on every output of positive probability, which is the
/// condition for the metric to achieve `I(X;Y)`.
pub fn map_capacity_gap(ch: &Dmc, p: &InputDist, u_theta: &TiltedMetric) -> Result<f64> {
    if p.len() != ch.input_size()
        || u_theta.input_size() != ch.input_size()
        || u_theta.output_size() != ch.output_size()
    {
        return Err(Error::DimensionMismatch(
            "tilted metric, P_X and channel disagree".into(),
        ));
    }
    let py = output_distribution(p, ch);
    let mut d = 0.0;
    for x in p.support() {
        for y in 0..ch.output_size() {
            let joint = p.p(x) * ch.w(x, y);
            if joint > 0.0 {
                let ut = u_theta.u(x, y);
                if ut == 0.0 {
                    return Ok(f64::INFINITY);
                }
                d += joint * (joint / py[y] / ut).log2();
            }
        }
    }
    Ok(d.max(0.0))
}
