use serde::Serialize;

use super::fixed_point::{FixedPoint, System};
use crate::dmc::{tilt_metric, DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::exponent::{cc_min_over_v, RatePoint};

pub const JENSEN_SPREAD_LIMIT: f64 = 1e-8;
pub const POSTERIOR_FORM_LIMIT: f64 = 1e-10;
pub const ZETA_V_LIMIT: f64 = 1e-10;

/// Equality conditions of the bound chain behind the optimal metric,
/// evaluated against the exponent-optimal output distribution `V` of the
/// constant-composition dual, computed independently of `Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub rho: f64,
    /// `max_x [max_y r(x,y) / min_y r(x,y)] - 1` for the ratio
    /// `r = W(y|x) / (W~(y|x) U_1(x|y)^rho)`.
    pub jensen_spread: f64,
    /// Sup-norm distance between `U_1(x|y)` and `P(x) W~(y|x) / sum_x' P(x') W~(y|x')`.
    pub posterior_deviation: f64,
    /// `max_y |zeta(y)^rho / V(y)^{rho/(1+rho)} - 1|`.
    pub zeta_v_deviation: f64,
    pub jensen_ok: bool,
    pub posterior_ok: bool,
    pub zeta_v_ok: bool,
}

impl SaturationReport {
    pub fn passed(&self) -> bool {
        self.jensen_ok && self.posterior_ok && self.zeta_v_ok
    }
}

/// Checks the saturation conditions for a candidate `Z` and metric `u` at
/// `fp.rho`. Here `W~(y|x) ∝ W(y|x)^{1/(1+rho)} V(y)^{rho/(1+rho)}` is built
/// from the minimizing `V`, so that a `Z` or metric off the fixed point shows
/// up as a nonzero defect. Errors only on malformed input.
pub fn verify_saturation(ch: &Dmc, p: &InputDist, fp: &FixedPoint, u: &DecodingMetric) -> Result<SaturationReport> {
    let sys = System::new(ch, p, fp.rho)?;
    let (nx, ny, rho) = (sys.nx, sys.ny, fp.rho);
    if fp.z.len() != nx || u.input_size() != nx || u.output_size() != ny {
        return Err(Error::DimensionMismatch(
            "fixed point, metric and channel disagree".into(),
        ));
    }
    let u1 = tilt_metric(u, 1.0)?;
    let s = rho / (1.0 + rho);

    let (w_tilde, v) = if rho == 0.0 {
        (ch.table().to_vec(), crate::dmc::output_distribution(p, ch))
    } else {
        let rate = RatePoint::from_rate(p, ch.bits_per_symbol(), 0.0)?;
        let v = cc_min_over_v(ch, p, &rate, rho, None)?.v;
        let vs: Vec<f64> = v.iter().map(|t| t.powf(s)).collect();
        let mut wt = ch.table().to_vec();
        for &(x, _) in &sys.support {
            let row = &mut wt[x * ny..(x + 1) * ny];
            for (y, w) in row.iter_mut().enumerate() {
                *w = sys.a[x * ny + y] * vs[y];
            }
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|w| *w /= total);
        }
        (wt, v)
    };

    let mut jensen_spread: f64 = 0.0;
    for &(x, _) in &sys.support {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for y in 0..ny {
            let w = ch.w(x, y);
            if w > 0.0 {
                let ut = u1.u(x, y);
                let r = if rho == 0.0 {
                    w / w_tilde[x * ny + y]
                } else {
                    w / (w_tilde[x * ny + y] * ut.powf(rho))
                };
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let spread = if lo > 0.0 && hi.is_finite() {
            hi / lo - 1.0
        } else {
            f64::INFINITY
        };
        jensen_spread = jensen_spread.max(spread);
    }

    let mut posterior_deviation: f64 = 0.0;
    for y in 0..ny {
        let total: f64 = sys.support.iter().map(|&(x, px)| px * w_tilde[x * ny + y]).sum();
        if total > 0.0 {
            for x in 0..nx {
                let form = p.p(x) * w_tilde[x * ny + y] / total;
                posterior_deviation = posterior_deviation.max((u1.u(x, y) - form).abs());
            }
        }
    }

    let zeta = sys.zeta(&fp.z);
    let mut zeta_v_deviation: f64 = 0.0;
    if rho > 0.0 {
        for y in 0..ny {
            if zeta[y] > 0.0 || v[y] > 0.0 {
                let ratio = zeta[y].powf(rho) / v[y].powf(s);
                zeta_v_deviation = zeta_v_deviation.max((ratio - 1.0).abs());
            }
        }
    }

    Ok(SaturationReport {
        rho,
        jensen_spread,
        posterior_deviation,
        zeta_v_deviation,
        jensen_ok: jensen_spread < JENSEN_SPREAD_LIMIT,
        posterior_ok: posterior_deviation < POSTERIOR_FORM_LIMIT,
        zeta_v_ok: zeta_v_deviation < ZETA_V_LIMIT,
    })
}
