use serde::Serialize;

use crate::dmc::{check_dims, DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};

/// Iteration controls for [`solve_fixed_point_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointOptions {
    /// Sup-norm relative change at which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate once damping engages:
    /// `Z <- Z^{1-damping} T(Z)^damping`.
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            damping: 0.5,
        }
    }
}

/// Solution of `Z(x) = sum_y W(y|x)^{1/(1+rho)} zeta(y)^rho` with
/// `zeta(y) = sum_x P(x) W(y|x)^{1/(1+rho)} / Z(x)`, and the quantities
/// derived from it.
///
/// Inputs with `P(x) = 0` take no part in the system; their entries of `z`
/// are `NaN` and their rows of `w_tilde` are copies of `W(.|x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub rho: f64,
    pub z: Vec<f64>,
    /// `V(y) = zeta(y)^{1+rho}`, a distribution at the fixed point.
    pub v: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `W~(y|x) = W(y|x)^{1/(1+rho)} zeta(y)^rho / Z(x)`, x-major.
    pub w_tilde: Vec<f64>,
    /// Sup-norm relative defect `max_x |T(Z)(x) / Z(x) - 1|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Channel data for one `rho`, reduced to the inputs of positive mass.
pub(crate) struct System {
    pub rho: f64,
    pub nx: usize,
    pub ny: usize,
    pub support: Vec<(usize, f64)>,
    /// `W(y|x)^{1/(1+rho)}`, x-major over the full input alphabet.
    pub a: Vec<f64>,
}

impl System {
    pub fn new(ch: &Dmc, p: &InputDist, rho: f64) -> Result<Self> {
        check_dims(p, ch)?;
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidRate(format!("rho = {rho} outside [0, 1]")));
        }
        let e = 1.0 / (1.0 + rho);
        Ok(Self {
            rho,
            nx: ch.input_size(),
            ny: ch.output_size(),
            support: p.support().map(|x| (x, p.p(x))).collect(),
            a: ch
                .table()
                .iter()
                .map(|w| if *w > 0.0 { w.powf(e) } else { 0.0 })
                .collect(),
        })
    }

    pub fn zeta(&self, z: &[f64]) -> Vec<f64> {
        let mut zeta = vec![0.0; self.ny];
        for &(x, px) in &self.support {
            let c = px / z[x];
            for (zy, a) in zeta.iter_mut().zip(&self.a[x * self.ny..(x + 1) * self.ny]) {
                *zy += c * a;
            }
        }
        zeta
    }

    fn zeta_pow(&self, zeta: &[f64]) -> Vec<f64> {
        zeta.iter()
            .map(|v| if *v > 0.0 { v.powf(self.rho) } else { 0.0 })
            .collect()
    }

    /// Right-hand side of the fixed-point equation.
    pub fn map(&self, z: &[f64], out: &mut [f64]) {
        let zp = self.zeta_pow(&self.zeta(z));
        for &(x, _) in &self.support {
            out[x] = self.a[x * self.ny..(x + 1) * self.ny]
                .iter()
                .zip(&zp)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    pub fn residual(&self, z: &[f64], tz: &[f64]) -> f64 {
        self.support
            .iter()
            .fold(0.0, |m, &(x, _)| m.max((tz[x] / z[x] - 1.0).abs()))
    }
}

/// [`solve_fixed_point_with`] under the default options.
pub fn solve_fixed_point(ch: &Dmc, p: &InputDist, rho: f64) -> Result<FixedPoint> {
    solve_fixed_point_with(ch, p, rho, &FixedPointOptions::default())
}

/// Solves the fixed-point system by substitution from `Z = 1`.
///
/// For `rho < 1` the map contracts in `log Z` with modulus `rho`. At `rho = 1`
/// it sends `cZ` to `T(Z)/c` and plain substitution can oscillate, so
/// geometric damping is switched on the first time the residual fails to
/// decrease.
pub fn solve_fixed_point_with(ch: &Dmc, p: &InputDist, rho: f64, opts: &FixedPointOptions) -> Result<FixedPoint> {
    let sys = System::new(ch, p, rho)?;
    let mut z = vec![f64::NAN; sys.nx];
    for &(x, _) in &sys.support {
        z[x] = 1.0;
    }
    let mut iterations = 0;
    if rho > 0.0 {
        let mut tz = z.clone();
        let mut damped = false;
        let mut last = f64::INFINITY;
        loop {
            sys.map(&z, &mut tz);
            let residual = sys.residual(&z, &tz);
            if residual < opts.tol {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(Error::NonConvergent { iterations, residual });
            }
            if !damped && residual >= last {
                log::debug!("fixed point at rho = {rho}: damping engaged after {iterations} steps");
                damped = true;
            }
            last = residual;
            for &(x, _) in &sys.support {
                let next = if damped {
                    z[x].powf(1.0 - opts.damping) * tz[x].powf(opts.damping)
                } else {
                    tz[x]
                };
                if !(next > 0.0 && next.is_finite()) {
                    return Err(Error::NonPositive { x });
                }
                z[x] = next;
            }
            iterations += 1;
        }
    }
    Ok(derive(ch, &sys, z, iterations))
}

fn derive(ch: &Dmc, sys: &System, z: Vec<f64>, iterations: usize) -> FixedPoint {
    let ny = sys.ny;
    let zeta = sys.zeta(&z);
    let mut tz = z.clone();
    if sys.rho > 0.0 {
        sys.map(&z, &mut tz);
    }
    let residual = if sys.rho > 0.0 { sys.residual(&z, &tz) } else { 0.0 };
    let v: Vec<f64> = zeta.iter().map(|s| s.powf(1.0 + sys.rho)).collect();
    let mut w_tilde = ch.table().to_vec();
    if sys.rho > 0.0 {
        let zp = sys.zeta_pow(&zeta);
        for &(x, _) in &sys.support {
            for y in 0..ny {
                w_tilde[x * ny + y] = sys.a[x * ny + y] * zp[y] / z[x];
            }
        }
    }
    FixedPoint {
        rho: sys.rho,
        z,
        v,
        zeta,
        w_tilde,
        residual,
        iterations,
    }
}

/// The metric `U(x|y, rho) ∝ P(x) W(y|x)^{1/(1+rho)} / Z(x)`, normalized over
/// `x` for each `y`. Inputs of zero mass score 0; an output no input of
/// positive mass can produce gets the uniform distribution over the support
/// of `P_X`.
pub fn build_metric(fp: &FixedPoint, p: &InputDist, ch: &Dmc) -> Result<DecodingMetric> {
    let sys = System::new(ch, p, fp.rho)?;
    if fp.z.len() != sys.nx {
        return Err(Error::DimensionMismatch("fixed point and channel disagree".into()));
    }
    let (nx, ny) = (sys.nx, sys.ny);
    let zeta = sys.zeta(&fp.z);
    let share = 1.0 / sys.support.len() as f64;
    let mut u = vec![0.0; nx * ny];
    for &(x, px) in &sys.support {
        for y in 0..ny {
            u[x * ny + y] = if zeta[y] > 0.0 {
                px * sys.a[x * ny + y] / fp.z[x] / zeta[y]
            } else {
                share
            };
        }
    }
    DecodingMetric::new(format!("optimal(rho={})", fp.rho), nx, ny, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::{posterior, quantized_4ask};

    #[test]
    fn rho_zero_is_exact() {
        let (ch, p) = quantized_4ask();
        let fp = solve_fixed_point(&ch, &p, 0.0).unwrap();
        assert!(fp.z.iter().all(|z| *z == 1.0));
        assert_eq!(fp.w_tilde, ch.table());
        let u = build_metric(&fp, &p, &ch).unwrap();
        let post = posterior(&p, &ch).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert!((u.u(x, y) - post.q(y, x)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn derived_quantities_are_consistent() {
        let (ch, p) = quantized_4ask();
        for rho in [0.3, 1.0] {
            let fp = solve_fixed_point(&ch, &p, rho).unwrap();
            assert!(fp.residual < 1e-12);
            assert!((fp.v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for x in 0..4 {
                let s: f64 = fp.w_tilde[x * 4..(x + 1) * 4].iter().sum();
                assert!((s - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_channel_gives_constant_z() {
        let ch = Dmc::bsc(0.2).unwrap();
        let fp = solve_fixed_point(&ch, &InputDist::uniform(2), 0.7).unwrap();
        assert!((fp.z[0] - fp.z[1]).abs() < 1e-14);
    }

    #[test]
    fn zero_mass_inputs_are_stripped() {
        let (ch, _) = quantized_4ask();
        let p = InputDist::new(vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let fp = solve_fixed_point(&ch, &p, 0.5).unwrap();
        assert!(fp.z[0].is_nan() && fp.z[3].is_nan());
        let u = build_metric(&fp, &p, &ch).unwrap();
        assert!((0..4).all(|y| u.u(0, y) == 0.0 && u.u(3, y) == 0.0));
    }
}
