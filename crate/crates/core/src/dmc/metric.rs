use serde::{Deserialize, Serialize};

use super::info::check_dims;
use super::{Dmc, InputDist};
use crate::error::{Error, Result};

/// A nonnegative single-letter decoding score `U(x, y)`.
///
/// A codeword is ranked by `prod_i U(x_i, y_i)`; only the ordering matters,
/// so any metric of the form `a(y) U(x, y)^c` with `a > 0`, `c > 0` decodes
/// identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingMetric {
    pub name: String,
    input_size: usize,
    output_size: usize,
    u: Vec<f64>,
}

impl DecodingMetric {
    pub fn new(name: impl Into<String>, input_size: usize, output_size: usize, u: Vec<f64>) -> Result<Self> {
        if u.len() != input_size * output_size {
            return Err(Error::InvalidMetric(format!(
                "expected {} scores, got {}",
                input_size * output_size,
                u.len()
            )));
        }
        if let Some(i) = u.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidMetric(format!(
                "U(x={}, y={}) = {} is not a nonnegative number",
                i / output_size,
                i % output_size,
                u[i]
            )));
        }
        for y in 0..output_size {
            if (0..input_size).all(|x| u[x * output_size + y] == 0.0) {
                return Err(Error::DegenerateColumn { y });
            }
        }
        Ok(Self {
            name: name.into(),
            input_size,
            output_size,
            u,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMetric("ragged score table".into()));
        }
        Self::new(name, rows.len(), cols, rows.concat())
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn u(&self, x: usize, y: usize) -> f64 {
        self.u[x * self.output_size + y]
    }

    pub fn table(&self) -> &[f64] {
        &self.u
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.u.chunks(self.output_size).map(<[f64]>::to_vec).collect()
    }

    /// `ln U(x, y)`, x-major, with `-inf` for zero scores.
    pub fn ln_table(&self) -> Vec<f64> {
        self.u.iter().map(|v| v.ln()).collect()
    }

    /// `a(y) * U(x, y)^c`; decodes identically to `self`.
    pub fn rescaled(&self, per_output: &[f64], power: f64) -> Result<Self> {
        let ny = self.output_size;
        let u = self
            .u
            .iter()
            .enumerate()
            .map(|(i, v)| per_output[i % ny] * v.powf(power))
            .collect();
        Self::new(format!("{}~", self.name), self.input_size, ny, u)
    }

    pub(crate) fn check_channel(&self, ch: &Dmc) -> Result<()> {
        if self.input_size != ch.input_size() || self.output_size != ch.output_size() {
            return Err(Error::DimensionMismatch(format!(
                "metric is {}x{}, channel is {}x{}",
                self.input_size,
                self.output_size,
                ch.input_size(),
                ch.output_size()
            )));
        }
        Ok(())
    }
}

/// The per-output normalization `U_theta(x|y) = U(x,y)^theta / sum_x' U(x',y)^theta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedMetric {
    pub theta: f64,
    input_size: usize,
    output_size: usize,
    u_theta: Vec<f64>,
}

impl TiltedMetric {
    /// Wraps an already-normalized conditional table, x-major.
    pub fn from_conditional(theta: f64, input_size: usize, output_size: usize, u_theta: Vec<f64>) -> Result<Self> {
        if u_theta.len() != input_size * output_size {
            return Err(Error::DimensionMismatch("tilted table has the wrong size".into()));
        }
        for y in 0..output_size {
            let s: f64 = (0..input_size).map(|x| u_theta[x * output_size + y]).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMetric(format!("tilted column y={y} sums to {s}")));
            }
        }
        Ok(Self {
            theta,
            input_size,
            output_size,
            u_theta,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn u(&self, x: usize, y: usize) -> f64 {
        self.u_theta[x * self.output_size + y]
    }

    pub fn table(&self) -> &[f64] {
        &self.u_theta
    }
}

/// Fills `out` with `ln U_theta(x|y)` computed from `ln U`.
///
/// Works in the log domain so that large `theta` neither overflows nor
/// underflows. `theta = 0` gives the uniform table (`0^0 = 1`).
pub(crate) fn ln_tilted(ln_u: &[f64], nx: usize, ny: usize, theta: f64, out: &mut [f64]) {
    if theta == 0.0 {
        let v = -(nx as f64).ln();
        out.iter_mut().for_each(|o| *o = v);
        return;
    }
    for y in 0..ny {
        let mut top = f64::NEG_INFINITY;
        for x in 0..nx {
            top = top.max(theta * ln_u[x * ny + y]);
        }
        let mut s = 0.0;
        for x in 0..nx {
            let t = theta * ln_u[x * ny + y];
            if t > f64::NEG_INFINITY {
                s += (t - top).exp();
            }
        }
        let lse = top + s.ln();
        for x in 0..nx {
            let t = theta * ln_u[x * ny + y];
            out[x * ny + y] = if t > f64::NEG_INFINITY {
                t - lse
            } else {
                f64::NEG_INFINITY
            };
        }
    }
}

/// `U_ML(x, y) = W(y|x)`.
pub fn ml_metric(ch: &Dmc) -> DecodingMetric {
    DecodingMetric::new("ML", ch.input_size(), ch.output_size(), ch.table().to_vec())
        .expect("every channel output is reachable from some input")
}

/// `U_MAP(x, y) = P_X(x) W(y|x)`.
///
/// An output that only zero-mass inputs can produce never occurs; its column
/// is set to `P_X(x)` so that the metric stays well defined.
pub fn map_metric(p: &InputDist, ch: &Dmc) -> Result<DecodingMetric> {
    check_dims(p, ch)?;
    let (nx, ny) = (ch.input_size(), ch.output_size());
    let mut u: Vec<f64> = ch.table().iter().enumerate().map(|(i, w)| p.p(i / ny) * w).collect();
    for y in 0..ny {
        if (0..nx).all(|x| u[x * ny + y] == 0.0) {
            for x in 0..nx {
                u[x * ny + y] = p.p(x);
            }
        }
    }
    DecodingMetric::new("MAP", nx, ny, u)
}

pub fn tilt_metric(u: &DecodingMetric, theta: f64) -> Result<TiltedMetric> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidMetric(format!("theta = {theta} must be finite and >= 0")));
    }
    let (nx, ny) = (u.input_size(), u.output_size());
    let ln_u = u.ln_table();
    let mut ln_t = vec![0.0; nx * ny];
    ln_tilted(&ln_u, nx, ny, theta, &mut ln_t);
    let u_theta = ln_t.iter().map(|v| v.exp()).collect();
    Ok(TiltedMetric {
        theta,
        input_size: nx,
        output_size: ny,
        u_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::{posterior, quantized_4ask};

    #[test]
    fn ml_copies_the_channel() {
        let ch = Dmc::bsc(0.1).unwrap();
        assert_eq!(ml_metric(&ch).rows(), vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        let id = Dmc::identity(4).unwrap();
        assert_eq!(ml_metric(&id).table(), id.table());
    }

    #[test]
    fn ml_of_printed_channel_is_its_transpose() {
        let (ch, _) = quantized_4ask();
        let u = ml_metric(&ch);
        assert_eq!(u.u(0, 1), 0.1912);
        assert_eq!(u.u(1, 0), 0.1964);
        assert_eq!(u.u(3, 0), 0.0);
    }

    #[test]
    fn map_with_zero_mass_symbol() {
        let ch = Dmc::bsc(0.2).unwrap();
        let p = InputDist::point_mass(2, 1);
        let u = map_metric(&p, &ch).unwrap();
        assert_eq!(u.rows()[0], vec![0.0, 0.0]);
        // Uniform prior: column-wise proportional to ML.
        let u = map_metric(&InputDist::uniform(2), &ch).unwrap();
        for (a, b) in u.table().iter().zip(ch.table()) {
            assert!((a - 0.5 * b).abs() < 1e-16);
        }
    }

    #[test]
    fn map_tilt_is_the_posterior() {
        let (ch, p) = quantized_4ask();
        let t = tilt_metric(&map_metric(&p, &ch).unwrap(), 1.0).unwrap();
        let post = posterior(&p, &ch).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert!((t.u(x, y) - post.q(y, x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tilt_examples() {
        let u = DecodingMetric::from_rows("t", &[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let t0 = tilt_metric(&u, 0.0).unwrap();
        assert!(t0.table().iter().all(|&v| v == 0.5));
        let t1 = tilt_metric(&u, 1.0).unwrap();
        for (a, b) in t1.table().iter().zip(u.table()) {
            assert!((a - b).abs() < 1e-15);
        }
        let t2 = tilt_metric(&u, 2.0).unwrap();
        assert!((t2.u(0, 0) - 0.81 / 0.82).abs() < 1e-15);
        assert!((t2.u(1, 0) - 0.01 / 0.82).abs() < 1e-15);
        assert!((t2.u(0, 1) - 0.01 / 0.82).abs() < 1e-15);
    }

    #[test]
    fn zero_column_is_degenerate() {
        let err = DecodingMetric::from_rows("z", &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { y: 1 }));
    }

    #[test]
    fn huge_theta_stays_finite() {
        let u = DecodingMetric::from_rows("t", &[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let t = tilt_metric(&u, 1e6).unwrap();
        assert_eq!(t.u(0, 0), 1.0);
        assert_eq!(t.u(1, 0), 0.0);
    }
}
