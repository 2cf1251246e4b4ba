use serde::Serialize;

use super::{neg_p_log2_p, STOCHASTIC_TOL};
use crate::error::{Error, Result};

/// A probability assignment `P_X` over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDist {
    p: Vec<f64>,
    entropy_bits: f64,
}

impl InputDist {
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if let Some(x) = p.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "P_X({x}) = {} is not a nonnegative number",
                p[x]
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1 within {STOCHASTIC_TOL:e}"
            )));
        }
        p.iter_mut().for_each(|v| *v /= sum);
        let entropy_bits = p.iter().copied().map(neg_p_log2_p).sum();
        Ok(Self { p, entropy_bits })
    }

    pub fn uniform(size: usize) -> Self {
        Self::new(vec![1.0 / size as f64; size]).expect("uniform distribution is valid")
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut p = vec![0.0; size];
        p[at] = 1.0;
        Self::new(p).expect("point mass is valid")
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    #[inline]
    pub fn p(&self, x: usize) -> f64 {
        self.p[x]
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// `H(P_X)` in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    /// Inputs with positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.p.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(x, _)| x)
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.p.len() as f64;
        self.p.iter().all(|&v| (v - u).abs() <= 1e-12)
    }
}

/// Which variable a [`ConditionalDist`] conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Rows indexed by input `x`, entries over outputs `y`.
    YGivenX,
    /// Rows indexed by output `y`, entries over inputs `x`.
    XGivenY,
}

/// A conditional distribution stored row-major by the conditioning symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalDist {
    direction: Direction,
    rows: usize,
    cols: usize,
    q: Vec<f64>,
}

impl ConditionalDist {
    pub fn new(direction: Direction, rows: usize, cols: usize, mut q: Vec<f64>) -> Result<Self> {
        if q.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "conditional table has {} entries for a {rows}x{cols} shape",
                q.len()
            )));
        }
        for r in 0..rows {
            let row = &mut q[r * cols..(r + 1) * cols];
            if let Some(c) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "conditional row {r} entry {c} = {} is not a nonnegative number",
                    row[c]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidDistribution(format!("conditional row {r} sums to {sum}")));
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        Ok(Self {
            direction,
            rows,
            cols,
            q,
        })
    }

    pub fn from_rows(direction: Direction, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged conditional table".into()));
        }
        Self::new(direction, rows.len(), cols, rows.concat())
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Number of conditioning symbols.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of conditioned symbols.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `Q(col | row)`.
    #[inline]
    pub fn q(&self, row: usize, col: usize) -> f64 {
        self.q[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.q[row * self.cols..(row + 1) * self.cols]
    }
}
