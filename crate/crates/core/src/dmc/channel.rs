use serde::Serialize;

use super::STOCHASTIC_TOL;
use crate::error::{Error, Result};

/// A discrete memoryless channel `W(y|x)`.
///
/// The input alphabet size is a power of two `2^m`, `m >= 1`, so that channel
/// inputs can be addressed by `m`-bit labels. Alphabets of other sizes must be
/// padded with never-used dummy inputs before construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dmc {
    input_size: usize,
    output_size: usize,
    w: Vec<f64>,
}

impl Dmc {
    /// Builds a channel from a flat x-major table.
    pub fn new(input_size: usize, output_size: usize, mut w: Vec<f64>) -> Result<Self> {
        if input_size < 2 || !input_size.is_power_of_two() {
            return Err(Error::InvalidChannel(format!(
                "input_size {input_size} is not a power of two >= 2"
            )));
        }
        if output_size == 0 {
            return Err(Error::InvalidChannel("output_size is 0".into()));
        }
        if w.len() != input_size * output_size {
            return Err(Error::InvalidChannel(format!(
                "expected {} entries, got {}",
                input_size * output_size,
                w.len()
            )));
        }
        for x in 0..input_size {
            let row = &mut w[x * output_size..(x + 1) * output_size];
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidChannel(format!(
                        "entry W(y={y}|x={x}) = {v} is not a nonnegative number"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidChannel(format!(
                    "row x={x} sums to {sum}, expected 1 within {STOCHASTIC_TOL:e}"
                )));
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        if let Some(y) = (0..output_size).find(|&y| (0..input_size).all(|x| w[x * output_size + y] == 0.0)) {
            return Err(Error::InvalidChannel(format!(
                "output y={y} has probability 0 under every input; drop it from the alphabet"
            )));
        }
        Ok(Self {
            input_size,
            output_size,
            w,
        })
    }

    /// Builds a channel from rows indexed by input, `rows[x][y] = W(y|x)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let output_size = rows.first().map_or(0, Vec::len);
        if let Some(x) = rows.iter().position(|r| r.len() != output_size) {
            return Err(Error::InvalidChannel(format!(
                "row x={x} has {} entries, expected {output_size}",
                rows[x].len()
            )));
        }
        Self::new(rows.len(), output_size, rows.concat())
    }

    /// Builds a channel from a matrix printed with one column per input,
    /// `printed[y][x] = W(y|x)`.
    pub fn from_output_major(printed: &[Vec<f64>]) -> Result<Self> {
        let input_size = printed.first().map_or(0, Vec::len);
        if let Some(y) = printed.iter().position(|r| r.len() != input_size) {
            return Err(Error::InvalidChannel(format!(
                "printed row y={y} has {} entries, expected {input_size}",
                printed[y].len()
            )));
        }
        let rows: Vec<Vec<f64>> = (0..input_size)
            .map(|x| printed.iter().map(|r| r[x]).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut w = vec![0.0; size * size];
        for x in 0..size {
            w[x * size + x] = 1.0;
        }
        Self::new(size, size, w)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// Bits per channel symbol, `m = log2 |X|`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.input_size.trailing_zeros()
    }

    #[inline]
    pub fn w(&self, x: usize, y: usize) -> f64 {
        self.w[x * self.output_size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.w[x * self.output_size..(x + 1) * self.output_size]
    }

    /// The flat x-major table.
    pub fn table(&self) -> &[f64] {
        &self.w
    }

    /// Rows indexed by input, for serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.input_size).map(|x| self.row(x).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two_inputs() {
        let err = Dmc::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap_err();
        assert!(err.to_string().contains("power of two"));
    }

    #[test]
    fn names_the_offending_row() {
        let err = Dmc::from_rows(&[vec![0.5, 0.5], vec![0.6, 0.5]]).unwrap_err();
        assert!(err.to_string().contains("row x=1"), "{err}");
        let err = Dmc::from_rows(&[vec![0.5, 0.5], vec![-0.1, 1.1]]).unwrap_err();
        assert!(err.to_string().contains("x=1"), "{err}");
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let ch = Dmc::from_rows(&[vec![0.5, 0.5 + 1e-10], vec![0.25, 0.75]]).unwrap();
        assert!((ch.row(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn output_major_is_transposed() {
        let ch = Dmc::from_output_major(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        assert_eq!(ch.row(0), &[0.9, 0.1]);
        assert_eq!(ch.row(1), &[0.2, 0.8]);
        assert_eq!(ch.bits_per_symbol(), 1);
    }
}
