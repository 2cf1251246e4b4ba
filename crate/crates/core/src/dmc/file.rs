//! JSON channel description files.
//!
//! ```json
//! {
//!   "input_size": 2,
//!   "output_size": 2,
//!   "matrix_orientation": "x_major",
//!   "w": [[0.9, 0.1], [0.1, 0.9]],
//!   "p_x": [0.5, 0.5]
//! }
//! ```
//!
//! With `"x_major"`, `w[x][y] = W(y|x)`. With `"y_major"`, the matrix is
//! given as printed with one column per input, `w[y][x] = W(y|x)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dmc, InputDist, STOCHASTIC_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrientation {
    XMajor,
    YMajor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub input_size: usize,
    pub output_size: usize,
    pub matrix_orientation: MatrixOrientation,
    pub w: Vec<Vec<f64>>,
    pub p_x: Vec<f64>,
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidChannel(format!("bad JSON: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|e| Error::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn from_parts(ch: &Dmc, p: &InputDist) -> Self {
        Self {
            input_size: ch.input_size(),
            output_size: ch.output_size(),
            matrix_orientation: MatrixOrientation::XMajor,
            w: ch.rows(),
            p_x: p.probs().to_vec(),
        }
    }

    /// Validates the description and builds the channel and input distribution.
    pub fn build(&self) -> Result<(Dmc, InputDist)> {
        let (nx, ny) = (self.input_size, self.output_size);
        let (outer, inner, outer_name, inner_name) = match self.matrix_orientation {
            MatrixOrientation::XMajor => (nx, ny, "input x", "output y"),
            MatrixOrientation::YMajor => (ny, nx, "output y", "input x"),
        };
        if self.w.len() != outer {
            return Err(Error::InvalidChannel(format!(
                "w has {} rows, expected {outer} (one per {outer_name})",
                self.w.len()
            )));
        }
        for (i, row) in self.w.iter().enumerate() {
            if row.len() != inner {
                return Err(Error::InvalidChannel(format!(
                    "w row {i} ({outer_name}={i}) has {} entries, expected {inner}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
                return Err(Error::InvalidChannel(format!(
                    "w row {i} entry {j} ({outer_name}={i}, {inner_name}={j}) = {} is not a probability",
                    row[j]
                )));
            }
        }
        let dmc = match self.matrix_orientation {
            MatrixOrientation::XMajor => Dmc::from_rows(&self.w),
            MatrixOrientation::YMajor => {
                // Report column sums against the printed layout.
                for x in 0..nx {
                    let s: f64 = self.w.iter().map(|r| r[x]).sum();
                    if (s - 1.0).abs() > STOCHASTIC_TOL {
                        return Err(Error::InvalidChannel(format!(
                            "w column {x} (input x={x}) sums to {s}, expected 1"
                        )));
                    }
                }
                Dmc::from_output_major(&self.w)
            }
        }?;
        if self.p_x.len() != nx {
            return Err(Error::InvalidDistribution(format!(
                "p_x has {} entries, expected input_size = {nx}",
                self.p_x.len()
            )));
        }
        let p = InputDist::new(self.p_x.clone())?;
        Ok((dmc, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::{mutual_information, quantized_4ask};

    const SHIPPED: &str = r#"{
        "input_size": 4, "output_size": 4, "matrix_orientation": "y_major",
        "w": [[0.8036, 0.1964, 0.0052, 0.0000],
              [0.1912, 0.6072, 0.1912, 0.0052],
              [0.0052, 0.1912, 0.6072, 0.1912],
              [0.0000, 0.0052, 0.1964, 0.8036]],
        "p_x": [0.05, 0.45, 0.45, 0.05]
    }"#;

    #[test]
    fn y_major_orientation_matches_builtin() {
        let (ch, p) = ChannelSpec::from_json(SHIPPED).unwrap().build().unwrap();
        let (ref_ch, ref_p) = quantized_4ask();
        assert_eq!(ch, ref_ch);
        assert_eq!(p, ref_p);
        let mi = mutual_information(&p, &ch).unwrap();
        assert!((mi - 0.5).abs() < 5e-3);
    }

    #[test]
    fn malformed_row_is_named() {
        let bad = SHIPPED.replace("[0.1912, 0.6072, 0.1912, 0.0052]", "[0.1912, 0.6072]");
        let err = ChannelSpec::from_json(&bad).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");

        let bad = SHIPPED.replace("0.6072, 0.1912, 0.0052", "0.6072, 0.1912, 0.5052");
        let err = ChannelSpec::from_json(&bad).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("column"), "{err}");
    }

    #[test]
    fn x_major_round_trip() {
        let (ch, p) = quantized_4ask();
        let spec = ChannelSpec::from_parts(&ch, &p);
        let text = serde_json::to_string(&spec).unwrap();
        let (ch2, p2) = ChannelSpec::from_json(&text).unwrap().build().unwrap();
        assert_eq!(ch, ch2);
        assert_eq!(p, p2);
    }
}
