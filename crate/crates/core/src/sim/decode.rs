use serde::Serialize;

use super::code::{Labeling, LinearCodeInstance};
use crate::dmc::DecodingMetric;
use crate::error::{Error, Result};

/// Two scores closer than this, relative to `1 + |score|`, are a tie.
pub const TIE_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn is_tie(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= TIE_TOL * (1.0 + a.abs().max(b.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decoded {
    /// Smallest message index attaining the best score.
    pub message: u32,
    /// More than one message attains the best score.
    pub tie: bool,
    pub best_score: f64,
    /// Messages scored; always the full `2^k`.
    pub scanned: usize,
}

/// Per-position log-metric lookup for one received sequence: entry
/// `[j][b]` is `ln U(phi(b), y_j)` for the `m`-bit pattern `b`.
pub(crate) struct ScoreTable {
    n: usize,
    m: usize,
    table: Vec<f64>,
}

impl ScoreTable {
    pub fn new(labeling: &Labeling, u: &DecodingMetric, n: usize, y: &[usize]) -> Result<Self> {
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "received {} symbols, expected {n}",
                y.len()
            )));
        }
        if labeling.phi.len() != u.input_size() {
            return Err(Error::DimensionMismatch("labeling and metric disagree".into()));
        }
        if let Some(&bad) = y.iter().find(|&&s| s >= u.output_size()) {
            return Err(Error::DimensionMismatch(format!("output symbol {bad} out of range")));
        }
        let width = labeling.phi.len();
        let mut table = vec![0.0; n * width];
        for (j, &yj) in y.iter().enumerate() {
            for b in 0..width {
                table[j * width + b] = u.u(labeling.phi[b], yj).ln();
            }
        }
        Ok(Self {
            n,
            m: labeling.m,
            table,
        })
    }

    #[inline]
    pub fn score(&self, c: u32) -> f64 {
        let width = 1usize << self.m;
        let mask = (width - 1) as u32;
        let mut s = 0.0;
        for j in 0..self.n {
            let b = ((c >> (self.m * (self.n - 1 - j))) & mask) as usize;
            s += self.table[j * width + b];
        }
        s
    }
}

/// Maximum-metric decoding over every message of the linear code, typical
/// for the composition or not.
pub fn decode(code: &LinearCodeInstance, labeling: &Labeling, u: &DecodingMetric, y: &[usize]) -> Result<Decoded> {
    let table = ScoreTable::new(labeling, u, code.n, y)?;
    decode_codewords(&code.codewords(), &table)
}

pub(crate) fn decode_codewords(codewords: &[u32], table: &ScoreTable) -> Result<Decoded> {
    let mut best = f64::NEG_INFINITY;
    let mut message = 0u32;
    let mut tie = false;
    let mut scanned = 0;
    for (w, &c) in codewords.iter().enumerate() {
        let s = table.score(c);
        scanned += 1;
        if best > f64::NEG_INFINITY && is_tie(s, best) {
            tie = true;
            if s > best {
                best = s;
            }
        } else if s > best {
            best = s;
            message = w as u32;
            tie = false;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::AllScoresInfinite);
    }
    Ok(Decoded {
        message,
        tie,
        best_score: best,
        scanned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::{ml_metric, Dmc};
    use crate::sim::code::{sample_code, CodeParams};

    #[test]
    fn noiseless_channel_decodes_unique_codeword() {
        let ch = Dmc::identity(2).unwrap();
        let params = CodeParams::new(10, 1, 0.4).unwrap();
        let l = Labeling::natural(1);
        let mut checked = 0;
        for seed in 0..20 {
            let code = sample_code(&params, seed);
            let cws = code.codewords();
            for w in 0..cws.len() {
                if cws.iter().filter(|&&c| c == cws[w]).count() > 1 {
                    continue;
                }
                let y = l.symbols(cws[w], 10);
                let d = decode(&code, &l, &ml_metric(&ch), &y).unwrap();
                assert_eq!((d.message, d.tie, d.scanned), (w as u32, false, 16));
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn flat_metric_ties_everything() {
        let code = sample_code(&CodeParams::new(6, 1, 0.5).unwrap(), 3);
        let u = DecodingMetric::from_rows("flat", &[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let d = decode(&code, &Labeling::natural(1), &u, &[0, 1, 0, 1, 1, 0]).unwrap();
        assert!(d.tie);
        assert_eq!(d.message, 0);
    }

    #[test]
    fn all_zero_scores_are_an_error() {
        let code = sample_code(&CodeParams::new(4, 1, 0.5).unwrap(), 3);
        let l = Labeling::natural(1);
        let cws = code.codewords();
        let outside = (0u32..16).find(|c| !cws.contains(c)).unwrap();
        let u = DecodingMetric::from_rows("hard", &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let err = decode(&code, &l, &u, &l.symbols(outside, 4)).unwrap_err();
        assert!(matches!(err, Error::AllScoresInfinite));
    }
}
