//! Finite-alphabet channels, input distributions, decoding metrics and the
//! information measures built on them.
//!
//! All tables are stored flat and x-major: entry `(x, y)` of an
//! `|X| x |Y|` table lives at `x * |Y| + y`. Stored information measures are
//! in bits.

mod channel;
mod dist;
pub mod file;
mod info;
mod metric;

pub use channel::Dmc;
pub use dist::{ConditionalDist, Direction, InputDist};
pub use file::{ChannelSpec, MatrixOrientation};
pub(crate) use info::check_dims;
pub use info::{entropy, mutual_information, output_distribution, posterior, weighted_kl};
pub(crate) use metric::ln_tilted;
pub use metric::{map_metric, ml_metric, tilt_metric, DecodingMetric, TiltedMetric};

/// Tolerance applied to row sums when a stochastic matrix or distribution is
/// loaded. Rows inside the tolerance are renormalized, rows outside rejected.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// `-p log2 p` with `0 log 0 = 0`.
pub(crate) fn neg_p_log2_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// The 4-ASK quantized Gaussian channel used throughout the test-suite and
/// the shipped example file, together with its shaping distribution
/// `(0.05, 0.45, 0.45, 0.05)`. The induced mutual information is 0.5 bits up
/// to the 4-decimal rounding of the matrix.
pub fn quantized_4ask() -> (Dmc, InputDist) {
    // Printed with column i as the output distribution of input i.
    let printed = [
        [0.8036, 0.1964, 0.0052, 0.0000],
        [0.1912, 0.6072, 0.1912, 0.0052],
        [0.0052, 0.1912, 0.6072, 0.1912],
        [0.0000, 0.0052, 0.1964, 0.8036],
    ];
    let rows: Vec<Vec<f64>> = printed.iter().map(|r| r.to_vec()).collect();
    let dmc = Dmc::from_output_major(&rows).expect("built-in channel is stochastic");
    let p = InputDist::new(vec![0.05, 0.45, 0.45, 0.05]).expect("built-in distribution");
    (dmc, p)
}
