//! Monte-Carlo model of the code ensemble: random binary linear codes with
//! a random offset, the constant-composition subcode used by the encoder,
//! maximum-metric decoding over the full code, and statistical probes of
//! the pairwise and triple-wise independence of codewords.

mod code;
mod decode;
mod probe;
mod trials;

pub use code::{
    composition_counts, sample_code, sample_code_with, select_subcode, CodeParams, Labeling, LinearCodeInstance,
    OffsetMode, SubcodeSelection, MAX_CODE_BITS, MAX_DIMENSION,
};
pub use decode::{decode, Decoded, TIE_TOL};
pub use probe::{
    independence_probe, union_bound_probe, IndependenceReport, UniformityTest, UnionPoint, UnionReport, PROBE_MAX_BITS,
    UNIFORMITY_LEVEL, UNION_MAX_BITS, UNION_MAX_DIMENSION,
};
pub use trials::{run_trials, run_trials_with, trial_seeds, TrialReport, MIN_ERROR_EVENTS};
