use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::code::{sample_code_with, select_from_codewords, CodeParams, Labeling, OffsetMode};
use super::decode::{decode_codewords, is_tie, ScoreTable};
use crate::dmc::{DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};

/// Fewest error events for which `-log2(Pe)` is treated as estimable.
pub const MIN_ERROR_EVENTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trials: usize,
    /// Trials whose code had no member of the target type class.
    pub empty_subcodes: usize,
    /// More than half of the trials had an empty subcode.
    pub empty_dominated: bool,
    pub decoded: usize,
    /// Decoding errors, ties included.
    pub errors: usize,
    /// Errors in which the transmitted message tied for the best score.
    pub tie_errors: usize,
    /// Messages scored over all decoded trials; `decoded * 2^k`.
    pub messages_scanned: u64,
    pub mean_subcode_size: f64,
    /// `-log2(errors / decoded)`; absent with no errors.
    pub empirical_log2_pe: Option<f64>,
    /// `empirical_log2_pe / n`.
    pub empirical_exponent: Option<f64>,
    /// Fewer than [`MIN_ERROR_EVENTS`] errors.
    pub insufficient_events: bool,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Empty,
    Decoded {
        error: bool,
        tie_error: bool,
        members: usize,
        scanned: usize,
    },
}

/// Per-trial seeds: the first `trials` outputs of a ChaCha8 stream keyed by
/// `master_seed`.
pub fn trial_seeds(master_seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

/// [`run_trials_with`] with a uniform offset.
pub fn run_trials(
    ch: &Dmc,
    p: &InputDist,
    params: &CodeParams,
    u: &DecodingMetric,
    trials: usize,
    master_seed: u64,
) -> Result<TrialReport> {
    run_trials_with(ch, p, params, u, trials, master_seed, OffsetMode::Uniform)
}

/// Monte-Carlo estimate of the ensemble error probability.
///
/// Each trial draws a fresh code from its own seed, selects the members of
/// the type class of `P_X`, sends a uniformly chosen member over `W`, and
/// decodes against the whole code. Trials with no member are counted and
/// skipped, never redrawn. Trials run in parallel; the report depends only
/// on `master_seed`.
pub fn run_trials_with(
    ch: &Dmc,
    p: &InputDist,
    params: &CodeParams,
    u: &DecodingMetric,
    trials: usize,
    master_seed: u64,
    offset: OffsetMode,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if ch.input_size() != 1 << params.m || p.len() != ch.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "m = {} bits per symbol needs |X| = {}, channel has {}",
            params.m,
            1usize << params.m,
            ch.input_size()
        )));
    }
    u.check_channel(ch)?;
    let labeling = Labeling::natural(params.m);
    super::code::composition_counts(p, params.n)?;
    let rows: Vec<Option<WeightedIndex<f64>>> = (0..ch.input_size())
        .map(|x| WeightedIndex::new(ch.row(x)).ok())
        .collect();

    let seeds = trial_seeds(master_seed, trials);
    let outcomes: Vec<Result<Outcome>> = seeds
        .par_iter()
        .map(|&seed| {
            let code = sample_code_with(params, seed, offset);
            let codewords = code.codewords();
            let sel = select_from_codewords(&code, &codewords, &labeling, p)?;
            if sel.is_empty() {
                return Ok(Outcome::Empty);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let w = sel.member_indices[rng.random_range(0..sel.member_indices.len())];
            let x = labeling.symbols(codewords[w as usize], params.n);
            let y: Vec<usize> = x
                .iter()
                .map(|&s| rows[s].as_ref().expect("stochastic rows").sample(&mut rng))
                .collect();
            let table = ScoreTable::new(&labeling, u, params.n, &y)?;
            let d = decode_codewords(&codewords, &table)?;
            let own = table.score(codewords[w as usize]);
            let error = d.tie || d.message != w;
            let tie_error = error && is_tie(own, d.best_score);
            Ok(Outcome::Decoded {
                error,
                tie_error,
                members: sel.member_indices.len(),
                scanned: d.scanned,
            })
        })
        .collect();

    let (mut empty, mut errors, mut tie_errors, mut members, mut scanned) = (0, 0, 0, 0usize, 0u64);
    for o in outcomes {
        match o? {
            Outcome::Empty => empty += 1,
            Outcome::Decoded {
                error,
                tie_error,
                members: s,
                scanned: sc,
            } => {
                errors += error as usize;
                tie_errors += tie_error as usize;
                members += s;
                scanned += sc as u64;
            }
        }
    }
    let decoded = trials - empty;
    let empty_dominated = 2 * empty > trials;
    if empty_dominated {
        log::warn!("{empty} of {trials} trials had an empty subcode; the parameters are poorly chosen");
    }
    let log2_pe = (errors > 0).then(|| -(errors as f64 / decoded as f64).log2());
    Ok(TrialReport {
        trials,
        empty_subcodes: empty,
        empty_dominated,
        decoded,
        errors,
        tie_errors,
        messages_scanned: scanned,
        mean_subcode_size: if decoded > 0 {
            members as f64 / decoded as f64
        } else {
            0.0
        },
        empirical_log2_pe: log2_pe,
        empirical_exponent: log2_pe.map(|v| v / params.n as f64),
        insufficient_events: errors < MIN_ERROR_EVENTS,
        master_seed,
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::ml_metric;

    #[test]
    fn rejects_zero_trials() {
        let ch = Dmc::bsc(0.1).unwrap();
        let p = InputDist::uniform(2);
        let params = CodeParams::new(8, 1, 0.5).unwrap();
        assert!(run_trials(&ch, &p, &params, &ml_metric(&ch), 0, 1).is_err());
    }

    #[test]
    fn noiseless_errors_are_collisions() {
        let ch = Dmc::identity(2).unwrap();
        let p = InputDist::uniform(2);
        let params = CodeParams::new(12, 1, 0.25).unwrap();
        let rep = run_trials(&ch, &p, &params, &ml_metric(&ch), 2000, 11).unwrap();
        assert_eq!(rep.errors, rep.tie_errors);
        assert!(rep.errors < 60, "{}", rep.errors);
        assert_eq!(rep.messages_scanned, rep.decoded as u64 * 8);
    }

    #[test]
    fn replays_identically() {
        let ch = Dmc::bsc(0.1).unwrap();
        let p = InputDist::uniform(2);
        let params = CodeParams::new(10, 1, 0.5).unwrap();
        let a = run_trials(&ch, &p, &params, &ml_metric(&ch), 500, 7).unwrap();
        let b = run_trials(&ch, &p, &params, &ml_metric(&ch), 500, 7).unwrap();
        assert_eq!(a, b);
    }
}
