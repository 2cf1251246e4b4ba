use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::code::{composition_counts, sample_code_with, CodeParams, Labeling, OffsetMode};
use super::decode::{is_tie, ScoreTable};
use crate::dmc::{DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};

/// Largest `n m` for the independence probe.
pub const PROBE_MAX_BITS: usize = 10;
/// Significance level of every uniformity test.
pub const UNIFORMITY_LEVEL: f64 = 1e-3;
/// Chi-square tests need at least this many expected samples per cell.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityTest {
    pub name: String,
    pub messages: Vec<u32>,
    pub cells: u64,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    /// Why no test was run, when none was.
    pub note: Option<String>,
    /// `p_value > UNIFORMITY_LEVEL`, or no test was run.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub params: CodeParams,
    pub samples: usize,
    pub master_seed: u64,
    pub offset: OffsetMode,
    pub tests: Vec<UniformityTest>,
}

impl IndependenceReport {
    pub fn test(&self, name: &str) -> Option<&UniformityTest> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.passed)
    }
}

fn chi_square(counts: &[u64], samples: usize) -> (f64, f64) {
    let expected = samples as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = (counts.len() - 1) as f64;
    let p = ChiSquared::new(dof).expect("positive degrees of freedom").sf(stat);
    (stat, p)
}

/// Chi-square uniformity of codewords of the random ensemble:
///
/// * `single`: `c(0)` and `c(2^k - 1)`, each over `{0,1}^{nm}`;
/// * `pair`: `(c(0), c(2^k - 1))` over `{0,1}^{2nm}`;
/// * `triple`: `(c(1), c(2), c(3))`, where `b(3) = b(1) + b(2)`, over
///   `{0,1}^{3nm}`; vacuous for `k < 2`.
///
/// Tests whose table would leave fewer than 5 expected samples per cell are
/// reported but not run.
pub fn independence_probe(
    params: &CodeParams,
    samples: usize,
    master_seed: u64,
    offset: OffsetMode,
) -> Result<IndependenceReport> {
    let bits = params.bits();
    if bits > PROBE_MAX_BITS {
        return Err(Error::CapViolation(format!(
            "independence probe needs n*m <= {PROBE_MAX_BITS}, got {bits}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let last = (1u32 << params.k) - 1;
    let mut specs: Vec<(String, Vec<u32>)> = vec![("single".into(), vec![0]), ("single_last".into(), vec![last])];
    if params.k >= 1 {
        specs.push(("pair".into(), vec![0, last]));
    }
    let triple = params.k >= 2;
    if triple {
        specs.push(("triple".into(), vec![1, 2, 3]));
    }

    let mut tests = Vec::new();
    let mut tables: Vec<Option<Vec<u64>>> = Vec::new();
    for (name, msgs) in &specs {
        let cell_bits = bits * msgs.len();
        let cells = 1u64 << cell_bits;
        let runnable = cell_bits <= 24 && samples as f64 / cells as f64 >= MIN_EXPECTED;
        tables.push(runnable.then(|| vec![0u64; cells as usize]));
        tests.push(UniformityTest {
            name: name.clone(),
            messages: msgs.clone(),
            cells,
            statistic: None,
            p_value: None,
            note: (!runnable).then(|| format!("{samples} samples are too few for {cells} cells")),
            passed: true,
        });
    }
    if !triple {
        tests.push(UniformityTest {
            name: "triple".into(),
            messages: Vec::new(),
            cells: 0,
            statistic: None,
            p_value: None,
            note: Some(format!(
                "vacuous: k = {} admits no three distinct linearly dependent messages",
                params.k
            )),
            passed: true,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    for _ in 0..samples {
        let code = sample_code_with(params, rng.random(), offset);
        for ((_, msgs), table) in specs.iter().zip(tables.iter_mut()) {
            if let Some(t) = table {
                let cell = msgs
                    .iter()
                    .fold(0usize, |acc, &w| (acc << bits) | code.codeword(w) as usize);
                t[cell] += 1;
            }
        }
    }
    for (test, table) in tests.iter_mut().zip(&tables) {
        if let Some(t) = table {
            let (stat, p) = chi_square(t, samples);
            test.statistic = Some(stat);
            test.p_value = Some(p);
            test.passed = p > UNIFORMITY_LEVEL;
        }
    }
    Ok(IndependenceReport {
        params: *params,
        samples,
        master_seed,
        offset,
        tests,
    })
}

/// Number of `k`-row generator matrices over `{0,1}^{bits}` all of whose
/// nonzero combinations fall in `allowed` (a 0/1 table of size `2^bits`).
///
/// Rows are enumerated one at a time, keeping the set `B` of admissible
/// next rows: after row `g`, `B <- B ∩ (B + g)`. The last two rows are
/// counted at once as `sum_{g,h} B(g) B(h) B(g+h) = 2^{-bits} sum_u B^(u)^3`
/// with `B^` the Walsh-Hadamard transform.
pub(crate) fn count_generators(allowed: &[bool], k: usize) -> u128 {
    fn wht(v: &mut [i64]) {
        let mut h = 1;
        while h < v.len() {
            for i in (0..v.len()).step_by(2 * h) {
                for j in i..i + h {
                    let (a, b) = (v[j], v[j + h]);
                    v[j] = a + b;
                    v[j + h] = a - b;
                }
            }
            h *= 2;
        }
    }
    fn rec(b: &[bool], left: usize, scratch: &mut Vec<i64>) -> u128 {
        match left {
            0 => 1,
            1 => b.iter().filter(|&&v| v).count() as u128,
            2 => {
                scratch.clear();
                scratch.extend(b.iter().map(|&v| v as i64));
                wht(scratch);
                let total: i128 = scratch.iter().map(|&s| (s as i128).pow(3)).sum();
                (total / b.len() as i128) as u128
            }
            _ => {
                let mut next = vec![false; b.len()];
                let mut sum = 0;
                for g in (0..b.len()).filter(|&g| b[g]) {
                    for (h, n) in next.iter_mut().enumerate() {
                        *n = b[h] && b[h ^ g];
                    }
                    sum += rec(&next, left - 1, scratch);
                }
                sum
            }
        }
    }
    rec(allowed, k, &mut Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionPoint {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    /// `|M(x, y)|`: bit strings scoring at least as well as `x`, `x` included.
    pub competitors: u64,
    pub alpha: f64,
    /// Probability over the ensemble, given `x` sent and `y` received, that
    /// some other codeword scores at least as well.
    pub exact: f64,
    pub monte_carlo: f64,
    pub monte_carlo_stderr: f64,
    /// `min{1/2, (2^k - 2) alpha / 2}`.
    pub lower: f64,
    /// `min{1, |M| 2^{k - nm}}`.
    pub upper: f64,
    /// `min{1, |M| 2^{k - nm + 1}}`.
    pub upper_loose: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionReport {
    pub params: CodeParams,
    pub master_seed: u64,
    pub points: Vec<UnionPoint>,
}

impl UnionReport {
    pub fn all_within(&self) -> bool {
        self.points.iter().all(|p| p.within)
    }
}

/// Largest dimension for [`union_bound_probe`].
pub const UNION_MAX_DIMENSION: usize = 8;
/// Largest `n m` for [`union_bound_probe`].
pub const UNION_MAX_BITS: usize = 20;

/// For `pairs` sampled `(x, y)`, with `x` uniform over the type class of
/// `P_X` (or i.i.d. `P_X` when `n P_X` is not integral) and `y` drawn from
/// `W`: the exact union-event probability, a Monte-Carlo estimate from
/// `mc_samples` codes, and the sandwich bounds. `within` compares the exact
/// value with `[lower, upper_loose]`.
///
/// Exact enumeration costs about `|A|^{k-2} 2^{nm} nm`; it is run only for
/// `k <= 4` and `nm <= 10` and reported as `NaN` otherwise.
pub fn union_bound_probe(
    ch: &Dmc,
    p: &InputDist,
    params: &CodeParams,
    u: &DecodingMetric,
    pairs: usize,
    mc_samples: usize,
    master_seed: u64,
) -> Result<UnionReport> {
    let (k, bits) = (params.k, params.bits());
    if k > UNION_MAX_DIMENSION || bits > UNION_MAX_BITS {
        return Err(Error::CapViolation(format!(
            "union probe needs k <= {UNION_MAX_DIMENSION} and n*m <= {UNION_MAX_BITS}, got k = {k}, n*m = {bits}"
        )));
    }
    if ch.input_size() != 1 << params.m || p.len() != ch.input_size() {
        return Err(Error::DimensionMismatch("channel alphabet does not match m".into()));
    }
    u.check_channel(ch)?;
    let labeling = Labeling::natural(params.m);
    let size = 1usize << bits;
    let exact_ok = k <= 4 && bits <= 10;
    let sequence: Option<Vec<usize>> = composition_counts(p, params.n).ok().map(|counts| {
        counts
            .iter()
            .enumerate()
            .flat_map(|(x, &c)| std::iter::repeat_n(x, c))
            .collect()
    });
    let rows: Vec<Option<rand::distr::weighted::WeightedIndex<f64>>> = (0..ch.input_size())
        .map(|x| rand::distr::weighted::WeightedIndex::new(ch.row(x)).ok())
        .collect();
    let prior =
        rand::distr::weighted::WeightedIndex::new(p.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let mut points = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let x: Vec<usize> = match &sequence {
            Some(seq) => {
                let mut s = seq.clone();
                s.shuffle(&mut rng);
                s
            }
            None => (0..params.n)
                .map(|_| rand::distr::Distribution::sample(&prior, &mut rng))
                .collect(),
        };
        let y: Vec<usize> = x
            .iter()
            .map(|&s| rand::distr::Distribution::sample(rows[s].as_ref().expect("stochastic rows"), &mut rng))
            .collect();
        let c = labeling.encode(&x);
        let table = ScoreTable::new(&labeling, u, params.n, &y)?;
        let own = table.score(c);
        if own == f64::NEG_INFINITY {
            return Err(Error::AllScoresInfinite);
        }
        // Offsets d = c' + c of strings scoring at least as well as c.
        let mut allowed = vec![true; size];
        let mut competitors = 0u64;
        for d in 0..size {
            let s = table.score(c ^ d as u32);
            if s >= own || is_tie(s, own) {
                allowed[d] = false;
                competitors += 1;
            }
        }
        let total_bits = (k * bits) as i32;
        let exact = if exact_ok {
            1.0 - count_generators(&allowed, k) as f64 / 2f64.powi(total_bits)
        } else {
            f64::NAN
        };

        let mut hits = 0usize;
        for _ in 0..mc_samples {
            let g: Vec<usize> = (0..k).map(|_| rng.random_range(0..size)).collect();
            let mut span = vec![0usize; 1 << k];
            let mut hit = false;
            for w in 1..span.len() {
                span[w] = span[w & (w - 1)] ^ g[w.trailing_zeros() as usize];
                if !allowed[span[w]] {
                    hit = true;
                    break;
                }
            }
            hits += hit as usize;
        }
        let (mc, se) = if mc_samples > 0 {
            let f = hits as f64 / mc_samples as f64;
            (f, (f * (1.0 - f) / mc_samples as f64).sqrt())
        } else {
            (f64::NAN, f64::NAN)
        };

        let alpha = competitors as f64 / size as f64;
        let codes = 2f64.powi(k as i32);
        let lower = (0.5f64).min((codes - 2.0) * alpha / 2.0).max(0.0);
        let upper = (1.0f64).min(competitors as f64 * codes / size as f64);
        let upper_loose = (1.0f64).min(2.0 * competitors as f64 * codes / size as f64);
        let reference = if exact.is_nan() { mc } else { exact };
        let within = reference >= lower - 1e-12 && reference <= upper_loose + 1e-12;
        points.push(UnionPoint {
            x,
            y,
            competitors,
            alpha,
            exact,
            monte_carlo: mc,
            monte_carlo_stderr: se,
            lower,
            upper,
            upper_loose,
            within,
        });
    }
    Ok(UnionReport {
        params: *params,
        master_seed,
        points,
    })
}
