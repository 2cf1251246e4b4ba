use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mismatch_exponent::curve::{sweep_curve_with, CurveMetric};
use mismatch_exponent::dmc::{map_metric, ml_metric, mutual_information, ChannelSpec, DecodingMetric, Dmc, InputDist};
use mismatch_exponent::exponent::{er_cc_dual, er_mismatch_dual, RatePoint};
use mismatch_exponent::optimizer::{optimize_metric_with, OptimalMetric, OptimizerOptions};
use mismatch_exponent::sim::{
    independence_probe, run_trials_with, trial_seeds, union_bound_probe, CodeParams, TrialReport,
};
use mismatch_exponent::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_channel, load_metric, parse_offset, resolve_tolerances, MetricChoice, RateGrid};
use crate::output::{emit, json};

fn channel_config(path: &Path, ch: &Dmc, p: &InputDist) -> Value {
    json!({ "path": path.display().to_string(), "resolved": ChannelSpec::from_parts(ch, p) })
}

fn bits_per_symbol(ch: &Dmc) -> Result<u32> {
    let m = ch.bits_per_symbol();
    if ch.input_size() != 1 << m {
        return Err(Error::InvalidChannel(format!(
            "|X| = {} is not a power of two, so no bit labeling exists",
            ch.input_size()
        )));
    }
    Ok(m)
}

/// A metric ready for use at `rate`.
fn resolve_metric(
    choice: &MetricChoice,
    ch: &Dmc,
    p: &InputDist,
    rate: &RatePoint,
    opts: &OptimizerOptions,
) -> Result<DecodingMetric> {
    match choice {
        MetricChoice::Ml => Ok(ml_metric(ch)),
        MetricChoice::Map => map_metric(p, ch),
        MetricChoice::File(path) => load_metric(path),
        MetricChoice::Optimal => {
            let mut u = optimize_metric_with(ch, p, rate, opts)?.metric;
            u.name = "optimal".into();
            Ok(u)
        }
    }
}

pub fn info(channel: &Path, r_fec: Option<f64>, out: Option<&Path>) -> Result<()> {
    let (ch, p) = load_channel(channel)?;
    let config = json!({
        "command": "info",
        "channel": channel_config(channel, &ch, &p),
        "r_fec": r_fec,
    });
    let mi = mutual_information(&p, &ch)?;
    let mut text = format!("# config: {config}\n");
    let _ = writeln!(text, "input_size: {}", ch.input_size());
    let _ = writeln!(text, "output_size: {}", ch.output_size());
    let _ = writeln!(text, "bits_per_symbol: {}", bits_per_symbol(&ch)?);
    let _ = writeln!(text, "entropy_bits: {:.9}", p.entropy_bits());
    let _ = writeln!(text, "mutual_information_bits: {mi:.9}");
    if let Some(r) = r_fec {
        let rp = RatePoint::from_code(&p, ch.bits_per_symbol(), r)?;
        let _ = writeln!(text, "rate_bits: {:.9}", rp.rate_bits);
    }
    emit(out, &text)
}

pub fn exponents(channel: &Path, rates: &str, metrics: &str, tol: &[String], out: Option<&Path>) -> Result<()> {
    let grid = RateGrid::parse(rates)?;
    let choices = MetricChoice::parse_list(metrics)?;
    let opts = resolve_tolerances(tol)?;
    let (ch, p) = load_channel(channel)?;
    let mut curve_metrics = Vec::with_capacity(choices.len());
    for c in &choices {
        curve_metrics.push(match c {
            MetricChoice::Ml => CurveMetric::Fixed(ml_metric(&ch)),
            MetricChoice::Map => CurveMetric::Fixed(map_metric(&p, &ch)?),
            MetricChoice::File(path) => CurveMetric::Fixed(load_metric(path)?),
            MetricChoice::Optimal => CurveMetric::Optimal,
        });
    }
    let config = json!({
        "command": "exponents",
        "channel": channel_config(channel, &ch, &p),
        "rates": grid,
        "metrics": choices,
        "tolerances": opts,
    });
    let curve = sweep_curve_with(&ch, &p, &curve_metrics, &grid.points(), &opts)?;
    emit(out, &curve.to_csv(&[format!("config: {config}")]))
}

#[derive(Serialize)]
struct OptimalMetricOutput<'a> {
    config: Value,
    rate_bits: f64,
    #[serde(flatten)]
    result: &'a OptimalMetric,
}

pub fn optimal_metric(
    channel: &Path,
    rate: Option<f64>,
    r_fec: Option<f64>,
    tol: &[String],
    out: Option<&Path>,
) -> Result<()> {
    let opts = resolve_tolerances(tol)?;
    let (ch, p) = load_channel(channel)?;
    let m = ch.bits_per_symbol();
    let rp = match (rate, r_fec) {
        (Some(r), None) => RatePoint::from_rate(&p, m, r)?,
        (None, Some(f)) => RatePoint::from_code(&p, m, f)?,
        _ => return Err(Error::InvalidRate("give exactly one of --rate and --r-fec".into())),
    };
    let config = json!({
        "command": "optimal-metric",
        "channel": channel_config(channel, &ch, &p),
        "rate": rate,
        "r_fec": r_fec,
        "tolerances": opts,
    });
    let result = optimize_metric_with(&ch, &p, &rp, &opts)?;
    emit(
        out,
        &json(&OptimalMetricOutput {
            config,
            rate_bits: rp.rate_bits,
            result: &result,
        }),
    )
}

pub struct SimulateRequest {
    pub channel: PathBuf,
    pub n: usize,
    pub r_fec: f64,
    pub trials: usize,
    pub seed: u64,
    pub metrics: String,
    pub batches: usize,
    pub offset: String,
    pub tol: Vec<String>,
}

/// A trial report without its per-trial seeds, which follow from the
/// batch seed.
fn report_value(r: &TrialReport) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    if let Value::Object(map) = &mut v {
        map.remove("seeds");
    }
    v
}

#[derive(Serialize)]
struct MetricSummary {
    metric: String,
    exponent_bits: f64,
    trials: usize,
    decoded: usize,
    empty_subcodes: usize,
    errors: usize,
    tie_errors: usize,
    empirical_exponent: Option<f64>,
    insufficient_events: bool,
    batch_errors: Vec<usize>,
    /// Fraction of batches with at most as many errors as the first metric.
    paired_not_worse: Option<f64>,
    batches: Vec<Value>,
}

pub fn simulate(req: &SimulateRequest, out: Option<&Path>) -> Result<()> {
    if req.trials == 0 {
        return Err(Error::InvalidParameter("--trials must be at least 1".into()));
    }
    if req.batches == 0 || req.batches > req.trials {
        return Err(Error::InvalidParameter(format!(
            "--batches {} must lie in 1..={}",
            req.batches, req.trials
        )));
    }
    let choices = MetricChoice::parse_list(&req.metrics)?;
    let offset = parse_offset(&req.offset)?;
    let opts = resolve_tolerances(&req.tol)?;
    let (ch, p) = load_channel(&req.channel)?;
    let m = bits_per_symbol(&ch)?;
    let params = CodeParams::new(req.n, m as usize, req.r_fec)?;
    let rp = RatePoint::from_code(&p, m, req.r_fec)?;

    let config = json!({
        "command": "simulate",
        "channel": channel_config(&req.channel, &ch, &p),
        "code": params,
        "rate_bits": rp.rate_bits,
        "trials": req.trials,
        "seed": req.seed,
        "batches": req.batches,
        "offset": offset,
        "metrics": choices,
        "tolerances": opts,
    });
    let batch_seeds = if req.batches == 1 {
        vec![req.seed]
    } else {
        trial_seeds(req.seed, req.batches)
    };
    let batch_sizes: Vec<usize> = (0..req.batches)
        .map(|b| req.trials / req.batches + usize::from(b < req.trials % req.batches))
        .collect();

    let mut summaries: Vec<MetricSummary> = Vec::with_capacity(choices.len());
    for choice in &choices {
        let u = resolve_metric(choice, &ch, &p, &rp, &opts)?;
        let exponent = er_mismatch_dual(&ch, &p, &u, &rp)?.value_bits;
        let mut reports = Vec::with_capacity(req.batches);
        for (&seed, &size) in batch_seeds.iter().zip(&batch_sizes) {
            reports.push(run_trials_with(&ch, &p, &params, &u, size, seed, offset)?);
        }
        let decoded: usize = reports.iter().map(|r| r.decoded).sum();
        let errors: usize = reports.iter().map(|r| r.errors).sum();
        let log2_pe = (errors > 0 && decoded > 0).then(|| -(errors as f64 / decoded as f64).log2());
        let batch_errors: Vec<usize> = reports.iter().map(|r| r.errors).collect();
        let paired_not_worse = summaries.first().map(|base| {
            let wins = batch_errors
                .iter()
                .zip(&base.batch_errors)
                .filter(|(a, b)| a <= b)
                .count();
            wins as f64 / req.batches as f64
        });
        summaries.push(MetricSummary {
            metric: u.name.clone(),
            exponent_bits: exponent,
            trials: req.trials,
            decoded,
            empty_subcodes: reports.iter().map(|r| r.empty_subcodes).sum(),
            errors,
            tie_errors: reports.iter().map(|r| r.tie_errors).sum(),
            empirical_exponent: log2_pe.map(|v| v / req.n as f64),
            insufficient_events: errors < mismatch_exponent::sim::MIN_ERROR_EVENTS,
            batch_errors,
            paired_not_worse,
            batches: reports.iter().map(report_value).collect(),
        });
    }
    if let Some(cc) = er_cc_dual(&ch, &p, &rp).ok().map(|e| e.value_bits) {
        log::info!("cc exponent at R = {}: {cc}", rp.rate_bits);
    }
    emit(out, &json(&json!({ "config": config, "results": summaries })))
}

pub fn probe_independence(
    n: usize,
    m: usize,
    r_fec: f64,
    samples: usize,
    seed: u64,
    offset: &str,
    out: Option<&Path>,
) -> Result<()> {
    let offset = parse_offset(offset)?;
    let params = CodeParams::new(n, m, r_fec)?;
    let config = json!({
        "command": "probe independence",
        "code": params,
        "samples": samples,
        "seed": seed,
        "offset": offset,
    });
    let report = independence_probe(&params, samples, seed, offset)?;
    emit(
        out,
        &json(&json!({ "config": config, "passed": report.passed(), "report": report })),
    )
}

pub struct UnionRequest {
    pub channel: PathBuf,
    pub n: usize,
    pub r_fec: f64,
    pub metric: String,
    pub pairs: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub tol: Vec<String>,
}

pub fn probe_union(req: &UnionRequest, out: Option<&Path>) -> Result<()> {
    let choices = MetricChoice::parse_list(&req.metric)?;
    let [choice] = choices.as_slice() else {
        return Err(Error::InvalidMetric("probe union takes a single metric".into()));
    };
    let opts = resolve_tolerances(&req.tol)?;
    let (ch, p) = load_channel(&req.channel)?;
    let m = bits_per_symbol(&ch)?;
    let params = CodeParams::new(req.n, m as usize, req.r_fec)?;
    let rp = RatePoint::from_code(&p, m, req.r_fec)?;
    let config = json!({
        "command": "probe union",
        "channel": channel_config(&req.channel, &ch, &p),
        "code": params,
        "metric": choice,
        "pairs": req.pairs,
        "mc_samples": req.mc_samples,
        "seed": req.seed,
        "tolerances": opts,
    });
    let u = resolve_metric(choice, &ch, &p, &rp, &opts)?;
    let report = union_bound_probe(&ch, &p, &params, &u, req.pairs, req.mc_samples, req.seed)?;
    emit(
        out,
        &json(&json!({ "config": config, "all_within": report.all_within(), "report": report })),
    )
}
