//! Exponent-versus-rate curves for a set of metrics, with the
//! constant-composition exponent as reference.

use rayon::prelude::*;
use serde::Serialize;

use crate::dmc::{DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::exponent::{er_cc_dual, er_mismatch_dual, RatePoint};
use crate::optimizer::{optimize_metric_with, OptimizerOptions};

/// Slack allowed when checking that a curve does not increase with rate.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveMetric {
    Fixed(DecodingMetric),
    /// The rate-dependent optimal metric, recomputed at every rate.
    Optimal,
}

impl CurveMetric {
    pub fn name(&self) -> &str {
        match self {
            CurveMetric::Fixed(u) => &u.name,
            CurveMetric::Optimal => "optimal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveColumn {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub rates: Vec<f64>,
    pub columns: Vec<CurveColumn>,
    pub cc_reference: Vec<f64>,
}

impl ExponentCurve {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// One row per rate, header `rate,<metric>...,cc_reference`, values to
    /// nine significant digits. Each entry of `comments` becomes a leading
    /// `# ` line, so the file can carry the configuration that produced it.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("rate");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push_str(",cc_reference\n");
        for (j, r) in self.rates.iter().enumerate() {
            out.push_str(&format!("{r:.8e}"));
            for c in &self.columns {
                out.push_str(&format!(",{:.8e}", c.values[j]));
            }
            out.push_str(&format!(",{:.8e}\n", self.cc_reference[j]));
        }
        out
    }
}

/// `rates` must be nonempty and strictly ascending.
pub fn check_rate_grid(rates: &[f64]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::InvalidRate("empty rate grid".into()));
    }
    if rates.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidRate("rate grid is not strictly ascending".into()));
    }
    Ok(())
}

/// [`sweep_curve_with`] under default optimizer options.
pub fn sweep_curve(ch: &Dmc, p: &InputDist, metrics: &[CurveMetric], rates: &[f64]) -> Result<ExponentCurve> {
    sweep_curve_with(ch, p, metrics, rates, &OptimizerOptions::default())
}

/// Evaluates every `(metric, rate)` point in parallel. The output order is
/// fixed by the inputs, never by the schedule. Fails on the first point in
/// input order that errors, naming it, and on any column that increases
/// with rate by more than [`MONOTONE_TOL`].
pub fn sweep_curve_with(
    ch: &Dmc,
    p: &InputDist,
    metrics: &[CurveMetric],
    rates: &[f64],
    opts: &OptimizerOptions,
) -> Result<ExponentCurve> {
    check_rate_grid(rates)?;
    let m = ch.bits_per_symbol();
    let points: Vec<RatePoint> = rates
        .iter()
        .map(|&r| RatePoint::from_rate(p, m, r))
        .collect::<Result<_>>()?;
    let tag = |name: &str, rate: f64| {
        let name = name.to_string();
        move |e: Error| Error::CurvePoint {
            metric: name,
            rate,
            source: Box::new(e),
        }
    };

    let cc_reference: Vec<f64> = points
        .par_iter()
        .map(|rp| {
            er_cc_dual(ch, p, rp)
                .map(|e| e.value_bits)
                .map_err(tag("cc_reference", rp.rate_bits))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..metrics.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let rp = &points[j];
            let v = match &metrics[i] {
                CurveMetric::Fixed(u) => er_mismatch_dual(ch, p, u, rp).map(|e| e.value_bits),
                CurveMetric::Optimal => optimize_metric_with(ch, p, rp, opts).map(|o| o.achieved_exponent),
            };
            v.map_err(tag(metrics[i].name(), rp.rate_bits))
        })
        .collect();
    let mut values = values.into_iter();
    let mut columns = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let col: Vec<f64> = values.by_ref().take(points.len()).collect::<Result<_>>()?;
        columns.push(CurveColumn {
            name: metric.name().to_string(),
            values: col,
        });
    }

    let all = columns.iter().map(|c| (c.name.as_str(), &c.values[..]));
    for (name, col) in all.chain(std::iter::once(("cc_reference", &cc_reference[..]))) {
        if let Some(j) = (1..col.len()).find(|&j| col[j] > col[j - 1] + MONOTONE_TOL) {
            return Err(Error::NotMonotone {
                metric: name.to_string(),
                rate: rates[j],
            });
        }
    }
    Ok(ExponentCurve {
        rates: rates.to_vec(),
        columns,
        cc_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::{map_metric, ml_metric, mutual_information, quantized_4ask};

    #[test]
    fn empty_metric_list_gives_reference_only() {
        let (ch, p) = quantized_4ask();
        let c = sweep_curve(&ch, &p, &[], &[0.1, 0.2]).unwrap();
        assert!(c.columns.is_empty());
        assert_eq!(c.cc_reference.len(), 2);
    }

    #[test]
    fn all_achieving_metrics_vanish_at_mutual_information() {
        let (ch, p) = quantized_4ask();
        let mi = mutual_information(&p, &ch).unwrap();
        let metrics = [CurveMetric::Fixed(map_metric(&p, &ch).unwrap()), CurveMetric::Optimal];
        let c = sweep_curve(&ch, &p, &metrics, &[mi]).unwrap();
        assert!(c.columns.iter().all(|col| col.values[0] <= 1e-6));
        assert!(c.cc_reference[0] <= 1e-6);
    }

    #[test]
    fn csv_has_one_row_per_rate() {
        let (ch, p) = quantized_4ask();
        let c = sweep_curve(&ch, &p, &[CurveMetric::Fixed(ml_metric(&ch))], &[0.1, 0.2, 0.3]).unwrap();
        let csv = c.to_csv(&["channel: 4ask".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# channel: 4ask");
        assert_eq!(lines[1], "rate,ML,cc_reference");
        assert_eq!(lines.len(), 5);
        let back: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert!((back - c.cc_reference[1]).abs() <= 1e-8 * c.cc_reference[1]);
    }

    #[test]
    fn rejects_bad_grids_and_names_failing_points() {
        let (ch, p) = quantized_4ask();
        assert!(matches!(sweep_curve(&ch, &p, &[], &[]), Err(Error::InvalidRate(_))));
        assert!(sweep_curve(&ch, &p, &[], &[0.2, 0.1]).is_err());

        let wrong = DecodingMetric::from_rows("wrong", &[vec![1.0], vec![1.0]]).unwrap();
        let metrics = [CurveMetric::Fixed(ml_metric(&ch)), CurveMetric::Fixed(wrong)];
        match sweep_curve(&ch, &p, &metrics, &[0.1]) {
            Err(Error::CurvePoint { metric, .. }) => assert_eq!(metric, "wrong"),
            other => panic!("{other:?}"),
        }
    }
}
