use std::path::{Path, PathBuf};

use mismatch_exponent::dmc::{ChannelSpec, DecodingMetric, Dmc, InputDist};
use mismatch_exponent::optimizer::OptimizerOptions;
use mismatch_exponent::sim::OffsetMode;
use mismatch_exponent::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parsed `min:max:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl RateGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidRate(format!("--rates {text:?}: expected min:max:step"));
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (min, max, step) = (v[0], v[1], v[2]);
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(bad());
        }
        if min < 0.0 {
            return Err(Error::InvalidRate(format!("--rates: min {min} is negative")));
        }
        if min > max {
            return Err(Error::InvalidRate(format!("--rates: min {min} exceeds max {max}")));
        }
        if step <= 0.0 {
            return Err(Error::InvalidRate(format!("--rates: step {step} must be positive")));
        }
        Ok(Self { min, max, step })
    }

    /// `min, min + step, ...` up to `max`, which is included when it lies on
    /// the grid up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// A metric named on the command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    Ml,
    Map,
    Optimal,
    File(PathBuf),
}

impl MetricChoice {
    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        let list: Vec<Self> = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s.to_ascii_lowercase().as_str() {
                "ml" => Self::Ml,
                "map" => Self::Map,
                "optimal" => Self::Optimal,
                _ => Self::File(PathBuf::from(s)),
            })
            .collect();
        if list.is_empty() {
            return Err(Error::InvalidMetric("--metrics is empty".into()));
        }
        for m in &list {
            if let Self::File(path) = m {
                if !path.is_file() {
                    return Err(Error::File {
                        path: path.display().to_string(),
                        message: "not ml, map, optimal, or a readable metric file".into(),
                    });
                }
            }
        }
        Ok(list)
    }
}

/// Metric files hold either a bare metric or the report written by
/// `optimal-metric`, whose `metric` field is used.
#[derive(Deserialize)]
#[serde(untagged)]
enum MetricFile {
    Report { metric: DecodingMetric },
    Bare(DecodingMetric),
}

pub fn load_metric(path: &Path) -> Result<DecodingMetric> {
    let file_err = |message: String| Error::File {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let parsed: MetricFile = serde_json::from_str(&text).map_err(|e| file_err(format!("bad metric JSON: {e}")))?;
    let raw = match parsed {
        MetricFile::Report { metric } | MetricFile::Bare(metric) => metric,
    };
    // Deserialization skips validation; rebuild through the checked constructor.
    DecodingMetric::new(
        raw.name.clone(),
        raw.input_size(),
        raw.output_size(),
        raw.table().to_vec(),
    )
    .map_err(|e| file_err(e.to_string()))
}

pub fn load_channel(path: &Path) -> Result<(Dmc, InputDist)> {
    ChannelSpec::load(path)?.build().map_err(|e| Error::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_offset(text: &str) -> Result<OffsetMode> {
    match text {
        "uniform" => Ok(OffsetMode::Uniform),
        "zero" => Ok(OffsetMode::Zero),
        _ => text
            .strip_prefix("shifted:")
            .and_then(|v| v.parse::<u32>().ok())
            .map(OffsetMode::Shifted)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("--offset {text:?}: expected uniform, zero or shifted:<u32>"))
            }),
    }
}

pub const TOLERANCE_NAMES: [&str; 6] = [
    "fixed_point_tol",
    "fixed_point_max_iter",
    "fixed_point_damping",
    "rho_grid_points",
    "rho_width",
    "saturation_limit",
];

/// Applies `name=value` overrides to the optimizer defaults.
pub fn resolve_tolerances(overrides: &[String]) -> Result<OptimizerOptions> {
    let mut opts = OptimizerOptions::default();
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("--tol {item:?}: expected name=value")))?;
        let bad = || Error::InvalidParameter(format!("--tol {name}: bad value {value:?}"));
        let real = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(bad)
        };
        let count = || value.parse::<usize>().ok().filter(|v| *v > 0).ok_or_else(bad);
        match name {
            "fixed_point_tol" => opts.fixed_point.tol = real()?,
            "fixed_point_max_iter" => opts.fixed_point.max_iter = count()?,
            "fixed_point_damping" => {
                opts.fixed_point.damping = real()?;
                if opts.fixed_point.damping > 1.0 {
                    return Err(bad());
                }
            }
            "rho_grid_points" => {
                opts.rho_grid_points = count()?;
                if opts.rho_grid_points < 3 {
                    return Err(bad());
                }
            }
            "rho_width" => opts.rho_width = real()?,
            "saturation_limit" => opts.saturation_limit = real()?,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "--tol: unknown name {name:?}; known: {}",
                    TOLERANCE_NAMES.join(", ")
                )))
            }
        }
    }
    Ok(opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_max_on_grid() {
        let g = RateGrid::parse("0:0.5:0.05").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 11);
        assert!((pts[10] - 0.5).abs() < 1e-12);
        assert_eq!(RateGrid::parse("0.2:0.2:1").unwrap().points(), vec![0.2]);
    }

    #[test]
    fn grid_rejections() {
        for bad in ["0.5:0.1:0.1", "0:1:0", "0:1", "a:b:c", "-1:1:0.1"] {
            assert!(RateGrid::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tolerance_overrides() {
        let o = resolve_tolerances(&["rho_width=1e-6".into(), "fixed_point_max_iter=50".into()]).unwrap();
        assert_eq!(o.rho_width, 1e-6);
        assert_eq!(o.fixed_point.max_iter, 50);
        assert!(resolve_tolerances(&["bogus=1".into()]).is_err());
        assert!(resolve_tolerances(&["rho_width".into()]).is_err());
        assert!(resolve_tolerances(&["fixed_point_damping=2".into()]).is_err());
    }

    #[test]
    fn offsets() {
        assert_eq!(parse_offset("shifted:5").unwrap(), OffsetMode::Shifted(5));
        assert!(parse_offset("other").is_err());
    }
}
