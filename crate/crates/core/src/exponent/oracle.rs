use super::{Diagnostics, ExponentResult, RatePoint};
use crate::dmc::{DecodingMetric, Dmc, InputDist};
use crate::error::{Error, Result};

/// Largest `outer grid size x inner grid size` product the oracle accepts.
pub const ORACLE_WORK_CAP: f64 = 5e8;

/// All points of the `dim`-simplex whose coordinates are multiples of `1/steps`.
fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, dim: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if dim == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, dim - 1, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(steps, dim, steps, &mut Vec::with_capacity(dim), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn entropy_bits(q: &[f64]) -> f64 {
    q.iter().map(|&v| crate::dmc::neg_p_log2_p(v)).sum()
}

/// Brute-force evaluation of the type-class expression for the mismatched
/// exponent,
///
/// `min_{Q_{Y|X}} D(Q || W | P_X) + [H(P_X) - R - max_{Q_{X'|Y} in E} H_Q(X'|Y)]_+`
///
/// where `E` holds the conditionals `Q_{X'|Y}` (with no constraint on the
/// `X'` marginal) whose expected log-metric under `Q_Y x Q_{X'|Y}` is at
/// least that of `Q_{XY}`. Both optimizations run over simplex grids of
/// spacing `grid_step`; the result is an upper bound on the true minimum up
/// to the inner-grid resolution, accurate to `O(grid_step)`.
pub fn er_mismatch_primal_oracle(
    ch: &Dmc,
    p: &InputDist,
    u: &DecodingMetric,
    rate: &RatePoint,
    grid_step: f64,
) -> Result<ExponentResult> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidRate(format!("grid step {grid_step} not in (0, 1]")));
    }
    if p.len() != ch.input_size() {
        return Err(Error::DimensionMismatch("P_X and channel disagree".into()));
    }
    u.check_channel(ch)?;
    let (nx, ny) = (ch.input_size(), ch.output_size());
    let steps = (1.0 / grid_step).round() as usize;
    let active: Vec<usize> = p.support().collect();
    let outer = binomial(steps + ny - 1, ny - 1).powi(active.len() as i32);
    let inner = binomial(steps + nx - 1, nx - 1).powi(ny as i32);
    if outer * inner > ORACLE_WORK_CAP {
        return Err(Error::DimensionTooLarge(format!(
            "oracle grid of {:.3e} points exceeds cap {ORACLE_WORK_CAP:.1e}",
            outer * inner
        )));
    }

    let ln_u: Vec<f64> = u.ln_table();
    let row_grid = simplex_grid(ny, steps);
    let col_grid = simplex_grid(nx, steps);
    // Per output y: (expected log-metric, entropy) of each candidate Q_{X'|Y=y},
    // keeping only the Pareto frontier.
    let frontiers: Vec<Vec<(f64, f64)>> = (0..ny)
        .map(|y| {
            let mut pts: Vec<(f64, f64)> = col_grid
                .iter()
                .map(|q| {
                    let s: f64 = q
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v > 0.0)
                        .map(|(x, v)| v * ln_u[x * ny + y])
                        .sum();
                    (s, entropy_bits(q))
                })
                .collect();
            pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
            let mut front = Vec::new();
            let mut best_h = f64::NEG_INFINITY;
            for pt in pts {
                if pt.1 > best_h {
                    best_h = pt.1;
                    front.push(pt);
                }
            }
            front
        })
        .collect();

    // Rows of Q_{Y|X} allowed for each active input: those absolutely
    // continuous with respect to W(.|x), with their divergence contribution.
    let rows: Vec<Vec<(usize, f64)>> = active
        .iter()
        .map(|&x| {
            row_grid
                .iter()
                .enumerate()
                .filter_map(|(i, q)| {
                    let mut d = 0.0;
                    for (y, &qv) in q.iter().enumerate() {
                        if qv > 0.0 {
                            let w = ch.w(x, y);
                            if w == 0.0 {
                                return None;
                            }
                            d += qv * (qv / w).log2();
                        }
                    }
                    Some((i, d))
                })
                .collect()
        })
        .collect();

    let slack = p.entropy_bits() - rate.rate_bits;
    let mut best = f64::INFINITY;
    let mut best_q = vec![0.0; nx * ny];
    let mut choice = vec![0usize; active.len()];
    let mut evaluations = 0usize;
    let mut q_y = vec![0.0; ny];
    let mut a = vec![0.0; ny];
    'outer: loop {
        let mut d = 0.0;
        q_y.iter_mut().for_each(|v| *v = 0.0);
        let mut threshold = 0.0;
        for (j, &x) in active.iter().enumerate() {
            let (gi, dx) = rows[j][choice[j]];
            d += p.p(x) * dx;
            for (y, &qv) in row_grid[gi].iter().enumerate() {
                if qv > 0.0 {
                    q_y[y] += p.p(x) * qv;
                    threshold += p.p(x) * qv * ln_u[x * ny + y];
                }
            }
        }
        if d < best {
            a.copy_from_slice(&q_y);
            let h = max_conditional_entropy(&frontiers, &a, threshold);
            evaluations += 1;
            let value = d + (slack - h).max(0.0);
            if value < best {
                best = value;
                best_q = ch.table().to_vec();
                for (j, &x) in active.iter().enumerate() {
                    let gi = rows[j][choice[j]].0;
                    best_q[x * ny..(x + 1) * ny].copy_from_slice(&row_grid[gi]);
                }
            }
        }
        for j in 0..active.len() {
            choice[j] += 1;
            if choice[j] < rows[j].len() {
                continue 'outer;
            }
            choice[j] = 0;
        }
        break;
    }

    Ok(ExponentResult {
        value_bits: best.max(0.0),
        rho_star: f64::NAN,
        theta_star: None,
        theta_at_boundary: false,
        output_dist: None,
        conditional: Some(best_q),
        diagnostics: Diagnostics {
            evaluations,
            iterations: 0,
            objective_gap: grid_step,
        },
    })
}

/// `max sum_y a_y h_y` subject to `sum_y a_y s_y >= threshold`, one frontier
/// point `(s_y, h_y)` per output. Outputs with `a_y = 0` do not contribute.
fn max_conditional_entropy(frontiers: &[Vec<(f64, f64)>], a: &[f64], threshold: f64) -> f64 {
    fn rec(fr: &[Vec<(f64, f64)>], a: &[f64], y: usize, s: f64, h: f64, threshold: f64, best: &mut f64) {
        if y == fr.len() {
            if s >= threshold - 1e-12 * threshold.abs().max(1.0) && h > *best {
                *best = h;
            }
            return;
        }
        if a[y] == 0.0 {
            rec(fr, a, y + 1, s, h, threshold, best);
            return;
        }
        for &(sy, hy) in &fr[y] {
            rec(fr, a, y + 1, s + a[y] * sy, h + a[y] * hy, threshold, best);
        }
    }
    let mut best = f64::NEG_INFINITY;
    rec(frontiers, a, 0, 0.0, 0.0, threshold, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::ml_metric;

    #[test]
    fn grid_sizes() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 4).len(), 15);
        assert_eq!(binomial(6, 2), 15.0);
    }

    #[test]
    fn constant_metric_gives_zero() {
        let ch = Dmc::bsc(0.2).unwrap();
        let p = InputDist::uniform(2);
        let u = DecodingMetric::from_rows("flat", &[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let rp = RatePoint::from_rate(&p, 1, 0.1).unwrap();
        let e = er_mismatch_primal_oracle(&ch, &p, &u, &rp, 0.05).unwrap();
        assert_eq!(e.value_bits, 0.0);
    }

    #[test]
    fn rejects_large_grids() {
        let (ch, p) = crate::dmc::quantized_4ask();
        let rp = RatePoint::from_rate(&p, 2, 0.2).unwrap();
        let err = er_mismatch_primal_oracle(&ch, &p, &ml_metric(&ch), &rp, 1e-2).unwrap_err();
        assert!(matches!(err, Error::DimensionTooLarge(_)));
    }
}
