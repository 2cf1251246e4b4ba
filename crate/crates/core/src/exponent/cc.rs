use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bfgs;
use super::{Diagnostics, ExponentResult, RatePoint, LN2, RHO_GRID_POINTS};
use crate::dmc::{mutual_information, Dmc, InputDist};
use crate::error::{Error, Result};
use crate::search::{grid_then_golden, linspace};

const SEARCH_TOL: f64 = 1e-10;
const V_TOL: f64 = 1e-15;
const V_MAX_ITER: usize = 1_000_000;

/// `G(V, rho) = -(1+rho) sum_x P(x) log2 sum_y (W(y|x) V(y)^rho)^{1/(1+rho)} - rho R`.
pub fn cc_dual_objective(ch: &Dmc, p: &InputDist, rate: &RatePoint, v: &[f64], rho: f64) -> f64 {
    let s = rho / (1.0 + rho);
    let e = 1.0 / (1.0 + rho);
    let mut acc = 0.0;
    for x in p.support() {
        let inner: f64 = ch
            .row(x)
            .iter()
            .zip(v)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, vy)| w.powf(e) * vy.powf(s))
            .sum();
        acc += p.p(x) * inner.ln();
    }
    -(1.0 + rho) * acc / LN2 - rho * rate.rate_bits
}

/// `min_V G(V, rho)` for one `rho`, with its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CcInner {
    pub value_bits: f64,
    pub v: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes [`cc_dual_objective`] over output distributions `V` for fixed
/// `rho` by alternating maximization: the companion channel
/// `W~(y|x) ∝ W(y|x)^{1/(1+rho)} V(y)^{rho/(1+rho)}` is optimal for `V`, and
/// the output marginal of `P_X x W~` is optimal for `W~`.
pub fn cc_min_over_v(
    ch: &Dmc,
    p: &InputDist,
    rate: &RatePoint,
    rho: f64,
    warm_start: Option<&[f64]>,
) -> Result<CcInner> {
    let ny = ch.output_size();
    let e = 1.0 / (1.0 + rho);
    let s = rho / (1.0 + rho);
    let a: Vec<f64> = ch.table().iter().map(|w| w.powf(e)).collect();
    let support: Vec<(usize, f64)> = p.support().map(|x| (x, p.p(x))).collect();

    let mut v = match warm_start {
        Some(w) if w.len() == ny => w.to_vec(),
        _ => crate::dmc::output_distribution(p, ch),
    };
    let mut next = vec![0.0; ny];
    let mut vs = vec![0.0; ny];
    let mut iterations = 0;
    loop {
        for y in 0..ny {
            vs[y] = if v[y] > 0.0 {
                v[y].powf(s)
            } else if s == 0.0 {
                1.0
            } else {
                0.0
            };
        }
        next.iter_mut().for_each(|n| *n = 0.0);
        for &(x, px) in &support {
            let row = &a[x * ny..(x + 1) * ny];
            let z: f64 = row.iter().zip(&vs).map(|(a, b)| a * b).sum();
            for y in 0..ny {
                next[y] += px * row[y] * vs[y] / z;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|n| *n /= total);
        let change = v.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut v, &mut next);
        iterations += 1;
        if change < V_TOL {
            break;
        }
        if iterations >= V_MAX_ITER {
            return Err(Error::NonConvergent {
                iterations,
                residual: change,
            });
        }
    }
    let value_bits = cc_dual_objective(ch, p, rate, &v, rho);
    Ok(CcInner {
        value_bits,
        v,
        iterations,
    })
}

/// The constant-composition random coding exponent in output-distribution
/// form, `min_V max_{rho in [0,1]} G(V, rho)`.
///
/// Computed as `max_rho min_V` (the objective is convex in `V` and concave in
/// `rho`); the duality gap `max_rho G(V*, rho) - min_V G(V, rho*)` is
/// reported as the certificate.
pub fn er_cc_dual(ch: &Dmc, p: &InputDist, rate: &RatePoint) -> Result<ExponentResult> {
    if p.len() != ch.input_size() {
        return Err(Error::DimensionMismatch("P_X and channel disagree".into()));
    }
    let grid = linspace(0.0, 1.0, RHO_GRID_POINTS);
    let mut warm: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut failure = None;
    let m = grid_then_golden(
        |rho| match cc_min_over_v(ch, p, rate, rho, warm.as_deref()) {
            Ok(inner) => {
                iterations += inner.iterations;
                warm = Some(inner.v);
                inner.value_bits
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        &grid,
        SEARCH_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let inner = cc_min_over_v(ch, p, rate, m.arg, warm.as_deref())?;
    let value = inner.value_bits.max(m.value);
    let upper = grid_then_golden(|rho| cc_dual_objective(ch, p, rate, &inner.v, rho), &grid, SEARCH_TOL);
    Ok(ExponentResult {
        value_bits: value.max(0.0),
        rho_star: m.arg,
        theta_star: None,
        theta_at_boundary: false,
        output_dist: Some(inner.v),
        conditional: None,
        diagnostics: Diagnostics {
            evaluations: m.evaluations + upper.evaluations,
            iterations: iterations + inner.iterations,
            objective_gap: (upper.value - value).max(0.0),
        },
    })
}

/// `min_{Q_{Y|X}} D(Q || W | P_X) + lambda I_Q(X;Y)` with `Q` restricted to
/// the support of `W`. Rows are parameterized by softmax logits.
struct PrimalProblem<'a> {
    ch: &'a Dmc,
    /// `(x, P(x), outputs with W(y|x) > 0)` for inputs of positive mass.
    rows: Vec<(usize, f64, Vec<usize>)>,
    offsets: Vec<usize>,
    dim: usize,
}

impl<'a> PrimalProblem<'a> {
    fn new(ch: &'a Dmc, p: &'a InputDist) -> Self {
        let rows: Vec<(usize, f64, Vec<usize>)> = p
            .support()
            .map(|x| {
                let ys = (0..ch.output_size()).filter(|&y| ch.w(x, y) > 0.0).collect();
                (x, p.p(x), ys)
            })
            .collect();
        let mut offsets = Vec::with_capacity(rows.len());
        let mut dim = 0;
        for (_, _, ys) in &rows {
            offsets.push(dim);
            dim += ys.len();
        }
        Self { ch, rows, offsets, dim }
    }

    /// Logits such that `Q = W`.
    fn logits_of_channel(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (r, (x, _, ys)) in self.rows.iter().enumerate() {
            for (k, &y) in ys.iter().enumerate() {
                out[self.offsets[r] + k] = self.ch.w(*x, y).ln();
            }
        }
        out
    }

    /// Full x-major `Q_{Y|X}`; rows of zero-mass inputs copy `W`.
    fn conditional(&self, logits: &[f64]) -> Vec<f64> {
        let ny = self.ch.output_size();
        let mut q = self.ch.table().to_vec();
        for (r, (x, _, ys)) in self.rows.iter().enumerate() {
            let l = &logits[self.offsets[r]..self.offsets[r] + ys.len()];
            let top = l.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
            let z: f64 = l.iter().map(|v| (v - top).exp()).sum();
            q[x * ny..(x + 1) * ny].iter_mut().for_each(|v| *v = 0.0);
            for (k, &y) in ys.iter().enumerate() {
                q[x * ny + y] = (l[k] - top).exp() / z;
            }
        }
        q
    }

    /// `(D, I)` in nats at `q`.
    fn divergence_and_information(&self, q: &[f64]) -> (f64, f64) {
        let ny = self.ch.output_size();
        let mut qy = vec![0.0; ny];
        for (x, px, ys) in &self.rows {
            for &y in ys {
                qy[y] += px * q[x * ny + y];
            }
        }
        let (mut d, mut i) = (0.0, 0.0);
        for (x, px, ys) in &self.rows {
            for &y in ys {
                let qv = q[x * ny + y];
                if qv > 0.0 {
                    d += px * qv * (qv / self.ch.w(*x, y)).ln();
                    i += px * qv * (qv / qy[y]).ln();
                }
            }
        }
        (d.max(0.0), i.max(0.0))
    }

    fn value_and_gradient(&self, logits: &[f64], lambda: f64, grad: &mut [f64]) -> f64 {
        let ny = self.ch.output_size();
        let q = self.conditional(logits);
        let mut qy = vec![0.0; ny];
        for (x, px, ys) in &self.rows {
            for &y in ys {
                qy[y] += px * q[x * ny + y];
            }
        }
        let mut f = 0.0;
        for (r, (x, px, ys)) in self.rows.iter().enumerate() {
            let off = self.offsets[r];
            let mut partial = Vec::with_capacity(ys.len());
            for &y in ys {
                let qv = q[x * ny + y];
                let lq = qv.ln();
                let ld = lq - self.ch.w(*x, y).ln();
                let li = lq - qy[y].ln();
                if qv > 0.0 {
                    f += px * qv * (ld + lambda * li);
                }
                partial.push(px * (ld + 1.0 + lambda * li));
            }
            let mean: f64 = ys.iter().zip(&partial).map(|(&y, g)| q[x * ny + y] * g).sum();
            for (k, &y) in ys.iter().enumerate() {
                let qv = q[x * ny + y];
                grad[off + k] = if qv > 0.0 { qv * (partial[k] - mean) } else { 0.0 };
            }
        }
        f
    }

    /// Largest spread, over rows, of the partial derivatives in `Q`. The
    /// minimizer is interior, so this vanishes there; a softmax that has
    /// pushed some `Q(y|x)` to zero shows up here even though the logit
    /// gradient is tiny.
    fn stationarity(&self, logits: &[f64], lambda: f64) -> f64 {
        let ny = self.ch.output_size();
        let q = self.conditional(logits);
        let mut qy = vec![0.0; ny];
        for (x, px, ys) in &self.rows {
            for &y in ys {
                qy[y] += px * q[x * ny + y];
            }
        }
        let mut worst: f64 = 0.0;
        for (x, _, ys) in &self.rows {
            let partial: Vec<f64> = ys
                .iter()
                .map(|&y| {
                    let lq = q[x * ny + y].ln();
                    lq - self.ch.w(*x, y).ln() + lambda * (lq - qy[y].ln())
                })
                .collect();
            let (lo, hi) = partial
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            worst = worst.max(hi - lo);
        }
        worst
    }

    /// Logits of the even mixture of `Q(logits)` and the uniform row on
    /// each support.
    fn recentre(&self, logits: &[f64]) -> Vec<f64> {
        let ny = self.ch.output_size();
        let q = self.conditional(logits);
        let mut out = vec![0.0; self.dim];
        for (r, (x, _, ys)) in self.rows.iter().enumerate() {
            for (k, &y) in ys.iter().enumerate() {
                out[self.offsets[r] + k] = (0.5 * q[x * ny + y] + 0.5 / ys.len() as f64).ln();
            }
        }
        out
    }

    fn solve(&self, lambda: f64, mut start: Vec<f64>) -> Result<bfgs::BfgsOutcome> {
        let (mut iterations, mut evaluations) = (0, 0);
        let mut last = (0, f64::INFINITY);
        for _ in 0..PRIMAL_RECENTRES {
            let mut out = bfgs::minimize(
                |l, g| self.value_and_gradient(l, lambda, g),
                start,
                PRIMAL_GTOL,
                PRIMAL_MAX_ITER,
            );
            iterations += out.iterations;
            evaluations += out.evaluations;
            let spread = self.stationarity(&out.x, lambda);
            if out.grad_norm <= PRIMAL_ACCEPT_GRAD && spread <= PRIMAL_STATIONARITY {
                out.iterations = iterations;
                out.evaluations = evaluations;
                return Ok(out);
            }
            log::debug!("primal solve at lambda = {lambda} stopped with stationarity {spread:e}; recentring");
            last = (iterations, out.grad_norm.max(spread));
            start = self.recentre(&out.x);
        }
        Err(Error::NonConvergent {
            iterations: last.0,
            residual: last.1,
        })
    }
}

const PRIMAL_GTOL: f64 = 1e-12;
/// Gradient sup-norm below which a stalled solve still counts as converged.
const PRIMAL_ACCEPT_GRAD: f64 = 1e-8;
const PRIMAL_MAX_ITER: usize = 20_000;
/// Bound on [`PrimalProblem::stationarity`] for an accepted solve.
const PRIMAL_STATIONARITY: f64 = 1e-4;
const PRIMAL_RECENTRES: usize = 4;
const PRIMAL_RESTARTS: usize = 5;
const RESTART_AGREEMENT: f64 = 1e-7;

struct PrimalSolve {
    logits: Vec<f64>,
    spread_bits: f64,
    iterations: usize,
    evaluations: usize,
}

fn solve_with_restarts(
    prob: &PrimalProblem<'_>,
    lambda: f64,
    start: Vec<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<PrimalSolve> {
    let mut best = prob.solve(lambda, start)?;
    let (mut lo, mut hi) = (best.f, best.f);
    let (mut iterations, mut evaluations) = (best.iterations, best.evaluations);
    for _ in 0..PRIMAL_RESTARTS {
        let x0: Vec<f64> = (0..prob.dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let out = prob.solve(lambda, x0)?;
        iterations += out.iterations;
        evaluations += out.evaluations;
        lo = lo.min(out.f);
        hi = hi.max(out.f);
        if out.f < best.f {
            best = out;
        }
    }
    let spread_bits = (hi - lo) / LN2;
    if spread_bits > RESTART_AGREEMENT {
        return Err(Error::SolverDisagreement { spread: spread_bits });
    }
    Ok(PrimalSolve {
        logits: best.x,
        spread_bits,
        iterations,
        evaluations,
    })
}

/// The constant-composition random coding exponent in its original form,
/// `min_{Q_{Y|X}} D(Q_{Y|X} || W | P_X) + [I_Q(X;Y) - R]_+`.
///
/// The objective is the maximum of the smooth convex functions `D` and
/// `D + I - R`. Its minimizer is either the minimizer of `D + I - R` (when
/// that point has `I >= R`), `Q = W` (when `I(X;Y) <= R`), or lies on the
/// kink `I_Q = R`, where it minimizes `D + lambda I` for the multiplier
/// `lambda in (0, 1)` located by bisection. The returned value is the
/// objective evaluated directly at the final `Q`.
pub fn er_cc_primal(ch: &Dmc, p: &InputDist, rate: &RatePoint) -> Result<ExponentResult> {
    let r = rate.rate_bits;
    let mi = mutual_information(p, ch)?;
    let prob = PrimalProblem::new(ch, p);
    let evaluate = |logits: &[f64]| {
        let q = prob.conditional(logits);
        let (d, i) = prob.divergence_and_information(&q);
        let (d, i) = (d / LN2, i / LN2);
        (d + (i - r).max(0.0), i, q)
    };
    if mi <= r {
        let mut out = ExponentResult::scalar(0.0, 0.0);
        out.conditional = Some(ch.table().to_vec());
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cc);
    let mut diag = Diagnostics::default();
    let record = |s: &PrimalSolve, diag: &mut Diagnostics| {
        diag.iterations += s.iterations;
        diag.evaluations += s.evaluations;
        diag.objective_gap = diag.objective_gap.max(s.spread_bits);
    };

    let at_one = solve_with_restarts(&prob, 1.0, prob.logits_of_channel(), &mut rng)?;
    record(&at_one, &mut diag);
    let (value, info, q) = evaluate(&at_one.logits);
    if info >= r {
        return Ok(ExponentResult {
            value_bits: value,
            rho_star: 1.0,
            theta_star: None,
            theta_at_boundary: false,
            output_dist: None,
            conditional: Some(q),
            diagnostics: diag,
        });
    }

    // I(Q_lambda) decreases from I(X;Y) > R at lambda = 0 to below R at 1.
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut hi_logits = at_one.logits;
    let mut lo_logits = prob.logits_of_channel();
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let out = prob.solve(mid, lo_logits.clone())?;
        diag.iterations += out.iterations;
        diag.evaluations += out.evaluations;
        let (_, info, _) = evaluate(&out.x);
        if info > r {
            lo = mid;
            lo_logits = out.x;
        } else {
            hi = mid;
            hi_logits = out.x;
        }
    }
    let polished = solve_with_restarts(&prob, hi, hi_logits.clone(), &mut rng)?;
    record(&polished, &mut diag);
    let candidates = [lo_logits, hi_logits, polished.logits];
    let (value, _, q) = candidates
        .iter()
        .map(|l| evaluate(l))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("nonempty");
    Ok(ExponentResult {
        value_bits: value,
        rho_star: 0.5 * (lo + hi),
        theta_star: None,
        theta_at_boundary: false,
        output_dist: None,
        conditional: Some(q),
        diagnostics: diag,
    })
}
