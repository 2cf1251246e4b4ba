//! One-dimensional maximization of unimodal (typically concave) functions.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Maximum {
    pub arg: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Index of the best seed grid point.
    pub grid_index: usize,
    /// Width of the final golden-section bracket.
    pub width: f64,
}

/// Golden-section maximization on `[lo, hi]`, stopping once the bracket is
/// narrower than `tol`. Returns the best point seen, endpoints excluded.
pub(crate) fn golden_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, usize, f64) {
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut evals = 2;
    while hi - lo > tol && evals < 200 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
        evals += 1;
    }
    let width = hi - lo;
    if fa >= fb {
        (a, fa, evals, width)
    } else {
        (b, fb, evals, width)
    }
}

/// Evaluates `f` on an ascending seed grid, then refines by golden-section
/// search between the neighbours of the best grid point.
///
/// Ties on the grid resolve to the smallest argument, and the refined point
/// replaces the grid point only on strict improvement, so that boundary
/// maxima (such as a flat optimum at the left end) are reported exactly.
pub(crate) fn grid_then_golden(mut f: impl FnMut(f64) -> f64, grid: &[f64], tol: f64) -> Maximum {
    assert!(!grid.is_empty());
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    let mut values = Vec::with_capacity(grid.len());
    for (i, &g) in grid.iter().enumerate() {
        let v = f(g);
        values.push(v);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let mut out = Maximum {
        arg: grid[best],
        value: best_v,
        evaluations: grid.len(),
        grid_index: best,
        width: 0.0,
    };
    if grid.len() < 2 || best_v == f64::NEG_INFINITY {
        return out;
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (arg, value, evals, width) = golden_max(&mut f, lo, hi, tol);
    out.evaluations += evals;
    out.width = width;
    if value > best_v {
        out.arg = arg;
        out.value = value;
    }
    out
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let m = grid_then_golden(|x| -(x - 0.3141).powi(2), &linspace(0.0, 1.0, 11), 1e-10);
        assert!((m.arg - 0.3141).abs() < 1e-8);
    }

    #[test]
    fn keeps_left_boundary_exactly() {
        let m = grid_then_golden(|x| -x * x - x, &linspace(0.0, 1.0, 11), 1e-10);
        assert_eq!(m.arg, 0.0);
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn keeps_right_boundary_closely() {
        let m = grid_then_golden(|x| x, &linspace(0.0, 1.0, 11), 1e-10);
        assert_eq!(m.arg, 1.0);
    }
}
