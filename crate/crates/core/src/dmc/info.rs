use super::{neg_p_log2_p, ConditionalDist, Direction, Dmc, InputDist};
use crate::error::{Error, Result};

/// `H(P_X)` in bits.
pub fn entropy(p: &InputDist) -> f64 {
    p.probs().iter().copied().map(neg_p_log2_p).sum()
}

pub(crate) fn check_dims(p: &InputDist, ch: &Dmc) -> Result<()> {
    if p.len() != ch.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "P_X has {} entries, channel has {} inputs",
            p.len(),
            ch.input_size()
        )));
    }
    Ok(())
}

/// Output marginal `P_Y(y) = sum_x P_X(x) W(y|x)`.
pub fn output_distribution(p: &InputDist, ch: &Dmc) -> Vec<f64> {
    let mut py = vec![0.0; ch.output_size()];
    for x in p.support() {
        for (y, &w) in ch.row(x).iter().enumerate() {
            py[y] += p.p(x) * w;
        }
    }
    py
}

/// `I(X;Y)` in bits for `P_X x W`.
pub fn mutual_information(p: &InputDist, ch: &Dmc) -> Result<f64> {
    check_dims(p, ch)?;
    let py = output_distribution(p, ch);
    let mut mi = 0.0;
    for x in p.support() {
        for (y, &w) in ch.row(x).iter().enumerate() {
            if w > 0.0 {
                mi += p.p(x) * w * (w / py[y]).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Posterior `P_{X|Y}` induced by `P_X x W`, rows indexed by `y`.
///
/// Outputs of zero probability get the prior as their row; no decision ever
/// depends on it.
pub fn posterior(p: &InputDist, ch: &Dmc) -> Result<ConditionalDist> {
    check_dims(p, ch)?;
    let (nx, ny) = (ch.input_size(), ch.output_size());
    let py = output_distribution(p, ch);
    let mut q = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            q[y * nx + x] = if py[y] > 0.0 {
                p.p(x) * ch.w(x, y) / py[y]
            } else {
                p.p(x)
            };
        }
    }
    ConditionalDist::new(Direction::XGivenY, ny, nx, q)
}

/// `D(Q_{Y|X} || W | P_X)` in bits; `+inf` when `Q` puts mass where `W`
/// does not on an input of positive probability.
pub fn weighted_kl(q: &ConditionalDist, ch: &Dmc, p: &InputDist) -> Result<f64> {
    check_dims(p, ch)?;
    if q.direction() != Direction::YGivenX || q.rows() != ch.input_size() || q.cols() != ch.output_size() {
        return Err(Error::DimensionMismatch(
            "weighted_kl needs a Q_{Y|X} table shaped like the channel".into(),
        ));
    }
    let mut d = 0.0;
    for x in p.support() {
        let mut dx = 0.0;
        for y in 0..ch.output_size() {
            let (qv, w) = (q.q(x, y), ch.w(x, y));
            if qv > 0.0 {
                if w == 0.0 {
                    return Ok(f64::INFINITY);
                }
                dx += qv * (qv / w).log2();
            }
        }
        d += p.p(x) * dx;
    }
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::quantized_4ask;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&InputDist::uniform(4)), 2.0);
        assert_eq!(entropy(&InputDist::point_mass(4, 0)), 0.0);
        let p = InputDist::new(vec![0.05, 0.45, 0.45, 0.05]).unwrap();
        // 40-digit evaluation: 1.468995593589281221...
        assert!((entropy(&p) - 1.468_995_593_589_281_2).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_examples() {
        let (ch, p) = quantized_4ask();
        let mi = mutual_information(&p, &ch).unwrap();
        assert!((mi - 0.5).abs() <= 5e-3, "{mi}");

        let id = Dmc::identity(4).unwrap();
        let p = InputDist::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!((mutual_information(&p, &id).unwrap() - p.entropy_bits()).abs() < 1e-12);

        let flat = Dmc::from_rows(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert!(mutual_information(&InputDist::uniform(2), &flat).unwrap().abs() < 1e-15);
    }

    #[test]
    fn weighted_kl_examples() {
        let ch = Dmc::bsc(0.1).unwrap();
        let p = InputDist::uniform(2);
        let same = ConditionalDist::from_rows(Direction::YGivenX, &ch.rows()).unwrap();
        assert_eq!(weighted_kl(&same, &ch, &p).unwrap(), 0.0);

        let q = ConditionalDist::from_rows(Direction::YGivenX, &[vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        // 40-digit evaluation of the defining sum.
        let expected = 0.064_059_998_846_150_109_67;
        assert!((weighted_kl(&q, &ch, &p).unwrap() - expected).abs() < 1e-15);

        let noiseless = Dmc::identity(2).unwrap();
        assert_eq!(weighted_kl(&q, &noiseless, &p).unwrap(), f64::INFINITY);
        // The offending row carries no mass: no divergence contribution.
        let skewed = InputDist::new(vec![0.0, 1.0]).unwrap();
        let q = ConditionalDist::from_rows(Direction::YGivenX, &[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(weighted_kl(&q, &noiseless, &skewed).unwrap(), 0.0);
    }

    #[test]
    fn posterior_rows_are_bayes_rule() {
        let (ch, p) = quantized_4ask();
        let post = posterior(&p, &ch).unwrap();
        let py = output_distribution(&p, &ch);
        for y in 0..4 {
            for x in 0..4 {
                let joint = p.p(x) * ch.w(x, y);
                assert!((post.q(y, x) * py[y] - joint).abs() < 1e-15);
            }
        }
    }
}
