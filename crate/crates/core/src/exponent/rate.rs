use serde::Serialize;

use crate::dmc::InputDist;
use crate::error::{Error, Result};

/// An information rate `R` together with the linear-code parameters it
/// corresponds to, `R = H(P_X) - m (1 - r_fec)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub rate_bits: f64,
    /// FEC code rate. Only rates in `(H(P_X) - m, H(P_X)]` map to
    /// `r_fec in (0, 1]`; other rates keep the formal value.
    pub r_fec: f64,
    pub m: u32,
}

impl RatePoint {
    /// The rate carried by the constant-composition subcode of a binary linear
    /// code of rate `r_fec` with `m` bits per symbol.
    pub fn from_code(p: &InputDist, m: u32, r_fec: f64) -> Result<Self> {
        if !(r_fec > 0.0 && r_fec <= 1.0) {
            return Err(Error::InvalidRate(format!("r_fec = {r_fec} is outside (0, 1]")));
        }
        let rate_bits = p.entropy_bits() - m as f64 * (1.0 - r_fec);
        if rate_bits < 0.0 {
            return Err(Error::InvalidRate(format!(
                "r_fec = {r_fec} gives negative rate {rate_bits}"
            )));
        }
        Ok(Self { rate_bits, r_fec, m })
    }

    /// A rate given directly in bits per channel use.
    pub fn from_rate(p: &InputDist, m: u32, rate_bits: f64) -> Result<Self> {
        if !(rate_bits >= 0.0 && rate_bits.is_finite()) {
            return Err(Error::InvalidRate(format!("R = {rate_bits} must be finite and >= 0")));
        }
        let r_fec = 1.0 - (p.entropy_bits() - rate_bits) / m as f64;
        Ok(Self { rate_bits, r_fec, m })
    }

    /// True when a binary linear code of rate in `(0, 1]` realizes this rate.
    pub fn is_realizable(&self) -> bool {
        self.r_fec > 0.0 && self.r_fec <= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_input_rate_is_m_r_fec() {
        let p = InputDist::uniform(2);
        let r = RatePoint::from_code(&p, 1, 0.5).unwrap();
        assert!((r.rate_bits - 0.5).abs() < 1e-15);
        let p = InputDist::uniform(4);
        let r = RatePoint::from_code(&p, 2, 0.75).unwrap();
        assert!((r.rate_bits - 1.5).abs() < 1e-15);
    }

    #[test]
    fn shaped_input_loses_rate() {
        let p = InputDist::new(vec![0.05, 0.45, 0.45, 0.05]).unwrap();
        let r = RatePoint::from_code(&p, 2, 0.75).unwrap();
        assert!(r.rate_bits < 2.0 * 0.75);
        let back = RatePoint::from_rate(&p, 2, r.rate_bits).unwrap();
        assert!((back.r_fec - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = InputDist::uniform(2);
        assert!(RatePoint::from_code(&p, 1, 0.0).is_err());
        assert!(RatePoint::from_code(&p, 1, 1.5).is_err());
        assert!(RatePoint::from_rate(&p, 1, -0.1).is_err());
        assert!(RatePoint::from_rate(&p, 1, f64::NAN).is_err());
    }
}
