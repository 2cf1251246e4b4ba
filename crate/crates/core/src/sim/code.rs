use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dmc::InputDist;
use crate::error::{Error, Result};

/// Longest codeword, in bits, the exhaustive decoder accepts.
pub const MAX_CODE_BITS: usize = 24;
/// Largest code dimension the exhaustive decoder accepts.
pub const MAX_DIMENSION: usize = 20;

/// Block length `n` in symbols, `m` bits per symbol, binary code rate
/// `r_fec`, and the resulting dimension `k = round(n m r_fec)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodeParams {
    pub n: usize,
    pub m: usize,
    pub r_fec: f64,
    pub k: usize,
    /// `n m r_fec` was not an integer and has been rounded.
    pub rounded: bool,
}

impl CodeParams {
    pub fn new(n: usize, m: usize, r_fec: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("n and m must be positive".into()));
        }
        if !(0.0..=1.0).contains(&r_fec) {
            return Err(Error::InvalidParameter(format!("r_fec = {r_fec} outside [0, 1]")));
        }
        let bits = n * m;
        if bits > MAX_CODE_BITS {
            return Err(Error::CapViolation(format!(
                "n*m = {bits} exceeds the exhaustive-decoding cap {MAX_CODE_BITS}"
            )));
        }
        let exact = bits as f64 * r_fec;
        let k = exact.round() as usize;
        if k > MAX_DIMENSION {
            return Err(Error::CapViolation(format!("k = {k} exceeds the cap {MAX_DIMENSION}")));
        }
        let rounded = (exact - k as f64).abs() > 1e-9;
        if rounded {
            log::warn!("n*m*r_fec = {exact} is not an integer; using k = {k}");
        }
        Ok(Self {
            n,
            m,
            r_fec,
            k,
            rounded,
        })
    }

    pub fn bits(&self) -> usize {
        self.n * self.m
    }

    pub(crate) fn mask(&self) -> u32 {
        ((1u64 << self.bits()) - 1) as u32
    }
}

/// How the coset offset `v` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OffsetMode {
    /// Uniform, independent of `G`.
    Uniform,
    /// Uniform, then XORed with a fixed vector.
    Shifted(u32),
    /// Always zero: a broken ensemble in which `c(0) = 0`.
    Zero,
}

/// A binary linear code with offset, `c(w) = b(w) G + v` over GF(2).
///
/// Row `j` of `G` and the offset are stored as the low `n m` bits of a
/// `u32`, most significant bit first in the codeword. Bit `j` of the message
/// index `w` is the coefficient of row `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearCodeInstance {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub g: Vec<u32>,
    pub v: u32,
    pub seed: u64,
}

impl LinearCodeInstance {
    pub fn codeword(&self, w: u32) -> u32 {
        let mut c = self.v;
        for (j, row) in self.g.iter().enumerate() {
            if (w >> j) & 1 == 1 {
                c ^= row;
            }
        }
        c
    }

    /// All `2^k` codewords, indexed by message.
    pub fn codewords(&self) -> Vec<u32> {
        let mut out = vec![0u32; 1 << self.k];
        out[0] = self.v;
        for w in 1..out.len() {
            let low = w.trailing_zeros() as usize;
            out[w] = out[w & (w - 1)] ^ self.g[low];
        }
        out
    }

    pub fn message_count(&self) -> usize {
        1 << self.k
    }
}

/// Draws `G` and `v` with i.i.d. uniform bits from a ChaCha8 stream seeded by `seed`.
pub fn sample_code(params: &CodeParams, seed: u64) -> LinearCodeInstance {
    sample_code_with(params, seed, OffsetMode::Uniform)
}

pub fn sample_code_with(params: &CodeParams, seed: u64, offset: OffsetMode) -> LinearCodeInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = params.mask();
    let g = (0..params.k).map(|_| rng.random::<u32>() & mask).collect();
    let v = rng.random::<u32>() & mask;
    let v = match offset {
        OffsetMode::Uniform => v,
        OffsetMode::Shifted(t) => v ^ (t & mask),
        OffsetMode::Zero => 0,
    };
    LinearCodeInstance {
        n: params.n,
        m: params.m,
        k: params.k,
        g,
        v,
        seed,
    }
}

/// Bijection `phi` from `m`-bit strings to input symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeling {
    pub m: usize,
    pub phi: Vec<usize>,
}

impl Labeling {
    /// The bit string read as a binary integer is the symbol index.
    pub fn natural(m: usize) -> Self {
        Self {
            m,
            phi: (0..1 << m).collect(),
        }
    }

    pub fn from_permutation(m: usize, phi: Vec<usize>) -> Result<Self> {
        let size = 1usize << m;
        let mut seen = vec![false; size];
        if phi.len() != size || phi.iter().any(|&s| s >= size || std::mem::replace(&mut seen[s], true)) {
            return Err(Error::InvalidParameter(format!(
                "labeling is not a bijection on {size} symbols"
            )));
        }
        Ok(Self { m, phi })
    }

    /// Symbol `j` of the `n`-symbol sequence carried by codeword `c`.
    #[inline]
    pub fn symbol(&self, c: u32, n: usize, j: usize) -> usize {
        let mask = (1u32 << self.m) - 1;
        self.phi[((c >> (self.m * (n - 1 - j))) & mask) as usize]
    }

    pub fn symbols(&self, c: u32, n: usize) -> Vec<usize> {
        (0..n).map(|j| self.symbol(c, n, j)).collect()
    }

    /// The codeword bits that map to `x`.
    pub fn encode(&self, x: &[usize]) -> u32 {
        let mut inverse = vec![0u32; self.phi.len()];
        for (bits, &s) in self.phi.iter().enumerate() {
            inverse[s] = bits as u32;
        }
        x.iter().fold(0u32, |acc, &s| (acc << self.m) | inverse[s])
    }
}

/// Symbol counts `n P_X(x)`, which must all be integers.
pub fn composition_counts(p: &InputDist, n: usize) -> Result<Vec<usize>> {
    p.probs()
        .iter()
        .enumerate()
        .map(|(x, &px)| {
            let value = px * n as f64;
            let count = value.round();
            if (value - count).abs() > 1e-9 {
                Err(Error::NonIntegralComposition { n, x, value })
            } else {
                Ok(count as usize)
            }
        })
        .collect()
}

/// The messages whose codeword lies in the type class of `P_X`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcodeSelection {
    pub composition: Vec<usize>,
    pub member_indices: Vec<u32>,
    /// `log2 |members| / n`; absent when there are no members.
    pub effective_rate: Option<f64>,
    /// `H(P_X) - m (1 - r_fec)`, for comparison.
    pub nominal_rate: f64,
}

impl SubcodeSelection {
    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }
}

pub(crate) fn has_composition(c: u32, n: usize, labeling: &Labeling, target: &[usize], scratch: &mut [usize]) -> bool {
    scratch.iter_mut().for_each(|s| *s = 0);
    for j in 0..n {
        let s = labeling.symbol(c, n, j);
        scratch[s] += 1;
        if scratch[s] > target[s] {
            return false;
        }
    }
    true
}

pub fn select_subcode(code: &LinearCodeInstance, labeling: &Labeling, p: &InputDist) -> Result<SubcodeSelection> {
    select_from_codewords(code, &code.codewords(), labeling, p)
}

pub(crate) fn select_from_codewords(
    code: &LinearCodeInstance,
    codewords: &[u32],
    labeling: &Labeling,
    p: &InputDist,
) -> Result<SubcodeSelection> {
    if labeling.m != code.m || p.len() != labeling.phi.len() {
        return Err(Error::DimensionMismatch("labeling, code and P_X disagree".into()));
    }
    let composition = composition_counts(p, code.n)?;
    let mut scratch = vec![0; composition.len()];
    let member_indices: Vec<u32> = codewords
        .iter()
        .enumerate()
        .filter(|(_, &c)| has_composition(c, code.n, labeling, &composition, &mut scratch))
        .map(|(w, _)| w as u32)
        .collect();
    let effective_rate = (!member_indices.is_empty()).then(|| (member_indices.len() as f64).log2() / code.n as f64);
    let r_fec = code.k as f64 / (code.n * code.m) as f64;
    Ok(SubcodeSelection {
        composition,
        member_indices,
        effective_rate,
        nominal_rate: p.entropy_bits() - code.m as f64 * (1.0 - r_fec),
    })
}
