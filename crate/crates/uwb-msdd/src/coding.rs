//! Rate-1/2 convolutional code, random interleaving, and soft-input
//! soft-output decoding.
//!
//! The code is the feedforward (133, 171) octal code with constraint length
//! 7 (64-state trellis), zero-terminated with six tail bits per burst.  The
//! decoder runs the forward/backward algorithm over the code trellis, by
//! default with the max-log approximation (switchable to exact log-MAP), and
//! returns hard information decisions plus extrinsic LLRs on the coded bits.
//!
//! LLR sign convention throughout the crate: positive favors bit value 1.

use crate::error::Error;
use crate::rng::{substream, Stream};
use crate::util::log_sum_exp;
use rand::Rng;

/// Feedforward convolutional encoder/decoder description.
#[derive(Debug, Clone, Copy)]
pub struct ConvCode {
    /// Generator taps, MSB = current input bit.
    generators: [u32; 2],
    /// Memory length (constraint length minus one).
    pub memory: usize,
}

impl ConvCode {
    /// The (133, 171) octal rate-1/2 code with constraint length 7.
    pub fn standard() -> Self {
        Self { generators: [0o133, 0o171], memory: 6 }
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Output bit pair for (state, input).
    fn output(&self, state: u32, input: u32) -> (u8, u8) {
        let word = (input << self.memory) | state;
        let o1 = (word & self.generators[0]).count_ones() & 1;
        let o2 = (word & self.generators[1]).count_ones() & 1;
        (o1 as u8, o2 as u8)
    }

    fn next_state(&self, state: u32, input: u32) -> u32 {
        ((input << self.memory) | state) >> 1
    }

    /// Zero-terminated encoding: appends `memory` flush bits; output length
    /// is `2 * (info.len() + memory)`.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * (info.len() + self.memory));
        let mut state = 0u32;
        for &b in info.iter().chain(std::iter::repeat(&0u8).take(self.memory)) {
            let (o1, o2) = self.output(state, b as u32);
            out.push(o1);
            out.push(o2);
            state = self.next_state(state, b as u32);
        }
        debug_assert_eq!(state, 0);
        out
    }
}

/// Seeded random permutation of codeword positions.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl Interleaver {
    /// Fisher-Yates permutation of `len` positions, deterministic in the seed.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = substream(seed, &[Stream::Interleaver as u64]);
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut inv = vec![0usize; len];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm, inv }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len());
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// Inverse of [`Interleaver::interleave`].
    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.inv.len());
        self.inv.iter().map(|&p| x[p]).collect()
    }
}

/// Decoder flavor: max-log (default) or exact log-MAP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SisoAlgo {
    MaxLog,
    LogMap,
}

/// Soft decoding result.
#[derive(Debug, Clone)]
pub struct SisoOutput {
    /// Hard information decisions (tail bits stripped).
    pub info_bits: Vec<u8>,
    /// Posterior LLRs of the information bits.
    pub info_llr: Vec<f64>,
    /// Extrinsic LLRs on the coded bits (input order).
    pub coded_extrinsic: Vec<f64>,
}

fn combine(algo: SisoAlgo, terms: &[f64]) -> f64 {
    match algo {
        SisoAlgo::MaxLog => terms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        SisoAlgo::LogMap => log_sum_exp(terms),
    }
}

/// Forward/backward soft decoding of a zero-terminated codeword.
///
/// `coded_llr` holds one LLR per coded bit (positive favors 1) and must have
/// length `2 * (K + memory)` for some information length `K >= 1`.
pub fn siso_decode(
    code: &ConvCode,
    coded_llr: &[f64],
    algo: SisoAlgo,
) -> Result<SisoOutput, Error> {
    if coded_llr.len() % 2 != 0 {
        return Err(Error::invalid_input("coded LLR length must be even"));
    }
    let steps = coded_llr.len() / 2;
    if steps <= code.memory {
        return Err(Error::invalid_input("codeword shorter than the termination tail"));
    }
    let info_len = steps - code.memory;
    let ns = code.num_states();

    // Branch metric: sum of the LLRs of the coded bits that are 1.
    let gamma = |t: usize, s: u32, b: u32| -> f64 {
        let (o1, o2) = code.output(s, b);
        let mut g = 0.0;
        if o1 == 1 {
            g += coded_llr[2 * t];
        }
        if o2 == 1 {
            g += coded_llr[2 * t + 1];
        }
        g
    };

    let neg = f64::NEG_INFINITY;
    let mut alpha = vec![vec![neg; ns]; steps + 1];
    alpha[0][0] = 0.0;
    for t in 0..steps {
        let max_b = if t >= info_len { 1u32 } else { 2u32 }; // tail forces zeros
        for s in 0..ns as u32 {
            let a = alpha[t][s as usize];
            if a == neg {
                continue;
            }
            for b in 0..max_b {
                let nsn = code.next_state(s, b) as usize;
                let w = a + gamma(t, s, b);
                alpha[t + 1][nsn] = match algo {
                    SisoAlgo::MaxLog => alpha[t + 1][nsn].max(w),
                    SisoAlgo::LogMap => log_sum_exp(&[alpha[t + 1][nsn], w]),
                };
            }
        }
        let mx = alpha[t + 1].iter().cloned().fold(neg, f64::max);
        alpha[t + 1].iter_mut().for_each(|v| *v -= mx);
    }

    let mut beta = vec![vec![neg; ns]; steps + 1];
    beta[steps][0] = 0.0; // zero-terminated
    for t in (0..steps).rev() {
        let max_b = if t >= info_len { 1u32 } else { 2u32 };
        for s in 0..ns as u32 {
            let mut terms = [neg; 2];
            for b in 0..max_b {
                let nsn = code.next_state(s, b) as usize;
                terms[b as usize] = beta[t + 1][nsn] + gamma(t, s, b);
            }
            beta[t][s as usize] = combine(algo, &terms[..max_b as usize]);
        }
        let mx = beta[t].iter().cloned().fold(neg, f64::max);
        beta[t].iter_mut().for_each(|v| *v -= mx);
    }

    let mut info_bits = Vec::with_capacity(info_len);
    let mut info_llr = Vec::with_capacity(info_len);
    let mut coded_extrinsic = vec![0.0f64; coded_llr.len()];
    for t in 0..steps {
        let max_b = if t >= info_len { 1u32 } else { 2u32 };
        // Partition transition scores by input bit and by each output bit.
        let mut by_input: [Vec<f64>; 2] = Default::default();
        let mut by_out: [[Vec<f64>; 2]; 2] = Default::default();
        for s in 0..ns as u32 {
            let a = alpha[t][s as usize];
            if a == neg {
                continue;
            }
            for b in 0..max_b {
                let nsn = code.next_state(s, b) as usize;
                let w = a + gamma(t, s, b) + beta[t + 1][nsn];
                if w == neg {
                    continue;
                }
                by_input[b as usize].push(w);
                let (o1, o2) = code.output(s, b);
                by_out[0][o1 as usize].push(w);
                by_out[1][o2 as usize].push(w);
            }
        }
        if t < info_len {
            let l1 = combine(algo, &by_input[1]);
            let l0 = combine(algo, &by_input[0]);
            let llr = l1 - l0;
            info_llr.push(llr);
            info_bits.push(u8::from(llr >= 0.0));
        }
        for j in 0..2 {
            let l1 = combine(algo, &by_out[j][1]);
            let l0 = combine(algo, &by_out[j][0]);
            let full = l1 - l0;
            coded_extrinsic[2 * t + j] = full - coded_llr[2 * t + j];
        }
    }

    Ok(SisoOutput { info_bits, info_llr, coded_extrinsic })
}
